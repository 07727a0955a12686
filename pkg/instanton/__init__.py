"""Exact S-complexes, Frøyshov and Γ invariants of knots, and the bounds built on them."""
