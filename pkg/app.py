import argparse
import json
import logging
import sys
from fractions import Fraction
from logging.handlers import RotatingFileHandler
from typing import List, Optional, Sequence

from instanton.algebra import RingSpec, laurent_str
from instanton.bound_store import BoundKind, BoundRecord, BoundStore
from instanton.certificate_log import CertificateLog
from instanton.cobordism import (CobordismData, HypothesisViolated, NoBoundError, concordance_bounds,
                                 gamma_shift_bound, h_shift_bound, reducible_summary)
from instanton.config_manager import ConfigManager
from instanton.equivariant import (CharacteristicError, NotUniformError, PolyIdeal, basechange_BN, ideal_Ik,
                                   j_ideals_two_bridge, j_ideals_uniform, z_hat_structured)
from instanton.invariants import UnpinnedVError, format_value, gamma_function, h_bounds, h_t4, require_pinned
from instanton.knots import DoubleTwist, KnotSpec, KnotSyntaxError, TwoBridge, UnsupportedKnotError, parse_knot_expr
from instanton.matrix import nonzero_entries
from instanton.reproduce import TABLES, ReproductionRunner, UnknownTableError
from instanton.scomplex import InvalidComplexError, SComplex, dumps, loads
from instanton.twobridge import TwoBridgeError, catalog_complex, gamma_lower_bound_two_bridge

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REFUSED = 2
EXIT_MISMATCH = 3

REFUSALS = (HypothesisViolated, NoBoundError, NotUniformError, UnsupportedKnotError, TwoBridgeError, UnpinnedVError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def setup_logging(config_manager: ConfigManager):
    # Rotates at LOG_MAX_BYTES, keeps no backups; stdout is left to command output
    file_handler = RotatingFileHandler(
        config_manager.get('LOG_FILE', 'instanton.log'),
        maxBytes=config_manager.get_int('LOG_MAX_BYTES'),
        backupCount=0,
        encoding='utf-8',
        delay=True,
    )
    stream_handler = logging.StreamHandler(sys.stderr)

    logging.basicConfig(
        level=getattr(logging, str(config_manager.get('LOG_LEVEL', 'INFO')).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            file_handler,
            stream_handler
        ]
    )


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got '{text}'")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='app.py', description='Exact instanton invariants of knots')
    parser.add_argument('--config', default='instanton.json', help='JSON configuration file')
    verbs = parser.add_subparsers(dest='verb', required=True)

    def ring_flag(p):
        p.add_argument('--ring', choices=[r.value for r in RingSpec], default=None)

    complex_p = verbs.add_parser('complex', help='print the S-complex of a knot')
    complex_p.add_argument('knot', nargs='?')
    complex_p.add_argument('--from', dest='from_file', metavar='FILE')
    complex_p.add_argument('--local', action='store_true')
    complex_p.add_argument('--json', action='store_true')
    ring_flag(complex_p)

    gamma_p = verbs.add_parser('gamma', help='Γ of a knot')
    gamma_p.add_argument('knot', nargs='?')
    gamma_p.add_argument('--from', dest='from_file', metavar='FILE')
    gamma_p.add_argument('--k', type=int)
    gamma_p.add_argument('--kmin', type=int)
    gamma_p.add_argument('--kmax', type=int)
    gamma_p.add_argument('--local', action='store_true')
    gamma_p.add_argument('--json', action='store_true')
    ring_flag(gamma_p)

    h_p = verbs.add_parser('h', help='Frøyshov invariant of a knot')
    h_p.add_argument('knot', nargs='?')
    h_p.add_argument('--from', dest='from_file', metavar='FILE')
    h_p.add_argument('--local', action='store_true')
    ring_flag(h_p)

    bounds_p = verbs.add_parser('bounds', help='clasp, unknotting and crosscap bounds')
    bounds_p.add_argument('knot')
    bounds_p.add_argument('--upper', type=int, help='known upper bound for the unknotting number')
    bounds_p.add_argument('--record', action='store_true', help='append certified records to the log')
    bounds_p.add_argument('--json', action='store_true')

    ideal_p = verbs.add_parser('ideal', help='equivariant ideals')
    ideal_p.add_argument('kind', choices=['Ik', 'J', 'zhat'])
    ideal_p.add_argument('knot', nargs='?')
    ideal_p.add_argument('--k', type=int)
    ideal_p.add_argument('--torus', action='store_true', help='attach T(2,2k+1) bigradings to I^k')
    ideal_p.add_argument('--basechange', action='store_true', help='characteristic two base change')
    ideal_p.add_argument('--json', action='store_true')
    ring_flag(ideal_p)

    cob_p = verbs.add_parser('cobordism', help='reducible arithmetic and cobordism bounds')
    cob_p.add_argument('--surface', type=_int_list, default=[])
    cob_p.add_argument('--c', type=_int_list, default=[])
    cob_p.add_argument('--genus', type=int, default=0)
    cob_p.add_argument('--s-plus', type=int, default=0)
    cob_p.add_argument('--s-minus', type=int, default=0)
    cob_p.add_argument('--sigma-in', type=int, default=0)
    cob_p.add_argument('--sigma-out', type=int, default=0)
    cob_p.add_argument('--k', type=int, default=0)
    cob_p.add_argument('--degree', type=int)
    cob_p.add_argument('--gamma-in', type=Fraction)
    cob_p.add_argument('--mode', choices=['summary', 'h', 'gamma'], default='summary')
    cob_p.add_argument('--json', action='store_true')
    ring_flag(cob_p)

    repro_p = verbs.add_parser('reproduce', help='recompute a table and compare with the expected values')
    repro_p.add_argument('table_name', nargs='?')
    repro_p.add_argument('--table', dest='table')
    repro_p.add_argument('--workers', type=int)
    repro_p.add_argument('--record', action='store_true')
    repro_p.add_argument('--json', action='store_true')
    return parser


def _ring(args, config_manager: ConfigManager) -> RingSpec:
    return RingSpec.from_name(args.ring) if args.ring else config_manager.get_ring()


def _load_complex(args, ring: RingSpec) -> SComplex:
    if args.from_file:
        with open(args.from_file, 'r', encoding='utf-8') as f:
            C = loads(f.read())
        return C if C.ring is ring else C.with_ring(ring)
    if not args.knot:
        raise UsageError("a knot expression or --from FILE is required")
    return catalog_complex(parse_knot_expr(args.knot), local=args.local, ring=ring)


def _render_complex(C: SComplex) -> str:
    pinned = "pinned" if C.v_pinned else "unpinned"
    lines = [f"{C.label or 'complex'} over {C.ring.value}: {C.rank} generators, v {pinned}"]
    for name, gr in C.generators:
        lines.append(f"  {name} {gr}")
    for key, matrix in (('d', C.d), ('v', C.v)):
        for s, r, poly in nonzero_entries(matrix):
            lines.append(f"  {key}: {C.name(r)} -> {C.name(s)} [{laurent_str(poly)}]")
    for _, r, poly in nonzero_entries(C.delta1):
        lines.append(f"  delta1: {C.name(r)} [{laurent_str(poly)}]")
    for s, _, poly in nonzero_entries(C.delta2):
        lines.append(f"  delta2: {C.name(s)} [{laurent_str(poly)}]")
    for i, j, k1, k2 in C.notes.get('even_relations', []):
        lines.append(f"  dropped (1,0) relation: ζ^{i} -> ζ^{j} with (k1,k2) = ({k1},{k2})")
    return "\n".join(lines)


def cmd_complex(args, config_manager: ConfigManager) -> int:
    C = _load_complex(args, _ring(args, config_manager))
    print(dumps(C) if args.json else _render_complex(C))
    return EXIT_OK


def _two_bridge_leaf(knot: KnotSpec) -> Optional[TwoBridge]:
    if isinstance(knot, DoubleTwist):
        return knot.as_two_bridge()
    return knot if isinstance(knot, TwoBridge) else None


def _gamma_lower_bounds(args, C: SComplex, ks: Sequence[int]) -> int:
    """Γ of a 2-bridge knot whose v is not pinned: only the v-independent lower bounds are printed."""
    two_bridge = None if args.from_file else _two_bridge_leaf(parse_knot_expr(args.knot))
    if two_bridge is None:
        require_pinned(C, "Γ")
    bounds = {k: gamma_lower_bound_two_bridge(two_bridge.p, two_bridge.q, k).value if k >= 1 else Fraction(0)
              for k in ks}
    if args.json:
        data = {'knot': C.label, 'gamma_lower_bounds': {str(k): format_value(v) for k, v in bounds.items()}}
        print(json.dumps(data, indent=2, ensure_ascii=False))
    else:
        for k in ks:
            print(f"Γ({k}) >= {format_value(bounds[k])}")
    return EXIT_OK


def cmd_gamma(args, config_manager: ConfigManager) -> int:
    if args.k is not None:
        ks = [args.k]
    elif args.kmin is not None and args.kmax is not None:
        if args.kmin > args.kmax:
            raise UsageError(f"--kmin {args.kmin} exceeds --kmax {args.kmax}")
        ks = list(range(args.kmin, args.kmax + 1))
    else:
        raise UsageError("gamma needs --k or both --kmin and --kmax")
    C = _load_complex(args, _ring(args, config_manager))
    if not C.v_pinned:
        return _gamma_lower_bounds(args, C, ks)
    values = gamma_function(C, ks)
    if args.json:
        print(json.dumps({'knot': C.label, 'gamma': values.to_dict()}, indent=2, ensure_ascii=False))
    else:
        for k in ks:
            print(f"Γ({k}) = {format_value(values[k])}")
    return EXIT_OK


def cmd_h(args, config_manager: ConfigManager) -> int:
    ring = _ring(args, config_manager)
    if ring is RingSpec.T4 and not args.from_file:
        if not args.knot:
            raise UsageError("a knot expression or --from FILE is required")
        print(h_t4(parse_knot_expr(args.knot)))
        return EXIT_OK
    C = _load_complex(args, ring)
    bounds = h_bounds(C, ring)
    if bounds.exact is not None:
        print(bounds.exact)
    else:
        print(f"h in {bounds} (v unpinned)")
    return EXIT_OK


def _print_records(records: Sequence[BoundRecord], as_json: bool):
    if as_json:
        print(json.dumps([record.to_dict() for record in records], indent=2, ensure_ascii=False))
        return
    for record in records:
        marker = " [certificate]" if record.certificate else ""
        print(f"{record.kind.value}: {record.statement}{marker}")


def _record_certificates(records: Sequence[BoundRecord], config_manager: ConfigManager, source: str,
                         status: str = 'certified'):
    log = CertificateLog(config_manager.get('CERTIFICATE_LOG_PATH', 'certificates.jsonl'))
    for record in records:
        log.log_certificate(record, source=source, status=status)


def cmd_bounds(args, config_manager: ConfigManager) -> int:
    knot = parse_knot_expr(args.knot)
    hints = {BoundKind.UNKNOTTING: args.upper} if args.upper is not None else None
    store = BoundStore()
    store.extend(concordance_bounds(knot, hints))
    _print_records(store.get_all(), args.json)
    if args.record:
        _record_certificates(store.get_all(), config_manager, source=f"bounds {knot.render()}")
    return EXIT_OK


def cmd_ideal(args, config_manager: ConfigManager) -> int:
    if args.kind == 'Ik':
        if args.k is None:
            raise UsageError("ideal Ik needs --k")
        ideal = ideal_Ik(args.k, torus=args.torus, characteristic=2 if args.basechange else 0)
    elif args.kind == 'zhat':
        if not args.knot:
            raise UsageError("ideal zhat needs a knot expression")
        ideal = z_hat_structured(parse_knot_expr(args.knot))
        if args.basechange:
            ideal = PolyIdeal.structured(ideal.structure, characteristic=2)
    else:
        if not args.knot:
            raise UsageError("ideal J needs a knot expression")
        knot = parse_knot_expr(args.knot)
        C = catalog_complex(knot, ring=_ring(args, config_manager))
        two_bridge = _two_bridge_leaf(knot)
        if not C.v_pinned and two_bridge is not None and C.ring is RingSpec.GENERIC:
            ideals = j_ideals_two_bridge(two_bridge.p, two_bridge.q)
        else:
            ideals = j_ideals_uniform(C)
        if args.json:
            print(json.dumps({str(i): ideal.to_json() for i, ideal in ideals.items()}, indent=2, ensure_ascii=False))
        else:
            for i, ideal in ideals.items():
                print(f"J_{i} = {ideal.render()}")
        return EXIT_OK
    if args.basechange:
        ideal = basechange_BN(ideal)
    print(json.dumps(ideal.to_json(), indent=2, ensure_ascii=False) if args.json else ideal.render())
    return EXIT_OK


def cmd_cobordism(args, config_manager: ConfigManager) -> int:
    ring = _ring(args, config_manager)
    rank = max(len(args.surface), len(args.c))
    data = CobordismData(rank, tuple(args.surface), tuple(args.c), genus=args.genus, s_plus=args.s_plus,
                         s_minus=args.s_minus, sigma_in=args.sigma_in, sigma_out=args.sigma_out)
    if args.mode == 'summary':
        summary = reducible_summary(data, ring)
        if args.json:
            print(json.dumps(summary.to_dict(), indent=2, ensure_ascii=False))
        else:
            for key, value in summary.to_dict().items():
                print(f"{key}: {value}")
        return EXIT_OK
    if args.mode == 'h':
        record = h_shift_bound(data, ring)
    else:
        record = gamma_shift_bound(data, args.k, ring, blow_up_degree=args.degree, gamma_in=args.gamma_in)
    _print_records([record], args.json)
    return EXIT_OK


def cmd_reproduce(args, config_manager: ConfigManager) -> int:
    name = args.table or args.table_name
    if not name:
        raise UsageError(f"reproduce needs a table: {', '.join(TABLES)}")
    runner = ReproductionRunner(config_manager, workers=args.workers)
    result = runner.run(name)
    print(json.dumps(result.to_dict(), indent=2, ensure_ascii=False) if args.json else result.render())
    if args.record:
        _record_certificates(result.records, config_manager, source=f"reproduce {name}",
                             status='certified' if result.ok else 'mismatch')
    return EXIT_OK if result.ok else EXIT_MISMATCH


COMMANDS = {
    'complex': cmd_complex,
    'gamma': cmd_gamma,
    'h': cmd_h,
    'bounds': cmd_bounds,
    'ideal': cmd_ideal,
    'cobordism': cmd_cobordism,
    'reproduce': cmd_reproduce,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE

    config_manager = ConfigManager(args.config)
    setup_logging(config_manager)

    try:
        return COMMANDS[args.verb](args, config_manager)
    except REFUSALS as e:
        logger.warning(f"Refused: {type(e).__name__}: {e}")
        print(f"refused: {e}", file=sys.stderr)
        return EXIT_REFUSED
    except (UsageError, KnotSyntaxError, UnknownTableError, CharacteristicError, InvalidComplexError,
            OSError, ValueError) as e:
        logger.error(f"Error running {args.verb}: {type(e).__name__}: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
