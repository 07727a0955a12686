"""
Table reproduction on worker threads.
"""

import pytest

from instanton.config_manager import ConfigManager
from instanton.reproduce import TABLES, ReproductionRunner, RowTask, TableResult, TableRow, UnknownTableError


@pytest.fixture
def runner(tmp_path):
    config = ConfigManager(str(tmp_path / "instanton.json"))
    config.set("CLASP74_ROWS", 6)
    config.set("TORUS_MAX_K", 3)
    config.set("DTWIST_MAX_MN", 2)
    config.set("DTWIST_MAX_K", 3)
    config.set("CATALOG_MAX_P", 15)
    return ReproductionRunner(config, workers=3)


@pytest.mark.parametrize("name", TABLES)
def test_tables_reproduce(runner, name):
    result = runner.run(name)
    assert result.rows
    assert result.ok, result.render()


def test_clasp74_rows(runner):
    result = runner.run("clasp74")
    assert [row.key for row in result.rows] == [f"{n}x(7_4)" for n in range(1, 7)]
    assert result.rows[5].cells == {'sigma': "-12", 'gamma': "18/5", 'clasp_plus': "8", 'gap': "2"}
    assert result.records


def test_eleven_a_certifies_unknotting_numbers(runner):
    result = runner.run("eleven-a")
    assert {row.key: row.cells['u'] for row in result.rows} == {
        "11a192=(97,26)": "3", "11a341=(61,42)": "3", "11a360=(57,10)": "3", "11a365=(51,16)": "4"}
    assert sum(1 for record in result.records if record.certificate) == 4


def test_unknown_table(runner):
    with pytest.raises(UnknownTableError):
        runner.run("knot-floer")


def test_failing_rows_are_reported(runner):
    def broken():
        raise ValueError("no complex")

    row = runner._evaluate(RowTask("broken", broken, {'h': "1"}))
    assert row.error == "ValueError: no complex"
    assert row.mismatches == ['error']

    result = TableResult("demo", [row, TableRow("fine", {'h': "1"}, {'h': "1"}), TableRow("off", {'h': "2"}, {'h': "1"})])
    assert not result.ok
    lines = result.render().splitlines()
    assert lines[0] == "# demo"
    assert lines[1] == "row\th\tstatus"
    assert lines[3] == "fine\t1\tok"
    assert lines[4] == "off\t2\tMISMATCH h"
    assert lines[-1] == "# 3 rows, 2 mismatches"
    assert result.to_dict()['rows'][2]['expected'] == {'h': "1"}


def test_signature_rule_rows_use_pinned_complexes(runner):
    result = runner.run("signature-rule")
    pinned = {row.key: row.cells['h'] for row in result.rows if 'h' in row.cells}
    assert pinned["torus:2,5"] == "2"
    assert pinned["dtwist:2,2"] == "1"
    assert len(pinned) == 3 + 4
    brackets = [row for row in result.rows if row.key.startswith("p=")]
    assert [row.key for row in brackets] == [f"p={p}" for p in range(3, 16, 2)]
    assert all(row.cells['outside'] == "0" for row in brackets)
    assert sum(int(row.cells['checked']) for row in brackets) == 2 + 4 + 6 + 6 + 10 + 12 + 8
