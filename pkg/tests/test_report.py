import json
from fractions import Fraction

import pytest

from rmdf.analysis import analyze_rmdf
from rmdf.examples import EXAMPLES
from rmdf.execution import check_mcp_properties, simulate
from rmdf.modes import check_mode_coherence, compute_control_areas
from rmdf.report import decimal_hint, exact_with_hint, parse_window_json, render_report, use_color
from rmdf.timing import UNBOUNDED, feasibility, max_feasible_wcet, window_table


def test_hints():
    assert decimal_hint(Fraction(11, 15)) == "0.7333"
    assert decimal_hint(Fraction(2)) == "2"
    assert exact_with_hint(Fraction(7, 5)) == "7/5 (~1.4)"
    assert exact_with_hint(UNBOUNDED) == "unbounded"


def test_color_can_be_disabled(monkeypatch):
    monkeypatch.setenv("RMDF_COLOR", "0")
    assert not use_color()


@pytest.mark.parametrize("fmt", ["table", "json", "csv"])
def test_every_report_renders(fmt):
    spec = EXAMPLES["ingenuity_modified"]()
    fig8 = EXAMPLES["fig8_rmdf"]()
    trace = simulate(fig8, 2, [0, 1])
    reports = [
        analyze_rmdf(spec),
        window_table(spec),
        feasibility(spec),
        max_feasible_wcet(spec),
        check_mcp_properties(trace, compute_control_areas(fig8)),
        check_mode_coherence(EXAMPLES["fig9d_r4"]()),
    ]
    for r in reports:
        text = render_report(r, fmt)
        assert text.endswith("\n")
        if fmt == "json":
            assert json.loads(text)["schema_version"] == 1


def test_output_is_deterministic():
    spec = EXAMPLES["ingenuity_modified"]()
    assert render_report(window_table(spec), "json") == render_report(window_table(spec), "json")


def test_window_json_round_trip():
    table = window_table(EXAMPLES["ingenuity_modified"]())
    rows = parse_window_json(render_report(table, "json"))
    assert len(rows) == sum(len(w) for w in table.windows.values())
    cam = [r for r in rows if r["actor"] == "Camera"]
    assert cam[2]["window"] == Fraction(11, 15)


def test_unknown_format():
    with pytest.raises(ValueError):
        render_report(window_table(EXAMPLES["ingenuity_modified"]()), "yaml")
