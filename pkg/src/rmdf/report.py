"""Rendering of analysis results as table, JSON or CSV text."""

from __future__ import annotations

import csv
import io
import json
import os
import sys
from fractions import Fraction

from .analysis import AnalysisReport
from .execution import McpReport, PreprocessReport
from .model import Violation, format_rational
from .timing import UNBOUNDED, FeasibilityResult, WindowTable

SCHEMA_VERSION = 1
FORMATS = ("table", "json", "csv")


def decimal_hint(x) -> str:
    if x is UNBOUNDED or x is None:
        return "inf"
    return f"{float(Fraction(x)):.4f}".rstrip("0").rstrip(".")


def exact(x) -> str:
    if x is UNBOUNDED:
        return "unbounded"
    return format_rational(x)


def exact_with_hint(x) -> str:
    if x is UNBOUNDED:
        return "unbounded"
    return f"{format_rational(x)} (~{decimal_hint(x)})"


def use_color() -> bool:
    return os.environ.get("RMDF_COLOR", "1") != "0" and sys.stdout.isatty()


def verdict(text: str, good: bool) -> str:
    if not use_color():
        return text
    return f"\x1b[{32 if good else 31}m{text}\x1b[0m"


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for r in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, r)]
    line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()  # noqa: E731
    out = [line(headers), line(["-" * w for w in widths])]
    out += [line(r) for r in rows]
    return "\n".join(out) + "\n"


def _csv(headers: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(headers)
    w.writerows(rows)
    return buf.getvalue()


def _json(payload: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **payload}, indent=2, sort_keys=True) + "\n"


def _tabular(kind: str, headers, rows, payload, fmt: str) -> str:
    if fmt == "json":
        return _json({"kind": kind, **payload})
    if fmt == "csv":
        return _csv(headers, rows)
    return _table(headers, rows)


# -- per-report renderers ----------------------------------------------------


def render_violations(violations: list[Violation], fmt: str) -> str:
    rows = [[v.rule, v.element, v.observed, v.message] for v in violations]
    if fmt == "table" and not rows:
        return "OK\n"
    payload = {"violations": [v.to_dict() for v in violations], "ok": not violations}
    return _tabular("violations", ["rule", "element", "observed", "message"], rows, payload, fmt)


def _window_rows(windows):
    return [
        [w.actor, str(w.job), exact(w.release), exact(w.deadline), exact(w.length)]
        for w in sorted(windows, key=lambda w: (w.actor, w.job))
    ]


def render_windows(windows, fmt: str, hyperperiod=None) -> str:
    headers = ["actor", "job", "release", "deadline", "window"]
    rows = _window_rows(windows)
    if fmt == "table":
        rows = [
            [w.actor, str(w.job), exact_with_hint(w.release), exact_with_hint(w.deadline), exact_with_hint(w.length)]
            for w in sorted(windows, key=lambda w: (w.actor, w.job))
        ]
    payload = {"windows": [w.to_dict() for w in sorted(windows, key=lambda w: (w.actor, w.job))]}
    if hyperperiod is not None:
        payload["hyperperiod_ms"] = format_rational(hyperperiod)
    return _tabular("windows", headers, rows, payload, fmt)


def render_window_table(table: WindowTable, fmt: str) -> str:
    return render_windows(table.rows(), fmt, table.hyperperiod_ms)


def render_bounds(bounds: dict, fmt: str) -> str:
    rows = [[a, exact(v), decimal_hint(v)] for a, v in sorted(bounds.items())]
    payload = {"max_feasible_wcet_ms": {a: exact(v) for a, v in sorted(bounds.items())}}
    return _tabular("bounds", ["actor", "max_wcet_ms", "approx"], rows, payload, fmt)


def render_feasibility(result: FeasibilityResult, fmt: str) -> str:
    if fmt == "json":
        return _json(
            {
                "kind": "feasibility",
                "feasible": result.feasible,
                "violations": [v.to_dict() for v in result.violations],
                "windows": [w.to_dict() for w in result.table.rows()] if result.table else [],
                "hyperperiod_ms": format_rational(result.table.hyperperiod_ms) if result.table else None,
            }
        )
    text = render_window_table(result.table, fmt) if result.table else ""
    if fmt == "csv":
        return text
    if result.feasible:
        return text + "\n" + verdict("Feasible", True) + "\n"
    lines = [text, verdict("Infeasible", False)]
    for v in result.violations:
        lines.append(f"  {v.actor} job {v.job}: wcet {exact(v.wcet)} > window {exact_with_hint(v.window.length)}")
    return "\n".join(lines) + "\n"


def render_analysis(report: AnalysisReport, fmt: str) -> str:
    if fmt == "json":
        return _json({"kind": "analysis", **report.to_dict()})
    if report.structural:
        return render_violations(report.structural, fmt)
    if report.coherence:
        return render_violations(report.coherence, fmt)
    headers = ["mode", "consistent", "live", "hyperperiod_ms", "repetition"]
    rows = []
    for m in report.modes:
        mode = ",".join(f"{k}={v}" for k, v in sorted(m.mode.items())) or "-"
        rep = " ".join(f"{a}:{n}" for a, n in sorted(m.repetition.items()))
        hp = exact(m.hyperperiod_ms) if m.hyperperiod_ms is not None else "-"
        rows.append([mode, str(m.consistent).lower(), str(m.live).lower(), hp, rep or m.reason])
    if fmt == "csv":
        return _csv(headers, rows)
    return _table(headers, rows) + "\n" + verdict(report.summary(), report.ok) + "\n"


def render_mcp(report: McpReport, fmt: str, firings: dict | None = None) -> str:
    if fmt == "json":
        payload = {"kind": "mcp", **report.to_dict()}
        if firings is not None:
            payload["firings"] = dict(sorted(firings.items()))
        return _json(payload)
    rows = [
        ["non_overlapping", str(report.non_overlapping).lower()],
        ["periodic", str(report.periodic).lower()],
        ["late_retirement", str(report.late_retirement).lower()],
    ]
    if fmt == "csv":
        return _csv(["property", "holds"], rows)
    out = ""
    if firings is not None:
        out += _table(["actor", "firings"], [[a, str(n)] for a, n in sorted(firings.items())]) + "\n"
    out += _table(["property", "holds"], rows)
    for d in report.details:
        out += f"  {d}\n"
    return out


def render_preprocess(report: PreprocessReport, fmt: str) -> str:
    rows = [[a, str(n)] for a, n in sorted(report.offline_jobs.items())]
    if fmt == "table" and not rows:
        return "no offline jobs\n"
    return _tabular("preprocess", ["actor", "offline_jobs"], rows, report.to_dict(), fmt)


def render_report(report, fmt: str = "table") -> str:
    """Dispatch on the report type; output ordering is deterministic."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
    if isinstance(report, AnalysisReport):
        return render_analysis(report, fmt)
    if isinstance(report, WindowTable):
        return render_window_table(report, fmt)
    if isinstance(report, FeasibilityResult):
        return render_feasibility(report, fmt)
    if isinstance(report, McpReport):
        return render_mcp(report, fmt)
    if isinstance(report, PreprocessReport):
        return render_preprocess(report, fmt)
    if isinstance(report, list) and all(isinstance(v, Violation) for v in report):
        return render_violations(report, fmt)
    if isinstance(report, dict):
        return render_bounds(report, fmt)
    raise TypeError(f"cannot render {type(report).__name__}")


def parse_window_json(text: str) -> list[dict]:
    """Inverse of the JSON window rendering (rationals back to Fractions)."""
    data = json.loads(text)
    out = []
    for w in data["windows"]:
        row = {"actor": w["actor"], "job": w["job"]}
        for key in ("release", "deadline", "window"):
            row[key] = UNBOUNDED if w[key] == "unbounded" else Fraction(w[key])
        out.append(row)
    return out
