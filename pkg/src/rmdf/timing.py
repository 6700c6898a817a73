"""Per-job release and deadline windows, and the feasibility test.

Releases propagate forward along input channels (earliest start), deadlines
backward along output channels (latest finish). Both are evaluated lazily
on (actor, job residue) nodes; jobs beyond the first hyperperiod are folded
onto their residue plus a whole number of hyperperiods. Dependency cycles
(e.g. through a self-loop) are solved as a max-plus / min-plus fixpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .analysis import Consistent, consistency, token_period
from .model import Channel, Spec, all_params_one, format_rational


class TimingError(ValueError):
    """The spec is not well-defined for timing analysis."""


class _Unbounded:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNBOUNDED"

    def __str__(self):
        return "unbounded"


UNBOUNDED = _Unbounded()


@dataclass(frozen=True)
class ExecutionWindow:
    actor: str
    job: int
    release: Fraction
    deadline: Fraction | _Unbounded

    @property
    def length(self) -> Fraction | _Unbounded:
        if self.deadline is UNBOUNDED:
            return UNBOUNDED
        return self.deadline - self.release

    def to_dict(self) -> dict:
        dl = self.deadline
        return {
            "actor": self.actor,
            "job": self.job,
            "release": format_rational(self.release),
            "deadline": "unbounded" if dl is UNBOUNDED else format_rational(dl),
            "window": "unbounded" if dl is UNBOUNDED else format_rational(self.length),
        }


@dataclass
class WindowTable:
    windows: dict[str, list[ExecutionWindow]]
    hyperperiod_ms: Fraction
    repetition: dict[str, int]

    def rows(self) -> list[ExecutionWindow]:
        return [w for a in sorted(self.windows) for w in self.windows[a]]


def _ceil(x: Fraction) -> int:
    return math.ceil(x)


def _floor(x: Fraction) -> int:
    return math.floor(x)


def alpha1(c: Channel, p: int) -> int:
    """Producer job that emits the last token needed by consumer job ``p``."""
    gj, gk, init = c.production.value, c.consumption.value, c.initial_tokens
    r = c.phase_credit
    return _ceil((_ceil(p * gk - r) - init) / gj)


def beta1(c: Channel, a1: int) -> int:
    """First consumer job that can use a token of producer job ``a1``."""
    gj, gk, init = c.production.value, c.consumption.value, c.initial_tokens
    r = c.phase_credit
    return 1 + _floor((_floor((a1 - 1) * gj + init) + r) / gk)


def alpha2(c: Channel, n: int) -> int:
    """First consumer job that depends on producer job ``n``."""
    gj, gk, init = c.production.value, c.consumption.value, c.initial_tokens
    r = c.phase_credit
    return 1 + _floor((_floor((n - 1) * gj + init) + r) / gk)


def beta2(c: Channel, a2: int) -> int:
    """Last producer job whose tokens consumer job ``a2`` needs."""
    gj, gk, init = c.production.value, c.consumption.value, c.initial_tokens
    r = c.phase_credit
    return _ceil((_ceil(a2 * gk - r) - init) / gj)


class TimingAnalysis:
    """Lazy window evaluator for one well-defined spec.

    ``memo_misses`` counts node evaluations, which measures how much of the
    table a query actually touched.
    """

    def __init__(self, spec: Spec):
        self.source = spec
        self.spec = all_params_one(spec) if spec.has_params() else spec
        verdict = consistency(self.spec)
        if not isinstance(verdict, Consistent):
            raise TimingError(f"spec is not consistent: {verdict.reason}")
        if verdict.repetition.hyperperiod_ms is None:
            raise TimingError("no timed actor: the hyperperiod is undefined")
        # windows repeat once the token state does
        scale = token_period(self.spec, verdict.repetition.counts)
        self.q = {a: n * scale for a, n in verdict.repetition.counts.items()}
        self.H = verdict.repetition.hyperperiod_ms * scale
        self.bcet: dict[str, Fraction] = {}
        self.wcet: dict[str, Fraction] = {}
        for a in self.spec.actors:
            ins, outs = self.spec.inputs(a.id), self.spec.outputs(a.id)
            if (not ins or not outs) and a.timing is None:
                side = "source" if not ins else "sink"
                raise TimingError(f"untimed {side} {a.id}: sources and sinks must be timed")
            if a.exec_time is not None:
                self.bcet[a.id], self.wcet[a.id] = a.exec_time.bcet_ms, a.exec_time.wcet_ms
            elif a.kind.is_routing or a.kind.is_controlled:
                self.bcet[a.id] = self.wcet[a.id] = Fraction(0)
            else:
                raise TimingError(f"{a.id} has no bcet/wcet")
        self._ins = {a: self.spec.inputs(a) for a in self.spec.actor_ids}
        self._outs = {a: self.spec.outputs(a) for a in self.spec.actor_ids}
        self._timing = {a.id: a.timing for a in self.spec.actors}
        self._release: dict[tuple[str, int], Fraction] = {}
        self._deadline: dict[tuple[str, int], Fraction | None] = {}
        self.memo_misses = 0

    # -- folding ---------------------------------------------------------
    def _fold(self, actor: str, job: int) -> tuple[int, int]:
        q = self.q[actor]
        k, res = divmod(job - 1, q)
        return res + 1, k

    def _check(self, actor: str, job: int) -> None:
        if actor not in self.q:
            raise KeyError(f"unknown actor {actor!r}")
        if job < 1:
            raise ValueError(f"job index must be >= 1, got {job}")

    # -- one-level formulas ----------------------------------------------
    def _release_terms(self, actor: str, p: int):
        """Constant part and (dep_actor, dep_job, offset) terms of release(actor, p)."""
        t = self._timing[actor]
        const = t.period_ms * (p - 1) + t.phase_ms if t is not None else None
        deps = []
        for c in self._ins[actor]:
            a1 = alpha1(c, p)
            if a1 <= 0:
                continue  # served by an initial token
            b1 = beta1(c, a1)
            deps.append((c.producer, a1, self.bcet[c.producer] + (p - b1) * self.bcet[actor]))
        return const, deps

    def _deadline_terms(self, actor: str, n: int):
        t = self._timing[actor]
        const = t.period_ms * n + t.phase_ms if t is not None else None
        deps = []
        for c in self._outs[actor]:
            a2 = alpha2(c, n)
            b2 = beta2(c, a2)
            deps.append((c.consumer, a2, -self.wcet[c.consumer] - (b2 - n) * self.wcet[actor]))
        return const, deps

    # -- fixpoint solver -------------------------------------------------
    def _solve(self, start: tuple[str, int], kind: str) -> None:
        memo = self._release if kind == "release" else self._deadline
        terms = self._release_terms if kind == "release" else self._deadline_terms
        better = (lambda new, old: new > old) if kind == "release" else (lambda new, old: new < old)

        nodes: dict[tuple[str, int], tuple] = {}
        stack = [start]
        while stack:
            node = stack.pop()
            if node in nodes or node in memo:
                continue
            self.memo_misses += 1
            const, deps = terms(*node)
            edges = []
            for dep_actor, dep_job, offset in deps:
                res, k = self._fold(dep_actor, dep_job)
                edges.append(((dep_actor, res), offset + k * self.H))
                stack.append((dep_actor, res))
            nodes[node] = (const, edges)

        value: dict[tuple[str, int], Fraction | None] = {n: c for n, (c, _) in nodes.items()}

        def current(node):
            return memo[node] if node in memo else value[node]

        for _ in range(len(nodes) + 1):
            changed = False
            for node, (_, edges) in nodes.items():
                for dep, offset in edges:
                    dv = current(dep)
                    if dv is None:
                        continue
                    cand = dv + offset
                    if value[node] is None or better(cand, value[node]):
                        value[node] = cand
                        changed = True
            if not changed:
                break
        else:
            what = "releases grow" if kind == "release" else "deadlines shrink"
            raise TimingError(f"{what} without bound around {start}: the spec is not live or not well-defined")
        for node, v in value.items():
            if kind == "release" and v is None:
                v = Fraction(0)  # every input served by initial tokens: free from time 0
            memo[node] = v

    # -- public queries --------------------------------------------------
    def release(self, actor: str, job: int) -> Fraction:
        self._check(actor, job)
        res, k = self._fold(actor, job)
        if (actor, res) not in self._release:
            self._solve((actor, res), "release")
        return self._release[(actor, res)] + k * self.H

    def deadline(self, actor: str, job: int):
        self._check(actor, job)
        res, k = self._fold(actor, job)
        if (actor, res) not in self._deadline:
            self._solve((actor, res), "deadline")
        v = self._deadline[(actor, res)]
        return UNBOUNDED if v is None else v + k * self.H

    def window(self, actor: str, job: int) -> ExecutionWindow:
        return ExecutionWindow(actor, job, self.release(actor, job), self.deadline(actor, job))

    def unfolded_release(self, actor: str, job: int) -> Fraction:
        """One direct application of the release formula (no shift shortcut on ``job``)."""
        const, deps = self._release_terms(actor, job)
        vals = [self.release(a, j) + off for a, j, off in deps]
        if const is not None:
            vals.append(const)
        return max(vals)

    def unfolded_deadline(self, actor: str, job: int):
        const, deps = self._deadline_terms(actor, job)
        vals = []
        for a, j, off in deps:
            d = self.deadline(a, j)
            if d is not UNBOUNDED:
                vals.append(d + off)
        if const is not None:
            vals.append(const)
        return min(vals) if vals else UNBOUNDED

    def window_table(self, check_cyclicity: bool = True) -> WindowTable:
        windows = {}
        for a in self.spec.actor_ids:
            windows[a] = [self.window(a, n) for n in range(1, self.q[a] + 1)]
            if check_cyclicity:
                nxt = self.q[a] + 1
                r, d = self.unfolded_release(a, nxt), self.unfolded_deadline(a, nxt)
                first = windows[a][0]
                if r != first.release + self.H:
                    raise TimingError(f"{a}: release of job {nxt} is {r}, expected {first.release + self.H}")
                expected_d = UNBOUNDED if first.deadline is UNBOUNDED else first.deadline + self.H
                if d != expected_d:
                    raise TimingError(f"{a}: deadline of job {nxt} is {d}, expected {expected_d}")
        return WindowTable(windows, self.H, dict(self.q))


@lru_cache(maxsize=64)
def timing_analysis(spec: Spec) -> TimingAnalysis:
    return TimingAnalysis(spec)


def release(spec: Spec, actor: str, job: int) -> Fraction:
    return timing_analysis(spec).release(actor, job)


def deadline(spec: Spec, actor: str, job: int):
    return timing_analysis(spec).deadline(actor, job)


def window_table(spec: Spec) -> WindowTable:
    return timing_analysis(spec).window_table()


@dataclass(frozen=True)
class InfeasibleJob:
    actor: str
    job: int
    wcet: Fraction
    window: ExecutionWindow

    def to_dict(self) -> dict:
        d = self.window.to_dict()
        d["wcet"] = format_rational(self.wcet)
        return d


@dataclass
class FeasibilityResult:
    feasible: bool
    violations: list[InfeasibleJob] = field(default_factory=list)
    table: WindowTable | None = None

    def __bool__(self) -> bool:
        return self.feasible


def feasibility(spec: Spec) -> FeasibilityResult:
    """Necessary condition: every job's window is at least its actor's WCET."""
    ta = timing_analysis(spec)
    table = ta.window_table()
    bad = []
    for a in sorted(table.windows):
        w = ta.wcet[a]
        for win in table.windows[a]:
            length = win.length
            if length is not UNBOUNDED and w > length:
                bad.append(InfeasibleJob(a, win.job, w, win))
    return FeasibilityResult(not bad, bad, table)


def max_feasible_wcet(spec: Spec) -> dict[str, Fraction]:
    """Largest WCET per actor that passes the feasibility condition."""
    table = timing_analysis(spec).window_table()
    out = {}
    for a, wins in table.windows.items():
        lengths = [w.length for w in wins if w.length is not UNBOUNDED]
        out[a] = min(lengths) if lengths else UNBOUNDED
    return out


def is_well_defined(spec: Spec) -> bool:
    try:
        TimingAnalysis(spec)
    except (TimingError, ValueError):
        return False
    return True


__all__ = [
    "ExecutionWindow",
    "FeasibilityResult",
    "InfeasibleJob",
    "TimingAnalysis",
    "TimingError",
    "UNBOUNDED",
    "WindowTable",
    "alpha1",
    "alpha2",
    "beta1",
    "beta2",
    "deadline",
    "feasibility",
    "max_feasible_wcet",
    "release",
    "window_table",
]
