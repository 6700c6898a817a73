"""Consistency, liveness and the per-mode RMDF analysis."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .execution import Deadlock, Trace, run_hyperperiod
from .model import Param, Spec, Violation, format_rational, validate_structure, weak_components


class AnalysisError(ValueError):
    pass


class InvariantBreach(RuntimeError):
    """An analysis contradicted itself (e.g. a live run that does not restore its state)."""


@dataclass(frozen=True)
class TopologyMatrix:
    channels: tuple[str, ...]
    actors: tuple[str, ...]
    rows: tuple[tuple[Fraction, ...], ...]

    def entry(self, channel: str, actor: str) -> Fraction:
        return self.rows[self.channels.index(channel)][self.actors.index(actor)]

    def times(self, vector) -> list[Fraction]:
        q = [Fraction(vector[a]) for a in self.actors]
        return [sum((x * y for x, y in zip(row, q)), Fraction(0)) for row in self.rows]


def _const_rates(spec: Spec, c):
    if isinstance(c.production, Param) or isinstance(c.consumption, Param):
        raise AnalysisError(f"channel {c.id} has a parametric rate; substitute a mode first")
    return c.production.value, c.consumption.value


def build_topology_matrix(spec: Spec) -> TopologyMatrix:
    """Signed rate matrix; a self-loop contributes one net entry."""
    actors = tuple(spec.actor_ids)
    col = {a: i for i, a in enumerate(actors)}
    rows = []
    for c in spec.channels:
        prod, cons = _const_rates(spec, c)
        row = [Fraction(0)] * len(actors)
        row[col[c.producer]] += prod
        row[col[c.consumer]] -= cons
        rows.append(tuple(row))
    return TopologyMatrix(tuple(c.id for c in spec.channels), actors, tuple(rows))


@dataclass(frozen=True)
class RepetitionVector:
    counts: dict[str, int]
    hyperperiod_ms: Fraction | None = None

    def to_dict(self) -> dict:
        d = {"repetition": dict(self.counts)}
        if self.hyperperiod_ms is not None:
            d["hyperperiod_ms"] = format_rational(self.hyperperiod_ms)
        return d


@dataclass(frozen=True)
class Consistent:
    repetition: RepetitionVector
    ok = True


@dataclass(frozen=True)
class Inconsistent:
    reason: str
    witness: tuple[str, ...] = ()
    ok = False


def consistency(spec: Spec) -> Consistent | Inconsistent:
    """Minimal positive integer solution of the balance equations.

    Rate ratios are propagated along a spanning tree and every channel is
    then checked, which decides the same question as a null-space
    computation with exact arithmetic. Timed actors must agree on one
    hyperperiod ``q_v * period_v``.
    """
    if not spec.actors:
        raise AnalysisError("empty spec")
    if len(weak_components(spec)) > 1:
        raise AnalysisError("spec is not weakly connected")
    rates = {c.id: _const_rates(spec, c) for c in spec.channels}
    adj: dict[str, list] = {a: [] for a in spec.actor_ids}
    for c in spec.channels:
        if not c.is_self_loop:
            adj[c.producer].append(c)
            adj[c.consumer].append(c)
    root = spec.actor_ids[0]
    ratio = {root: Fraction(1)}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for c in adj[v]:
            prod, cons = rates[c.id]
            if c.producer == v and c.consumer not in ratio:
                ratio[c.consumer] = ratio[v] * prod / cons
                queue.append(c.consumer)
            elif c.consumer == v and c.producer not in ratio:
                ratio[c.producer] = ratio[v] * cons / prod
                queue.append(c.producer)
    for c in spec.channels:
        prod, cons = rates[c.id]
        if c.is_self_loop:
            if prod != cons:
                return Inconsistent(f"self-loop {c.id} produces {prod} but consumes {cons} per job", (c.id,))
            continue
        if ratio[c.producer] * prod != ratio[c.consumer] * cons:
            return Inconsistent(
                f"channel {c.id} cannot balance: {c.producer} and {c.consumer} need incompatible firing ratios",
                (c.id,),
            )
    scale = math.lcm(*(r.denominator for r in ratio.values()))
    ints = {a: int(r * scale) for a, r in ratio.items()}
    g = math.gcd(*ints.values())
    counts = {a: ints[a] // g for a in spec.actor_ids}

    hyper = None
    first = None
    for a in spec.actors:
        if a.timing is None:
            continue
        h = counts[a.id] * a.timing.period_ms
        if hyper is None:
            hyper, first = h, a.id
        elif h != hyper:
            return Inconsistent(
                f"timed actors {first} and {a.id} imply hyperperiods {format_rational(hyper)} and {format_rational(h)} ms",
                (first, a.id),
            )
    return Consistent(RepetitionVector(counts, hyper))


@dataclass(frozen=True)
class Live:
    trace: Trace
    ok = True


@dataclass(frozen=True)
class Deadlocked:
    deadlock: Deadlock
    trace: Trace
    ok = False


def token_period(spec: Spec, counts) -> int:
    """Smallest L such that L repetitions move a whole number of tokens on every channel.

    The minimal null-space vector can leave a fractional credit behind
    (rates 5/3 and 5/6 balance at q = 1, 2); the token state then repeats
    only every L iterations.
    """
    dens = [Fraction(counts[c.producer] * _const_rates(spec, c)[0]).denominator for c in spec.channels]
    return math.lcm(1, *dens)


def liveness(spec: Spec, repetition: RepetitionVector) -> Live | Deadlocked:
    """Execute until the token state is due to repeat; live iff it completes."""
    scale = token_period(spec, repetition.counts)
    counts = {a: n * scale for a, n in repetition.counts.items()}
    trace = run_hyperperiod(spec, counts, record=True, hyperperiods=scale)
    if trace.deadlock is not None:
        return Deadlocked(trace.deadlock, trace)
    if trace.final.signature() != trace.initial.signature():
        raise InvariantBreach("a complete hyperperiod did not restore the initial token state")
    return Live(trace)


@dataclass
class ModeResult:
    mode: dict[str, int]
    consistent: bool
    repetition: dict[str, int] = field(default_factory=dict)
    hyperperiod_ms: Fraction | None = None
    live: bool = False
    deadlock: dict | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        d = {
            "mode": dict(self.mode),
            "consistent": self.consistent,
            "repetition": dict(self.repetition),
            "hyperperiod_ms": format_rational(self.hyperperiod_ms) if self.hyperperiod_ms is not None else None,
            "live": self.live,
        }
        if self.deadlock is not None:
            d["deadlock"] = self.deadlock
        if self.reason:
            d["reason"] = self.reason
        return d


@dataclass
class AnalysisReport:
    spec_name: str
    structural: list[Violation]
    coherence: list[Violation]
    modes: list[ModeResult]

    @property
    def consistent(self) -> bool:
        return not self.structural and not self.coherence and bool(self.modes) and all(m.consistent for m in self.modes)

    @property
    def live(self) -> bool:
        return self.consistent and all(m.live for m in self.modes)

    @property
    def ok(self) -> bool:
        return self.live

    def summary(self) -> str:
        if self.structural:
            return f"structurally invalid ({len(self.structural)} violations)"
        if self.coherence:
            return f"not mode-coherent ({len(self.coherence)} violations)"
        n = len(self.modes)
        noun = "mode" if n == 1 else "modes"
        if self.live:
            return f"{n} {noun}, all consistent and live"
        bad = sum(1 for m in self.modes if not (m.consistent and m.live))
        return f"{n} {noun}, {bad} failing"

    def to_dict(self) -> dict:
        return {
            "spec": self.spec_name,
            "structural": [v.to_dict() for v in self.structural],
            "coherence": [v.to_dict() for v in self.coherence],
            "modes": [m.to_dict() for m in self.modes],
            "consistent": self.consistent,
            "live": self.live,
            "summary": self.summary(),
        }


def analyze_mode_spec(spec: Spec, mode: dict[str, int] | None = None) -> ModeResult:
    mode = dict(mode or {})
    verdict = consistency(spec)
    if not isinstance(verdict, Consistent):
        return ModeResult(mode, False, reason=verdict.reason)
    rep = verdict.repetition
    live = liveness(spec, rep)
    res = ModeResult(mode, True, dict(rep.counts), rep.hyperperiod_ms, live.ok)
    if not live.ok:
        res.deadlock = live.deadlock.to_dict()
        res.reason = "deadlock before the hyperperiod completed"
    return res


def analyze_rmdf(spec: Spec) -> AnalysisReport:
    """Structure, mode coherence, then consistency and liveness per mode.

    Plain routing actors are executed natively rather than desugared: the
    executor gives them their exact semantics and a mode spec still holds
    controlled actors, which desugaring does not cover.
    """
    from .modes import check_mode_coherence, enumerate_mode_specs

    structural = validate_structure(spec)
    if structural:
        return AnalysisReport(spec.name, structural, [], [])
    coherence = check_mode_coherence(spec)
    if coherence:
        return AnalysisReport(spec.name, [], coherence, [])
    results = []
    for mode, mspec in enumerate_mode_specs(spec):
        try:
            results.append(analyze_mode_spec(mspec, mode))
        except AnalysisError as exc:
            results.append(ModeResult(dict(mode), False, reason=str(exc)))
    return AnalysisReport(spec.name, [], [], results)
