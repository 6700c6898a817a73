"""Control areas, mode-coherence restrictions and per-mode specs."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, replace
from fractions import Fraction

from .model import ActorKind, Const, Param, Spec, SpecError, Violation, substitute_mode


class ModeAnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class ControlArea:
    decider: str
    duplicater: str | None
    controlled_splitters: tuple[str, ...]
    controlled_joiners: tuple[str, ...]
    members: frozenset[str]
    branches: tuple[tuple[str, tuple[str, ...]], ...]

    @property
    def border(self) -> set[str]:
        out = {self.decider, *self.controlled_splitters, *self.controlled_joiners}
        if self.duplicater:
            out.add(self.duplicater)
        return out

    def to_dict(self) -> dict:
        return {
            "decider": self.decider,
            "duplicater": self.duplicater,
            "controlled_splitters": list(self.controlled_splitters),
            "controlled_joiners": list(self.controlled_joiners),
            "members": sorted(self.members),
            "branches": [{"parameter": p, "actors": list(a)} for p, a in self.branches],
        }


def controlled_targets(spec: Spec, decider: str) -> tuple[list[str], list[str]]:
    """Controlled splitters and joiners fed (directly or via a duplicater) by ``decider``."""
    _, cs, cj = _control_fanout(spec, decider)
    return cs, cj


def _control_fanout(spec: Spec, decider: str):
    dup = None
    targets: list[str] = []
    for c in spec.outputs(decider):
        if not c.is_control:
            continue
        kind = spec.actor(c.consumer).kind
        if kind is ActorKind.DUPLICATER:
            dup = c.consumer
            targets += [o.consumer for o in spec.outputs(dup)]
        else:
            targets.append(c.consumer)
    cs = [t for t in targets if spec.actor(t).kind is ActorKind.CONTROLLED_SPLITTER]
    cj = [t for t in targets if spec.actor(t).kind is ActorKind.CONTROLLED_JOINER]
    return dup, cs, cj


def _data_adjacency(spec: Spec):
    succ: dict[str, set[str]] = defaultdict(set)
    pred: dict[str, set[str]] = defaultdict(set)
    for c in spec.channels:
        if not c.is_control and not c.is_self_loop:
            succ[c.producer].add(c.consumer)
            pred[c.consumer].add(c.producer)
    return succ, pred


def _reach(adj, starts) -> set[str]:
    seen: set[str] = set()
    stack = [s for a in starts for s in adj.get(a, ())]
    while stack:
        v = stack.pop()
        if v not in seen:
            seen.add(v)
            stack.extend(adj.get(v, ()))
    return seen


def _rate_label(rate) -> str:
    return rate.name if isinstance(rate, Param) else str(rate)


def compute_control_areas(spec: Spec) -> list[ControlArea]:
    """One control area per mode decider.

    Members are the actors lying on a data path from one of the decider's
    controlled splitters to one of its controlled joiners.
    """
    succ, pred = _data_adjacency(spec)
    areas = []
    for a in spec.actors:
        if a.kind is not ActorKind.MODE_DECIDER:
            continue
        dup, cs, cj = _control_fanout(spec, a.id)
        if not cs and not cj:
            raise ModeAnalysisError(f"mode decider {a.id} controls no controlled splitter or joiner")
        members = (_reach(succ, cs) & _reach(pred, cj)) - set(cs) - set(cj)
        branches = []
        for s in cs:
            for c in spec.data_outputs(s):
                start = c.consumer
                if start not in members:
                    branches.append((_rate_label(c.production), ()))
                    continue
                order, seen, queue = [], {start}, [start]
                while queue:
                    v = queue.pop(0)
                    order.append(v)
                    for w in sorted(succ.get(v, ())):
                        if w in members and w not in seen:
                            seen.add(w)
                            queue.append(w)
                branches.append((_rate_label(c.production), tuple(order)))
        areas.append(ControlArea(a.id, dup, tuple(cs), tuple(cj), frozenset(members), tuple(branches)))
    return areas


@dataclass(frozen=True)
class SingleModeResult:
    ok: bool
    witness: str | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _label_area(spec: Spec, area: ControlArea, skip: frozenset[str] = frozenset()):
    """Forward labeling of the channels of one area.

    Returns (channel labels, actor labels, first actor reached by two
    labels). Labeling stops at controlled joiners and never crosses the
    area boundary; self-loops are ignored.
    """
    inside = set(area.members) | set(area.controlled_joiners)
    chan_labels: dict[str, list[str]] = defaultdict(list)
    actor_labels: dict[str, list[str]] = defaultdict(list)
    first_conflict = None
    for s in area.controlled_splitters:
        for mode, c in enumerate(spec.data_outputs(s)):
            label = f"{s}:{mode}"
            stack = [c]
            visited: set[str] = set()
            while stack:
                ch = stack.pop(0)
                if ch.id in visited or ch.id in skip:
                    continue
                visited.add(ch.id)
                if label not in chan_labels[ch.id]:
                    chan_labels[ch.id].append(label)
                v = ch.consumer
                if label not in actor_labels[v]:
                    actor_labels[v].append(label)
                    if len(actor_labels[v]) == 2 and first_conflict is None and v in area.members:
                        first_conflict = v
                if v in area.members:
                    for o in spec.outputs(v):
                        if not o.is_self_loop and not o.is_control and o.consumer in inside:
                            stack.append(o)
    return chan_labels, actor_labels, first_conflict


def _has_cycle(spec: Spec, nodes: set[str]) -> list[str] | None:
    adj = defaultdict(list)
    for c in spec.channels:
        if not c.is_control and not c.is_self_loop and c.producer in nodes and c.consumer in nodes:
            adj[c.producer].append(c.consumer)
    color: dict[str, int] = {}

    def visit(v, path):
        color[v] = 1
        for w in adj[v]:
            if color.get(w) == 1:
                return path + [v, w]
            if w not in color:
                found = visit(w, path + [v])
                if found:
                    return found
        color[v] = 2
        return None

    for v in sorted(nodes):
        if v not in color:
            found = visit(v, [])
            if found:
                return found
    return None


def check_single_mode_dependency(spec: Spec, areas: list[ControlArea] | None = None) -> SingleModeResult:
    """Every area channel must be conditioned by exactly one branch.

    On failure the witness is the channel that joins two branches: among
    the inputs of the first actor reached by two labels, the one whose
    removal restores a single label everywhere without shrinking the area.
    """
    if areas is None:
        areas = compute_control_areas(spec)
    for area in areas:
        cycle = _has_cycle(spec, set(area.members))
        if cycle:
            return SingleModeResult(False, None, "cycle inside a branch: " + " -> ".join(cycle))
        chan_labels, _, conflict = _label_area(spec, area)
        if conflict is None:
            continue
        candidates = [
            c
            for c in spec.data_inputs(conflict)
            if c.producer not in area.controlled_splitters and chan_labels.get(c.id)
        ]
        witness = None
        for c in candidates:
            pruned = replace(spec, channels=tuple(x for x in spec.channels if x.id != c.id))
            try:
                pruned_areas = compute_control_areas(pruned)
            except ModeAnalysisError:
                continue
            same = [p for p in pruned_areas if p.decider == area.decider]
            if same and same[0].members == area.members:
                _, _, again = _label_area(pruned, same[0])
                if again is None:
                    witness = c.id
                    break
        if witness is None:
            multi = [cid for cid, labels in chan_labels.items() if len(labels) > 1]
            witness = multi[0] if multi else (candidates[0].id if candidates else None)
        return SingleModeResult(False, witness, f"{conflict} depends on more than one mode")
    return SingleModeResult(True)


def check_mode_coherence(spec: Spec) -> list[Violation]:
    """Violations of restrictions R1-R5 (plus nesting); empty means coherent."""
    try:
        areas = compute_control_areas(spec)
    except ModeAnalysisError as exc:
        return [Violation("control-area", spec.name, "", str(exc))]
    out: list[Violation] = []

    seen_in: dict[str, str] = {}
    for area in areas:
        for m in area.members:
            kind = spec.actor(m).kind
            if kind is ActorKind.MODE_DECIDER or kind.is_controlled:
                out.append(Violation("nested-control-area", m, kind.value, f"{m} sits inside the area of {area.decider}"))
            if m in seen_in:
                out.append(Violation("nested-control-area", m, f"{seen_in[m]},{area.decider}", "actor in two areas"))
            seen_in[m] = area.decider
    if out:
        return out

    r1 = check_single_mode_dependency(spec, areas)
    if not r1.ok:
        out.append(Violation("R1", r1.witness or spec.name, r1.reason, "actor execution depends on more than one mode"))

    modes = spec.mode_table.modes()
    for area in areas:
        border = area.border
        for c in spec.channels:
            if c.is_control:
                continue
            p_in, c_in = c.producer in area.members, c.consumer in area.members
            if p_in == c_in:
                continue
            outside = c.consumer if p_in else c.producer
            if outside in border:
                continue
            direction = "leaves" if p_in else "enters"
            out.append(Violation("R2", c.id, f"{c.producer}->{c.consumer}", f"channel {direction} the control area of {area.decider}"))

        freqs = {}
        for m in sorted(area.members):
            t = spec.actor(m).timing
            if t is not None:
                freqs[m] = t.frequency_hz
        if len(set(freqs.values())) > 1:
            observed = ", ".join(f"{k}={v} Hz" for k, v in freqs.items())
            out.append(Violation("R3", area.decider, observed, "timed actors of one area must share a frequency"))

        inside = set(area.members) | set(area.controlled_splitters) | set(area.controlled_joiners)
        for c in spec.channels:
            if c.is_control:
                continue
            touches = c.producer in area.members or c.consumer in area.members
            border_param = (c.producer in area.controlled_splitters and c.consumer in inside) or (
                c.consumer in area.controlled_joiners and c.producer in inside
            )
            if not (touches or border_param):
                continue
            for side, rate in (("prod", c.production), ("cons", c.consumption)):
                if isinstance(rate, Const) and rate.value not in (0, 1):
                    out.append(Violation("R4", c.id, f"{side}={rate}", "rates in a control area must be 0 or 1"))
                if isinstance(rate, Param):
                    bad = sorted({m[rate.name] for m in modes if m.get(rate.name) not in (0, 1)})
                    if bad:
                        out.append(Violation("R4", c.id, f"{rate.name} in {bad}", "parameter values must be 0 or 1"))

        for i, mode in enumerate(modes):
            for actor, chans, attr in [(s, spec.data_outputs(s), "production") for s in area.controlled_splitters] + [
                (j, spec.data_inputs(j), "consumption") for j in area.controlled_joiners
            ]:
                total = Fraction(0)
                for c in chans:
                    rate = getattr(c, attr)
                    total += Fraction(mode.get(rate.name, 0)) if isinstance(rate, Param) else rate.value
                if total != 1:
                    out.append(Violation("R5", actor, f"sum {total} in mode {i + 1}", "parametric rates must sum to 1"))
    return out


def enumerate_mode_specs(spec: Spec) -> list[tuple[dict[str, int], Spec]]:
    """One substituted spec per mode (cross product over independent areas)."""
    if not spec.has_params():
        return [({}, spec)]
    modes = spec.mode_table.modes()
    if not modes:
        raise ModeAnalysisError("parametric rates present but the mode table is empty")
    out = []
    for mode in modes:
        try:
            out.append((mode, substitute_mode(spec, mode)))
        except SpecError as exc:
            raise ModeAnalysisError(str(exc)) from None
    return out
