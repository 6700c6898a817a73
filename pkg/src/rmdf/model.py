"""Graph model for routed PolyGraph / RMDF specifications.

All numbers (rates, token counts, times) are exact ``fractions.Fraction``
values. A ``Spec`` is immutable; transformations return fresh instances.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping


class SpecError(ValueError):
    """Raised when a specification file cannot be turned into a ``Spec``."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def parse_rational(text, path: str | None = None) -> Fraction:
    """Parse ``"p/q"`` or an integer without ever going through a float."""
    if isinstance(text, bool):
        raise SpecError(f"malformed rational {text!r}", path)
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise SpecError(f"malformed rational {text!r}: expected a 'p/q' string", path)
    m = _RATIONAL_RE.match(text)
    if not m:
        raise SpecError(f"malformed rational {text!r}", path)
    num, den = int(m.group(1)), int(m.group(2) or 1)
    if den == 0:
        raise SpecError(f"malformed rational {text!r}: zero denominator", path)
    return Fraction(num, den)


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


class ActorKind(str, Enum):
    USUAL = "usual"
    SPLITTER = "splitter"
    JOINER = "joiner"
    DUPLICATER = "duplicater"
    DISCARD = "discard"
    CONTROLLED_SPLITTER = "controlled_splitter"
    CONTROLLED_JOINER = "controlled_joiner"
    MODE_DECIDER = "mode_decider"

    @property
    def is_routing(self) -> bool:
        return self in ROUTING_KINDS

    @property
    def is_controlled(self) -> bool:
        return self in (ActorKind.CONTROLLED_SPLITTER, ActorKind.CONTROLLED_JOINER)


ROUTING_KINDS = frozenset(
    {ActorKind.SPLITTER, ActorKind.JOINER, ActorKind.DUPLICATER, ActorKind.DISCARD}
)


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __str__(self):
        return format_rational(self.value)


@dataclass(frozen=True)
class Param:
    name: str

    def __str__(self):
        return self.name


RateExpr = Const | Param


@dataclass(frozen=True)
class Timing:
    frequency_hz: Fraction
    phase_ms: Fraction = Fraction(0)

    @property
    def period_ms(self) -> Fraction:
        return Fraction(1000) / self.frequency_hz


@dataclass(frozen=True)
class ExecTime:
    bcet_ms: Fraction
    wcet_ms: Fraction


@dataclass(frozen=True)
class Actor:
    id: str
    kind: ActorKind = ActorKind.USUAL
    timing: Timing | None = None
    exec_time: ExecTime | None = None

    @property
    def is_timed(self) -> bool:
        return self.timing is not None


@dataclass(frozen=True)
class Channel:
    id: str
    producer: str
    producer_port: int
    consumer: str
    consumer_port: int
    production: RateExpr = Const(Fraction(1))
    consumption: RateExpr = Const(Fraction(1))
    initial_tokens: Fraction = Fraction(0)
    is_control: bool = False

    @property
    def is_self_loop(self) -> bool:
        return self.producer == self.consumer

    @property
    def whole_tokens(self) -> int:
        return math.floor(self.initial_tokens)

    @property
    def phase_credit(self) -> Fraction:
        """Fractional part ``r`` of the initial tokens."""
        return self.initial_tokens - math.floor(self.initial_tokens)


@dataclass(frozen=True)
class ModeTable:
    """Execution modes as 0/1 assignments of rate parameters.

    Rows may cover disjoint parameter groups (one group per control area);
    ``modes()`` then returns the cross product of the groups.
    """

    parameters: tuple[str, ...] = ()
    rows: tuple[tuple[tuple[str, int], ...], ...] = ()

    @classmethod
    def from_rows(cls, rows: Iterable[Mapping[str, int]], parameters=None) -> "ModeTable":
        frozen = tuple(tuple(sorted((k, int(v)) for k, v in row.items())) for row in rows)
        if parameters is None:
            seen: dict[str, None] = {}
            for row in frozen:
                for k, _ in row:
                    seen.setdefault(k)
            parameters = tuple(seen)
        return cls(tuple(parameters), frozen)

    @property
    def is_empty(self) -> bool:
        return not self.rows

    def groups(self) -> list[list[dict[str, int]]]:
        by_keys: dict[frozenset, list[dict[str, int]]] = {}
        for row in self.rows:
            d = dict(row)
            by_keys.setdefault(frozenset(d), []).append(d)
        return list(by_keys.values())

    def modes(self) -> list[dict[str, int]]:
        if not self.rows:
            return []
        out = []
        for combo in itertools.product(*self.groups()):
            merged: dict[str, int] = {}
            for part in combo:
                merged.update(part)
            out.append(merged)
        return out


@dataclass(frozen=True)
class Spec:
    name: str
    actors: tuple[Actor, ...]
    channels: tuple[Channel, ...]
    mode_table: ModeTable = field(default_factory=ModeTable)

    def __post_init__(self):
        object.__setattr__(self, "_actor_index", {a.id: a for a in self.actors})
        object.__setattr__(self, "_channel_index", {c.id: c for c in self.channels})

    def actor(self, actor_id: str) -> Actor:
        return self._actor_index[actor_id]

    def channel(self, channel_id: str) -> Channel:
        return self._channel_index[channel_id]

    def has_actor(self, actor_id: str) -> bool:
        return actor_id in self._actor_index

    @property
    def actor_ids(self) -> list[str]:
        return [a.id for a in self.actors]

    def inputs(self, actor_id: str) -> list[Channel]:
        """Input channels sorted by consumer port."""
        return sorted((c for c in self.channels if c.consumer == actor_id), key=lambda c: c.consumer_port)

    def outputs(self, actor_id: str) -> list[Channel]:
        return sorted((c for c in self.channels if c.producer == actor_id), key=lambda c: c.producer_port)

    def data_inputs(self, actor_id: str) -> list[Channel]:
        return [c for c in self.inputs(actor_id) if not c.is_control]

    def data_outputs(self, actor_id: str) -> list[Channel]:
        return [c for c in self.outputs(actor_id) if not c.is_control]

    def control_input(self, actor_id: str) -> Channel | None:
        ctrl = [c for c in self.inputs(actor_id) if c.is_control]
        return ctrl[0] if ctrl else None

    def parameters(self) -> set[str]:
        names = set()
        for c in self.channels:
            for r in (c.production, c.consumption):
                if isinstance(r, Param):
                    names.add(r.name)
        return names

    def has_params(self) -> bool:
        return bool(self.parameters())

    def replace(self, **changes) -> "Spec":
        return replace(self, **changes)


# ---------------------------------------------------------------------------
# (de)serialization


def _rate_from_json(value, path):
    if isinstance(value, dict):
        if set(value) != {"param"} or not isinstance(value["param"], str):
            raise SpecError(f"malformed parametric rate {value!r}", path)
        return Param(value["param"])
    return Const(parse_rational(value, path))


def _rate_to_json(rate: RateExpr):
    if isinstance(rate, Param):
        return {"param": rate.name}
    return format_rational(rate.value)


def _endpoint(value, path) -> tuple[str, int]:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not isinstance(value[0], str)
        or not isinstance(value[1], int)
        or isinstance(value[1], bool)
    ):
        raise SpecError(f"expected [actor, port], got {value!r}", path)
    return value[0], value[1]


def spec_from_dict(data) -> Spec:
    if not isinstance(data, dict):
        raise SpecError("top level must be an object")
    for key in ("name", "actors", "channels"):
        if key not in data:
            raise SpecError(f"missing field {key!r}")
    actors: list[Actor] = []
    seen: set[str] = set()
    for i, raw in enumerate(data["actors"]):
        path = f"actors[{i}]"
        if not isinstance(raw, dict) or not isinstance(raw.get("id"), str):
            raise SpecError("actor needs a string 'id'", path)
        aid = raw["id"]
        if aid in seen:
            raise SpecError(f"duplicate actor id {aid!r}", path)
        seen.add(aid)
        try:
            kind = ActorKind(raw.get("kind", "usual"))
        except ValueError:
            raise SpecError(f"unknown actor kind {raw.get('kind')!r}", path + ".kind") from None
        timing = None
        if "frequency_hz" in raw:
            timing = Timing(
                parse_rational(raw["frequency_hz"], path + ".frequency_hz"),
                parse_rational(raw.get("phase_ms", "0"), path + ".phase_ms"),
            )
        elif "phase_ms" in raw:
            raise SpecError("phase_ms given without frequency_hz", path)
        exec_time = None
        if "bcet_ms" in raw or "wcet_ms" in raw:
            if not ("bcet_ms" in raw and "wcet_ms" in raw):
                raise SpecError("bcet_ms and wcet_ms must be given together", path)
            exec_time = ExecTime(
                parse_rational(raw["bcet_ms"], path + ".bcet_ms"),
                parse_rational(raw["wcet_ms"], path + ".wcet_ms"),
            )
        actors.append(Actor(aid, kind, timing, exec_time))

    channels: list[Channel] = []
    seen_ch: set[str] = set()
    for i, raw in enumerate(data["channels"]):
        path = f"channels[{i}]"
        if not isinstance(raw, dict) or not isinstance(raw.get("id"), str):
            raise SpecError("channel needs a string 'id'", path)
        cid = raw["id"]
        if cid in seen_ch:
            raise SpecError(f"duplicate channel id {cid!r}", path)
        seen_ch.add(cid)
        for key in ("from", "to"):
            if key not in raw:
                raise SpecError(f"missing field {key!r}", path)
        src, sport = _endpoint(raw["from"], path + ".from")
        dst, dport = _endpoint(raw["to"], path + ".to")
        for aid, key in ((src, "from"), (dst, "to")):
            if aid not in seen:
                raise SpecError(f"unknown actor reference {aid!r}", f"{path}.{key}")
        init = parse_rational(raw.get("init", "0"), path + ".init")
        control = raw.get("control", False)
        if not isinstance(control, bool):
            raise SpecError("'control' must be a boolean", path + ".control")
        channels.append(
            Channel(
                cid,
                src,
                sport,
                dst,
                dport,
                _rate_from_json(raw.get("prod", "1"), path + ".prod"),
                _rate_from_json(raw.get("cons", "1"), path + ".cons"),
                init,
                control,
            )
        )

    rows = []
    for i, raw in enumerate(data.get("modes", [])):
        path = f"modes[{i}]"
        if not isinstance(raw, dict):
            raise SpecError("mode must be an object", path)
        for k, v in raw.items():
            if v not in (0, 1) or isinstance(v, bool):
                raise SpecError(f"parameter {k!r} must be 0 or 1, got {v!r}", path)
        rows.append(raw)
    return Spec(data["name"], tuple(actors), tuple(channels), ModeTable.from_rows(rows))


def parse_spec(text: str) -> Spec:
    """Parse the JSON specification format. Structural rules are not checked."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return spec_from_dict(data)


def spec_to_dict(spec: Spec) -> dict:
    actors = []
    for a in spec.actors:
        d: dict = {"id": a.id, "kind": a.kind.value}
        if a.timing is not None:
            d["frequency_hz"] = format_rational(a.timing.frequency_hz)
            d["phase_ms"] = format_rational(a.timing.phase_ms)
        if a.exec_time is not None:
            d["bcet_ms"] = format_rational(a.exec_time.bcet_ms)
            d["wcet_ms"] = format_rational(a.exec_time.wcet_ms)
        actors.append(d)
    channels = [
        {
            "id": c.id,
            "from": [c.producer, c.producer_port],
            "to": [c.consumer, c.consumer_port],
            "prod": _rate_to_json(c.production),
            "cons": _rate_to_json(c.consumption),
            "init": format_rational(c.initial_tokens),
            "control": c.is_control,
        }
        for c in spec.channels
    ]
    return {
        "name": spec.name,
        "actors": actors,
        "channels": channels,
        "modes": [dict(row) for row in spec.mode_table.rows],
    }


def serialize_spec(spec: Spec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2) + "\n"


def load_spec(path) -> Spec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())


# ---------------------------------------------------------------------------
# structural validation


@dataclass(frozen=True)
class Violation:
    rule: str
    element: str
    observed: str = ""
    message: str = ""

    def to_dict(self) -> dict:
        return {"rule": self.rule, "element": self.element, "observed": self.observed, "message": self.message}


def weak_components(spec: Spec) -> list[set[str]]:
    adj: dict[str, set[str]] = {a: set() for a in spec.actor_ids}
    for c in spec.channels:
        adj[c.producer].add(c.consumer)
        adj[c.consumer].add(c.producer)
    comps, seen = [], set()
    for start in spec.actor_ids:
        if start in seen:
            continue
        comp, stack = set(), [start]
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp.add(v)
            stack.extend(adj[v] - comp)
        seen |= comp
        comps.append(comp)
    return comps


def _const_sum(rates: list[RateExpr]) -> Fraction | None:
    if any(isinstance(r, Param) for r in rates):
        return None
    return sum((r.value for r in rates), Fraction(0))


def _feeds_from_decider(spec: Spec, actor_id: str) -> bool:
    a = spec.actor(actor_id)
    if a.kind is ActorKind.MODE_DECIDER:
        return True
    if a.kind is ActorKind.DUPLICATER:
        ins = spec.inputs(actor_id)
        return len(ins) == 1 and ins[0].is_control and _feeds_from_decider(spec, ins[0].producer)
    return False


def validate_structure(spec: Spec) -> list[Violation]:
    """Check the type invariants of a parsed spec. Violations are data."""
    out: list[Violation] = []
    ids = spec.actor_ids
    if not ids:
        return [Violation("empty-spec", spec.name, "0 actors")]

    for v in ids:
        for ch_list, side, attr in ((spec.inputs(v), "input", "consumer_port"), (spec.outputs(v), "output", "producer_port")):
            ports = sorted(getattr(c, attr) for c in ch_list)
            if ports != list(range(len(ports))):
                out.append(Violation("port-indices-not-dense", v, f"{side} ports {ports}"))

    for a in spec.actors:
        if a.exec_time is not None:
            et = a.exec_time
            if not (0 <= et.bcet_ms <= et.wcet_ms):
                out.append(Violation("bcet-wcet-order", a.id, f"bcet={et.bcet_ms} wcet={et.wcet_ms}"))
        if a.timing is not None:
            if a.timing.frequency_hz <= 0:
                out.append(Violation("frequency-positive", a.id, str(a.timing.frequency_hz)))
            if a.timing.phase_ms < 0:
                out.append(Violation("phase-non-negative", a.id, str(a.timing.phase_ms)))

    for c in spec.channels:
        if c.initial_tokens < 0:
            out.append(Violation("initial-tokens-non-negative", c.id, str(c.initial_tokens)))
        for side, rate in (("prod", c.production), ("cons", c.consumption)):
            if isinstance(rate, Const) and rate.value <= 0:
                out.append(Violation("rate-positive", c.id, f"{side}={rate}"))
        if isinstance(c.production, Param) and spec.actor(c.producer).kind is not ActorKind.CONTROLLED_SPLITTER:
            out.append(Violation("param-rate-placement", c.id, f"prod={c.production} on {spec.actor(c.producer).kind.value}"))
        if isinstance(c.consumption, Param) and spec.actor(c.consumer).kind is not ActorKind.CONTROLLED_JOINER:
            out.append(Violation("param-rate-placement", c.id, f"cons={c.consumption} on {spec.actor(c.consumer).kind.value}"))
        if c.is_control:
            if not _feeds_from_decider(spec, c.producer):
                out.append(Violation("control-channel-source", c.id, spec.actor(c.producer).kind.value))
            if spec.actor(c.consumer).kind not in (
                ActorKind.CONTROLLED_SPLITTER,
                ActorKind.CONTROLLED_JOINER,
                ActorKind.DUPLICATER,
            ):
                out.append(Violation("control-channel-target", c.id, spec.actor(c.consumer).kind.value))
            if c.production != Const(Fraction(1)) or c.consumption != Const(Fraction(1)):
                out.append(Violation("control-channel-rate", c.id, f"prod={c.production} cons={c.consumption}"))

    for a in spec.actors:
        ins, outs = spec.inputs(a.id), spec.outputs(a.id)
        dins = [c for c in ins if not c.is_control]
        douts = [c for c in outs if not c.is_control]
        ctrl_in = [c for c in ins if c.is_control]
        ctrl_out = [c for c in outs if c.is_control]
        k = a.kind
        if k in (ActorKind.SPLITTER, ActorKind.CONTROLLED_SPLITTER):
            if len(dins) != 1:
                out.append(Violation("splitter-arity", a.id, f"{len(dins)} data inputs"))
            if not douts:
                out.append(Violation("splitter-arity", a.id, "0 outputs"))
            for c in dins:
                if c.consumption != Const(Fraction(1)):
                    out.append(Violation("splitter-input-rate", c.id, str(c.consumption)))
            if k is ActorKind.SPLITTER:
                s = _const_sum([c.production for c in douts])
                if s is not None and douts and s != 1:
                    out.append(Violation("splitter-output-sum", a.id, f"sum {format_rational(s)}", "splitter-output-sum != 1"))
                if ctrl_in:
                    out.append(Violation("control-input-on-plain-routing", a.id))
            elif len(ctrl_in) != 1:
                out.append(Violation("controlled-actor-control-input", a.id, f"{len(ctrl_in)} control inputs"))
        elif k in (ActorKind.JOINER, ActorKind.CONTROLLED_JOINER):
            if len(douts) != 1:
                out.append(Violation("joiner-arity", a.id, f"{len(douts)} data outputs"))
            if not dins:
                out.append(Violation("joiner-arity", a.id, "0 inputs"))
            for c in douts:
                if c.production != Const(Fraction(1)):
                    out.append(Violation("joiner-output-rate", c.id, str(c.production)))
            if k is ActorKind.JOINER:
                s = _const_sum([c.consumption for c in dins])
                if s is not None and dins and s != 1:
                    out.append(Violation("joiner-input-sum", a.id, f"sum {format_rational(s)}", "joiner-input-sum != 1"))
                if ctrl_in:
                    out.append(Violation("control-input-on-plain-routing", a.id))
            elif len(ctrl_in) != 1:
                out.append(Violation("controlled-actor-control-input", a.id, f"{len(ctrl_in)} control inputs"))
        elif k is ActorKind.DUPLICATER:
            if len(ins) != 1 or not outs:
                out.append(Violation("duplicater-arity", a.id, f"{len(ins)} inputs, {len(outs)} outputs"))
            for c in ins + outs:
                if c.is_control != (ins[0].is_control if ins else False):
                    out.append(Violation("duplicater-mixed-channels", c.id))
                side = c.consumption if c.consumer == a.id else c.production
                if side != Const(Fraction(1)):
                    out.append(Violation("duplicater-rate", c.id, str(side)))
        elif k is ActorKind.DISCARD:
            if len(ins) != 1 or outs:
                out.append(Violation("discard-arity", a.id, f"{len(ins)} inputs, {len(outs)} outputs"))
        elif k is ActorKind.MODE_DECIDER:
            if len(dins) != 1 or ctrl_in or len(ctrl_out) != 1 or douts:
                out.append(
                    Violation(
                        "mode-decider-arity",
                        a.id,
                        f"{len(dins)} data inputs, {len(ctrl_out)} control outputs, {len(douts)} data outputs",
                    )
                )
        else:
            if ctrl_in or ctrl_out:
                out.append(Violation("control-channel-on-usual-actor", a.id))

    comps = weak_components(spec)
    if len(comps) > 1:
        out.append(Violation("not-weakly-connected", spec.name, f"{len(comps)} components", "not weakly connected"))

    params = spec.parameters()
    for i, mode in enumerate(spec.mode_table.modes()):
        missing = params - set(mode)
        if missing:
            out.append(Violation("mode-table-incomplete", f"modes[{i}]", f"unassigned {sorted(missing)}"))
    if params and spec.mode_table.is_empty:
        out.append(Violation("mode-table-missing", spec.name, f"parameters {sorted(params)}"))
    keysets = [frozenset(g[0]) for g in spec.mode_table.groups()]
    for x, y in itertools.combinations(keysets, 2):
        if x & y:
            out.append(Violation("mode-table-overlapping-groups", spec.name, f"{sorted(x & y)}"))
    return out


# ---------------------------------------------------------------------------
# parameter substitution


def _rate_value(rate: RateExpr, mode: Mapping[str, int]) -> Fraction:
    if isinstance(rate, Param):
        return Fraction(mode[rate.name])
    return rate.value


def assign_params(spec: Spec, mode: Mapping[str, int]) -> Spec:
    """Replace every parametric rate by its value in ``mode``; no pruning."""
    chans = tuple(
        replace(
            c,
            production=Const(_rate_value(c.production, mode)),
            consumption=Const(_rate_value(c.consumption, mode)),
        )
        for c in spec.channels
    )
    return replace(spec, channels=chans, mode_table=ModeTable())


def all_params_one(spec: Spec) -> Spec:
    """Conservative variant used by timing analysis: every parameter set to 1."""
    return assign_params(spec, {p: 1 for p in spec.parameters()})


def _reach(adj: Mapping[str, set[str]], starts: Iterable[str]) -> set[str]:
    seen: set[str] = set()
    stack = list(starts)
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(adj.get(v, ()))
    return seen


def substitute_mode(spec: Spec, mode: Mapping[str, int]) -> Spec:
    """Fix one execution mode and drop the branches it disables."""
    mode = dict(mode)
    params = spec.parameters()
    unknown = set(mode) - params
    if unknown:
        raise SpecError(f"mode assigns parameters absent from the spec: {sorted(unknown)}")
    if params or not spec.mode_table.is_empty or mode:
        if mode not in spec.mode_table.modes():
            raise SpecError(f"mode {mode} is not a row of the mode table")
    if not params:
        return replace(spec, mode_table=ModeTable())

    assigned = assign_params(spec, mode)
    live = [c for c in assigned.channels if c.production.value != 0 and c.consumption.value != 0]

    succ: dict[str, set[str]] = defaultdict(set)
    pred: dict[str, set[str]] = defaultdict(set)
    for c in live:
        if not c.is_control and not c.is_self_loop:
            succ[c.producer].add(c.consumer)
            pred[c.consumer].add(c.producer)
    all_succ: dict[str, set[str]] = defaultdict(set)
    all_pred: dict[str, set[str]] = defaultdict(set)
    for c in spec.channels:
        if not c.is_control and not c.is_self_loop:
            all_succ[c.producer].add(c.consumer)
            all_pred[c.consumer].add(c.producer)

    splitters = [a.id for a in spec.actors if a.kind is ActorKind.CONTROLLED_SPLITTER]
    joiners = [a.id for a in spec.actors if a.kind is ActorKind.CONTROLLED_JOINER]
    controlled = set(splitters) | set(joiners)
    # actors on some splitter->joiner path in the full graph
    members = (_reach(all_succ, splitters) & _reach(all_pred, joiners)) - controlled
    # ...and those still on one once zero-rate channels are gone
    kept_members = (_reach(succ, splitters) & _reach(pred, joiners)) - controlled
    removed = members - kept_members

    actors = tuple(a for a in spec.actors if a.id not in removed)
    chans = [c for c in live if c.producer not in removed and c.consumer not in removed]
    chans = _renumber_ports(chans)
    return Spec(spec.name, actors, tuple(chans), ModeTable())


def _renumber_ports(channels: list[Channel]) -> list[Channel]:
    """Re-densify port indices, keeping relative order."""
    out_map: dict[str, list[Channel]] = defaultdict(list)
    in_map: dict[str, list[Channel]] = defaultdict(list)
    for c in channels:
        out_map[c.producer].append(c)
        in_map[c.consumer].append(c)
    new_out = {}
    for lst in out_map.values():
        for i, c in enumerate(sorted(lst, key=lambda c: c.producer_port)):
            new_out[c.id] = i
    new_in = {}
    for lst in in_map.values():
        for i, c in enumerate(sorted(lst, key=lambda c: c.consumer_port)):
            new_in[c.id] = i
    return [replace(c, producer_port=new_out[c.id], consumer_port=new_in[c.id]) for c in channels]


def renumber_ports(spec: Spec) -> Spec:
    return replace(spec, channels=tuple(_renumber_ports(list(spec.channels))))
