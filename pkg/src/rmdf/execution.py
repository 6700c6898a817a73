"""Symbolic token-level execution.

The executor moves symbolic tokens through FIFO channel queues. It is used
for pre-processing (offline jobs), as the liveness oracle, as the reference
semantics for routing-actor removal, and to check mode-change traces.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .model import ActorKind, Channel, Const, Param, Spec
from .rates import tokens_at_job


class ExecutionError(RuntimeError):
    """Executor misuse or an internal invariant breach."""


class ModeSequenceExhausted(ExecutionError):
    pass


class PreprocessError(RuntimeError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str = "data"
    producer: str | None = None  # None for initial tokens
    job: int | None = None
    mode: int | None = None  # control tokens: index into the spec's mode list

    @property
    def is_control(self) -> bool:
        return self.kind == "control"

    def label(self) -> str:
        if self.is_control:
            return f"ctrl(mode={self.mode})"
        if self.producer is None:
            return "init"
        return f"{self.producer}#{self.job}"


INITIAL = Token()


@dataclass
class ControlledActorState:
    has_consumed_ctrl_tkn: bool = False
    pending_mode: int | None = None


@dataclass
class TokenState:
    queues: dict[str, deque]
    job_counters: dict[str, int]
    controlled: dict[str, ControlledActorState] = field(default_factory=dict)

    def copy(self) -> "TokenState":
        return TokenState(
            {k: deque(v) for k, v in self.queues.items()},
            dict(self.job_counters),
            {k: replace(v) for k, v in self.controlled.items()},
        )

    def lengths(self) -> dict[str, int]:
        return {k: len(v) for k, v in self.queues.items()}

    def signature(self):
        """Comparable summary: queue lengths plus controlled-actor phases."""
        return (
            tuple(sorted(self.lengths().items())),
            tuple(sorted((k, v.has_consumed_ctrl_tkn) for k, v in self.controlled.items())),
        )


def initial_state(spec: Spec) -> TokenState:
    queues = {}
    for c in spec.channels:
        tok = Token("control", mode=0) if c.is_control else INITIAL
        queues[c.id] = deque([tok] * c.whole_tokens)
    controlled = {a.id: ControlledActorState() for a in spec.actors if a.kind.is_controlled}
    return TokenState(queues, {a.id: 0 for a in spec.actors}, controlled)


@dataclass(frozen=True)
class TraceEvent:
    step: int
    actor: str
    job: int
    channel: str
    action: str  # "consume" | "produce"
    token: Token

    def to_dict(self) -> dict:
        d = {
            "step": self.step,
            "actor": self.actor,
            "job": self.job,
            "channel": self.channel,
            "action": self.action,
            "token": self.token.kind,
        }
        if self.token.is_control:
            d["mode"] = self.token.mode
        else:
            d["origin"] = self.token.label()
        return d


@dataclass
class Deadlock:
    fired: dict[str, int]
    targets: dict[str, int]
    queues: dict[str, int]

    def to_dict(self) -> dict:
        return {"fired": self.fired, "targets": self.targets, "queues": self.queues}


@dataclass
class Trace:
    spec: Spec
    events: list[TraceEvent]
    initial: TokenState
    final: TokenState
    targets: dict[str, int]
    deadlock: Deadlock | None = None
    decisions: list[tuple[str, int]] = field(default_factory=list)
    hyperperiods: int = 1

    @property
    def completed(self) -> bool:
        return self.deadlock is None

    def firings(self) -> dict[str, int]:
        return dict(self.final.job_counters)

    def write_jsonl(self, fh) -> None:
        for ev in self.events:
            fh.write(json.dumps(ev.to_dict()) + "\n")


def _lcm(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def block_schedule(rates: Sequence[Fraction]) -> list[int]:
    """Port served by each job of one splitter/joiner period.

    Port k receives ``rate_k * D`` consecutive jobs, D being the least
    common denominator; ports are served in ascending order.
    """
    d = _lcm(Fraction(r).denominator for r in rates)
    out: list[int] = []
    for port, r in enumerate(rates):
        out.extend([port] * int(Fraction(r) * d))
    return out


Decide = Callable[[str, Token], int]


class Executor:
    """Mutable executor over one ``TokenState``.

    ``decide(decider_id, data_token) -> mode index`` supplies mode-decider
    outputs. ``eager_joiner`` makes controlled joiners take whatever data
    is available; it exists only as a negative control for trace checks.
    """

    def __init__(
        self,
        spec: Spec,
        state: TokenState | None = None,
        *,
        decide: Decide | None = None,
        eager_joiner: bool = False,
        record: bool = True,
    ):
        self.spec = spec
        self.state = state if state is not None else initial_state(spec)
        self.modes = spec.mode_table.modes()
        self.decide = decide
        self.eager_joiner = eager_joiner
        self.record = record
        self.events: list[TraceEvent] = []
        self.decisions: list[tuple[str, int]] = []
        self.steps = 0
        self._ins = {a: spec.inputs(a) for a in spec.actor_ids}
        self._outs = {a: spec.outputs(a) for a in spec.actor_ids}
        self._kind = {a.id: a.kind for a in spec.actors}
        self._blocks: dict[str, list[int]] = {}
        for a in spec.actors:
            if a.kind is ActorKind.SPLITTER:
                self._blocks[a.id] = block_schedule([c.production.value for c in self._outs[a.id]])
            elif a.kind is ActorKind.JOINER:
                self._blocks[a.id] = block_schedule([c.consumption.value for c in self._ins[a.id]])

    # -- helpers ---------------------------------------------------------
    def _q(self, cid: str) -> deque:
        return self.state.queues[cid]

    def _need(self, c: Channel, job: int) -> int:
        rate = c.consumption
        if isinstance(rate, Param):
            raise ExecutionError(f"parametric consumption on {c.id} outside a controlled joiner")
        return tokens_at_job(job, -rate.value, c.initial_tokens)

    def _emit(self, c: Channel, job: int) -> int:
        rate = c.production
        if isinstance(rate, Param):
            raise ExecutionError(f"parametric production on {c.id} outside a controlled splitter")
        return tokens_at_job(job, rate.value, c.initial_tokens)

    def _log(self, actor, job, channel, action, token):
        if self.record:
            self.events.append(TraceEvent(self.steps, actor, job, channel, action, token))

    def _pop(self, actor, job, c: Channel, n: int) -> list[Token]:
        q = self._q(c.id)
        if len(q) < n:
            raise ExecutionError(f"negative queue on {c.id}")
        out = [q.popleft() for _ in range(n)]
        for t in out:
            self._log(actor, job, c.id, "consume", t)
        return out

    def _push(self, actor, job, c: Channel, tokens: Iterable[Token]) -> None:
        q = self._q(c.id)
        for t in tokens:
            q.append(t)
            self._log(actor, job, c.id, "produce", t)

    def _rate_under_mode(self, rate, mode_index: int | None) -> Fraction:
        if isinstance(rate, Const):
            return rate.value
        if mode_index is None or not self.modes:
            raise ExecutionError(f"parameter {rate.name} has no value without a mode")
        return Fraction(self.modes[mode_index][rate.name])

    def selected_port(self, actor_id: str, mode_index: int | None) -> int:
        if self._kind[actor_id] is ActorKind.CONTROLLED_SPLITTER:
            chans = [c for c in self._outs[actor_id] if not c.is_control]
            rates = [c.production for c in chans]
        else:
            chans = [c for c in self._ins[actor_id] if not c.is_control]
            rates = [c.consumption for c in chans]
        hits = [i for i, r in enumerate(rates) if self._rate_under_mode(r, mode_index) == 1]
        if len(hits) != 1:
            raise ExecutionError(f"{actor_id}: mode {mode_index} selects {len(hits)} branches")
        return hits[0]

    # -- eligibility -----------------------------------------------------
    def eligible(self, actor_id: str) -> bool:
        kind = self._kind[actor_id]
        job = self.state.job_counters[actor_id] + 1
        ins = self._ins[actor_id]
        if kind in (ActorKind.SPLITTER,):
            return len(self._q(ins[0].id)) >= 1
        if kind is ActorKind.JOINER:
            port = self._blocks[actor_id][(job - 1) % len(self._blocks[actor_id])]
            return len(self._q(ins[port].id)) >= 1
        if kind.is_controlled:
            st = self.state.controlled[actor_id]
            ctrl = [c for c in ins if c.is_control][0]
            data_ins = [c for c in ins if not c.is_control]
            if not st.has_consumed_ctrl_tkn:
                return len(self._q(ctrl.id)) >= 1
            if kind is ActorKind.CONTROLLED_SPLITTER:
                return len(self._q(data_ins[0].id)) >= 1
            if self.eager_joiner:
                return any(self._q(c.id) for c in data_ins)
            port = self.selected_port(actor_id, st.pending_mode)
            return len(self._q(data_ins[port].id)) >= 1
        if kind is ActorKind.MODE_DECIDER and self.decide is None and self.modes:
            return False
        return all(len(self._q(c.id)) >= self._need(c, job) for c in ins)

    def needs_decision(self, actor_id: str) -> bool:
        """True when a decider has its data but no decision source."""
        if self._kind[actor_id] is not ActorKind.MODE_DECIDER or self.decide is not None or not self.modes:
            return False
        job = self.state.job_counters[actor_id] + 1
        return all(len(self._q(c.id)) >= self._need(c, job) for c in self._ins[actor_id])

    # -- firing ----------------------------------------------------------
    def fire(self, actor_id: str) -> bool:
        """Execute one step of ``actor_id``; return True if a job completed.

        Controlled splitters/joiners take two steps per job: first the
        control token, then the data token.
        """
        if not self.eligible(actor_id):
            raise ExecutionError(f"{actor_id} is not eligible")
        self.steps += 1
        kind = self._kind[actor_id]
        counters = self.state.job_counters
        job = counters[actor_id] + 1
        ins, outs = self._ins[actor_id], self._outs[actor_id]

        if kind.is_controlled:
            st = self.state.controlled[actor_id]
            ctrl = [c for c in ins if c.is_control][0]
            data_ins = [c for c in ins if not c.is_control]
            data_outs = [c for c in outs if not c.is_control]
            if not st.has_consumed_ctrl_tkn:
                (tok,) = self._pop(actor_id, job, ctrl, 1)
                st.has_consumed_ctrl_tkn = True
                st.pending_mode = tok.mode
                return False
            if kind is ActorKind.CONTROLLED_SPLITTER:
                port = self.selected_port(actor_id, st.pending_mode)
                toks = self._pop(actor_id, job, data_ins[0], 1)
                self._push(actor_id, job, data_outs[port], toks)
            else:
                if self.eager_joiner:
                    port = next(i for i, c in enumerate(data_ins) if self._q(c.id))
                else:
                    port = self.selected_port(actor_id, st.pending_mode)
                toks = self._pop(actor_id, job, data_ins[port], 1)
                self._push(actor_id, job, data_outs[0], toks)
            st.has_consumed_ctrl_tkn = False
            st.pending_mode = None
            counters[actor_id] = job
            return True

        if kind is ActorKind.SPLITTER:
            blocks = self._blocks[actor_id]
            toks = self._pop(actor_id, job, ins[0], 1)
            self._push(actor_id, job, outs[blocks[(job - 1) % len(blocks)]], toks)
        elif kind is ActorKind.JOINER:
            blocks = self._blocks[actor_id]
            toks = self._pop(actor_id, job, ins[blocks[(job - 1) % len(blocks)]], 1)
            self._push(actor_id, job, outs[0], toks)
        elif kind is ActorKind.DUPLICATER:
            toks = self._pop(actor_id, job, ins[0], self._need(ins[0], job))
            for c in outs:
                self._push(actor_id, job, c, toks)
        elif kind is ActorKind.DISCARD:
            self._pop(actor_id, job, ins[0], self._need(ins[0], job))
        elif kind is ActorKind.MODE_DECIDER:
            consumed = []
            for c in ins:
                consumed += self._pop(actor_id, job, c, self._need(c, job))
            mode = self.decide(actor_id, consumed[-1] if consumed else INITIAL) if self.decide else 0
            self.decisions.append((actor_id, mode))
            for c in outs:
                self._push(actor_id, job, c, [Token("control", actor_id, job, mode)] * self._emit(c, job))
        else:
            for c in ins:
                self._pop(actor_id, job, c, self._need(c, job))
            for c in outs:
                self._push(actor_id, job, c, [Token("data", actor_id, job)] * self._emit(c, job))
        counters[actor_id] = job
        return True


def step(spec: Spec, state: TokenState, actor: str, decide: Decide | None = None) -> TokenState:
    """Functional single step: returns a new state, ``state`` is untouched."""
    ex = Executor(spec, state.copy(), decide=decide, record=False)
    ex.fire(actor)
    return ex.state


def sequence_decider(modes: Sequence[int]) -> Decide:
    it = iter(modes)

    def decide(decider, token):
        try:
            return next(it)
        except StopIteration:
            raise ModeSequenceExhausted(f"mode sequence exhausted at decider {decider}") from None

    return decide


def run_hyperperiod(
    spec: Spec,
    repetition: Mapping[str, int],
    mode_sequence: Sequence[int] | Mapping[str, Sequence[int]] = (),
    *,
    rng: random.Random | None = None,
    eager_joiner: bool = False,
    state: TokenState | None = None,
    record: bool = True,
    hyperperiods: int = 1,
) -> Trace:
    """Fire every actor exactly ``repetition[v]`` times, or report deadlock.

    Eligible actors are swept in actor-id order (shuffled per sweep when
    ``rng`` is given). ``mode_sequence`` gives one mode index per decider
    firing, either globally or per decider.
    """
    if isinstance(mode_sequence, Mapping):
        iters = {d: iter(seq) for d, seq in mode_sequence.items()}

        def decide(decider, token):
            try:
                return next(iters[decider])
            except (StopIteration, KeyError):
                raise ModeSequenceExhausted(f"mode sequence exhausted at decider {decider}") from None

    elif spec.mode_table.modes():
        decide = sequence_decider(list(mode_sequence))
    else:
        decide = None
    start = state.copy() if state is not None else initial_state(spec)
    ex = Executor(spec, start.copy(), decide=decide, eager_joiner=eager_joiner, record=record)
    targets = {a: int(repetition.get(a, 0)) for a in spec.actor_ids}
    order = sorted(spec.actor_ids)
    counters = ex.state.job_counters
    base = dict(counters)
    done = lambda a: counters[a] - base[a] >= targets[a]  # noqa: E731
    while True:
        if all(done(a) for a in order):
            break
        if rng is not None:
            rng.shuffle(order)
        progress = False
        for a in order:
            if not done(a) and ex.eligible(a):
                ex.fire(a)
                progress = True
        if not progress:
            fired = {a: counters[a] - base[a] for a in spec.actor_ids}
            return Trace(spec, ex.events, start, ex.state, targets, Deadlock(fired, targets, ex.state.lengths()), ex.decisions, hyperperiods)
    return Trace(spec, ex.events, start, ex.state, targets, None, ex.decisions, hyperperiods)


# ---------------------------------------------------------------------------
# pre-processing


@dataclass
class PreprocessReport:
    offline_jobs: dict[str, int]
    steps: int
    events: list[TraceEvent]

    @property
    def total_offline_jobs(self) -> int:
        return sum(self.offline_jobs.values())

    def to_dict(self) -> dict:
        return {"offline_jobs": self.offline_jobs, "steps": self.steps}


def _frac(x: Fraction) -> Fraction:
    return x - math.floor(x)


def _is_integral(rate) -> bool:
    return isinstance(rate, Param) or Fraction(rate.value).denominator == 1


def preprocess(
    spec: Spec,
    decider_policy: Callable[[Token], int] | Mapping[str, Callable[[Token], int]] | None = None,
) -> tuple[Spec, PreprocessReport]:
    """Run every offline-executable job and fold the result into the spec.

    Actors without inputs (sensors) never run offline. The returned spec
    carries the fixpoint token counts as initial tokens; the fractional part
    is shifted so that rate patterns continue where the offline jobs left
    them. ``decider_policy`` maps the consumed data token to a mode index,
    either for every decider or per decider id.
    """
    from .analysis import Consistent, consistency  # local import: analysis imports us
    from .model import all_params_one

    try:
        verdict = consistency(all_params_one(spec))
        budget = 10 * sum(verdict.repetition.counts.values()) if isinstance(verdict, Consistent) else 10_000
    except Exception:
        budget = 10_000
    if decider_policy is None:
        decide = None
    elif isinstance(decider_policy, Mapping):

        def decide(decider, token):
            if decider not in decider_policy:
                raise PreprocessError(f"no decider policy for {decider}")
            return decider_policy[decider](token)

    else:
        decide = lambda decider, token: decider_policy(token)  # noqa: E731
    ex = Executor(spec, decide=decide)
    order = sorted(a.id for a in spec.actors if spec.inputs(a.id))
    progress = True
    while progress:
        progress = False
        for a in order:
            if ex.needs_decision(a):
                raise PreprocessError(f"mode decider {a} can run offline but no decider policy was given")
            if ex.eligible(a):
                ex.fire(a)
                progress = True
                if ex.steps > budget:
                    raise PreprocessError(f"step budget {budget} exceeded; the spec does not reach a fixpoint")

    st = ex.state
    offsets = dict(st.job_counters)
    routing_periods = {a: len(b) for a, b in ex._blocks.items()}
    chans = []
    for c in spec.channels:
        whole = len(st.queues[c.id])
        consumer_state = st.controlled.get(c.consumer)
        if c.is_control and consumer_state is not None and consumer_state.has_consumed_ctrl_tkn:
            whole += 1  # half-finished controlled job: give the control token back
        r = c.phase_credit
        candidates = []
        kp, kc = offsets[c.producer], offsets[c.consumer]
        for actor, k in ((c.producer, kp), (c.consumer, kc)):
            if actor in routing_periods and k % routing_periods[actor]:
                raise PreprocessError(f"{actor} ran {k} offline jobs, not a whole routing period")
        if not _is_integral(c.production):
            candidates.append(_frac(kp * c.production.value + r))
        if not _is_integral(c.consumption):
            candidates.append(_frac(r - kc * c.consumption.value))
        if candidates and any(x != candidates[0] for x in candidates):
            raise PreprocessError(f"channel {c.id}: producer and consumer job offsets need different phase credit")
        new_r = candidates[0] if candidates else r
        chans.append(replace(c, initial_tokens=Fraction(whole) + new_r))
    offline = {a: n for a, n in offsets.items() if n}
    return replace(spec, channels=tuple(chans)), PreprocessReport(offline, ex.steps, ex.events)


def port_policy(spec: Spec, decider: str, port: int) -> Callable[[Token], int]:
    """Policy choosing the mode that activates output ``port`` of the
    controlled splitter(s) fed by ``decider``."""
    from .modes import controlled_targets

    splitters, _ = controlled_targets(spec, decider)
    if not splitters:
        raise ValueError(f"{decider} feeds no controlled splitter")
    outs = spec.data_outputs(splitters[0])
    if not 0 <= port < len(outs):
        raise ValueError(f"{splitters[0]} has no output port {port}")
    rate = outs[port].production
    for i, mode in enumerate(spec.mode_table.modes()):
        if isinstance(rate, Param) and mode.get(rate.name) == 1:
            return lambda token, i=i: i
    raise ValueError(f"no mode activates port {port} of {splitters[0]}")


# ---------------------------------------------------------------------------
# multi-hyperperiod simulation with mode changes


def simulate(
    spec: Spec,
    hyperperiods: int = 1,
    modes: Sequence[int] = (),
    *,
    rng: random.Random | None = None,
    eager_joiner: bool = False,
    record: bool = True,
) -> Trace:
    """Run ``hyperperiods`` hyperperiods, cycling ``modes`` over decider firings.

    Firing targets come from the per-mode repetition vectors: actors outside
    control areas fire ``hyperperiods * q`` times, branch actors once per
    token routed into their branch (scaled by their per-mode ratio).
    """
    from .analysis import Consistent, consistency
    from .modes import compute_control_areas, enumerate_mode_specs

    if not spec.has_params():
        verdict = consistency(spec)
        if not isinstance(verdict, Consistent):
            raise ExecutionError(f"spec is not consistent: {verdict.reason}")
        targets = {a: hyperperiods * n for a, n in verdict.repetition.counts.items()}
        return run_hyperperiod(spec, targets, rng=rng, eager_joiner=eager_joiner, record=record, hyperperiods=hyperperiods)

    all_modes = spec.mode_table.modes()
    areas = compute_control_areas(spec)
    per_mode = {}
    for i, (mode, mspec) in enumerate(enumerate_mode_specs(spec)):
        verdict = consistency(mspec)
        if not isinstance(verdict, Consistent):
            raise ExecutionError(f"mode {mode} is not consistent: {verdict.reason}")
        per_mode[i] = verdict.repetition.counts
    members = {m for area in areas for m in area.members}
    targets: dict[str, Fraction] = {}
    for a in spec.actor_ids:
        if a in members:
            continue
        counts = {per_mode[i].get(a) for i in per_mode}
        if len(counts) != 1 or None in counts:
            raise ExecutionError(f"{a} fires differently across modes: {counts}")
        targets[a] = Fraction(hyperperiods * counts.pop())
    seq = list(modes) or [0]
    if any(not 0 <= m < len(all_modes) for m in seq):
        raise ExecutionError(f"mode indices must lie in 0..{len(all_modes) - 1}")
    per_decider: dict[str, list[int]] = {}
    for area in areas:
        n = int(targets[area.decider])
        decisions = list(itertools.islice(itertools.cycle(seq), n))
        per_decider[area.decider] = decisions
        for m in area.members:
            total = Fraction(0)
            for d in decisions:
                q = per_mode[d]
                if m in q:
                    total += Fraction(q[m], q[area.decider])
            targets[m] = targets.get(m, Fraction(0)) + total
    for a, t in targets.items():
        if t.denominator != 1:
            raise ExecutionError(f"{a}: non-integral firing target {t}")
    int_targets = {a: int(t) for a, t in targets.items()}
    return run_hyperperiod(
        spec,
        int_targets,
        per_decider,
        rng=rng,
        eager_joiner=eager_joiner,
        record=record,
        hyperperiods=hyperperiods,
    )


# ---------------------------------------------------------------------------
# mode-change protocol checks


@dataclass
class McpReport:
    non_overlapping: bool
    periodic: bool
    late_retirement: bool
    details: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.non_overlapping and self.periodic and self.late_retirement

    def to_dict(self) -> dict:
        return {
            "non_overlapping": self.non_overlapping,
            "periodic": self.periodic,
            "late_retirement": self.late_retirement,
            "details": self.details,
        }


def _branch_of(rate) -> str | None:
    return rate.name if isinstance(rate, Param) else None


def check_mcp_properties(trace: Trace, areas, peers: Sequence[Trace] = ()) -> McpReport:
    """Check the non-overlapping / periodic / late-retirement properties."""
    spec = trace.spec
    modes = spec.mode_table.modes()
    details: list[str] = []
    non_overlapping = periodic = late = True

    by_actor: dict[str, list[TraceEvent]] = {}
    for ev in trace.events:
        by_actor.setdefault(ev.actor, []).append(ev)

    def moves(actor: str, action: str):
        """(mode of the governing control token, data channel) per job."""
        out, pending = [], None
        for ev in by_actor.get(actor, []):
            if ev.token.is_control and ev.action == "consume":
                if pending is not None:
                    out.append(("double-control", None))
                pending = ev.token.mode
            elif not ev.token.is_control and ev.action == action:
                out.append((pending, ev.channel))
                pending = None
        return out

    for area in areas:
        for cs in area.controlled_splitters:
            seq = moves(cs, "produce")
            for mode, ch in seq:
                if ch is None or mode is None:
                    non_overlapping = False
                    details.append(f"{cs}: data move not preceded by exactly one control token")
                    continue
                rate = spec.channel(ch).production
                if modes and isinstance(rate, Param) and modes[mode][rate.name] != 1:
                    non_overlapping = False
                    details.append(f"{cs}: token sent to {ch} while mode {mode} disables it")
        # a branch actor may only consume tokens routed into its own branch
        branch_of_member = {}
        for param, actors in area.branches:
            for m in actors:
                branch_of_member[m] = param
        for m, param in branch_of_member.items():
            for ev in by_actor.get(m, []):
                if ev.action == "consume" and not ev.token.is_control:
                    src = spec.channel(ev.channel).producer
                    if src in branch_of_member and branch_of_member[src] != param:
                        non_overlapping = False
                        details.append(f"{m} consumed a token from branch {branch_of_member[src]}")

        for cs in area.controlled_splitters:
            cs_seq = [_branch_of(spec.channel(ch).production) for _, ch in moves(cs, "produce") if ch]
            for cj in area.controlled_joiners:
                cj_moves = moves(cj, "consume")
                cj_seq = [_branch_of(spec.channel(ch).consumption) for _, ch in cj_moves if ch]
                if cj_seq != cs_seq[: len(cj_seq)]:
                    late = False
                    details.append(f"{cj} released branch tokens out of order: {cj_seq} vs {cs_seq[: len(cj_seq)]}")
                for mode, ch in cj_moves:
                    if ch is None or mode is None or not modes:
                        continue
                    rate = spec.channel(ch).consumption
                    if isinstance(rate, Param) and modes[mode][rate.name] != 1:
                        late = False
                        details.append(f"{cj}: took from {ch} while its control token selected another branch")
                        break

    members = {m for area in areas for m in area.members}
    outside = [a for a in spec.actor_ids if a not in members]
    counts = trace.firings()
    for peer in peers:
        pc = peer.firings()
        for a in outside:
            if counts.get(a) != pc.get(a):
                periodic = False
                details.append(f"{a} fired {counts.get(a)} vs {pc.get(a)} times under another mode sequence")
    if trace.deadlock is not None:
        periodic = False
        details.append("trace deadlocked")
    else:
        for a in outside:
            fired = counts[a] - trace.initial.job_counters.get(a, 0)
            if fired != trace.targets.get(a, fired):
                periodic = False
                details.append(f"{a} fired {fired}, expected {trace.targets[a]}")
    return McpReport(non_overlapping, periodic, late, details)
