"""Removal of splitters, joiners, duplicaters and discards.

Each routing actor is folded into the channels around it. The composed
channel reproduces, job by job, the tokens that would have travelled through
the routing actor; its rate and initial tokens come from the sequence
inverses of the rate engine.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import replace
from fractions import Fraction

from .execution import block_schedule
from .model import ActorKind, Channel, Const, Param, Spec, _renumber_ports, validate_structure
from .rates import (
    NotGenerable,
    consumption_sequence,
    cumulative_consumption,
    cumulative_production,
    production_sequence,
    rate_init_from_consumption_sequence,
    rate_init_from_production_sequence,
)


class DesugarError(ValueError):
    pass


class DeadBranchWarning(UserWarning):
    pass


def _const(rate, where: str) -> Fraction:
    if isinstance(rate, Param):
        raise DesugarError(f"parametric rate on {where}")
    return rate.value


def _routing(spec: Spec, actor_id: str) -> bool:
    return spec.actor(actor_id).kind.is_routing


def _same_consumption(rate: Fraction, r_old: Fraction, r_new: Fraction) -> bool:
    if rate.denominator == 1:
        return True
    n = rate.denominator
    return consumption_sequence(rate, r_old, n) == consumption_sequence(rate, r_new, n)


def _same_production(rate: Fraction, r_old: Fraction, r_new: Fraction) -> bool:
    if rate.denominator == 1:
        return True
    n = rate.denominator
    return production_sequence(rate, r_old, n) == production_sequence(rate, r_new, n)


def _port_key(base: int, sub: int) -> int:
    # temporary port that sorts the replacements where the old channel was
    return base * 10_000 + sub


def _remove_splitter(spec: Spec, sid: str) -> list[Channel]:
    (cin,) = spec.inputs(sid)
    outs = spec.outputs(sid)
    g0 = _const(cin.production, cin.id)
    r0, w0 = cin.phase_credit, cin.whole_tokens
    rates = [_const(c.production, c.id) for c in outs]
    blocks = block_schedule(rates)
    d = len(blocks)
    period = g0.denominator * d
    new = []
    for k, c in enumerate(outs):
        seq = []
        for n in range(1, period + 1):
            lo = w0 + cumulative_production(n - 1, g0, r0)
            hi = w0 + cumulative_production(n, g0, r0)
            seq.append(sum(1 for t in range(lo + 1, hi + 1) if blocks[(t - 1) % d] == k))
        if not any(seq):
            raise DesugarError(f"splitter {sid}: output {c.id} never receives tokens")
        try:
            rate, r_new = rate_init_from_production_sequence(seq)
        except NotGenerable as exc:
            raise DesugarError(f"splitter {sid}: composed pattern on {c.id} is not a rational rate ({exc})") from None
        routed_init = sum(1 for t in range(1, w0 + 1) if blocks[(t - 1) % d] == k)
        cons = _const(c.consumption, c.id)
        if not _routing(spec, c.consumer) and not _same_consumption(cons, c.phase_credit, r_new):
            raise DesugarError(f"splitter {sid}: consumer side of {c.id} cannot keep its phase")
        new.append(
            replace(
                c,
                producer=cin.producer,
                producer_port=_port_key(cin.producer_port, k),
                production=Const(rate),
                initial_tokens=Fraction(c.whole_tokens + routed_init) + r_new,
            )
        )
    return new


def _remove_joiner(spec: Spec, jid: str) -> list[Channel]:
    (cout,) = spec.outputs(jid)
    ins = spec.inputs(jid)
    if cout.whole_tokens:
        raise DesugarError(f"joiner {jid}: initial tokens on its output {cout.id} cannot be attributed to an input")
    delta = _const(cout.consumption, cout.id)
    r_out = cout.phase_credit
    rates = [_const(c.consumption, c.id) for c in ins]
    blocks = block_schedule(rates)
    d = len(blocks)
    period = delta.denominator * d
    new = []
    for k, c in enumerate(ins):
        seq = []
        for n in range(1, period + 1):
            lo = cumulative_consumption(n - 1, delta, r_out)
            hi = cumulative_consumption(n, delta, r_out)
            seq.append(sum(1 for t in range(lo + 1, hi + 1) if blocks[(t - 1) % d] == k))
        if not any(seq):
            raise DesugarError(f"joiner {jid}: input {c.id} is never read")
        try:
            rate, r_new = rate_init_from_consumption_sequence(seq)
        except NotGenerable as exc:
            raise DesugarError(f"joiner {jid}: composed pattern on {c.id} is not a rational rate ({exc})") from None
        prod = _const(c.production, c.id)
        if not _routing(spec, c.producer) and not _same_production(prod, c.phase_credit, r_new):
            raise DesugarError(f"joiner {jid}: producer side of {c.id} cannot keep its phase")
        new.append(
            replace(
                c,
                consumer=cout.consumer,
                consumer_port=_port_key(cout.consumer_port, k),
                consumption=Const(rate),
                initial_tokens=Fraction(c.whole_tokens) + r_new,
            )
        )
    return new


def _remove_duplicater(spec: Spec, did: str) -> list[Channel]:
    (cin,) = spec.inputs(did)
    prod = _const(cin.production, cin.id)
    new = []
    for k, c in enumerate(spec.outputs(did)):
        cons = _const(c.consumption, c.id)
        prod_cares = prod.denominator != 1 and not _routing(spec, cin.producer)
        cons_cares = cons.denominator != 1 and not _routing(spec, c.consumer)
        if prod_cares and cons_cares and cin.phase_credit != c.phase_credit:
            raise DesugarError(f"duplicater {did}: {cin.id} and {c.id} carry different phase credit")
        r = cin.phase_credit if prod_cares else c.phase_credit
        new.append(
            replace(
                c,
                producer=cin.producer,
                producer_port=_port_key(cin.producer_port, k),
                production=cin.production,
                initial_tokens=Fraction(cin.whole_tokens + c.whole_tokens) + r,
            )
        )
    return new


def _hoist_duplicater(spec: Spec, did: str) -> Spec | None:
    """Rewrite joiner -> duplicater -> {Y_k} as one joiner copy per Y_k.

    Each joiner input is then read by every copy, which a plain producer
    does by emitting on one extra channel per copy. Returns None when the
    shape does not apply.
    """
    (cin,) = spec.inputs(did)
    jid = cin.producer
    if spec.actor(jid).kind is not ActorKind.JOINER or cin.whole_tokens:
        return None
    j_ins = spec.inputs(jid)
    if any(_routing(spec, c.producer) for c in j_ins):
        return None
    actors = [a for a in spec.actors if a.id not in (jid, did)]
    kept = [c for c in spec.channels if jid not in (c.producer, c.consumer) and did not in (c.producer, c.consumer)]
    new = []
    for k, out in enumerate(spec.outputs(did)):
        copy = f"{jid}#{k + 1}"
        actors.append(replace(spec.actor(jid), id=copy))
        for i, c in enumerate(j_ins):
            new.append(replace(c, id=f"{c.id}#{k + 1}", producer_port=_port_key(c.producer_port, k), consumer=copy))
        new.append(
            replace(
                out,
                producer=copy,
                producer_port=0,
                production=cin.production,
                initial_tokens=out.initial_tokens + cin.phase_credit,
            )
        )
    return replace(spec, actors=tuple(actors), channels=tuple(_renumber_ports(kept + new)))


def _removable(spec: Spec, actor_id: str) -> bool:
    kind = spec.actor(actor_id).kind
    if kind is ActorKind.JOINER:
        consumer = spec.outputs(actor_id)[0].consumer
        return not _routing(spec, consumer) or spec.actor(consumer).kind is ActorKind.DISCARD
    return not _routing(spec, spec.inputs(actor_id)[0].producer)


def remove_routing_actors(spec: Spec, rng: random.Random | None = None) -> Spec:
    """Return an equivalent spec without splitters, joiners, duplicaters or discards.

    Splitters, duplicaters and discards are removed once their producer is a
    plain actor; joiners once their consumer is. A chain where neither side
    can go first (a joiner feeding a splitter) is rejected. ``rng`` picks
    among removable actors at random instead of in declaration order; the
    result does not depend on the choice.
    """
    bad = [a.id for a in spec.actors if a.kind.is_controlled or a.kind is ActorKind.MODE_DECIDER]
    if bad:
        raise DesugarError(f"controlled actors cannot be desugared: {bad}")
    violations = validate_structure(spec)
    if violations:
        raise DesugarError("invalid structure: " + "; ".join(f"{v.rule} at {v.element}" for v in violations))

    original_ids = set(spec.actor_ids)
    while True:
        pending = [a.id for a in spec.actors if a.kind.is_routing]
        if not pending:
            break
        ready = [a for a in pending if _removable(spec, a)]
        if not ready:
            hoisted = None
            for a in pending:
                if spec.actor(a).kind is ActorKind.DUPLICATER:
                    hoisted = _hoist_duplicater(spec, a)
                    if hoisted is not None:
                        break
            if hoisted is not None:
                spec = hoisted
                continue
            raise DesugarError(f"routing actors form a chain with no removable end: {pending}")
        aid = rng.choice(ready) if rng is not None else ready[0]
        kind = spec.actor(aid).kind
        if kind is ActorKind.SPLITTER:
            new = _remove_splitter(spec, aid)
        elif kind is ActorKind.JOINER:
            sink = spec.outputs(aid)[0].consumer
            if spec.actor(sink).kind is ActorKind.DISCARD:
                # everything the joiner reads is thrown away
                spec = replace(
                    spec,
                    actors=tuple(a for a in spec.actors if a.id != sink),
                    channels=tuple(c for c in spec.channels if sink not in (c.producer, c.consumer)),
                )
                new = []
            else:
                new = _remove_joiner(spec, aid)
        elif kind is ActorKind.DUPLICATER:
            new = _remove_duplicater(spec, aid)
        else:
            new = []
        kept = [c for c in spec.channels if c.producer != aid and c.consumer != aid]
        chans = _renumber_ports(kept + new)
        spec = replace(spec, actors=tuple(a for a in spec.actors if a.id != aid), channels=tuple(chans))

    touched = {c.producer for c in spec.channels} | {c.consumer for c in spec.channels}
    for a in spec.actors:
        if a.id in original_ids and a.id not in touched and len(spec.actors) > 1:
            warnings.warn(f"{a.id} lost all its channels (dead branch)", DeadBranchWarning, stacklevel=2)
    return spec
