"""Random spec generators and independent oracles shared by the tests."""

from __future__ import annotations

import random
from collections import defaultdict
from fractions import Fraction

from rmdf.analysis import Consistent, consistency, token_period
from rmdf.examples import Builder
from rmdf.execution import initial_state, run_hyperperiod
from rmdf.model import ActorKind as K
from rmdf.timing import UNBOUNDED

# -- random routed specs (splitters, joiners, duplicaters, discards) ---------


def _split_rates(rng: random.Random, k: int) -> list[Fraction]:
    den = rng.randint(k, 6)
    cuts = sorted(rng.sample(range(1, den), k - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
    return [Fraction(p, den) for p in parts]


def random_routed_spec(rng: random.Random, max_actors: int = 8):
    """A connected acyclic spec built from routing gadgets hung off usual actors.

    Gadgets: plain channel, splitter fan-out (optionally re-joined or with a
    discard branch) and duplicater fan-out. A joiner never feeds a splitter.
    """
    b = Builder(f"routed_{rng.randrange(10**6)}")
    count = 0

    def new(kind=K.USUAL):
        nonlocal count
        count += 1
        prefix = {K.USUAL: "U", K.SPLITTER: "S", K.JOINER: "J", K.DUPLICATER: "D", K.DISCARD: "X"}[kind]
        aid = f"{prefix}{count}"
        b.actor(aid, kind)
        return aid

    def init():
        return rng.choice(["0", "0", "0", "1", "1/2", "1/3", "2/3"])

    frontier = [new()]
    while count < max_actors - 1:
        x = rng.choice(frontier)
        gadget = rng.choice(["plain", "split", "split_join", "dup", "discard"])
        room = max_actors - count
        if gadget == "plain" or room < 3:
            y = new()
            p = Fraction(rng.randint(1, 4), rng.randint(1, 4))
            b.chan(x, y, str(p), str(Fraction(rng.randint(1, 4), rng.randint(1, 4))), init())
            frontier.append(y)
        elif gadget == "dup":
            d = new(K.DUPLICATER)
            b.chan(x, d, init=init())
            for _ in range(min(rng.randint(2, 3), max_actors - count)):
                y = new()
                b.chan(d, y)
                frontier.append(y)
        elif gadget in ("split", "discard"):
            k = min(rng.randint(2, 3), room - 1)
            if k < 2:
                break
            s = new(K.SPLITTER)
            b.chan(x, s, init=init())
            rates = _split_rates(rng, k)
            for i, r in enumerate(rates):
                if gadget == "discard" and i == k - 1:
                    y = new(K.DISCARD)
                    b.chan(s, y, str(r), init=rng.choice(["0", str(r)]) if r < 1 else "0")
                else:
                    y = new()
                    b.chan(s, y, str(r), init=rng.choice(["0", "0", str(r)]))
                    frontier.append(y)
        else:  # split_join
            k = 2
            if room < 2 + k + 1:
                y = new()
                b.chan(x, y)
                frontier.append(y)
                continue
            s = new(K.SPLITTER)
            b.chan(x, s, init=init())
            rates = _split_rates(rng, k)
            mids = []
            for r in rates:
                y = new()
                b.chan(s, y, str(r))
                mids.append(y)
            j = new(K.JOINER)
            for y, r in zip(mids, rates):
                b.chan(y, j, "1", str(r), init=rng.choice(["0", "0", str(1 - r)]))
            if max_actors - count >= 3 and rng.random() < 0.4:
                d = new(K.DUPLICATER)
                b.chan(j, d)
                for _ in range(2):
                    z = new()
                    b.chan(d, z, init=rng.choice(["0", "1"]))
                    frontier.append(z)
            else:
                z = new()
                b.chan(j, z)
                frontier.append(z)
    return b.build()


def repetition(spec):
    """Repetition vector scaled so one iteration restores the token state."""
    v = consistency(spec)
    if not isinstance(v, Consistent):
        return None
    scale = token_period(spec, v.repetition.counts)
    return {a: n * scale for a, n in v.repetition.counts.items()}


def consumed_labels(spec, hyperperiods: int = 3):
    """Per non-routing actor: the token origins consumed by each job.

    Routing actors forward tokens untouched, so origins survive routing and
    can be compared between a routed spec and its desugared form.
    """
    q = repetition(spec)
    trace = run_hyperperiod(spec, {a: hyperperiods * n for a, n in q.items()})
    assert trace.deadlock is None, trace.deadlock
    routing = {a.id for a in spec.actors if a.kind.is_routing}
    out: dict[str, dict[int, list[str]]] = defaultdict(lambda: defaultdict(list))
    for ev in trace.events:
        if ev.action == "consume" and ev.actor not in routing:
            out[ev.actor][ev.job].append(ev.token.label())
    return {a: {j: sorted(v) for j, v in jobs.items()} for a, jobs in out.items()}, q


# -- random well-defined timed specs ----------------------------------------


def random_timed_spec(rng: random.Random, max_actors: int = 6):
    """Connected spec of usual actors with rates of denominator at most 6.

    Rates follow from a random repetition vector and per-channel token
    counts, so the spec is consistent by construction. Back channels carry
    a full hyperperiod of tokens to stay live.
    """
    n = rng.randint(2, max_actors)
    ids = [f"V{i}" for i in range(n)]
    q = {a: rng.randint(1, 6) for a in ids}
    H = Fraction(rng.choice([6, 10, 12, 30, 60]))
    edges = []
    for i in range(1, n):
        edges.append((ids[rng.randrange(i)], ids[i]))
    for _ in range(rng.randint(0, 2)):
        u, v = rng.sample(ids, 2)
        if v != ids[0]:  # V0 stays the source, so every cycle waits on it
            edges.append((u, v))
    outs = {u for u, _ in edges}
    ins = {v for _, v in edges}
    b = Builder(f"timed_{rng.randrange(10**6)}")
    for a in ids:
        timed = a not in ins or a not in outs or rng.random() < 0.25
        bcet = Fraction(rng.randint(0, 4), rng.choice([5, 10, 25]))
        wcet = bcet + Fraction(rng.randint(0, 4), rng.choice([5, 10, 25]))
        hz = Fraction(1000 * q[a]) / H if timed else None
        phase = Fraction(rng.randint(0, 3), rng.choice([1, 2, 5])) if timed else "0"
        b.actor(a, hz=hz, phase=phase, bcet=bcet, wcet=wcet)
    order = {a: i for i, a in enumerate(ids)}
    for u, v in edges:
        tokens = rng.randint(1, 6)
        prod, cons = Fraction(tokens, q[u]), Fraction(tokens, q[v])
        if order[u] < order[v]:
            init = Fraction(rng.randint(0, 1)) + Fraction(rng.randint(0, 5), 6)
        else:
            init = Fraction(tokens) + Fraction(rng.randint(0, 5), 6)
        b.chan(u, v, str(prod), str(cons), str(init), cid=f"{u}->{v}#{len(b.channels)}")
    return b.build()


# -- brute-force timing oracle ----------------------------------------------


def provenance_windows(spec, hyperperiods: int = 3):
    """Windows from an explicit job dependency graph built off a recorded run.

    The k-th token consumed on a channel is matched with the k-th token
    produced on it (after the initial whole tokens). Release and deadline
    bounds are then propagated over the unrolled job graph.
    """
    q = repetition(spec)
    trace = run_hyperperiod(spec, {a: hyperperiods * n for a, n in q.items()})
    assert trace.deadlock is None
    init = initial_state(spec)
    produced = defaultdict(list)  # channel -> [producer job per token]
    consumed = defaultdict(list)  # channel -> [consumer job per token]
    for ev in trace.events:
        (produced if ev.action == "produce" else consumed)[ev.channel].append(ev.job)
    whole = {c.id: len(init.queues[c.id]) for c in spec.channels}
    actors = {a.id: a for a in spec.actors}
    jobs = {a: hyperperiods * n for a, n in q.items()}

    def token_producer(c, idx):  # idx is 1-based over the channel's token stream
        k = idx - whole[c.id]
        return produced[c.id][k - 1] if 0 < k <= len(produced[c.id]) else None

    def first_token_of(c, job):
        before = sum(1 for j in produced[c.id] if j < job)
        return whole[c.id] + before + 1

    def consumer_of(c, idx):
        return consumed[c.id][idx - 1] if idx <= len(consumed[c.id]) else None

    def cum_consumed(c, job):
        return sum(1 for j in consumed[c.id] if j <= job)

    rel = {}
    def release(v, p, memo=rel):
        if (v, p) in memo:
            return memo[(v, p)]
        a = actors[v]
        bcet = a.exec_time.bcet_ms if a.exec_time else Fraction(0)
        vals = []
        if a.timing is not None:
            vals.append(a.timing.period_ms * (p - 1) + a.timing.phase_ms)
        for c in spec.inputs(v):
            n_tok = cum_consumed(c, p)
            a1 = token_producer(c, n_tok)
            if a1 is None:
                continue
            b1 = consumer_of(c, first_token_of(c, a1))
            u = actors[c.producer]
            ub = u.exec_time.bcet_ms if u.exec_time else Fraction(0)
            vals.append(release(c.producer, a1) + ub + (p - b1) * bcet)
        memo[(v, p)] = max(vals) if vals else Fraction(0)
        return memo[(v, p)]

    dl = {}

    def deadline(v, n, memo=dl):
        if (v, n) in memo:
            return memo[(v, n)]
        a = actors[v]
        wcet = a.exec_time.wcet_ms if a.exec_time else Fraction(0)
        vals = []
        if a.timing is not None:
            vals.append(a.timing.period_ms * n + a.timing.phase_ms)
        for c in spec.outputs(v):
            a2 = consumer_of(c, first_token_of(c, n))
            if a2 is None:
                continue
            b2 = token_producer(c, cum_consumed(c, a2))
            w = actors[c.consumer]
            cw = w.exec_time.wcet_ms if w.exec_time else Fraction(0)
            d = deadline(c.consumer, a2)
            if d is not UNBOUNDED:
                vals.append(d - cw - (b2 - n) * wcet)
        memo[(v, n)] = min(vals) if vals else UNBOUNDED
        return memo[(v, n)]

    return q, jobs, release, deadline
