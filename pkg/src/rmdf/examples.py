"""Bundled example specifications.

Each builder returns a fresh ``Spec``. ``EXAMPLES`` maps the file stem used
by ``rmdf examples`` to its builder.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Callable

from .model import Actor, ActorKind, Channel, Const, ExecTime, ModeTable, Param, Spec, Timing

K = ActorKind


def _rate(x):
    if isinstance(x, str) and not x[0].isdigit():
        return Param(x)
    return Const(Fraction(x))


class Builder:
    """Small helper that numbers ports in call order."""

    def __init__(self, name: str):
        self.name = name
        self.actors: list[Actor] = []
        self.channels: list[Channel] = []
        self._out = defaultdict(int)
        self._in = defaultdict(int)
        self.modes: list[dict[str, int]] = []

    def actor(self, aid, kind=K.USUAL, hz=None, phase="0", bcet=None, wcet=None):
        timing = Timing(Fraction(hz), Fraction(phase)) if hz is not None else None
        et = ExecTime(Fraction(bcet), Fraction(wcet)) if bcet is not None else None
        self.actors.append(Actor(aid, kind, timing, et))
        return self

    def chan(self, src, dst, prod="1", cons="1", init="0", control=False, cid=None):
        cid = cid or f"{src}->{dst}"
        self.channels.append(
            Channel(
                cid, src, self._out[src], dst, self._in[dst], _rate(prod), _rate(cons), Fraction(init), control
            )
        )
        self._out[src] += 1
        self._in[dst] += 1
        return self

    def build(self) -> Spec:
        return Spec(self.name, tuple(self.actors), tuple(self.channels), ModeTable.from_rows(self.modes))


# -- routing actors ------------------------------------------------------


def routing_splitter() -> Spec:
    b = Builder("splitter")
    b.actor("A").actor("Splitter", K.SPLITTER).actor("B").actor("C")
    b.chan("A", "Splitter").chan("Splitter", "B", "2/3", cid="c1").chan("Splitter", "C", "1/3", cid="c2")
    return b.build()


def routing_joiner() -> Spec:
    b = Builder("joiner")
    b.actor("A").actor("B").actor("Joiner", K.JOINER).actor("C")
    b.chan("A", "Joiner", cons="2/3", cid="c1").chan("B", "Joiner", cons="1/3", cid="c2").chan("Joiner", "C")
    return b.build()


def routing_duplicater() -> Spec:
    b = Builder("duplicater")
    b.actor("A").actor("Duplicater", K.DUPLICATER).actor("B").actor("C")
    b.chan("A", "Duplicater").chan("Duplicater", "B", cid="c1").chan("Duplicater", "C", cid="c2")
    return b.build()


def routing_discard() -> Spec:
    b = Builder("discard")
    b.actor("A").actor("Splitter", K.SPLITTER).actor("B").actor("Discard", K.DISCARD)
    b.chan("A", "Splitter").chan("Splitter", "B", "2/3", cid="c1").chan("Splitter", "Discard", "1/3", cid="c2")
    return b.build()


def routing_gallery() -> Spec:
    """Splitter, joiner, duplicater and discard in one connected spec."""
    b = Builder("routing_gallery")
    b.actor("Src").actor("Splitter", K.SPLITTER).actor("P").actor("Q")
    b.actor("Joiner", K.JOINER).actor("Duplicater", K.DUPLICATER).actor("Sink").actor("Discard", K.DISCARD)
    b.chan("Src", "Splitter")
    b.chan("Splitter", "P", "2/3").chan("Splitter", "Q", "1/3")
    b.chan("P", "Joiner", cons="2/3").chan("Q", "Joiner", cons="1/3")
    b.chan("Joiner", "Duplicater").chan("Duplicater", "Sink").chan("Duplicater", "Discard")
    return b.build()


# -- desugared counterparts ------------------------------------------------


def desugared_splitter() -> Spec:
    b = Builder("splitter_removed")
    b.actor("A").actor("B").actor("C")
    b.chan("A", "B", "2/3", init="2/3", cid="c1").chan("A", "C", "1/3", cid="c2")
    return b.build()


def desugared_joiner() -> Spec:
    b = Builder("joiner_removed")
    b.actor("A").actor("B").actor("C")
    b.chan("A", "C", cons="2/3", cid="c1").chan("B", "C", cons="1/3", init="2/3", cid="c2")
    return b.build()


def desugared_duplicater() -> Spec:
    b = Builder("duplicater_removed")
    b.actor("A").actor("B").actor("C")
    b.chan("A", "B", cid="c1").chan("A", "C", cid="c2")
    return b.build()


def desugared_discard() -> Spec:
    b = Builder("discard_removed")
    b.actor("A").actor("B")
    b.chan("A", "B", "2/3", init="2/3", cid="c1")
    return b.build()


# -- RMDF running example and its variants -----------------------------------

ONE_HOT_3 = [{"m1": 1, "m2": 0, "m3": 0}, {"m1": 0, "m2": 1, "m3": 0}, {"m1": 0, "m2": 0, "m3": 1}]


def _rmdf_frame(name: str) -> Builder:
    b = Builder(name)
    b.actor("A", hz=100).actor("Duplicater1", K.DUPLICATER).actor("B", K.MODE_DECIDER)
    b.actor("Duplicater2", K.DUPLICATER).actor("ControlledSplitter", K.CONTROLLED_SPLITTER)
    b.actor("ControlledJoiner", K.CONTROLLED_JOINER).actor("F", hz=100)
    b.chan("A", "Duplicater1").chan("Duplicater1", "ControlledSplitter").chan("Duplicater1", "B")
    b.chan("B", "Duplicater2", control=True)
    b.chan("Duplicater2", "ControlledSplitter", control=True).chan("Duplicater2", "ControlledJoiner", control=True)
    return b


def rmdf_example(n=2, name: str = "fig8_rmdf", cs_c1_cons: str = "1", modes=None) -> Spec:
    """Branches C, D, E between a controlled splitter and joiner.

    ``n`` is the branch length, either one int or a triple of lengths.
    """
    lengths = (n, n, n) if isinstance(n, int) else tuple(n)
    b = _rmdf_frame(name)
    for letter, size in zip("CDE", lengths):
        for i in range(1, size + 1):
            b.actor(f"{letter}{i}")
    for letter, p in zip("CDE", ("m1", "m2", "m3")):
        cons = cs_c1_cons if letter == "C" else "1"
        b.chan("ControlledSplitter", f"{letter}1", p, cons)
    for letter, size in zip("CDE", lengths):
        for i in range(1, size):
            b.chan(f"{letter}{i}", f"{letter}{i + 1}")
    for letter, p, size in zip("CDE", ("m1", "m2", "m3"), lengths):
        b.chan(f"{letter}{size}", "ControlledJoiner", "1", p)
    b.chan("ControlledJoiner", "F")
    b.modes = list(modes or ONE_HOT_3)
    return b.build()


def fig9a() -> Spec:
    """Extra channel from the first actor of branch C to the last of branch D."""
    s = rmdf_example(name="fig9a_r1")
    b = _extend(s)
    b.chan("C1", "D2")
    return b.build()


def fig9b() -> Spec:
    """Channels entering and leaving the control area."""
    b = _extend(rmdf_example(name="fig9b_r2"))
    b.chan("A", "C1").chan("C1", "F")
    return b.build()


def fig9c() -> Spec:
    """Single-actor branches at 25, 50 and 100 Hz."""
    b = _rmdf_frame("fig9c_r3")
    b.actor("C", hz=25).actor("D", hz=50).actor("E", hz=100)
    for letter, p in zip("CDE", ("m1", "m2", "m3")):
        b.chan("ControlledSplitter", letter, p)
    for letter, p in zip("CDE", ("m1", "m2", "m3")):
        b.chan(letter, "ControlledJoiner", "1", p)
    b.chan("ControlledJoiner", "F")
    b.modes = list(ONE_HOT_3)
    return b.build()


def fig9d() -> Spec:
    """Consumption rate 2 on the channel into C1."""
    return rmdf_example(name="fig9d_r4", cs_c1_cons="2")


def fig9e() -> Spec:
    """First mode row activates two branches at once."""
    rows = [{"m1": 1, "m2": 1, "m3": 0}, {"m1": 0, "m2": 1, "m3": 0}, {"m1": 0, "m2": 0, "m3": 1}]
    return rmdf_example(name="fig9e_r5", modes=rows)


def _extend(spec: Spec) -> Builder:
    b = Builder(spec.name)
    b.actors = list(spec.actors)
    b.channels = list(spec.channels)
    for c in spec.channels:
        b._out[c.producer] = max(b._out[c.producer], c.producer_port + 1)
        b._in[c.consumer] = max(b._in[c.consumer], c.consumer_port + 1)
    b.modes = [dict(r) for r in spec.mode_table.rows]
    return b


# -- Ingenuity vision processing ---------------------------------------------

BCET, WCET = "3/25", "1/5"


def ingenuity_polygraph() -> Spec:
    """Static approximation: one frame in ten feeds the pseudo landmarks."""
    b = Builder("ingenuity_polygraph")
    b.actor("Camera", hz=30).actor("FeatureDetection").actor("Splitter", K.SPLITTER)
    b.actor("PseudoLandmarks").actor("FeatureTracking").actor("FilteringProcedure")
    b.actor("Joiner", K.JOINER).actor("FeatureMatch", hz=30)
    b.chan("Camera", "FeatureDetection").chan("FeatureDetection", "Splitter")
    b.chan("Splitter", "PseudoLandmarks", "1/10", init="9/10").chan("Splitter", "FeatureTracking", "9/10")
    b.chan("FeatureTracking", "FeatureTracking", init="1").chan("FeatureTracking", "FilteringProcedure")
    b.chan("PseudoLandmarks", "Joiner", cons="1/10").chan("FilteringProcedure", "Joiner", cons="9/10", init="9/10")
    b.chan("Joiner", "FeatureMatch")
    return b.build()


def _ingenuity(name: str, modified: bool, times: bool) -> Spec:
    et = {"bcet": BCET, "wcet": WCET} if times else {}
    zero = {"bcet": "0", "wcet": "0"} if times else {}
    b = Builder(name)
    b.actor("Camera", hz=30, **et).actor("FeatureDetection", **et)
    b.actor("Duplicater1", K.DUPLICATER, **zero).actor("LabelDecider", K.MODE_DECIDER, **et)
    b.actor("Duplicater2", K.DUPLICATER, **zero).actor("ControlledSplitter", K.CONTROLLED_SPLITTER, **et)
    b.actor("PseudoLandmarks", **et).actor("FeatureTracking", **et).actor("FilteringProcedure", **et)
    b.actor("ControlledJoiner", K.CONTROLLED_JOINER, **et)
    if modified:
        b.actor("FeatureMatch", **et).actor("Motors", hz=500, phase="1", **et)
    else:
        b.actor("FeatureMatch", hz=30, **et)
    b.chan("Camera", "FeatureDetection").chan("FeatureDetection", "Duplicater1")
    b.chan("Duplicater1", "ControlledSplitter").chan("Duplicater1", "LabelDecider")
    b.chan("LabelDecider", "Duplicater2", control=True)
    b.chan("Duplicater2", "ControlledSplitter", control=True).chan("Duplicater2", "ControlledJoiner", control=True)
    b.chan("ControlledSplitter", "PseudoLandmarks", "m1").chan("ControlledSplitter", "FeatureTracking", "m2")
    b.chan("FeatureTracking", "FeatureTracking", init="1").chan("FeatureTracking", "FilteringProcedure")
    b.chan("PseudoLandmarks", "ControlledJoiner", "1", "m1").chan("FilteringProcedure", "ControlledJoiner", "1", "m2")
    b.chan("ControlledJoiner", "FeatureMatch")
    if modified:
        b.chan("FeatureMatch", "Motors", "1", "3/50", init="1/50")
    b.modes = [{"m1": 1, "m2": 0}, {"m1": 0, "m2": 1}]
    return b.build()


def ingenuity_rmdf() -> Spec:
    return _ingenuity("ingenuity_rmdf", modified=False, times=False)


def ingenuity_modified() -> Spec:
    """Motors at 500 Hz (phase 1 ms) behind a 3/50 rate, with execution times."""
    return _ingenuity("ingenuity_modified", modified=True, times=True)


EXAMPLES: dict[str, Callable[[], Spec]] = {
    "fig2a_splitter": routing_splitter,
    "fig2b_joiner": routing_joiner,
    "fig2c_duplicater": routing_duplicater,
    "fig2d_discard": routing_discard,
    "fig2_routing_gallery": routing_gallery,
    "fig5a_splitter_before": routing_splitter,
    "fig5a_splitter_after": desugared_splitter,
    "fig5b_joiner_before": routing_joiner,
    "fig5b_joiner_after": desugared_joiner,
    "fig5c_duplicater_before": routing_duplicater,
    "fig5c_duplicater_after": desugared_duplicater,
    "fig5d_discard_before": routing_discard,
    "fig5d_discard_after": desugared_discard,
    "fig8_rmdf": rmdf_example,
    "fig9a_r1": fig9a,
    "fig9b_r2": fig9b,
    "fig9c_r3": fig9c,
    "fig9d_r4": fig9d,
    "fig9e_r5": fig9e,
    "fig10a_rmdf": lambda: rmdf_example(name="fig10a_rmdf"),
    "ingenuity_polygraph": ingenuity_polygraph,
    "ingenuity_rmdf": ingenuity_rmdf,
    "ingenuity_modified": ingenuity_modified,
}

# before/after desugar pairs
DESUGAR_PAIRS = {
    "splitter": (routing_splitter, desugared_splitter),
    "joiner": (routing_joiner, desugared_joiner),
    "duplicater": (routing_duplicater, desugared_duplicater),
    "discard": (routing_discard, desugared_discard),
}
