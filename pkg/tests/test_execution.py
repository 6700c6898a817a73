import io
import json
import random
from dataclasses import replace
from fractions import Fraction

import pytest

from rmdf.examples import EXAMPLES, Builder, rmdf_example
from rmdf.execution import (
    ExecutionError,
    PreprocessError,
    block_schedule,
    check_mcp_properties,
    initial_state,
    port_policy,
    preprocess,
    run_hyperperiod,
    simulate,
    step,
)
from rmdf.model import ActorKind as K
from rmdf.modes import compute_control_areas


def consumed(trace, actor):
    return [e.token.label() for e in trace.events if e.action == "consume" and e.actor == actor]


def test_block_schedule_follows_numerators():
    assert block_schedule([Fraction(2, 3), Fraction(1, 3)]) == [0, 0, 1]
    assert block_schedule([Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)]) == [0, 0, 0, 1, 1, 2]


def test_splitter_distributes_in_blocks():
    t = simulate(EXAMPLES["fig2a_splitter"](), 2)
    assert consumed(t, "B") == ["A#1", "A#2", "A#4", "A#5"]
    assert consumed(t, "C") == ["A#3", "A#6"]


def test_joiner_reads_in_blocks():
    t = simulate(EXAMPLES["fig2b_joiner"](), 2)
    assert consumed(t, "C") == ["A#1", "A#2", "B#1", "A#3", "A#4", "B#2"]


def test_duplicater_copies_everything():
    t = simulate(EXAMPLES["fig2c_duplicater"](), 3)
    assert consumed(t, "B") == consumed(t, "C") == ["A#1", "A#2", "A#3"]


def test_step_is_functional():
    spec = EXAMPLES["fig2a_splitter"]()
    s0 = initial_state(spec)
    s1 = step(spec, s0, "A")
    assert s0.lengths()["A->Splitter"] == 0
    assert s1.lengths()["A->Splitter"] == 1
    with pytest.raises(ExecutionError):
        step(spec, s0, "B")


def test_live_chain_restores_state():
    b = Builder("chain")
    b.actor("A").actor("B").chan("A", "B")
    spec = b.build()
    t = run_hyperperiod(spec, {"A": 1, "B": 1})
    assert t.completed and len(t.firings()) == 2
    assert t.final.signature() == t.initial.signature()


def test_zero_token_cycle_deadlocks():
    b = Builder("cycle")
    b.actor("A").actor("B").chan("A", "B").chan("B", "A")
    t = run_hyperperiod(b.build(), {"A": 1, "B": 1})
    assert not t.completed
    assert t.deadlock.fired == {"A": 0, "B": 0}


def test_jsonl_trace():
    t = simulate(EXAMPLES["fig2a_splitter"](), 1)
    buf = io.StringIO()
    t.write_jsonl(buf)
    lines = [json.loads(x) for x in buf.getvalue().splitlines()]
    assert len(lines) == len(t.events)
    assert lines[0]["action"] == "produce" and lines[0]["actor"] == "A"


def test_preprocess_runs_enabled_job_once():
    b = Builder("pre")
    b.actor("S", hz=10).actor("A").actor("B")
    b.chan("S", "A").chan("A", "B", init="1")
    out, report = preprocess(b.build())
    assert report.offline_jobs == {"B": 1}
    assert out.channel("A->B").initial_tokens == 0


def test_preprocess_leaves_ingenuity_untouched():
    spec = EXAMPLES["ingenuity_modified"]()
    out, report = preprocess(spec)
    assert report.total_offline_jobs == 0
    assert out == spec


def test_preprocess_needs_policy_for_enabled_decider():
    spec = EXAMPLES["ingenuity_rmdf"]()
    chans = tuple(
        replace(c, initial_tokens=Fraction(1)) if c.id == "Duplicater1->LabelDecider" else c for c in spec.channels
    )
    spec = spec.replace(channels=chans)
    with pytest.raises(PreprocessError, match="policy"):
        preprocess(spec)
    out, report = preprocess(spec, {"LabelDecider": port_policy(spec, "LabelDecider", 1)})
    assert report.offline_jobs["LabelDecider"] == 1


def test_preprocess_budget_trips_on_free_running_cycle():
    # U only waits on its own self-loop, so it could fire offline forever
    b = Builder("free")
    b.actor("S", hz=10).actor("U").actor("V")
    b.chan("S", "V").chan("U", "U", init="1").chan("U", "V", cons="1/2")
    with pytest.raises(PreprocessError, match="budget"):
        preprocess(b.build())


def test_port_policy_maps_ports_to_modes():
    spec = EXAMPLES["ingenuity_rmdf"]()
    assert port_policy(spec, "LabelDecider", 0)(None) == 0
    assert port_policy(spec, "LabelDecider", 1)(None) == 1
    with pytest.raises(ValueError):
        port_policy(spec, "LabelDecider", 5)


@pytest.mark.parametrize("modes", [[0, 1, 2, 1], [2, 2, 0, 1, 0], [1, 0]])
def test_fig8_traces_satisfy_mcp(modes):
    spec = rmdf_example((3, 1, 2))
    areas = compute_control_areas(spec)
    for seed in range(5):
        t = simulate(spec, 4, modes, rng=random.Random(seed))
        assert t.completed
        assert check_mcp_properties(t, areas).ok


def test_mode_sequence_drives_branch_firings():
    t = simulate(rmdf_example(2), 3, [0, 2, 2])
    fired = t.firings()
    assert fired["C1"] == 1 and fired["D1"] == 0 and fired["E1"] == 2


def test_eager_joiner_breaks_late_retirement():
    spec = rmdf_example((3, 1, 2))
    areas = compute_control_areas(spec)
    failures = 0
    for seed in range(20):
        t = simulate(spec, 4, [0, 1, 2, 1], rng=random.Random(seed), eager_joiner=True)
        rep = check_mcp_properties(t, areas)
        failures += not rep.late_retirement
    assert failures > 0


def test_bad_mode_index_is_rejected():
    with pytest.raises(ExecutionError):
        simulate(rmdf_example(2), 1, [7])


def test_joiner_waits_on_its_block():
    b = Builder("j")
    b.actor("A").actor("B").actor("J", K.JOINER).actor("C")
    b.chan("A", "J", cons="1/2").chan("B", "J", cons="1/2").chan("J", "C")
    t = run_hyperperiod(b.build(), {"A": 0, "B": 1, "J": 1, "C": 0})
    assert not t.completed  # block 1 belongs to A
