import json

import pytest

from counterlab.executor import RunBudget, decide, runtime_max
from counterlab.machines import (
    BOTTOM,
    MachineSpec,
    StackSpec,
    TransitionRule,
    normalize_slim,
    step_relation,
    validate_machine,
)
from counterlab.pdcomplement import (
    ConfInterval,
    IntervalSpace,
    PdError,
    PdSurface,
    cnd1,
    cnd2,
    complement_decide_pd,
    enumerate_intervals,
    initial_surface,
    final_surface,
)

from genmachines import all_inputs, gen_npdcta

BUDGET = RunBudget(steps=400)
R = TransitionRule


def _slim_fixture():
    """Small deterministic pushdown machine, slim-normalized: accepts strings
    whose first symbol is 0."""
    rules = (
        R("q0", ">", (), None, "q1", 1, (), ("push", ("a",))),
        R("q1", "0", (), "a", "acc", 0, (), ("pop",)),
        R("q1", "1", (), "a", "rej", 0, (), ("pop",)),
        R("q1", "<", (), "a", "rej", 0, (), ("pop",)),
    )
    spec = MachineSpec("first0", "deterministic", ("q0", "q1", "acc", "rej"),
                       ("0", "1"), 0, StackSpec((BOTTOM, "a"), 1), "q0",
                       frozenset({"acc"}), frozenset({"rej"}), rules)
    validate_machine(spec)
    return normalize_slim(spec)


def _slim_trivial(accept_all: bool):
    name = "acc" if accept_all else "rej"
    spec = MachineSpec(f"always_{name}", "deterministic", ("acc", "rej"), ("0",),
                       0, StackSpec((BOTTOM, "a"), 1),
                       "acc" if accept_all else "rej",
                       frozenset({"acc"}), frozenset({"rej"}), ())
    validate_machine(spec)
    return spec


def _witness_surfaces(spec, x):
    """Accepting path of the slim fixture with stack heights, as surfaces."""
    v = decide(spec, x, BUDGET)
    assert v.outcome == "accept"
    return v.witness, [PdSurface.of(c) for c in v.witness]


def _returns(witness, lo, hi):
    """Interior visits to the base height strictly between lo and hi."""
    base = len(witness[lo].stack)
    return sum(1 for i in range(lo + 1, hi)
               if len(witness[i].stack) == base)


# --- CND predicates ----------------------------------------------------------


def test_cnd1_true_on_trace_peel():
    spec = _slim_fixture()
    x = "0"
    witness, surf = _witness_surfaces(spec, x)
    t = len(witness) - 1
    eta = ConfInterval(surf[0], 0, surf[t], t, 0)
    s1 = _returns(witness, 1, t - 1)
    eta1 = ConfInterval(surf[1], s1, surf[t - 1], t - 2, 1)
    assert cnd1(eta, eta1, spec, x)


def test_cnd1_false_on_wrong_distance():
    spec = _slim_fixture()
    x = "0"
    witness, surf = _witness_surfaces(spec, x)
    t = len(witness) - 1
    eta = ConfInterval(surf[0], 0, surf[t], t, 0)
    eta1 = ConfInterval(surf[1], 0, surf[t - 1], t - 3, 1)
    assert not cnd1(eta, eta1, spec, x)


def test_cnd1_distance_two_forces_zero():
    spec = _slim_fixture()
    x = "0"
    witness, surf = _witness_surfaces(spec, x)
    # find a push immediately undone by a pop
    for i in range(len(witness) - 2):
        if (len(witness[i + 1].stack) == len(witness[i].stack) + 1
                and len(witness[i + 2].stack) == len(witness[i].stack)):
            eta = ConfInterval(surf[i], 0, surf[i + 2], 2, 3)
            eta1 = ConfInterval(surf[i + 1], 0, surf[i + 1], 0, 4)
            assert cnd1(eta, eta1, spec, x)
            return
    pytest.skip("fixture trace has no immediate push/pop bump")


def test_cnd1_requires_basic_shape():
    spec = _slim_fixture()
    s = initial_surface(spec)
    with pytest.raises(PdError):
        cnd1(ConfInterval(s, 1, s, 4, 0), ConfInterval(s, 0, s, 2, 1), spec, "0")
    with pytest.raises(PdError):
        cnd1(ConfInterval(s, 0, s, 1, 0), ConfInterval(s, 0, s, 0, 1), spec, "0")


def test_cnd2_true_on_trace_split():
    """Split a same-level trace segment at its first return."""
    spec = _slim_fixture()
    x = "01"
    witness, surf = _witness_surfaces(spec, x)
    t = len(witness) - 1
    # the interior segment [1, t-1] sits one level up; find its returns
    base = len(witness[1].stack)
    returns = [i for i in range(2, t - 1) if len(witness[i].stack) == base]
    if not returns:
        pytest.skip("fixture trace has no interior return")
    s = len(returns)
    eta = ConfInterval(surf[1], s, surf[t - 1], t - 2, 1)
    mid = returns[0]
    eta1 = ConfInterval(surf[1], 0, surf[mid], mid - 1, 1)
    eta2 = ConfInterval(surf[mid], s - 1, surf[t - 1], (t - 1) - mid, 1)
    assert cnd2(eta, eta1, eta2, spec, x)


def test_cnd2_false_on_wrong_pieces():
    spec = _slim_fixture()
    a = initial_surface(spec)
    b = final_surface(spec)
    eta = ConfInterval(a, 2, b, 6, 1)
    good1 = ConfInterval(a, 0, a, 2, 1)
    good2 = ConfInterval(a, 1, b, 4, 1)
    assert cnd2(eta, good1, good2, spec, "0")
    assert not cnd2(eta, ConfInterval(a, 0, a, 2, 1),
                    ConfInterval(a, 0, b, 4, 1), spec, "0")  # s2 != s-1
    assert not cnd2(eta, ConfInterval(a, 0, a, 3, 1),
                    ConfInterval(a, 1, b, 4, 1), spec, "0")  # l1+l2 != l
    assert not cnd2(eta, ConfInterval(a, 0, a, 2, 1),
                    ConfInterval(b, 1, b, 4, 1), spec, "0")  # middle mismatch


# --- the enumerator ------------------------------------------------------------


def test_interval_space_size():
    spec = _slim_trivial(False)
    # |CONF| = |Q| * (|x|+2) * |Gamma| * (t+1)^0 = 2 * 3 * 2 = 12 with t_x = 2
    space = IntervalSpace(spec, "0", 2)
    assert space.conf_count == 12
    assert space.size == 12 * 12 * 2**3


def test_interval_index_zero_is_least():
    spec = _slim_trivial(False)
    space = IntervalSpace(spec, "0", 2)
    eta = space.interval_at(0)
    assert space.conf_index(eta.start) == 0
    assert (eta.pinned, eta.distance, eta.round) == (0, 0, 0)
    assert eta.start.state == spec.states[0] and eta.start.head == 0


def test_interval_index_roundtrip():
    spec = _slim_fixture()
    t_x, definite = runtime_max(spec, "0", BUDGET)
    assert definite
    space = IntervalSpace(spec, "0", t_x)
    import random

    rng = random.Random(9)
    for _ in range(100):
        i = rng.randrange(space.size)
        eta = space.interval_at(i)
        assert space.index_of(eta) == i
    with pytest.raises(IndexError):
        space.interval_at(space.size)


def test_interval_stream_matches_indexing():
    spec = _slim_trivial(False)
    space = IntervalSpace(spec, "", 1)
    listed = list(space.stream())
    assert len(listed) == space.size
    assert all(space.index_of(eta) == i for i, eta in enumerate(listed))
    a, b = space.pair_at(3, 5)
    assert a == listed[3] and b == listed[5]


def test_enumerate_intervals_requires_definite_runtime():
    spec = _slim_fixture()
    space = enumerate_intervals(spec, "0", BUDGET)
    assert space.size > 0


# --- the decision procedure -----------------------------------------------------


def test_always_rejecting_machine_complement_accepts():
    spec = _slim_trivial(False)
    for x in ("", "0", "00"):
        assert complement_decide_pd(spec, x, BUDGET).outcome == "accept"


def test_always_accepting_machine_complement_rejects():
    spec = _slim_trivial(True)
    for x in ("", "0"):
        v = complement_decide_pd(spec, x, BUDGET)
        assert v.outcome == "reject"


def test_fixture_complement_matches_negation():
    spec = _slim_fixture()
    for x in all_inputs(max_len=3):
        v = decide(spec, x, BUDGET)
        c = complement_decide_pd(spec, x, BUDGET)
        assert v.definite and c.definite
        assert (v.outcome == "accept") == (c.outcome == "reject"), x


def test_reject_witness_replays():
    spec = _slim_fixture()
    c = complement_decide_pd(spec, "01", BUDGET)
    assert c.outcome == "reject"
    for a, b in zip(c.witness, c.witness[1:]):
        assert b in step_relation(spec, "01", a)
    assert c.witness[0] == spec.initial_configuration()
    assert c.witness[-1].state in spec.accepting


@pytest.mark.parametrize("seed", [1, 4, 6, 8])
def test_differential_on_random_slim_machines(seed):
    spec = normalize_slim(gen_npdcta(seed))
    for x in all_inputs(max_len=2):
        v = decide(spec, x, BUDGET)
        if not v.definite or not runtime_max(spec, x, BUDGET)[1]:
            continue
        c = complement_decide_pd(spec, x, BUDGET)
        if not c.definite:
            continue
        assert (v.outcome == "accept") == (c.outcome == "reject"), (seed, x)


def test_trace_round_consecutiveness():
    """Intervals sharing a round value sit consecutively in every snapshot."""
    spec = _slim_fixture()
    for x in ("", "0", "10"):
        _, trace = complement_decide_pd(spec, x, BUDGET, want_trace=True)
        for rounds in trace.stack_snapshots():
            for i in range(1, len(rounds) - 1):
                if rounds[i] != rounds[i - 1]:
                    assert rounds[i] not in rounds[:i], (x, rounds)


def test_trace_phases_form_the_procedure():
    spec = _slim_fixture()
    _, trace = complement_decide_pd(spec, "1", BUDGET, want_trace=True)
    phases = {e["phase"] for e in trace.events}
    assert "(1')" in phases
    assert phases <= {"(1')", "(2')", "(3')", "(3'i)", "(3'ii)", "(4')"}


def test_golden_trace(fixtures_dir):
    spec = _slim_fixture()
    _, trace = complement_decide_pd(spec, "1", BUDGET, want_trace=True)
    got = trace.to_json_lines()
    golden = (fixtures_dir / "pd_trace_first0_on_1.jsonl").read_text().strip()
    assert got == golden
