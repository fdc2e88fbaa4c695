import pytest

from counterlab.executor import RunBudget, decide
from counterlab.families import scaled_leq_family
from counterlab.machines import MachineSpec, parse_machine, step_relation
from counterlab.oracle import (
    assert_coherent,
    brute_force_decide,
    check_equivalence,
    check_unambiguous,
    enumerate_accepting_paths,
)

from genmachines import all_inputs, gen_ncta

ONE_ACCEPT = MachineSpec("oa", "deterministic", ("a",), ("0",), 0, None,
                         "a", frozenset({"a"}), frozenset(), ())
ONE_REJECT = MachineSpec("orj", "deterministic", ("a",), ("0",), 0, None,
                         "a", frozenset(), frozenset({"a"}), ())


def test_one_state_verdicts():
    assert brute_force_decide(ONE_ACCEPT, "", 5).outcome == "accept"
    assert brute_force_decide(ONE_REJECT, "", 5).outcome == "reject"


def test_witness_paths_validate_under_step_relation(leq_machine):
    v = brute_force_decide(leq_machine, "11#11", 500)
    assert v.outcome == "accept"
    for a, b in zip(v.witness, v.witness[1:]):
        assert b in step_relation(leq_machine, "11#11", a)


def test_agreement_with_executor_on_200_random_pairs():
    """The oracle relation itself: definite verdicts never contradict."""
    budget = RunBudget(steps=120)
    pairs = 0
    for seed in range(25):
        spec = gen_ncta(seed, k=1 + seed % 2)
        for x in all_inputs(max_len=3):
            v = decide(spec, x, budget)
            o = brute_force_decide(spec, x, 120)
            assert_coherent(spec, x, v, o)
            pairs += 1
    assert pairs >= 200


def test_check_equivalence_self_is_empty(leq_machine):
    report = check_equivalence(leq_machine, leq_machine, ["0#0", "0#1"], cap=300)
    assert report.equivalent and not report.unknowns


def test_check_equivalence_finds_disagreement():
    report = check_equivalence(ONE_ACCEPT, ONE_REJECT, [""], cap=5)
    assert report.disagreements == [("", "accept", "reject")]


def test_check_equivalence_reports_unknowns_separately(leq_machine):
    report = check_equivalence(leq_machine, leq_machine, ["01#01"], cap=2)
    assert report.unknowns and not report.disagreements
    assert not report.disagreements


def test_unambiguous_deterministic(leq_machine):
    ok, witness = check_unambiguous(leq_machine, scaled_leq_family(), 1, 3, 300)
    assert ok and witness is None


def test_ambiguous_machine_yields_witness():
    doc = """
    {"name": "dup", "mode": "nondeterministic",
     "states": ["q0", "l", "r", "acc"], "alphabet": ["0", "1", "#"], "counters": 0,
     "stack": null, "initial": "q0", "accepting": ["acc"], "rejecting": [],
     "transitions": [
       {"from": "q0", "read": ">", "guards": [], "stack_top": null,
        "to": "l", "move": 1, "counter_ops": [], "stack_op": "none"},
       {"from": "q0", "read": ">", "guards": [], "stack_top": null,
        "to": "r", "move": 1, "counter_ops": [], "stack_op": "none"},
       {"from": "l", "read": "0", "guards": [], "stack_top": null,
        "to": "acc", "move": 1, "counter_ops": [], "stack_op": "none"},
       {"from": "r", "read": "0", "guards": [], "stack_top": null,
        "to": "acc", "move": -1, "counter_ops": [], "stack_op": "none"}]}
    """
    spec = parse_machine(doc)
    ok, witness = check_unambiguous(spec, scaled_leq_family(), 1, 3, 50)
    assert not ok
    x, p1, p2 = witness
    assert scaled_leq_family().promised(1, x) and p1 != p2
    for path in (p1, p2):
        for a, b in zip(path, path[1:]):
            assert b in step_relation(spec, x, a)


def test_vacuous_family_slice_is_unambiguous():
    fam = scaled_leq_family()
    ok, _ = check_unambiguous(ONE_ACCEPT, fam, 3, 2, 10)  # no promised strings fit
    assert ok


def test_enumerate_paths_in_declaration_order(fixtures_dir):
    spec = parse_machine((fixtures_dir / "two_branch.machine").read_text())
    paths = enumerate_accepting_paths(spec, "0", cap=10)
    assert len(paths) == 1  # only the q1 branch accepts
    assert paths[0][1].state == "q1"


def test_unambiguous_claimed_mode_audited(leq_machine):
    """A machine may claim unambiguity; the path count audits the claim on
    every promised instance."""
    import dataclasses

    from counterlab.executor import RunBudget, count_accepting_paths

    claimed = dataclasses.replace(leq_machine, mode="unambiguous-claimed")
    fam = scaled_leq_family()
    for n in (1, 2):
        ok, witness = check_unambiguous(claimed, fam, n, 2 * n + 1, 2000)
        assert ok, witness
        for w in fam.sample(n, 2 * n + 1):
            count, exact = count_accepting_paths(claimed, w, RunBudget(steps=2000))
            assert exact and count <= 1
