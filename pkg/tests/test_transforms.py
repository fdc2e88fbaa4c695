import dataclasses
import itertools

import pytest

from counterlab.executor import RunBudget, decide
from counterlab.machines import (
    BOTTOM,
    MachineSpec,
    StackSpec,
    TransitionRule,
    parse_machine,
    serialize_machine,
    validate_machine,
)
from counterlab.oracle import brute_force_decide, check_equivalence
from counterlab.transforms import (
    TransformError,
    eliminate_counters,
    pair_counters,
    reduce_counters,
    reduce_counters_pd,
)
from counterlab.families import build_leq_2dcta, scaled_leq_family

from genmachines import all_inputs, curated_nctas, gen_ncta

R = TransitionRule
FUSED_CAP = 40_000


def _eqcount_machine():
    """Accepts binary strings with equally many 0s and 1s (2 counters)."""
    rules = (
        R("s", ">", ("any", "any"), None, "scan", 1, ("noop", "noop"), ("none",)),
        R("scan", "0", ("any", "any"), None, "scan", 1, ("inc", "noop"), ("none",)),
        R("scan", "1", ("any", "any"), None, "scan", 1, ("noop", "inc"), ("none",)),
        R("scan", "<", ("any", "any"), None, "chk", 0, ("noop", "noop"), ("none",)),
        R("chk", "<", ("zero", "zero"), None, "acc", -1, ("noop", "noop"), ("none",)),
        R("chk", "<", ("nonzero", "nonzero"), None, "chk", 0, ("dec", "dec"), ("none",)),
        R("chk", "<", ("zero", "nonzero"), None, "rej", -1, ("noop", "noop"), ("none",)),
        R("chk", "<", ("nonzero", "zero"), None, "rej", -1, ("noop", "noop"), ("none",)),
    )
    spec = MachineSpec("eqcount", "deterministic", ("s", "scan", "chk", "acc", "rej"),
                       ("0", "1"), 2, None, "s", frozenset({"acc"}),
                       frozenset({"rej"}), rules)
    validate_machine(spec)
    return spec


def _pad_counters(spec: MachineSpec, extra: int) -> MachineSpec:
    """Append counters that no rule touches."""
    rules = tuple(
        dataclasses.replace(r, guards=r.guards + ("any",) * extra,
                            counter_ops=r.counter_ops + ("noop",) * extra)
        for r in spec.transitions)
    return dataclasses.replace(spec, counters=spec.counters + extra, transitions=rules,
                               name=f"{spec.name}_k{spec.counters + extra}")


# --- pair_counters -----------------------------------------------------------


def test_pair_requires_two_counters(leq_machine):
    with pytest.raises(TransformError):
        pair_counters(leq_machine, (0, 1))


def test_pair_rejects_bad_indices():
    with pytest.raises(TransformError):
        pair_counters(_eqcount_machine(), (0, 0))
    with pytest.raises(TransformError):
        pair_counters(_eqcount_machine(), (0, 5))


def test_pair_counter_accounting():
    fused = pair_counters(_eqcount_machine(), (0, 1))
    assert fused.counters == 2 - 2 + 1 + 3


def test_pair_untouched_counters_is_behavior_identical():
    spec = _pad_counters(_eqcount_machine(), 2)  # counters 2,3 never touched
    fused = pair_counters(spec, (2, 3))
    # no procedures were compiled, so step counts are preserved
    report = check_equivalence(spec, fused, all_inputs(max_len=4), cap=80)
    assert report.equivalent and not report.unknowns


def test_pair_equivalent_on_deterministic_counter_machine():
    spec = _eqcount_machine()
    fused = pair_counters(spec, (0, 1), sweeps=4)
    assert fused.mode == "deterministic"
    report = check_equivalence(spec, fused, all_inputs(max_len=4), cap=100,
                               cap2=FUSED_CAP)
    assert report.equivalent and not report.unknowns


@pytest.mark.parametrize("seed_base", [100])
def test_pair_equivalent_on_random_two_counter_machines(seed_base):
    budget = RunBudget(steps=200)
    inputs = all_inputs(max_len=3)
    machines = curated_nctas(seed_base, 5, k=2, inputs=inputs, budget=budget,
                             counter_bound=lambda x: 4 * (len(x) + 1),
                             counter_rule_share=0.4)
    for spec in machines:
        fused = pair_counters(spec, (0, 1), sweeps=4)
        report = check_equivalence(spec, fused, inputs, cap=200, cap2=FUSED_CAP)
        assert report.equivalent, (spec.name, report.disagreements)


def test_pair_overflow_rejects_loudly():
    """With a deliberately tiny modulus, overflow of the encoded component
    surfaces as a rejecting run instead of silent corruption."""
    rules = (
        R("s", ">", ("any",), None, "p", 1, ("noop",), ("none",)),
        R("p", "0", ("any",), None, "p", 0, ("inc",), ("none",)),  # pump in place
        R("p", "0", ("nonzero",), None, "acc", 1, ("noop",), ("none",)),
    )
    spec = MachineSpec("pump", "nondeterministic", ("s", "p", "acc", "rej"),
                       ("0",), 1, None, "s", frozenset({"acc"}), frozenset({"rej"}),
                       rules)
    validate_machine(spec)
    padded = _pad_counters(spec, 1)
    fused = pair_counters(padded, (1, 0), sweeps=1)  # p = |x|+1, easily exceeded
    v = brute_force_decide(spec, "0", 50)
    assert v.outcome == "accept"
    # the fused machine still accepts (a short pump fits), but no run ever
    # accepts through a wrapped component: pump deeper than the modulus and
    # the branch dies instead of decoding garbage
    deep = pair_counters(padded, (1, 0), sweeps=1, exponent=1)
    assert deep.provenance["parameters"]["pair"] == [1, 0]
    report = check_equivalence(spec, fused, ["0"], cap=50, cap2=FUSED_CAP)
    assert not report.disagreements


def test_pair_serialization_roundtrip():
    fused = pair_counters(_eqcount_machine(), (0, 1))
    assert parse_machine(serialize_machine(fused)) == fused
    assert fused.provenance["transform"] == "pair_counters"


# --- reduce_counters ---------------------------------------------------------


def test_reduce_requires_four():
    with pytest.raises(TransformError):
        reduce_counters(_eqcount_machine())


def test_reduce_identity_at_four():
    spec = _pad_counters(_eqcount_machine(), 2)
    out = reduce_counters(spec)
    assert out.counters == 4
    assert out.transitions == spec.transitions
    assert out.provenance["parameters"]["packed"] is False


def test_reduce_five_counters_to_four():
    """k=5 with live counters at low digit positions; padding digits fold
    away through fast paths and zero digits."""
    spec = _pad_counters(_eqcount_machine(), 3)
    reduced = reduce_counters(spec, modulus=12)
    assert reduced.counters == 4
    report = check_equivalence(spec, reduced, all_inputs(max_len=3), cap=100,
                               cap2=FUSED_CAP)
    assert report.equivalent, report.disagreements


def test_reduce_six_counters():
    spec = _pad_counters(_eqcount_machine(), 4)
    reduced = reduce_counters(spec, modulus=12)
    assert reduced.counters == 4
    report = check_equivalence(spec, reduced, all_inputs(max_len=2), cap=60,
                               cap2=FUSED_CAP)
    assert report.equivalent, report.disagreements


def test_reduce_shares_one_scratch_trio():
    """Every compiled digit procedure draws on the same three scratch
    counters; nothing outside the packed value and the trio is ever touched."""
    spec = _pad_counters(_eqcount_machine(), 3)
    reduced = reduce_counters(spec, modulus=12)
    assert reduced.provenance["parameters"]["scratch_indices"] == [1, 2, 3]
    for rule in reduced.transitions:
        assert len(rule.guards) == 4 and len(rule.counter_ops) == 4


# --- reduce_counters_pd --------------------------------------------------------


def _pd_machine_one_live_counter(k: int = 4):
    """Pushdown machine with k counters, only the first one active (digit
    operations on the packed counter are cheapest at low levels)."""
    anyg = ("any",) * k
    noop = ("noop",) * k
    inc0 = ("inc",) + ("noop",) * (k - 1)
    dec0 = ("dec",) + ("noop",) * (k - 1)
    g0_nz = ("nonzero",) + ("any",) * (k - 1)
    g0_z = ("zero",) + ("any",) * (k - 1)
    rules = (
        R("s", ">", anyg, None, "scan", 1, noop, ("push", ("a",))),
        R("scan", "0", anyg, None, "scan", 1, inc0, ("push", ("a",))),
        R("scan", "1", anyg, "a", "scan", 1, noop, ("pop",)),
        R("scan", "<", anyg, None, "back", -1, noop, ("none",)),
        R("back", "0", g0_nz, None, "back", -1, dec0, ("none",)),
        R("back", "1", anyg, None, "back", -1, noop, ("none",)),
        R("back", ">", g0_z, BOTTOM, "acc", 1, noop, ("none",)),
        R("back", ">", g0_nz, None, "rej", 1, noop, ("none",)),
        R("back", ">", g0_z, "a", "rej", 1, noop, ("none",)),
    )
    spec = MachineSpec(f"pdlive{k}", "nondeterministic",
                       ("s", "scan", "back", "acc", "rej"), ("0", "1"), k,
                       StackSpec((BOTTOM, "a"), 1), "s", frozenset({"acc"}),
                       frozenset({"rej"}), rules)
    validate_machine(spec)
    return spec


def test_reduce_pd_requires_stack():
    with pytest.raises(TransformError):
        reduce_counters_pd(_pad_counters(_eqcount_machine(), 2))


def test_reduce_pd_identity_at_three():
    spec = _pd_machine_one_live_counter(3)
    out = reduce_counters_pd(spec)
    assert out.counters == 3 and out.transitions == spec.transitions


def test_reduce_pd_four_to_three_equivalent():
    spec = _pd_machine_one_live_counter(4)
    reduced = reduce_counters_pd(spec, modulus=10)
    assert reduced.counters == 3
    report = check_equivalence(spec, reduced, all_inputs(max_len=3), cap=60,
                               cap2=FUSED_CAP)
    assert report.equivalent, report.disagreements


def test_reduce_pd_separator_discipline():
    """The stack-scratch separator is balanced: along accepting runs every
    configuration holds at most one separator and the final stack none."""
    spec = _pd_machine_one_live_counter(4)
    reduced = reduce_counters_pd(spec, modulus=10)
    sep = "_s"
    v = brute_force_decide(reduced, "011", FUSED_CAP)
    assert v.outcome == "accept"
    depths = [list(c.stack).count(sep) for c in v.witness]
    assert set(depths) <= {0, 1}
    assert depths[-1] == 0


# --- eliminate_counters --------------------------------------------------------


def test_eliminate_product_count():
    spec = dataclasses.replace(_eqcount_machine(), counters=1,
                               transitions=(), accepting=frozenset({"acc"}))
    validate_machine(spec)
    out = eliminate_counters(spec, 3)
    assert len(out.states) == len(spec.states) * 4  # no sink without rules
    assert out.counters == 0


def test_eliminate_ceiling_zero_no_increments(leq_machine):
    spec = dataclasses.replace(
        leq_machine,
        transitions=tuple(r for r in leq_machine.transitions
                          if "inc" not in r.counter_ops))
    validate_machine(spec)
    out = eliminate_counters(spec, 0)
    # ceiling 0 leaves the lone vector (0,); dec rules need a nonzero guard,
    # so they vanish and no overflow sink is created
    assert len(out.states) == len(spec.states)


def test_eliminate_leq_agrees_on_promise(leq_machine):
    fam = scaled_leq_family()
    n = 2
    x_len = 2 * n + 1
    cap = (n * x_len + 2) ** 2
    out = eliminate_counters(leq_machine, cap)
    assert len(out.states) == len(leq_machine.states) * (cap + 1) + 1
    budget = RunBudget(steps=cap)
    for w in fam.sample(n, x_len):
        a = decide(leq_machine, w, budget)
        b = decide(out, w, budget)
        assert a.definite and b.definite
        assert a.outcome == b.outcome, w


def test_eliminate_compresses_stationary_moves():
    spec = gen_ncta(17, k=1)
    assert any(r.move == 0 for r in spec.transitions)
    out = eliminate_counters(spec, 6)
    assert all(r.move != 0 for r in out.transitions)
    validate_machine(out)
    budget = RunBudget(steps=100)
    for x in all_inputs(max_len=2):
        a = decide(spec, x, budget)
        b = decide(out, x, budget)
        # acceptance is preserved whenever the original stayed under the
        # ceiling; for this seed all counters do on such short inputs
        if a.outcome == "accept":
            assert b.outcome == "accept", x
        if a.outcome == "reject":
            assert b.outcome in ("reject", "unknown"), x


def test_eliminate_deterministic_function_of_inputs(leq_machine):
    a = eliminate_counters(leq_machine, 5)
    b = eliminate_counters(leq_machine, 5)
    assert serialize_machine(a) == serialize_machine(b)


def test_transforms_emit_provenance(leq_machine):
    out = eliminate_counters(leq_machine, 2)
    assert out.provenance["derived_from"] == leq_machine.name
    assert out.provenance["transform"] == "eliminate_counters"
    assert out.provenance["parameters"] == {"ceiling": 2}
