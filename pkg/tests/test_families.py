import itertools

import pytest

from counterlab.executor import RunBudget, decide
from counterlab.families import (
    AlphabetError,
    PromiseFamily,
    build_leq_2dcta,
    check_ceiling,
    incorporate_size,
    induced_family,
    leq_family,
    length_size_parameter,
    scaled_leq_family,
)
from counterlab.machines import step_relation
from counterlab.oracle import brute_force_decide


def test_leq_membership_examples():
    fam = leq_family(lambda n: n)
    assert fam.member_pos(1, "0#0")
    assert fam.member_neg(1, "0#1")
    assert not fam.member_pos(1, "0#1")
    assert not fam.promised(1, "0#0extra")


def test_leq_positive_count_is_two_to_the_m():
    fam = scaled_leq_family()
    for n in (1, 2, 3):
        pos = [w for w in fam.sample(n, 2 * n + 1) if fam.member_pos(n, w)]
        assert len(pos) == 2**n


def test_leq_disjoint():
    fam = scaled_leq_family()
    for n in (1, 2):
        assert fam.check_disjoint(n, 2 * n + 1)


def test_sampler_orders_length_lexicographically():
    fam = scaled_leq_family()
    sample = list(fam.sample(1, 3))
    assert sample == sorted(sample, key=lambda w: (len(w), [fam.alphabet.index(c) for c in w]))


def test_solver_classifies_every_string(leq_machine):
    fam = scaled_leq_family()
    budget = RunBudget(steps=2000)
    for n in (1, 2):
        for tup in itertools.product("01#", repeat=2 * n + 1):
            w = "".join(tup)
            v = decide(leq_machine, w, budget)
            if fam.member_pos(n, w):
                assert v.outcome == "accept", w
            elif fam.member_neg(n, w):
                assert v.outcome == "reject", w


def test_solver_agrees_with_oracle_on_promised_strings(leq_machine):
    fam = scaled_leq_family()
    for w in fam.sample(2, 5):
        assert brute_force_decide(leq_machine, w, 2000).outcome == \
            ("accept" if fam.member_pos(2, w) else "reject")


def test_builder_uniform_in_index():
    a, b = build_leq_2dcta(1), build_leq_2dcta(3)
    assert a.states == b.states
    assert a.transitions == b.transitions


def test_builder_deterministic_everywhere():
    spec = build_leq_2dcta(2)
    x = "10#10"
    seen = {spec.initial_configuration()}
    frontier = list(seen)
    while frontier:
        nxt = []
        for cfg in frontier:
            succs = step_relation(spec, x, cfg)
            assert len(succs) <= 1
            nxt.extend(s for s in succs if s not in seen)
            seen.update(succs)
        frontier = nxt


def test_builder_rejects_bad_index():
    with pytest.raises(ValueError):
        build_leq_2dcta(0)


# --- size incorporation -------------------------------------------------------


def _binary_palindromes() -> PromiseFamily:
    return PromiseFamily(
        "pal", ("0", "1"),
        positive=lambda n, w: len(w) == n and w == w[::-1],
        negative=lambda n, w: len(w) == n and w != w[::-1],
    )


def test_incorporate_size_roundtrip_on_palindromes():
    fam = _binary_palindromes()
    member_k, m, member_neg = incorporate_size(fam)
    assert member_k("111#010")
    assert m("111#010") == 3
    assert not member_k("111#011")
    assert member_neg("111#011")
    # wrong prefix block -> padding side, size falls back to length
    assert member_neg("0#010")
    assert m("0#010") == 5
    # no separator at all
    assert member_neg("0101")
    assert m("0101") == 4


def test_incorporate_size_rejects_separator_alphabet():
    with pytest.raises(AlphabetError):
        incorporate_size(scaled_leq_family())


def test_incorporate_size_overlap_example():
    """The equality family's strings already use '#'; the first separator
    still splits unambiguously when overlap is explicitly allowed."""
    fam = scaled_leq_family()
    member_k, m, member_neg = incorporate_size(fam, allow_separator_overlap=True)
    # w = 1^2 # x with x = "0#0": x is not positive at index 2 (wrong length)
    assert not member_k("11#0#0")
    assert member_neg("11#0#0")
    # but at index 1 the payload "0#0" is positive
    assert member_k("1#0#0")
    assert m("1#0#0") == 1


def test_induced_family_partitions_by_size():
    m = length_size_parameter()
    fam = induced_family(lambda w: w == "", m, ("0",))
    assert fam.member_pos(0, "")
    assert not fam.member_neg(0, "")
    for w in ("", "0", "00"):
        n = m(w)
        assert fam.member_pos(n, w) != fam.member_neg(n, w)


def test_incorporate_then_induce_reproduces_membership():
    fam = _binary_palindromes()
    member_k, m, _ = incorporate_size(fam)
    induced = induced_family(member_k, m, ("0", "1", "#"))
    for n in (1, 2, 3):
        for tup in itertools.product("01", repeat=n):
            x = "".join(tup)
            wrapped = "1" * n + "#" + x
            assert induced.member_pos(n, wrapped) == fam.member_pos(n, x)
            assert induced.member_neg(n, wrapped) == fam.member_neg(n, x)


# --- ceilings ------------------------------------------------------------------


def test_leq_fits_linear_ceiling():
    assert check_ceiling(scaled_leq_family(), lambda n: 2 * n + 1, n_max=3, max_len=7)


def test_leq_violates_too_small_ceiling():
    assert not check_ceiling(scaled_leq_family(), lambda n: n, n_max=2, max_len=5)


def test_empty_family_satisfies_any_ceiling():
    empty = PromiseFamily("none", ("0",), lambda n, w: False, lambda n, w: False)
    assert check_ceiling(empty, lambda n: 0, n_max=3, max_len=4)


def test_leq_incorporate_then_induce_roundtrip():
    """Wrapping the equality family into one language and slicing it back
    reproduces the original promise sets."""
    fam = scaled_leq_family()
    member_k, m, _ = incorporate_size(fam, allow_separator_overlap=True)
    induced = induced_family(member_k, m, ("0", "1", "#"))
    for n in (1, 2):
        for x in fam.sample(n, 2 * n + 1):
            wrapped = "1" * n + "#" + x
            assert induced.member_pos(n, wrapped) == fam.member_pos(n, x), (n, x)
            assert induced.member_neg(n, wrapped) == fam.member_neg(n, x), (n, x)
