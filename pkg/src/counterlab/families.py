"""Promise-problem families and their constructors.

A family assigns each index n a disjoint pair (positive set, negative set)
of strings; behavior outside the union is unconstrained.  The flagship
family here is the equality language {w#w : w binary of length m(n)} with
its explicit deterministic one-counter two-way solver, which tracks the
verified prefix length in the counter and never needs stationary moves.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator

from .machines import MachineSpec, StackSpec, TransitionRule, validate_machine

SEPARATOR = "#"


@dataclass(frozen=True)
class PromiseFamily:
    name: str
    alphabet: tuple[str, ...]
    positive: Callable[[int, str], bool]
    negative: Callable[[int, str], bool]

    def member_pos(self, n: int, w: str) -> bool:
        return self.positive(n, w)

    def member_neg(self, n: int, w: str) -> bool:
        return self.negative(n, w)

    def promised(self, n: int, w: str) -> bool:
        return self.member_pos(n, w) or self.member_neg(n, w)

    def sample(self, n: int, max_len: int) -> Iterator[str]:
        """All promised strings of index n with length <= max_len, in
        length-lexicographic order."""
        for length in range(max_len + 1):
            for tup in itertools.product(self.alphabet, repeat=length):
                w = "".join(tup)
                if self.promised(n, w):
                    yield w

    def check_disjoint(self, n: int, max_len: int) -> bool:
        for length in range(max_len + 1):
            for tup in itertools.product(self.alphabet, repeat=length):
                w = "".join(tup)
                if self.member_pos(n, w) and self.member_neg(n, w):
                    return False
        return True


@dataclass(frozen=True)
class SizeParameter:
    name: str
    fn: Callable[[str], int]

    def __call__(self, w: str) -> int:
        return self.fn(w)


def length_size_parameter() -> SizeParameter:
    return SizeParameter("length", len)


# ---------------------------------------------------------------------------
# The equality family


def leq_family(m_fn: Callable[[int], int]) -> PromiseFamily:
    """Positive: w#w with w binary of length m(n).  Negative: every other
    string over {0,1,#} of the same total length 2*m(n)+1."""

    def pos(n: int, w: str) -> bool:
        m = m_fn(n)
        if len(w) != 2 * m + 1 or w[m] != SEPARATOR:
            return False
        u, v = w[:m], w[m + 1:]
        return u == v and all(c in "01" for c in u + v)

    def neg(n: int, w: str) -> bool:
        m = m_fn(n)
        return len(w) == 2 * m + 1 and all(c in "01#" for c in w) and not pos(n, w)

    return PromiseFamily("leq", ("0", "1", SEPARATOR), pos, neg)


def scaled_leq_family() -> PromiseFamily:
    """Desk scaling m(n) = n; the construction is uniform in m."""
    return leq_family(lambda n: n)


def build_leq_2dcta(n: int) -> MachineSpec:
    """Deterministic one-counter two-way solver for the equality family.

    The counter holds the number of already-verified positions.  Each round
    walks right while draining the counter to reach the next unverified cell,
    memorizes its symbol in the state, refills the counter walking back, then
    compares against the corresponding cell after the separator.  Reading the
    separator at the probe cell instead switches to the final length check.
    The machine is the same for every index; only the name records n.
    """
    if n < 1:
        raise ValueError("index must be positive")
    Z, NZ, ANY = ("zero",), ("nonzero",), ("any",)
    INC, DEC, NOP = ("inc",), ("dec",), ("noop",)
    rules: list[TransitionRule] = []

    def rule(frm, read, guard, to, move, op):
        rules.append(TransitionRule(frm, read, guard, None, to, move, op, ("none",)))

    symbols = ("0", "1", SEPARATOR)

    # Probe walk: move right, spending the counter one cell per step.
    # Halting states are always entered with a real head move so the machine
    # stays valid after counter elimination strips it down to a plain 2dfa.
    rule("start", ">", ANY, "probe", 1, NOP)
    for s in symbols:
        rule("probe", s, NZ, "probe", 1, DEC)
    rule("probe", "<", NZ, "reject", -1, NOP)
    rule("probe", "<", Z, "reject", -1, NOP)

    # Counter empty at the probe cell: memorize the symbol, walk back
    # refilling the counter (one inc per move, including the probe cell).
    for s in symbols:
        rule("probe", s, Z, f"back_{s}", -1, INC)
    for s in symbols:
        for r in symbols:
            rule(f"back_{s}", r, ANY, f"back_{s}", -1, INC)
        rule(f"back_{s}", ">", ANY, f"seek_{s}", 1, NOP)

    # Walk right to the separator without touching the counter.
    for s in symbols:
        for r in ("0", "1"):
            rule(f"seek_{s}", r, ANY, f"seek_{s}", 1, NOP)
        rule(f"seek_{s}", "<", ANY, "reject", -1, NOP)

    # Separator reached.  If the memorized symbol was the separator, the
    # first block is exhausted: check the second block plus the endmarker
    # take exactly counter-many moves.
    rule(f"seek_{SEPARATOR}", SEPARATOR, NZ, "tail", 1, DEC)
    for r in ("0", "1"):
        rule("tail", r, NZ, "tail", 1, DEC)
        rule("tail", r, Z, "reject", 1, NOP)
    rule("tail", "<", Z, "accept", -1, NOP)
    rule("tail", "<", NZ, "reject", -1, NOP)
    rule("tail", SEPARATOR, NZ, "reject", 1, NOP)
    rule("tail", SEPARATOR, Z, "reject", 1, NOP)

    # Otherwise skip counter-many cells past the separator and compare.
    for s in ("0", "1"):
        rule(f"seek_{s}", SEPARATOR, NZ, f"skip_{s}", 1, DEC)
        for r in ("0", "1"):
            rule(f"skip_{s}", r, NZ, f"skip_{s}", 1, DEC)
        rule(f"skip_{s}", SEPARATOR, NZ, f"skip_{s}", 1, DEC)
        rule(f"skip_{s}", "<", NZ, "reject", -1, NOP)
        rule(f"skip_{s}", "<", Z, "reject", -1, NOP)
        # Counter empty: this is the cell to compare.
        rule(f"skip_{s}", s, Z, "return", -1, INC)
        for r in symbols:
            if r != s:
                rule(f"skip_{s}", r, Z, "reject", 1, NOP)

    # Match: walk back to the separator refilling, cross it, walk home.
    for r in ("0", "1"):
        rule("return", r, ANY, "return", -1, INC)
    rule("return", SEPARATOR, ANY, "home", -1, NOP)
    for r in ("0", "1"):
        rule("home", r, ANY, "home", -1, NOP)
    rule("home", SEPARATOR, ANY, "home", -1, NOP)
    rule("home", ">", ANY, "probe", 1, NOP)

    states = ("start", "probe",
              *(f"back_{s}" for s in symbols),
              *(f"seek_{s}" for s in symbols),
              "tail", "skip_0", "skip_1", "return", "home",
              "accept", "reject")
    spec = MachineSpec(
        name=f"leq_2dcta_n{n}",
        mode="deterministic",
        states=states,
        alphabet=("0", "1", SEPARATOR),
        counters=1,
        stack=None,
        initial="start",
        accepting=frozenset({"accept"}),
        rejecting=frozenset({"reject"}),
        transitions=tuple(rules),
    )
    validate_machine(spec)
    return spec


# ---------------------------------------------------------------------------
# Size incorporation and induced families


class AlphabetError(ValueError):
    pass


def incorporate_size(family: PromiseFamily, *, allow_separator_overlap: bool = False
                     ) -> tuple[Callable[[str], bool], SizeParameter, Callable[[str], bool]]:
    """Bundle an indexed family into one language plus a size parameter.

    Returns (membership of K, size parameter m, membership of the complement
    side).  K holds the strings 1^n#x with x positive at index n; the
    complement side adds the padding sets (wrong prefix block, no separator,
    or extra separators in the prefix region).  m maps promised 1^n#x to n
    and everything else to its length.
    """
    if SEPARATOR in family.alphabet and not allow_separator_overlap:
        raise AlphabetError("family alphabet must not contain the separator '#'")

    def split(w: str) -> tuple[int, str] | None:
        head, sep, tail = w.partition(SEPARATOR)
        if not sep:
            return None
        if head and set(head) != {"1"}:
            return None
        return len(head), tail

    def member_k(w: str) -> bool:
        parsed = split(w)
        if parsed is None:
            return False
        n, x = parsed
        return family.member_pos(n, x)

    def member_k_neg(w: str) -> bool:
        parsed = split(w)
        if parsed is None:
            return True  # no separator, or a non-1 prefix block
        n, x = parsed
        return not family.member_pos(n, x)

    def m(w: str) -> int:
        parsed = split(w)
        if parsed is not None:
            n, x = parsed
            if family.promised(n, x):
                return n
        return len(w)

    return member_k, SizeParameter(f"size_{family.name}", m), member_k_neg


def induced_family(language: Callable[[str], bool], m: SizeParameter,
                   alphabet: tuple[str, ...], name: str = "induced") -> PromiseFamily:
    """Slice a language into a family along a size parameter: index n gets
    the strings of size n, split by membership."""
    return PromiseFamily(
        name,
        alphabet,
        positive=lambda n, w: m(w) == n and language(w),
        negative=lambda n, w: m(w) == n and not language(w),
    )


def check_ceiling(family: PromiseFamily, p: Callable[[int], int],
                  n_max: int, max_len: int) -> bool:
    """True when every sampled promised string of index n <= n_max fits under
    the ceiling p(n).  Sampling is bounded by max_len."""
    for n in range(n_max + 1):
        bound = p(n)
        for w in family.sample(n, max_len):
            if len(w) > bound:
                return False
    return True
