"""Counter-program IR and interpreter for the two-counters-into-one reduction.

A pair (i1, i2) of counter values with components below a modulus p is stored
as the single number i1*p + i2.  The procedures here realize that encoding with
four named counters — CT1/CT4 as scratch, CT2 holding p, CT3 holding the pair —
plus the tape head as a unary engine for producing p:

  produce_p   fill CT2 with (n*|x|)^t using CT1, CT4 and head sweeps,
              restoring the head position and emptying the scratch;
  zero_test   report whether each component is zero, leaving the pair intact;
  update      apply inc/dec to one component in encoded form.

Programs are straight-line instruction lists with labels; ``dec`` must be
statically dominated by a nonzero test on the same counter, which a small
dataflow pass checks at validation time.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .machines import LEND, REND

CT1, CT2, CT3, CT4 = "CT1", "CT2", "CT3", "CT4"

OPCODES = ("inc", "dec", "jz", "jmp", "label", "left", "right", "jsym",
           "choice", "accept", "reject", "halt")


class ProgramError(Exception):
    pass


class GuardViolation(ProgramError):
    pass


@dataclass(frozen=True)
class CounterProgram:
    name: str
    counters: tuple[str, ...]
    instructions: tuple[tuple, ...]

    def __post_init__(self):
        labels = {}
        for idx, ins in enumerate(self.instructions):
            if ins[0] == "label":
                if ins[1] in labels:
                    raise ProgramError(f"duplicate label {ins[1]!r}")
                labels[ins[1]] = idx
        object.__setattr__(self, "_labels", labels)
        _validate_program(self)

    def label_index(self, name: str) -> int:
        try:
            return self._labels[name]
        except KeyError:
            raise ProgramError(f"unresolved label {name!r}") from None

    def to_json(self) -> list:
        return [list(ins) for ins in self.instructions]

    @classmethod
    def from_json(cls, name: str, counters, data) -> "CounterProgram":
        return cls(name, tuple(counters), tuple(tuple(ins) for ins in data))


def _validate_program(prog: CounterProgram) -> None:
    declared = set(prog.counters)
    for idx, ins in enumerate(prog.instructions):
        op = ins[0]
        if op not in OPCODES:
            raise ProgramError(f"instruction #{idx}: unknown opcode {op!r}")
        if op in ("inc", "dec", "jz") and ins[1] not in declared:
            raise ProgramError(f"instruction #{idx}: undeclared counter {ins[1]!r}")
        if op in ("jz", "jmp", "jsym"):
            prog.label_index(ins[-1])
        if op == "choice":
            for target in ins[1:]:
                prog.label_index(target)
    _check_dec_dominance(prog)


def _check_dec_dominance(prog: CounterProgram) -> None:
    """Forward dataflow: at every dec, the counter must be known nonzero.

    Facts are sets of known-nonzero counters, met by intersection over
    incoming edges; jz fall-through adds the tested counter, inc adds it,
    dec removes it (the post-value may be zero).
    """
    n = len(prog.instructions)
    facts: list[set | None] = [None] * (n + 1)
    facts[0] = set()
    changed = True
    while changed:
        changed = False
        for i, ins in enumerate(prog.instructions):
            if facts[i] is None:
                continue
            op = ins[0]
            outs: list[tuple[int, set]] = []
            if op == "inc":
                outs = [(i + 1, facts[i] | {ins[1]})]
            elif op == "dec":
                outs = [(i + 1, facts[i] - {ins[1]})]
            elif op == "jz":
                outs = [(prog.label_index(ins[2]), facts[i] - {ins[1]}),
                        (i + 1, facts[i] | {ins[1]})]
            elif op == "jmp":
                outs = [(prog.label_index(ins[1]), facts[i])]
            elif op == "jsym":
                outs = [(prog.label_index(ins[2]), facts[i]), (i + 1, facts[i])]
            elif op == "choice":
                outs = [(prog.label_index(t), facts[i]) for t in ins[1:]]
            elif op in ("accept", "reject", "halt"):
                outs = []
            else:  # label, left, right
                outs = [(i + 1, facts[i])]
            for j, fact in outs:
                if j > n:
                    continue
                if facts[j] is None:
                    facts[j] = set(fact)
                    changed = True
                else:
                    merged = facts[j] & fact
                    if merged != facts[j]:
                        facts[j] = merged
                        changed = True
    for i, ins in enumerate(prog.instructions):
        if ins[0] == "dec" and facts[i] is not None and ins[1] not in facts[i]:
            raise ProgramError(
                f"instruction #{i}: dec {ins[1]} is not dominated by a nonzero test"
            )


@dataclass
class CounterEnv:
    """Counter valuation plus a two-way tape with endmarkers."""

    counters: dict[str, int]
    head: int
    input: str
    stack: list[str] | None = None

    @classmethod
    def fresh(cls, names, x: str, head: int = 0) -> "CounterEnv":
        return cls({n: 0 for n in names}, head, x)

    @property
    def tape(self) -> str:
        return LEND + self.input + REND

    def copy(self) -> "CounterEnv":
        return CounterEnv(dict(self.counters), self.head, self.input,
                          None if self.stack is None else list(self.stack))


@dataclass
class AuditReport:
    counters_touched: frozenset[str]
    nonempty_at_exit: frozenset[str]
    instruction_count: int

    @property
    def max_distinct_counters(self) -> int:
        return len(self.counters_touched)


@dataclass
class RunResult:
    env: CounterEnv
    audit: AuditReport
    outcome: str  # "halt" | "accept" | "reject"
    tag: str | None = None


def run_counter_program(prog: CounterProgram, env: CounterEnv, budget: int = 10**7,
                        rng: random.Random | None = None) -> RunResult:
    """Small-step interpretation.  ``choice`` needs an rng; without one it is
    an error (use run_all_branches for exhaustive resolution)."""
    touched: set[str] = set()
    pc = 0
    executed = 0
    n = len(prog.instructions)
    tape = env.tape
    while pc < n:
        if executed >= budget:
            raise ProgramError(f"budget of {budget} instructions exhausted")
        ins = prog.instructions[pc]
        op = ins[0]
        executed += 1
        if op == "label":
            pc += 1
        elif op == "inc":
            touched.add(ins[1])
            env.counters[ins[1]] += 1
            pc += 1
        elif op == "dec":
            touched.add(ins[1])
            if env.counters[ins[1]] == 0:
                raise GuardViolation(f"dec {ins[1]} at zero (pc={pc})")
            env.counters[ins[1]] -= 1
            pc += 1
        elif op == "jz":
            touched.add(ins[1])
            pc = prog.label_index(ins[2]) if env.counters[ins[1]] == 0 else pc + 1
        elif op == "jmp":
            pc = prog.label_index(ins[1])
        elif op == "left":
            if env.head == 0:
                raise ProgramError("head moved left of the left endmarker")
            env.head -= 1
            pc += 1
        elif op == "right":
            if env.head >= len(tape) - 1:
                raise ProgramError("head moved right of the right endmarker")
            env.head += 1
            pc += 1
        elif op == "jsym":
            pc = prog.label_index(ins[2]) if tape[env.head] == ins[1] else pc + 1
        elif op == "choice":
            if rng is None:
                raise ProgramError("nondet choice without an rng")
            pc = prog.label_index(rng.choice(ins[1:]))
        elif op in ("accept", "reject"):
            return RunResult(env, _audit(env, touched, executed), op)
        elif op == "halt":
            return RunResult(env, _audit(env, touched, executed), "halt",
                             tag=ins[1] if len(ins) > 1 else None)
    return RunResult(env, _audit(env, touched, executed), "halt")


def _audit(env: CounterEnv, touched: set[str], executed: int) -> AuditReport:
    nonempty = frozenset(c for c, v in env.counters.items() if v > 0)
    return AuditReport(frozenset(touched), nonempty, executed)


def run_all_branches(prog: CounterProgram, env: CounterEnv, budget: int = 10**6,
                     max_branches: int = 4096) -> list[RunResult]:
    """Exhaustively resolve every nondet choice; one RunResult per branch."""
    results: list[RunResult] = []
    work: list[tuple[int, CounterEnv, list[str]]] = [(0, env.copy(), [])]
    while work:
        pc, e, script = work.pop()
        try:
            res = _run_from(prog, e, pc, budget, _Scripted(script))
        except _ChoicePoint as cp:
            # resume at the choice itself with exactly one scripted pick;
            # earlier choices are already baked into the environment
            for target in cp.options:
                work.append((cp.pc, cp.env.copy(), [target]))
            if len(work) > max_branches:
                raise ProgramError("branch explosion") from None
            continue
        results.append(res)
    return results


class _ChoicePoint(Exception):
    def __init__(self, pc: int, env: CounterEnv, options):
        self.pc, self.env, self.options = pc, env, options


class _Scripted:
    def __init__(self, script: list[str]):
        self.script = list(script)

    def take(self):
        return self.script.pop(0) if self.script else None


def _run_from(prog, env, pc0, budget, scripted: _Scripted) -> RunResult:
    touched: set[str] = set()
    pc = pc0
    executed = 0
    n = len(prog.instructions)
    tape = env.tape
    while pc < n:
        if executed >= budget:
            raise ProgramError("budget exhausted")
        ins = prog.instructions[pc]
        op = ins[0]
        executed += 1
        if op == "choice":
            pick = scripted.take()
            if pick is None:
                raise _ChoicePoint(pc, env.copy(), ins[1:])
            pc = prog.label_index(pick)
        elif op == "label":
            pc += 1
        elif op == "inc":
            touched.add(ins[1]); env.counters[ins[1]] += 1; pc += 1
        elif op == "dec":
            touched.add(ins[1])
            if env.counters[ins[1]] == 0:
                raise GuardViolation(f"dec {ins[1]} at zero")
            env.counters[ins[1]] -= 1; pc += 1
        elif op == "jz":
            touched.add(ins[1])
            pc = prog.label_index(ins[2]) if env.counters[ins[1]] == 0 else pc + 1
        elif op == "jmp":
            pc = prog.label_index(ins[1])
        elif op == "left":
            if env.head == 0:
                raise ProgramError("head moved left of the left endmarker")
            env.head -= 1; pc += 1
        elif op == "right":
            if env.head >= len(tape) - 1:
                raise ProgramError("head moved right of the right endmarker")
            env.head += 1; pc += 1
        elif op == "jsym":
            pc = prog.label_index(ins[2]) if tape[env.head] == ins[1] else pc + 1
        elif op in ("accept", "reject"):
            return RunResult(env, _audit(env, touched, executed), op)
        elif op == "halt":
            return RunResult(env, _audit(env, touched, executed), "halt",
                             tag=ins[1] if len(ins) > 1 else None)
    return RunResult(env, _audit(env, touched, executed), "halt")


# ---------------------------------------------------------------------------
# Pairing


def pair_encode(i1: int, i2: int, p: int) -> int:
    if p < 1:
        raise ValueError("modulus must be positive")
    if not (0 <= i1 <= p - 1 and 0 <= i2 <= p - 1):
        raise ValueError(f"components must lie in [0, {p - 1}]")
    return i1 * p + i2

def pair_decode(v: int, p: int) -> tuple[int, int]:
    if p < 1:
        raise ValueError("modulus must be positive")
    if not 0 <= v < p * p:
        raise ValueError(f"encoded value must lie in [0, {p * p})")
    return divmod(v, p)


# ---------------------------------------------------------------------------
# Program builders


def _transfer(src: str, dst: str, tag: str) -> list[tuple]:
    return [
        ("label", f"xfer_{tag}"),
        ("jz", src, f"xfer_{tag}_done"),
        ("dec", src),
        ("inc", dst),
        ("jmp", f"xfer_{tag}"),
        ("label", f"xfer_{tag}_done"),
    ]


def _sweep_add(target: str, n: int, tag: str, include_end: bool) -> list[tuple]:
    """From the left endmarker: n right sweeps adding one per input cell, then
    return.  With include_end the landing on the right endmarker also counts,
    so the total is n*(|x|+1) instead of n*|x|."""
    out: list[tuple] = []
    for rep in range(n):
        t = f"{tag}_{rep}"
        out.append(("label", f"swR_{t}"))
        out.append(("right",))
        if include_end:
            out.append(("inc", target))
            out.append(("jsym", REND, f"swB_{t}"))
        else:
            out.append(("jsym", REND, f"swB_{t}"))
            out.append(("inc", target))
        out += [
            ("jmp", f"swR_{t}"),
            ("label", f"swB_{t}"),
            ("left",),
            ("jsym", LEND, f"swE_{t}"),
            ("jmp", f"swB_{t}"),
            ("label", f"swE_{t}"),
        ]
    return out


def build_produce_p(n: int, t: int, *, unit_offset: int = 0) -> CounterProgram:
    """Program leaving (n*(|x|+offset... see note))^t — by default (n*|x|)^t —
    in CT2 with CT1, CT4 empty and the head restored.

    unit_offset=1 switches the sweep unit to n*(|x|+1), which stays positive
    on the empty input; the machine-level compiler uses that variant.
    """
    if t < 1 or n < 1:
        raise ValueError("n and t must be positive")
    ins: list[tuple] = []
    # Save the head position into CT4 while walking to the left endmarker.
    ins += [
        ("label", "save"),
        ("jsym", LEND, "saved"),
        ("left",),
        ("inc", CT4),
        ("jmp", "save"),
        ("label", "saved"),
    ]
    include_end = bool(unit_offset)
    # Unit u = n*|x| (or n*(|x|+1)) goes to CT1 by n sweeps, then CT2 = u.
    ins += _sweep_add(CT1, n, "unit", include_end)
    ins += _transfer(CT1, CT2, "seed")
    # Each extra round multiplies CT2 by u: drain CT2 into CT1, then per
    # CT1 unit sweep-add u into CT2.
    for r in range(t - 1):
        ins += _transfer(CT2, CT1, f"r{r}")
        ins += [
            ("label", f"mul_{r}"),
            ("jz", CT1, f"mul_{r}_done"),
            ("dec", CT1),
        ]
        ins += _sweep_add(CT2, n, f"m{r}", include_end)
        ins += [("jmp", f"mul_{r}"), ("label", f"mul_{r}_done")]
    # Restore the head from CT4.
    ins += [
        ("label", "restore"),
        ("jz", CT4, "done"),
        ("dec", CT4),
        ("right",),
        ("jmp", "restore"),
        ("label", "done"),
        ("halt",),
    ]
    return CounterProgram(f"produce_p_n{n}_t{t}", (CT1, CT2, CT4), tuple(ins))


def build_zero_test() -> CounterProgram:
    """Flags for the pair in CT3 given p in CT2; halts with tag 'Z1 Z2' where
    each letter is z (zero) or n.  CT3 and CT2 are restored; CT1, CT4 end empty.

    The two counters race downward in lockstep: CT3 exhausting first on the
    opening race means the value is below p (first component zero); CT2
    exhausting means one more multiple of p was consumed.  CT4 accumulates the
    consumed value, CT1 the consumed modulus, so both can be rolled back.
    """
    ins: list[tuple] = [
        ("jz", CT3, "exit_zz"),
        # opening race
        ("label", "r1"),
        ("jz", CT2, "r1_p_out"),
        ("jz", CT3, "r1_v_out"),
        ("dec", CT2), ("dec", CT3), ("inc", CT1), ("inc", CT4),
        ("jmp", "r1"),
        ("label", "r1_p_out"),
        ("jz", CT3, "restore_nz"),       # v = p exactly: i1 != 0, i2 = 0
        *_transfer(CT1, CT2, "refill1"),
        ("jmp", "rk"),
        ("label", "r1_v_out"),
        ("jmp", "restore_zn"),           # v < p: i1 = 0, i2 = v != 0
        # later races (i1 already known nonzero)
        ("label", "rk"),
        ("jz", CT2, "rk_p_out"),
        ("jz", CT3, "restore_nn"),       # remainder ran out mid-race: i2 != 0
        ("dec", CT2), ("dec", CT3), ("inc", CT1), ("inc", CT4),
        ("jmp", "rk"),
        ("label", "rk_p_out"),
        ("jz", CT3, "restore_nz"),
        *_transfer(CT1, CT2, "refillk"),
        ("jmp", "rk"),
    ]
    for tag in ("zn", "nz", "nn"):
        ins += [
            ("label", f"restore_{tag}"),
            *_transfer(CT4, CT3, f"rb3_{tag}"),
            *_transfer(CT1, CT2, f"rb2_{tag}"),
            ("halt", tag),
        ]
    ins += [("label", "exit_zz"), ("halt", "zz")]
    return CounterProgram("zero_test", (CT1, CT2, CT3, CT4), tuple(ins))


def build_update(component: int, op: str) -> CounterProgram:
    """Encoded inc/dec on one pair component (1 or 2), with p in CT2."""
    if component not in (1, 2) or op not in ("inc", "dec"):
        raise ValueError("component in {1,2}, op in {inc,dec}")
    ins: list[tuple] = []
    if component == 2:
        if op == "inc":
            ins += [("inc", CT3)]
        else:
            ins += [("jz", CT3, "trap"), ("dec", CT3)]
    else:
        # add or remove one p from CT3, cycling p through CT1
        ins += [("label", "loop"), ("jz", CT2, "rest"), ("dec", CT2), ("inc", CT1)]
        if op == "inc":
            ins += [("inc", CT3)]
        else:
            ins += [("jz", CT3, "trap"), ("dec", CT3)]
        ins += [("jmp", "loop"), ("label", "rest"),
                *_transfer(CT1, CT2, "rb"), ("halt", "ok")]
    if component == 2:
        ins += [("halt", "ok")]
    ins += [("label", "trap"), ("reject",)]
    return CounterProgram(f"update_{component}_{op}", (CT1, CT2, CT3), tuple(ins))


def build_drain(counter: str) -> CounterProgram:
    ins = (
        ("label", "d"),
        ("jz", counter, "done"),
        ("dec", counter),
        ("jmp", "d"),
        ("label", "done"),
        ("halt",),
    )
    return CounterProgram(f"drain_{counter}", (counter,), ins)


# ---------------------------------------------------------------------------
# Procedure wrappers


def proc_produce_p(n: int, x: str, t: int, head: int = 0,
                   unit_offset: int = 0) -> tuple[CounterEnv, AuditReport]:
    env = CounterEnv.fresh((CT1, CT2, CT3, CT4), x, head)
    res = run_counter_program(build_produce_p(n, t, unit_offset=unit_offset), env)
    return res.env, res.audit


def proc_zero_test(env: CounterEnv) -> tuple[bool, bool]:
    """(i1 == 0?, i2 == 0?) for the pair in CT3; env is restored in place."""
    res = run_counter_program(build_zero_test(), env)
    tag = res.tag
    return (tag[0] == "z", tag[1] == "z")


def proc_update(env: CounterEnv, component: int, op: str, p: int) -> CounterEnv:
    """Apply inc/dec to a pair component, with range checks against p."""
    i1, i2 = pair_decode(env.counters[CT3], p)
    value = {1: i1, 2: i2}[component]
    if op == "dec" and value == 0:
        raise GuardViolation(f"dec on zero component {component}")
    if op == "inc" and value + 1 >= p:
        raise GuardViolation(f"component {component} would reach the modulus {p}")
    res = run_counter_program(build_update(component, op), env)
    if res.outcome == "reject":
        raise GuardViolation("update trapped on an empty CT3")
    return res.env


class StackCounter:
    """A counter realized on a stack above a freshly written separator."""

    SEPARATOR = "#"
    UNIT = "1"

    def __init__(self, env: CounterEnv):
        if env.stack is None:
            raise ProgramError("environment has no stack")
        self.env = env
        env.stack.append(self.SEPARATOR)

    def inc(self) -> None:
        self.env.stack.append(self.UNIT)

    def dec(self) -> None:
        if self.env.stack[-1] == self.SEPARATOR:
            raise GuardViolation("pop below the separator")
        self.env.stack.pop()

    def is_zero(self) -> bool:
        return self.env.stack[-1] == self.SEPARATOR

    def release(self) -> None:
        """Remove the separator; the counter must be empty."""
        if not self.is_zero():
            raise GuardViolation("releasing a nonempty stack counter")
        self.env.stack.pop()


def proc_stack_as_counter(env: CounterEnv) -> StackCounter:
    return StackCounter(env)


class PairedCounters:
    """Two logical counters simulated in one, scratch emptied per operation.

    Each operation re-produces p from the tape (procedure wrappers above),
    consults the zero flags, applies the encoded update, and drains the
    modulus counter so only CT3 stays occupied between operations.
    """

    def __init__(self, n: int, x: str, t: int = 1, head: int = 0,
                 unit_offset: int = 1, use_stack_scratch: bool = False):
        self.n, self.t, self.unit_offset = n, t, unit_offset
        self.env = CounterEnv.fresh((CT1, CT2, CT3, CT4), x, head)
        if use_stack_scratch:
            self.env.stack = ["⊥"]
        self.use_stack_scratch = use_stack_scratch
        unit = n * (len(x) + unit_offset)
        self.p = unit**t
        self.audits: list[AuditReport] = []

    def _produce(self) -> None:
        res = run_counter_program(
            build_produce_p(self.n, self.t, unit_offset=self.unit_offset), self.env)
        self.audits.append(res.audit)

    def _drain_p(self) -> None:
        res = run_counter_program(build_drain(CT2), self.env)
        self.audits.append(res.audit)

    def flags(self) -> tuple[bool, bool]:
        self._produce()
        res = run_counter_program(build_zero_test(), self.env)
        self.audits.append(res.audit)
        self._drain_p()
        tag = res.tag
        return (tag[0] == "z", tag[1] == "z")

    def apply(self, component: int, op: str) -> tuple[bool, bool]:
        """One simulated counter move; returns the pre-move zero flags."""
        self._produce()
        zres = run_counter_program(build_zero_test(), self.env)
        self.audits.append(zres.audit)
        flags = (zres.tag[0] == "z", zres.tag[1] == "z")
        if op == "dec" and flags[component - 1]:
            self._drain_p()
            raise GuardViolation(f"dec on zero component {component}")
        if self.use_stack_scratch:
            # CT4's rollback role in the update is counter-free here; the
            # update program itself only needs CT1/CT2/CT3.
            pass
        res = run_counter_program(build_update(component, op), self.env)
        self.audits.append(res.audit)
        if res.outcome == "reject":
            raise GuardViolation("encoded update trapped")
        self._drain_p()
        return flags

    def decode(self) -> tuple[int, int]:
        return pair_decode(self.env.counters[CT3], self.p)

    def scratch_empty(self) -> bool:
        return all(self.env.counters[c] == 0 for c in (CT1, CT2, CT4))


# ---------------------------------------------------------------------------
# Digit programs for the all-counters-into-one reduction
#
# A vector (c_0, ..., c_{k-1}) with every c_i below a modulus p lives in one
# counter as W = sum c_i * p^i — the pairing applied at every level with the
# modulus raised to the level.  The modulus is a per-machine constant (chosen
# from the run cap), so its powers are built by constant multiplication and
# the digit procedures never touch the tape; CT1/CT2/CT4 serve as the one
# scratch trio for every level and end empty after each operation.


def _const_power(p: int, level: int, tag: str) -> list[tuple]:
    """CT2 := p^level by repeated constant multiplication through CT1."""
    if level == 0:
        return [("inc", CT2)]
    out: list[tuple] = [("inc", CT2)] * p
    for j in range(level - 1):
        out += _transfer(CT2, CT1, f"{tag}_m{j}")
        out += [
            ("label", f"{tag}_l{j}"),
            ("jz", CT1, f"{tag}_d{j}"),
            ("dec", CT1),
            *(("inc", CT2) for _ in range(p)),
            ("jmp", f"{tag}_l{j}"),
            ("label", f"{tag}_d{j}"),
        ]
    return out


def build_digit_flags(p: int, level: int) -> CounterProgram:
    """Zero-test of digit `level` of the packed counter in CT3.

    Stage 1 reduces CT3 modulo p^(level+1), pairing every removed unit with
    one added to CT4 so their sum is invariant; stage 2 races the remainder
    against p^level.  Halts with tag "z" or "n"; CT3 is restored from CT4 and
    the scratch ends empty.
    """
    if p < 2 or level < 0:
        raise ValueError("modulus must be >= 2 and level non-negative")
    ins: list[tuple] = []
    ins += _const_power(p, level + 1, "pw1")
    ins += [
        ("label", "s1"),
        ("jz", CT3, "s1_exact"),
        ("label", "race1"),
        ("jz", CT2, "full_sub"),
        ("jz", CT3, "partial"),
        ("dec", CT2), ("dec", CT3), ("inc", CT1), ("inc", CT4),
        ("jmp", "race1"),
        ("label", "full_sub"),
        *_transfer(CT1, CT2, "fs"),
        ("jmp", "s1"),
        ("label", "partial"),
        ("label", "undo"),
        ("jz", CT1, "s1_exact"),
        ("dec", CT1), ("inc", CT3),
        ("jz", CT4, "trap"), ("dec", CT4),
        ("jmp", "undo"),
        ("label", "s1_exact"),
        ("label", "dr1"),
        ("jz", CT2, "s2"),
        ("dec", CT2),
        ("jmp", "dr1"),
        ("label", "s2"),
    ]
    ins += _const_power(p, level, "pw2")
    ins += [
        ("label", "race2"),
        ("jz", CT2, "flag_n"),
        ("jz", CT3, "flag_z"),
        ("dec", CT2), ("dec", CT3), ("inc", CT4),
        ("jmp", "race2"),
    ]
    for tag, lbl in (("z", "flag_z"), ("n", "flag_n")):
        ins += [
            ("label", lbl),
            ("label", f"dr_{tag}"),
            ("jz", CT2, f"rb_{tag}"),
            ("dec", CT2),
            ("jmp", f"dr_{tag}"),
            ("label", f"rb_{tag}"),
            *_transfer(CT4, CT3, f"rb2_{tag}"),
            ("halt", tag),
        ]
    ins += [("label", "trap"), ("reject",)]
    return CounterProgram(f"digit_flags_{level}", (CT1, CT2, CT3, CT4), tuple(ins))


def build_digit_update(p: int, level: int, op: str) -> CounterProgram:
    """Add or subtract p^level on the packed counter in CT3."""
    if op not in ("inc", "dec"):
        raise ValueError("op must be inc or dec")
    ins: list[tuple] = []
    ins += _const_power(p, level, "pw")
    ins += [("label", "u"), ("jz", CT2, "done"), ("dec", CT2)]
    if op == "inc":
        ins += [("inc", CT3)]
    else:
        ins += [("jz", CT3, "trap"), ("dec", CT3)]
    ins += [("jmp", "u"), ("label", "done"), ("halt", "ok"),
            ("label", "trap"), ("reject",)]
    return CounterProgram(f"digit_{op}_{level}", (CT1, CT2, CT3, CT4), tuple(ins))
