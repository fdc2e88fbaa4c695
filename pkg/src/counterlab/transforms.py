"""Machine-to-machine transformations.

pair_counters fuses two counters into one by storing the pair (va, vb) as
va*p + vb, where p is re-produced from the tape before every simulated
counter move and torn back down afterwards, so the three scratch counters
are empty between moves and can be shared by any number of fusions.  Every
transition that touches the fused pair expands into a compiled sub-procedure:
the counter programs are lowered to transition rules over fresh
program-counter states.  The simulated machine's clock pauses inside the
procedures; equivalence is language-level, not step-count-level.

reduce_counters / reduce_counters_pd iterate the fusion down to 4 counters
(3 for pushdown machines, where the stack absorbs one scratch role), and
eliminate_counters trades bounded counters for a product state space.
"""

from __future__ import annotations

import itertools
from typing import Sequence

from .machines import (
    BOTTOM,
    LEND,
    REND,
    MachineSpec,
    StackSpec,
    TransitionRule,
    validate_machine,
)
from .counterprog import (
    CT1,
    CT2,
    CT3,
    CT4,
    CounterProgram,
    build_drain,
    build_produce_p,
    build_update,
    build_zero_test,
)


class TransformError(Exception):
    pass


# ---------------------------------------------------------------------------
# Lowering counter programs to transition rules


class RuleSink:
    """Accumulates transition rules and fresh program-counter states."""

    def __init__(self, spec: MachineSpec, n_counters: int):
        self.reads = tuple(spec.alphabet) + (LEND, REND)
        self.k = n_counters
        self.rules: list[TransitionRule] = []
        self.states: list[str] = []
        self._taken = set(spec.states)

    def fresh(self, base: str) -> str:
        name = base
        i = 1
        while name in self._taken:
            i += 1
            name = f"{base}.{i}"
        self._taken.add(name)
        self.states.append(name)
        return name

    def any_guards(self) -> tuple[str, ...]:
        return ("any",) * self.k

    def noops(self) -> tuple[str, ...]:
        return ("noop",) * self.k

    def add(self, frm, read, guards, top, to, move, ops, stack_op):
        self.rules.append(TransitionRule(frm, read, tuple(guards), top, to,
                                         move, tuple(ops), stack_op))


def lower_program(prog: CounterProgram, sink: RuleSink, prefix: str,
                  counter_map: dict[str, int], wiring: dict[str, str],
                  accept_state: str, reject_state: str,
                  stack_counter: str | None = None,
                  stack_symbols: tuple[str, str] | None = None) -> str:
    """Emit transition rules realizing the program; returns the entry state.

    wiring maps halt tags (None key as "") to continuation states.  When
    stack_counter names one of the program's counters, its inc/dec/jz lower
    to stack pushes/pops of a unit symbol above a separator; the separator
    is written on entry and removed at every exit.
    """
    ins = prog.instructions
    n = len(ins)
    if stack_counter is not None and stack_symbols is None:
        raise TransformError("stack_counter requires (separator, unit) symbols")
    sep, unit = stack_symbols if stack_symbols else (None, None)

    def resolve(pc: int) -> int:
        seen = set()
        while pc < n and ins[pc][0] in ("label", "jmp"):
            if pc in seen:
                raise TransformError("jmp cycle in program")
            seen.add(pc)
            pc = prog.label_index(ins[pc][1]) if ins[pc][0] == "jmp" else pc + 1
        return pc

    pc_states: dict[int, str] = {}

    def state_for(pc: int) -> str:
        pc = resolve(pc)
        if pc not in pc_states:
            pc_states[pc] = sink.fresh(f"{prefix}.{pc}")
        return pc_states[pc]

    entry_pc = resolve(0)
    anyg, noop = sink.any_guards(), sink.noops()

    def exit_target(tag: str | None) -> str:
        key = tag if tag is not None else ""
        if key not in wiring:
            raise TransformError(f"program halted with unwired tag {tag!r}")
        return wiring[key]

    # Entry shim: write the separator for a stack-backed counter.
    if stack_counter is not None:
        entry = sink.fresh(f"{prefix}.sep")
        for s in sink.reads:
            sink.add(entry, s, anyg, None, state_for(0), 0, noop, ("push", (sep,)))
    else:
        entry = state_for(entry_pc)

    def emit_exits(frm: str, to: str) -> None:
        """Route to a continuation, removing the separator first if present."""
        if stack_counter is None:
            for s in sink.reads:
                sink.add(frm, s, anyg, None, to, 0, noop, ("none",))
        else:
            for s in sink.reads:
                sink.add(frm, s, anyg, sep, to, 0, noop, ("pop",))

    # Build states lazily over reachable instructions.
    done: set[int] = set()
    pending = [resolve(0)]
    while pending:
        pc = pending.pop()
        if pc in done:
            continue
        done.add(pc)
        if pc >= n:
            continue
        op = ins[pc]
        kind = op[0]
        here = state_for(pc)

        def goto(target_pc: int) -> str:
            t = resolve(target_pc)
            if t not in done:
                pending.append(t)
            return state_for(t) if t < n else None

        if kind in ("inc", "dec"):
            c = op[1]
            nxt = goto(pc + 1)
            if c == stack_counter:
                for s in sink.reads:
                    if kind == "inc":
                        sink.add(here, s, anyg, None, nxt, 0, noop, ("push", (unit,)))
                    else:
                        sink.add(here, s, anyg, unit, nxt, 0, noop, ("pop",))
            else:
                idx = counter_map[c]
                guards = list(anyg)
                ops = list(noop)
                ops[idx] = kind
                if kind == "dec":
                    guards[idx] = "nonzero"
                for s in sink.reads:
                    sink.add(here, s, guards, None, nxt, 0, ops, ("none",))
        elif kind == "jz":
            c = op[1]
            taken = goto(prog.label_index(op[2]))
            fall = goto(pc + 1)
            if c == stack_counter:
                for s in sink.reads:
                    sink.add(here, s, anyg, sep, taken, 0, noop, ("none",))
                    sink.add(here, s, anyg, unit, fall, 0, noop, ("none",))
            else:
                idx = counter_map[c]
                gz, gn = list(anyg), list(anyg)
                gz[idx], gn[idx] = "zero", "nonzero"
                for s in sink.reads:
                    sink.add(here, s, gz, None, taken, 0, noop, ("none",))
                    sink.add(here, s, gn, None, fall, 0, noop, ("none",))
        elif kind == "left":
            nxt = goto(pc + 1)
            for s in sink.reads:
                if s != LEND:
                    sink.add(here, s, anyg, None, nxt, -1, noop, ("none",))
        elif kind == "right":
            nxt = goto(pc + 1)
            for s in sink.reads:
                if s != REND:
                    sink.add(here, s, anyg, None, nxt, 1, noop, ("none",))
        elif kind == "jsym":
            taken = goto(prog.label_index(op[2]))
            fall = goto(pc + 1)
            for s in sink.reads:
                sink.add(here, s, anyg, None, taken if s == op[1] else fall,
                         0, noop, ("none",))
        elif kind == "choice":
            for target in op[1:]:
                goto(prog.label_index(target))
            for s in sink.reads:
                for target in op[1:]:
                    sink.add(here, s, anyg, None, state_for(prog.label_index(target)),
                             0, noop, ("none",))
        elif kind == "accept":
            emit_exits(here, accept_state)
        elif kind == "reject":
            emit_exits(here, reject_state)
        elif kind == "halt":
            emit_exits(here, exit_target(op[1] if len(op) > 1 else None))
        else:  # label/jmp resolved away
            raise AssertionError(kind)
    return entry


# ---------------------------------------------------------------------------
# Counter fusion


def _touches(rule: TransitionRule, a: int, b: int) -> bool:
    return (rule.guards[a] != "any" or rule.guards[b] != "any"
            or rule.counter_ops[a] != "noop" or rule.counter_ops[b] != "noop")


def _flag_compatible(guard: str, flag_zero: bool) -> bool:
    if guard == "zero":
        return flag_zero
    if guard == "nonzero":
        return not flag_zero
    return True


def pair_counters(spec: MachineSpec, pair: tuple[int, int], *, sweeps: int = 4,
                  exponent: int = 1, scratch: Sequence[int] | None = None,
                  stack_scratch: bool = False) -> MachineSpec:
    """Fuse counters (a, b) into one encoded counter.

    The modulus p = (sweeps*(|x|+1))^exponent is produced from the tape for
    every simulated move, so it must exceed every value counter b takes on
    the inputs of interest; counter a's component is unbounded by the
    encoding.  Overflow of the b component is caught by a post-increment
    zero test and surfaces as a rejecting run.  With stack_scratch (pushdown
    machines only) the CT4 scratch role lives on the stack and only two
    scratch counters are added.
    """
    a, b = pair
    k = spec.counters
    if k < 2:
        raise TransformError("need at least two counters to fuse")
    if a == b or not (0 <= a < k and 0 <= b < k):
        raise TransformError(f"invalid counter pair {pair!r} for k={k}")
    if stack_scratch and spec.stack is None:
        raise TransformError("stack_scratch requires a pushdown machine")
    if scratch is not None:
        if len(scratch) != (2 if stack_scratch else 3):
            raise TransformError("scratch must name 3 counters (2 with stack_scratch)")
        if a in scratch or b in scratch:
            raise TransformError("cannot fuse scratch counters")

    # New layout: fused holder first, then the remaining non-scratch
    # counters, then scratch (reused from the input or freshly added).
    others = [i for i in range(k) if i not in (a, b) and (scratch is None or i not in scratch)]
    fused_idx = 0
    counter_map_old_to_new = {old: 1 + j for j, old in enumerate(others)}
    n_scratch = 2 if stack_scratch else 3
    base = 1 + len(others)
    if scratch is not None:
        for j, old in enumerate(scratch):
            counter_map_old_to_new[old] = base + j
    new_k = base + n_scratch

    scratch_names = [CT1, CT2, CT4][:n_scratch]
    prog_counter_map = {CT1: base, CT2: base + 1, CT3: fused_idx}
    stack_counter = None
    stack_symbols = None
    new_stack = spec.stack
    if stack_scratch:
        stack_counter = CT4
        sep, unit = "_s", "_u"
        alpha = spec.stack.alphabet
        if sep not in alpha:
            alpha = alpha + (sep,)
        if unit not in alpha:
            alpha = alpha + (unit,)
        new_stack = StackSpec(alpha, spec.stack.push_size)
        stack_symbols = (sep, unit)
    else:
        prog_counter_map[CT4] = base + 2

    sink = RuleSink(spec, new_k)
    anyg, noop = sink.any_guards(), sink.noops()

    def remap_guards(g: tuple[str, ...]) -> list[str]:
        out = list(anyg)
        for old, new in counter_map_old_to_new.items():
            out[new] = g[old]
        return out

    def remap_ops(o: tuple[str, ...]) -> list[str]:
        out = list(noop)
        for old, new in counter_map_old_to_new.items():
            out[new] = o[old]
        return out

    produce = build_produce_p(sweeps, exponent, unit_offset=1)
    zero_test = build_zero_test()
    drain = build_drain(CT2)

    rules: list[TransitionRule] = []
    groups: dict[tuple[str, str], list[TransitionRule]] = {}
    for r in spec.transitions:
        groups.setdefault((r.from_state, r.read), []).append(r)

    q_rej_sink: list[str] = []

    def reject_sink() -> str:
        if not q_rej_sink:
            q_rej_sink.append(sink.fresh("_overflow"))
        return q_rej_sink[0]

    for (q, sym), group in sorted(groups.items()):
        if not any(_touches(r, a, b) for r in group):
            for r in group:
                rules.append(TransitionRule(q, sym, tuple(remap_guards(r.guards)),
                                            r.stack_top, r.to_state, r.move,
                                            tuple(remap_ops(r.counter_ops)), r.stack_op))
            continue

        tag = f"_{q}.{sym if sym not in (LEND, REND) else ('L' if sym == LEND else 'R')}"
        # Dispatch states per zero-flag pattern of the fused pair.
        dispatch = {fl: sink.fresh(f"{tag}.d{'z' if fl[0] else 'n'}{'z' if fl[1] else 'n'}")
                    for fl in itertools.product((True, False), repeat=2)}
        wiring = {"zz": dispatch[(True, True)], "zn": dispatch[(True, False)],
                  "nz": dispatch[(False, True)], "nn": dispatch[(False, False)]}
        zt_entry = lower_program(zero_test, sink, f"{tag}.zt", prog_counter_map,
                                 wiring, "", reject_sink(), stack_counter, stack_symbols)
        pp_entry = lower_program(produce, sink, f"{tag}.pp", prog_counter_map,
                                 {"": zt_entry}, "", reject_sink(), stack_counter,
                                 stack_symbols)
        rules.append(TransitionRule(q, sym, tuple(anyg), None, pp_entry, 0,
                                    tuple(noop), ("none",)))

        for fl, dstate in dispatch.items():
            for ti, r in enumerate(group):
                if not (_flag_compatible(r.guards[a], fl[0])
                        and _flag_compatible(r.guards[b], fl[1])):
                    continue
                # Exit applies the untouched parts of the original rule; the
                # unfused guards still hold (procedures only move the fused
                # holder and scratch) and the validator wants them restated
                # wherever the ops decrement.
                exit_guards = remap_guards(r.guards)
                exit_guards[fused_idx] = "any"
                exit_state = sink.fresh(f"{tag}.x{ti}")
                rules.append(TransitionRule(exit_state, sym, tuple(exit_guards),
                                            r.stack_top, r.to_state, r.move,
                                            tuple(remap_ops(r.counter_ops)), r.stack_op))
                # Chain of encoded updates, then the modulus teardown.
                cont = lower_program(drain, sink, f"{tag}.dr{ti}", prog_counter_map,
                                     {"": exit_state}, "", reject_sink(),
                                     stack_counter, stack_symbols)
                steps: list[tuple[int, str]] = []
                if r.counter_ops[a] != "noop":
                    steps.append((1, r.counter_ops[a]))
                if r.counter_ops[b] != "noop":
                    steps.append((2, r.counter_ops[b]))
                for comp, op in reversed(steps):
                    if comp == 2 and op == "inc":
                        # Post-check: a wrapped second component reads as zero.
                        chk = sink.fresh(f"{tag}.ov{ti}")
                        wiring2 = {"zz": reject_sink(), "nz": reject_sink(),
                                   "zn": cont, "nn": cont}
                        chk_entry = lower_program(zero_test, sink, f"{tag}.oc{ti}",
                                                  prog_counter_map, wiring2, "",
                                                  reject_sink(), stack_counter,
                                                  stack_symbols)
                        del chk
                        cont = chk_entry
                    cont = lower_program(build_update(comp, op), sink,
                                         f"{tag}.u{ti}.{comp}{op}", prog_counter_map,
                                         {"ok": cont}, "", reject_sink(),
                                         stack_counter, stack_symbols)
                guards = remap_guards(r.guards)
                guards[fused_idx] = "any"
                rules.append(TransitionRule(dstate, sym, tuple(guards), r.stack_top,
                                            cont, 0, tuple(noop), ("none",)))

    new_states = tuple(spec.states) + tuple(sink.states)  # fresh() tracks sink states
    rejecting = spec.rejecting | frozenset(q_rej_sink)
    out = MachineSpec(
        name=f"{spec.name}_fused",
        mode=spec.mode,
        states=new_states,
        alphabet=spec.alphabet,
        counters=new_k,
        stack=new_stack,
        initial=spec.initial,
        accepting=spec.accepting,
        rejecting=rejecting,
        transitions=tuple(rules) + tuple(sink.rules),
        provenance={
            "derived_from": spec.name,
            "transform": "pair_counters",
            "parameters": {
                "pair": [a, b],
                "sweeps": sweeps,
                "exponent": exponent,
                "fused_index": fused_idx,
                "scratch_indices": list(range(base, base + n_scratch)),
                "stack_scratch": stack_scratch,
                "counter_map": {str(o): nw for o, nw in counter_map_old_to_new.items()},
            },
        },
    )
    validate_machine(out)
    return out


def _fuse_all_counters(spec: MachineSpec, modulus: int,
                       stack_scratch: bool) -> MachineSpec:
    """Pack every counter into one, digit i of the packed value holding
    counter i in base `modulus`.  Iterated pairing evaluated in one pass:
    level-i operations move p^i, produced by constant multiplication, so the
    single scratch trio is shared by every level and empty between moves.
    Wrapping one fusion's procedure rules inside another is unsound (the
    scratch is live mid-procedure), which is why the levels are flattened
    here instead of re-running the pair transform.
    """
    from .counterprog import build_digit_flags, build_digit_update

    k = spec.counters
    n_scratch = 2 if stack_scratch else 3
    new_k = 1 + n_scratch
    prog_counter_map = {CT3: 0, CT1: 1, CT2: 2}
    stack_counter = None
    stack_symbols = None
    new_stack = spec.stack
    if stack_scratch:
        stack_counter = CT4
        sep, unit = "_s", "_u"
        alpha = spec.stack.alphabet
        for sym in (sep, unit):
            if sym not in alpha:
                alpha = alpha + (sym,)
        new_stack = StackSpec(alpha, spec.stack.push_size)
        stack_symbols = (sep, unit)
    else:
        prog_counter_map[CT4] = 3

    sink = RuleSink(spec, new_k)
    anyg, noop = sink.any_guards(), sink.noops()
    rules: list[TransitionRule] = []
    groups: dict[tuple[str, str], list[TransitionRule]] = {}
    for r in spec.transitions:
        groups.setdefault((r.from_state, r.read), []).append(r)

    q_rej_sink: list[str] = []

    def reject_sink() -> str:
        if not q_rej_sink:
            q_rej_sink.append(sink.fresh("_overflow"))
        return q_rej_sink[0]

    for (q, sym), group in sorted(groups.items()):
        referenced = sorted({
            i for r in group for i in range(k)
            if r.guards[i] != "any" or r.counter_ops[i] != "noop"})
        if not referenced:
            for r in group:
                rules.append(TransitionRule(q, sym, tuple(anyg), r.stack_top,
                                            r.to_state, r.move, tuple(noop),
                                            r.stack_op))
            continue

        tag = f"_{q}.{sym if sym not in (LEND, REND) else ('L' if sym == LEND else 'R')}"

        def dispatch_state(pattern: dict[int, bool]) -> str:
            """Dispatch for one zero-flag pattern over the referenced digits."""
            pat = "".join("z" if pattern[d] else "n" for d in referenced)
            dstate = sink.fresh(f"{tag}.d{pat}")
            for ti, r in enumerate(group):
                if not all(_flag_compatible(r.guards[d], pattern[d])
                           for d in referenced):
                    continue
                exit_state = sink.fresh(f"{tag}.{pat}.x{ti}")
                rules.append(TransitionRule(exit_state, sym, tuple(anyg),
                                            r.stack_top, r.to_state, r.move,
                                            tuple(noop), r.stack_op))
                cont = exit_state
                ops = [(d, r.counter_ops[d]) for d in range(k)
                       if r.counter_ops[d] != "noop"]
                for d, op in reversed(ops):
                    if op == "inc":
                        # a wrapped digit reads as zero afterwards
                        wiring2 = {"z": reject_sink(), "n": cont}
                        cont = lower_program(build_digit_flags(modulus, d), sink,
                                             f"{tag}.{pat}.ov{ti}.{d}",
                                             prog_counter_map, wiring2, "",
                                             reject_sink(), stack_counter,
                                             stack_symbols)
                    cont = lower_program(build_digit_update(modulus, d, op), sink,
                                         f"{tag}.{pat}.u{ti}.{d}{op}",
                                         prog_counter_map, {"ok": cont}, "",
                                         reject_sink(), stack_counter, stack_symbols)
                rules.append(TransitionRule(dstate, sym, tuple(anyg), r.stack_top,
                                            cont, 0, tuple(noop), ("none",)))
            return dstate

        def flag_chain(pattern: dict[int, bool], remaining: list[int]) -> str:
            if not remaining:
                return dispatch_state(pattern)
            d, rest = remaining[0], remaining[1:]
            z_target = flag_chain({**pattern, d: True}, rest)
            n_target = flag_chain({**pattern, d: False}, rest)
            return lower_program(build_digit_flags(modulus, d), sink,
                                 f"{tag}.f{d}." + "".join(
                                     "z" if pattern[x] else "n" for x in sorted(pattern)),
                                 prog_counter_map, {"z": z_target, "n": n_target},
                                 "", reject_sink(), stack_counter, stack_symbols)

        entry = flag_chain({}, referenced)
        rules.append(TransitionRule(q, sym, tuple(anyg), None, entry, 0,
                                    tuple(noop), ("none",)))

    new_states = tuple(spec.states) + tuple(sink.states)
    out = MachineSpec(
        name=f"{spec.name}_packed",
        mode=spec.mode,
        states=new_states,
        alphabet=spec.alphabet,
        counters=new_k,
        stack=new_stack,
        initial=spec.initial,
        accepting=spec.accepting,
        rejecting=spec.rejecting | frozenset(q_rej_sink),
        transitions=tuple(rules) + tuple(sink.rules),
        provenance={
            "derived_from": spec.name,
            "transform": "pack_counters",
            "parameters": {"digits": k, "modulus": modulus,
                           "scratch_indices": list(range(1, new_k)),
                           "stack_scratch": stack_scratch},
        },
    )
    validate_machine(out)
    return out


def reduce_counters(spec: MachineSpec, *, modulus: int = 64) -> MachineSpec:
    """Reduce to exactly 4 counters: one packed value plus the scratch trio.

    The modulus must exceed every counter value reached on the inputs of
    interest (pick it from the run cap); overflow of a digit surfaces as a
    rejecting run.
    """
    if spec.counters < 4:
        raise TransformError("reduce_counters expects at least 4 counters")
    if spec.counters == 4:
        prov = {"derived_from": spec.name, "transform": "reduce_counters",
                "parameters": {"packed": False}}
        return _with_provenance(spec, prov)
    out = _fuse_all_counters(spec, modulus, stack_scratch=False)
    prov = {"derived_from": spec.name, "transform": "reduce_counters",
            "parameters": {"packed": True, "digits": spec.counters,
                           "modulus": modulus,
                           "scratch_indices": [1, 2, 3]}}
    return _with_provenance(out, prov)


def reduce_counters_pd(spec: MachineSpec, *, modulus: int = 64) -> MachineSpec:
    """Pushdown variant: the stack absorbs one scratch role, leaving 3 counters."""
    if spec.stack is None:
        raise TransformError("reduce_counters_pd expects a pushdown machine")
    if spec.counters < 3:
        raise TransformError("reduce_counters_pd expects at least 3 counters")
    if spec.counters == 3:
        prov = {"derived_from": spec.name, "transform": "reduce_counters_pd",
                "parameters": {"packed": False}}
        return _with_provenance(spec, prov)
    out = _fuse_all_counters(spec, modulus, stack_scratch=True)
    prov = {"derived_from": spec.name, "transform": "reduce_counters_pd",
            "parameters": {"packed": True, "digits": spec.counters,
                           "modulus": modulus,
                           "scratch_indices": [1, 2]}}
    return _with_provenance(out, prov)


def _with_provenance(spec: MachineSpec, prov: dict) -> MachineSpec:
    import dataclasses

    return dataclasses.replace(spec, provenance=prov)


# ---------------------------------------------------------------------------
# Counter elimination


def eliminate_counters(spec: MachineSpec, ceiling: int) -> MachineSpec:
    """Fold counter values up to the ceiling into the states.

    The state set is the full product Q x [0, ceiling]^k; transitions that
    would push a counter past the ceiling go to a rejecting sink (added only
    when needed).  Equivalence holds on every input whose run keeps all
    counters within the ceiling.  When the result is a plain finite
    automaton, stationary steps are compressed away (chains of move-0 rules
    are replaced by their moving continuations), since plain two-way
    automata make no stationary moves.
    """
    if ceiling < 0:
        raise TransformError("ceiling must be non-negative")
    k = spec.counters
    if k == 0:
        prov = {"derived_from": spec.name, "transform": "eliminate_counters",
                "parameters": {"ceiling": ceiling}}
        return _with_provenance(spec, prov)

    def pname(q: str, vec: tuple[int, ...]) -> str:
        return f"{q}[{','.join(map(str, vec))}]"

    vectors = list(itertools.product(range(ceiling + 1), repeat=k))
    states = [pname(q, v) for q in spec.states for v in vectors]
    sink_name = "_ovf"
    while sink_name in states:
        sink_name = "_" + sink_name
    need_sink = False

    rules: list[TransitionRule] = []
    noop = ()
    for r in spec.transitions:
        for vec in vectors:
            ok = True
            for g, val in zip(r.guards, vec):
                if (g == "zero" and val != 0) or (g == "nonzero" and val == 0):
                    ok = False
                    break
            if not ok:
                continue
            nxt = list(vec)
            for i, op in enumerate(r.counter_ops):
                if op == "inc":
                    nxt[i] += 1
                elif op == "dec":
                    nxt[i] -= 1
            if any(v > ceiling for v in nxt):
                need_sink = True
                target = sink_name
            else:
                target = pname(r.to_state, tuple(nxt))
            rules.append(TransitionRule(pname(r.from_state, vec), r.read, (),
                                        r.stack_top, target, r.move, noop, r.stack_op))

    accepting = frozenset(pname(q, v) for q in spec.accepting for v in vectors)
    rejecting = frozenset(pname(q, v) for q in spec.rejecting for v in vectors)
    if need_sink:
        states.append(sink_name)
        rejecting = rejecting | {sink_name}

    out = MachineSpec(
        name=f"{spec.name}_nocounter",
        mode=spec.mode,
        states=tuple(states),
        alphabet=spec.alphabet,
        counters=0,
        stack=spec.stack,
        initial=pname(spec.initial, (0,) * k),
        accepting=accepting,
        rejecting=rejecting,
        transitions=tuple(rules),
        provenance={"derived_from": spec.name, "transform": "eliminate_counters",
                    "parameters": {"ceiling": ceiling}},
    )
    if out.stack is None:
        out = _compress_stationary(out)
    validate_machine(out)
    return out


def _compress_stationary(spec: MachineSpec) -> MachineSpec:
    """Replace move-0 rules of a counter-free automaton by the moving rules
    reachable through stationary chains.  Stationary cycles disappear; they
    can never contribute an accepting path."""
    if all(r.move != 0 for r in spec.transitions):
        return spec
    by_trigger: dict[tuple[str, str], list[TransitionRule]] = {}
    for r in spec.transitions:
        by_trigger.setdefault((r.from_state, r.read), []).append(r)

    legal_move = {LEND: 1, REND: -1}

    def closure(q: str, sym: str) -> list[tuple[str, int, tuple, str | None]]:
        """Moving outcomes (target, move, stack_op, stack_top) and halting
        targets reachable from q through stationary steps reading sym."""
        out = []
        seen = {q}
        frontier = [q]
        while frontier:
            cur = frontier.pop()
            for r in by_trigger.get((cur, sym), ()):
                if r.move != 0:
                    out.append((r.to_state, r.move, r.stack_op, r.stack_top))
                elif r.to_state in spec.halting:
                    mv = legal_move.get(sym, 1)
                    out.append((r.to_state, mv, r.stack_op, r.stack_top))
                elif r.to_state not in seen:
                    seen.add(r.to_state)
                    frontier.append(r.to_state)
        return out

    rules = []
    emitted = set()
    for r in spec.transitions:
        if r.move != 0:
            rules.append(r)
    for (q, sym) in list(by_trigger):
        if all(r.move != 0 for r in by_trigger[(q, sym)]):
            continue
        for (to, mv, sop, stop) in closure(q, sym):
            key = (q, sym, to, mv, sop, stop)
            if key not in emitted:
                emitted.add(key)
                rules.append(TransitionRule(q, sym, (), stop, to, mv, (), sop))
    # Direct moving rules may coincide with closure results; dedupe.
    unique = []
    seen_rules = set()
    for r in rules:
        key = (r.from_state, r.read, r.stack_top, r.to_state, r.move, r.stack_op)
        if key not in seen_rules:
            seen_rules.add(key)
            unique.append(r)
    import dataclasses

    return dataclasses.replace(spec, transitions=tuple(unique))
