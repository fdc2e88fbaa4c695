"""Domain types for two-way multi-counter (pushdown) automata.

A machine reads an input written as ``> x <`` on a two-way tape (cell 0
holds ``>``, cell ``|x|+1`` holds ``<``) and manipulates k counters, each a
stack over the single symbol ``1`` above the bottom marker ``⊥``, plus an
optional real stack.  This module owns the textual machine format, static
validation, the single-step relation, complexity metrics, and the slim
normal form for pushdown machines.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

LEND = ">"
REND = "<"
BOTTOM = "⊥"  # ⊥

GUARDS = ("zero", "nonzero", "any")
COUNTER_OPS = ("inc", "dec", "noop")
MODES = ("deterministic", "nondeterministic", "unambiguous-claimed")


class MachineError(Exception):
    """Base class for machine-document problems."""


class MachineSyntaxError(MachineError):
    """Malformed document text; carries the position when known."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message if position is None else f"{message} (at offset {position})")
        self.position = position


class MachineSemanticsError(MachineError):
    """Well-formed JSON that violates the machine format's rules."""


@dataclass(frozen=True)
class StackSpec:
    alphabet: tuple[str, ...]
    push_size: int

    def symbols(self) -> tuple[str, ...]:
        return self.alphabet


@dataclass(frozen=True)
class TransitionRule:
    from_state: str
    read: str
    guards: tuple[str, ...]
    stack_top: str | None
    to_state: str
    move: int
    counter_ops: tuple[str, ...]
    stack_op: tuple  # ("none",) | ("pop",) | ("push", (sym, ...))

    def describe(self) -> str:
        return f"{self.from_state} --{self.read}--> {self.to_state}"


@dataclass(frozen=True)
class MachineSpec:
    name: str
    mode: str
    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    counters: int
    stack: StackSpec | None
    initial: str
    accepting: frozenset[str]
    rejecting: frozenset[str]
    transitions: tuple[TransitionRule, ...]
    provenance: Mapping | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_state_index", {q: i for i, q in enumerate(self.states)})
        object.__setattr__(self, "_rules_by_state", _group_rules(self.transitions))
        if self.stack is not None:
            object.__setattr__(
                self, "_stack_index", {s: i for i, s in enumerate(self.stack.alphabet)}
            )
        else:
            object.__setattr__(self, "_stack_index", {})

    @property
    def halting(self) -> frozenset[str]:
        return self.accepting | self.rejecting

    def state_index(self, q: str) -> int:
        return self._state_index[q]

    def stack_index(self, sym: str) -> int:
        return self._stack_index[sym]

    def rules_from(self, state: str) -> tuple[TransitionRule, ...]:
        return self._rules_by_state.get(state, ())

    def tape(self, x: str) -> str:
        return LEND + x + REND

    def initial_configuration(self) -> "Configuration":
        stack = (BOTTOM,) if self.stack is not None else None
        return Configuration(self.initial, 0, (0,) * self.counters, stack)

    def check_input(self, x: str) -> None:
        bad = set(x) - set(self.alphabet)
        if bad:
            raise ValueError(f"input contains symbols outside the alphabet: {sorted(bad)}")


@dataclass(frozen=True)
class Configuration:
    """One node of the computation graph: full counter values and full stack."""

    state: str
    head: int
    counters: tuple[int, ...]
    stack: tuple[str, ...] | None = None

    def sort_key(self, spec: MachineSpec):
        stack_key = tuple(spec.stack_index(s) for s in self.stack) if self.stack else ()
        return (spec.state_index(self.state), self.head, self.counters, stack_key)

    def check_valid(self, spec: MachineSpec, x: str) -> None:
        if self.state not in spec._state_index:
            raise ValueError(f"unknown state {self.state!r}")
        if not 0 <= self.head <= len(x) + 1:
            raise ValueError(f"head {self.head} outside [0, {len(x) + 1}]")
        if len(self.counters) != spec.counters or any(c < 0 for c in self.counters):
            raise ValueError("counter vector malformed")
        if (spec.stack is None) != (self.stack is None):
            raise ValueError("stack presence mismatch")
        if self.stack is not None:
            if not self.stack or self.stack[0] != BOTTOM or BOTTOM in self.stack[1:]:
                raise ValueError("stack must hold ⊥ exactly at the bottom")


@dataclass(frozen=True)
class SurfaceView:
    """Zero/nonzero projection of a configuration (counter tops in {1, ⊥})."""

    state: str
    head: int
    counter_tops: tuple[str, ...]
    stack_top: str | None = None

    @classmethod
    def of(cls, cfg: Configuration) -> "SurfaceView":
        tops = tuple("1" if c > 0 else BOTTOM for c in cfg.counters)
        stack_top = cfg.stack[-1] if cfg.stack else None
        return cls(cfg.state, cfg.head, tops, stack_top)


def _group_rules(rules: Iterable[TransitionRule]) -> dict[str, tuple[TransitionRule, ...]]:
    out: dict[str, list[TransitionRule]] = {}
    for r in rules:
        out.setdefault(r.from_state, []).append(r)
    return {k: tuple(v) for k, v in out.items()}


# ---------------------------------------------------------------------------
# Parsing and validation


def parse_machine(doc: str) -> MachineSpec:
    """Parse and validate a machine document (JSON, UTF-8)."""
    try:
        raw = json.loads(doc)
    except json.JSONDecodeError as e:
        raise MachineSyntaxError(e.msg, e.pos) from e
    if not isinstance(raw, dict):
        raise MachineSyntaxError("top-level value must be an object")
    return machine_from_dict(raw)


def machine_from_dict(raw: Mapping) -> MachineSpec:
    required = ["name", "mode", "states", "alphabet", "counters", "stack",
                "initial", "accepting", "rejecting", "transitions"]
    for key in required:
        if key not in raw:
            raise MachineSyntaxError(f"missing key {key!r}")

    stack = None
    if raw["stack"] is not None:
        s = raw["stack"]
        if not isinstance(s, dict) or "alphabet" not in s or "push_size" not in s:
            raise MachineSyntaxError("stack must be null or {alphabet, push_size}")
        stack = StackSpec(tuple(s["alphabet"]), int(s["push_size"]))

    k = int(raw["counters"])
    rules = []
    for i, t in enumerate(raw["transitions"]):
        try:
            rules.append(
                TransitionRule(
                    from_state=t["from"],
                    read=t["read"],
                    guards=tuple(t["guards"]),
                    stack_top=t.get("stack_top"),
                    to_state=t["to"],
                    move=int(t["move"]),
                    counter_ops=tuple(t["counter_ops"]),
                    stack_op=_parse_stack_op(t["stack_op"], stack, i),
                )
            )
        except KeyError as e:
            raise MachineSyntaxError(f"transition #{i} missing key {e.args[0]!r}") from e

    spec = MachineSpec(
        name=str(raw["name"]),
        mode=raw["mode"],
        states=tuple(raw["states"]),
        alphabet=tuple(raw["alphabet"]),
        counters=k,
        stack=stack,
        initial=raw["initial"],
        accepting=frozenset(raw["accepting"]),
        rejecting=frozenset(raw["rejecting"]),
        transitions=tuple(rules),
        provenance=raw.get("provenance"),
    )
    validate_machine(spec)
    return spec


def _parse_stack_op(op, stack: StackSpec | None, idx: int) -> tuple:
    if op == "none":
        return ("none",)
    if op == "pop":
        return ("pop",)
    if isinstance(op, dict) and "push" in op:
        w = op["push"]
        if stack is None:
            raise MachineSemanticsError(f"transition #{idx} pushes but the machine has no stack")
        # An exact full-string match is one (possibly composite) symbol;
        # otherwise the string splits character-wise.
        if w in stack.alphabet:
            return ("push", (w,))
        return ("push", tuple(w))
    raise MachineSyntaxError(f"transition #{idx} has malformed stack_op {op!r}")


def validate_machine(spec: MachineSpec) -> None:
    """Check every static invariant; raise MachineSemanticsError naming the rule."""
    if spec.mode not in MODES:
        raise MachineSemanticsError(f"unknown mode {spec.mode!r}")
    if len(set(spec.states)) != len(spec.states):
        raise MachineSemanticsError("duplicate state declarations")
    if spec.counters < 0:
        raise MachineSemanticsError("counter count must be non-negative")
    for a in spec.alphabet:
        if a in (LEND, REND):
            raise MachineSemanticsError(f"endmarker {a!r} may not appear in the alphabet")
        if len(a) != 1:
            raise MachineSemanticsError(f"alphabet symbol {a!r} must be a single character")
    if len(set(spec.alphabet)) != len(spec.alphabet):
        raise MachineSemanticsError("duplicate alphabet symbols")
    if spec.initial not in spec._state_index:
        raise MachineSemanticsError(f"initial state {spec.initial!r} is not declared")
    for q in spec.accepting | spec.rejecting:
        if q not in spec._state_index:
            raise MachineSemanticsError(f"halting state {q!r} is not declared")
    if spec.accepting & spec.rejecting:
        clash = sorted(spec.accepting & spec.rejecting)
        raise MachineSemanticsError(f"states {clash} are both accepting and rejecting")
    if spec.stack is not None:
        if BOTTOM not in spec.stack.alphabet:
            raise MachineSemanticsError("stack alphabet must include ⊥")
        if spec.stack.push_size < 1:
            raise MachineSemanticsError("push size must be positive")
        if len(set(spec.stack.alphabet)) != len(spec.stack.alphabet):
            raise MachineSemanticsError("duplicate stack symbols")

    plain = spec.counters == 0 and spec.stack is None
    readable = set(spec.alphabet) | {LEND, REND}

    for i, r in enumerate(spec.transitions):
        where = f"rule #{i} ({r.describe()})"
        if r.from_state not in spec._state_index:
            raise MachineSemanticsError(f"{where}: undeclared state {r.from_state!r}")
        if r.to_state not in spec._state_index:
            raise MachineSemanticsError(f"{where}: undeclared state {r.to_state!r}")
        if r.read not in readable:
            raise MachineSemanticsError(f"{where}: undeclared symbol {r.read!r}")
        if len(r.guards) != spec.counters or any(g not in GUARDS for g in r.guards):
            raise MachineSemanticsError(f"{where}: guards must be {GUARDS} of length {spec.counters}")
        if len(r.counter_ops) != spec.counters or any(o not in COUNTER_OPS for o in r.counter_ops):
            raise MachineSemanticsError(f"{where}: counter_ops malformed")
        for g, o in zip(r.guards, r.counter_ops):
            if o == "dec" and g != "nonzero":
                raise MachineSemanticsError(
                    f"{where}: dec requires a nonzero guard on the same counter"
                )
        if r.move not in (-1, 0, 1):
            raise MachineSemanticsError(f"{where}: move must be -1, 0 or 1")
        if r.read == LEND and r.move == -1:
            raise MachineSemanticsError(f"{where}: cannot move left at {LEND!r}")
        if r.read == REND and r.move == 1:
            raise MachineSemanticsError(f"{where}: cannot move right at {REND!r}")
        if plain and r.move == 0:
            raise MachineSemanticsError(
                f"{where}: stationary moves are not allowed for plain finite automata"
            )
        if spec.stack is None:
            if r.stack_top is not None or r.stack_op != ("none",):
                raise MachineSemanticsError(f"{where}: stack operation on a stackless machine")
        else:
            if r.stack_top is not None and r.stack_top not in spec.stack.alphabet:
                raise MachineSemanticsError(f"{where}: undeclared stack symbol {r.stack_top!r}")
            if r.stack_op[0] == "pop":
                # ⊥ is never popped; a pop must be guarded by an explicit non-⊥ top.
                if r.stack_top is None or r.stack_top == BOTTOM:
                    raise MachineSemanticsError(
                        f"{where}: pop requires an explicit non-⊥ stack-top guard"
                    )
            elif r.stack_op[0] == "push":
                w = r.stack_op[1]
                if not w:
                    raise MachineSemanticsError(f"{where}: empty push; use 'none'")
                if len(w) > spec.stack.push_size:
                    raise MachineSemanticsError(
                        f"{where}: push of length {len(w)} exceeds push size {spec.stack.push_size}"
                    )
                for sym in w:
                    if sym == BOTTOM:
                        raise MachineSemanticsError(f"{where}: ⊥ is never pushed above the bottom")
                    if sym not in spec.stack.alphabet:
                        raise MachineSemanticsError(f"{where}: undeclared stack symbol {sym!r}")
        if r.from_state in spec.halting:
            raise MachineSemanticsError(f"{where}: halting states have no outgoing rules")

    if spec.mode == "deterministic":
        _check_deterministic(spec)


def _guards_overlap(g1: tuple[str, ...], g2: tuple[str, ...]) -> bool:
    return all(not ({a, b} == {"zero", "nonzero"}) for a, b in zip(g1, g2))


def _tops_overlap(t1: str | None, t2: str | None) -> bool:
    return t1 is None or t2 is None or t1 == t2


def _check_deterministic(spec: MachineSpec) -> None:
    by_trigger: dict[tuple[str, str], list[tuple[int, TransitionRule]]] = {}
    for i, r in enumerate(spec.transitions):
        by_trigger.setdefault((r.from_state, r.read), []).append((i, r))
    for rules in by_trigger.values():
        for (i, a), (j, b) in itertools.combinations(rules, 2):
            if _guards_overlap(a.guards, b.guards) and _tops_overlap(a.stack_top, b.stack_top):
                raise MachineSemanticsError(
                    f"deterministic mode violated: rules #{i} ({a.describe()}) and "
                    f"#{j} ({b.describe()}) can fire on the same configuration"
                )


# ---------------------------------------------------------------------------
# Serialization


def machine_to_dict(spec: MachineSpec) -> dict:
    doc = {
        "name": spec.name,
        "mode": spec.mode,
        "states": list(spec.states),
        "alphabet": list(spec.alphabet),
        "counters": spec.counters,
        "stack": None
        if spec.stack is None
        else {"alphabet": list(spec.stack.alphabet), "push_size": spec.stack.push_size},
        "initial": spec.initial,
        "accepting": sorted(spec.accepting),
        "rejecting": sorted(spec.rejecting),
        "transitions": [
            {
                "from": r.from_state,
                "read": r.read,
                "guards": list(r.guards),
                "stack_top": r.stack_top,
                "to": r.to_state,
                "move": r.move,
                "counter_ops": list(r.counter_ops),
                "stack_op": _stack_op_to_json(r.stack_op),
            }
            for r in spec.transitions
        ],
    }
    if spec.provenance is not None:
        doc["provenance"] = dict(spec.provenance)
    return doc


def _stack_op_to_json(op: tuple):
    if op[0] == "push":
        w = op[1]
        return {"push": w[0] if len(w) == 1 else "".join(w)}
    return op[0]


def serialize_machine(spec: MachineSpec) -> str:
    return json.dumps(machine_to_dict(spec), ensure_ascii=False, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Step relation


def rule_applies(spec: MachineSpec, rule: TransitionRule, tape_symbol: str,
                 cfg: Configuration) -> bool:
    if rule.from_state != cfg.state or rule.read != tape_symbol:
        return False
    for g, c in zip(rule.guards, cfg.counters):
        if g == "zero" and c != 0:
            return False
        if g == "nonzero" and c == 0:
            return False
    if spec.stack is not None and rule.stack_top is not None:
        if cfg.stack[-1] != rule.stack_top:
            return False
    return True


def apply_rule(rule: TransitionRule, cfg: Configuration) -> Configuration:
    counters = list(cfg.counters)
    for i, op in enumerate(rule.counter_ops):
        if op == "inc":
            counters[i] += 1
        elif op == "dec":
            counters[i] -= 1
            assert counters[i] >= 0, "dec below zero escaped the guard invariant"
    stack = cfg.stack
    if stack is not None:
        if rule.stack_op[0] == "pop":
            stack = stack[:-1]
        elif rule.stack_op[0] == "push":
            stack = stack + rule.stack_op[1]
    return Configuration(rule.to_state, cfg.head + rule.move, tuple(counters), stack)


def step_relation(spec: MachineSpec, x: str, cfg: Configuration) -> tuple[Configuration, ...]:
    """All one-step successors of cfg, in rule-declaration order.

    Halting configurations have no successors.  An empty result on a
    non-halting state means the configuration is stuck.
    """
    if cfg.state in spec.halting:
        return ()
    tape = spec.tape(x)
    symbol = tape[cfg.head]
    out = []
    seen = set()
    for rule in spec.rules_from(cfg.state):
        if rule_applies(spec, rule, symbol, cfg):
            nxt = apply_rule(rule, cfg)
            if nxt not in seen:
                seen.add(nxt)
                out.append(nxt)
    return tuple(out)


def is_stuck(spec: MachineSpec, x: str, cfg: Configuration) -> bool:
    return cfg.state not in spec.halting and not step_relation(spec, x, cfg)


# ---------------------------------------------------------------------------
# Complexity metrics


def state_complexity(spec: MachineSpec) -> int:
    return len(spec.states)


def stack_state_complexity(spec: MachineSpec) -> int:
    """|Q| times the number of stack strings of length at most the push size."""
    if spec.stack is None:
        raise MachineError("stack-state complexity is defined only for pushdown machines")
    g = len(spec.stack.alphabet)
    total = sum(g**d for d in range(spec.stack.push_size + 1))
    return len(spec.states) * total


# ---------------------------------------------------------------------------
# Slim normal form


def _fresh(base: str, taken: set[str]) -> str:
    if base not in taken:
        taken.add(base)
        return base
    for i in itertools.count(2):
        cand = f"{base}{i}"
        if cand not in taken:
            taken.add(cand)
            return cand
    raise AssertionError


def is_slim(spec: MachineSpec) -> bool:
    """Recognize machines already produced by normalize_slim."""
    return bool(
        spec.stack is not None
        and spec.provenance
        and spec.provenance.get("transform") == "normalize_slim"
    )


def normalize_slim(spec: MachineSpec) -> MachineSpec:
    """Rewrite a pushdown machine into the slim normal form.

    The result pushes single symbols only, never lets the stack shrink to
    just ⊥ before the final step (a dummy bottom symbol is installed), makes
    every move push or pop (flat stack moves become push/pop pairs), and
    halts in a unique accepting or rejecting state with an empty stack, zero
    counters, and the head parked at cell 0.  Acceptance is preserved on all
    inputs; step counts are not.
    """
    if spec.stack is None:
        raise MachineError("normalize_slim requires a pushdown machine")
    if is_slim(spec):
        return spec

    k = spec.counters
    noop = ("noop",) * k
    anyg = ("any",) * k
    reads = tuple(spec.alphabet) + (LEND, REND)

    base = [s for s in spec.stack.alphabet if s != BOTTOM]
    blocks = [
        "".join(w)
        for d in range(1, spec.stack.push_size + 1)
        for w in itertools.product(base, repeat=d)
    ]
    taken_syms = set(blocks) | {BOTTOM}
    dummy_bottom = _fresh("_B", taken_syms)
    pair_sym = _fresh("_P", taken_syms)
    new_alpha = (BOTTOM, dummy_bottom, pair_sym, *blocks)

    taken_states = set(spec.states)
    q_init = _fresh("_init", taken_states)
    q_acc = _fresh("_acc", taken_states)
    q_rej = _fresh("_rej", taken_states)
    drain = {True: _fresh("_drain_acc", taken_states), False: _fresh("_drain_rej", taken_states)}
    park = {True: _fresh("_park_acc", taken_states), False: _fresh("_park_rej", taken_states)}
    zeroc = {True: _fresh("_zero_acc", taken_states), False: _fresh("_zero_rej", taken_states)}

    def retarget(q: str) -> str:
        if q in spec.accepting:
            return drain[True]
        if q in spec.rejecting:
            return drain[False]
        return q

    # Tops an original rule may fire on, translated to the new alphabet:
    # original ⊥ becomes the dummy bottom; an original symbol a matches any
    # block ending in a.
    def new_tops(guard: str | None) -> list[str]:
        if guard is None:
            return [dummy_bottom, *blocks]
        if guard == BOTTOM:
            return [dummy_bottom]
        return [b for b in blocks if b.endswith(guard)]

    rules: list[TransitionRule] = []
    extra_states: list[str] = []

    def emit(from_state, read, guards, stack_top, to_state, move, counter_ops, stack_op):
        rules.append(TransitionRule(from_state, read, tuple(guards), stack_top,
                                    to_state, move, tuple(counter_ops), stack_op))

    def chain_state(tag: str) -> str:
        s = _fresh(tag, taken_states)
        extra_states.append(s)
        return s

    # Part 1: seed the dummy bottom, then hand over to the original initial state.
    emit(q_init, LEND, anyg, BOTTOM, retarget(spec.initial), 0, noop, ("push", (dummy_bottom,)))

    # Part 2: original rules, block-expanded, flat moves split into push/pop pairs.
    for i, r in enumerate(spec.transitions):
        tgt = retarget(r.to_state)
        for top in new_tops(r.stack_top):
            if r.stack_op[0] == "none":
                mid = chain_state(f"_t{i}")
                emit(r.from_state, r.read, r.guards, top, mid, r.move,
                     r.counter_ops, ("push", (pair_sym,)))
                for s in reads:
                    emit(mid, s, anyg, pair_sym, tgt, 0, noop, ("pop",))
            elif r.stack_op[0] == "push":
                w = "".join(r.stack_op[1])
                emit(r.from_state, r.read, r.guards, top, tgt, r.move,
                     r.counter_ops, ("push", (w,)))
            else:  # pop one original symbol off the top block
                assert top not in (dummy_bottom, BOTTOM)
                if len(top) == 1:
                    emit(r.from_state, r.read, r.guards, top, tgt, r.move,
                         r.counter_ops, ("pop",))
                else:
                    mid = chain_state(f"_t{i}")
                    emit(r.from_state, r.read, r.guards, top, mid, r.move,
                         r.counter_ops, ("pop",))
                    for s in reads:
                        emit(mid, s, anyg, None, tgt, 0, noop, ("push", (top[:-1],)))

    # Part 3: drain the user stack down to the dummy bottom, park the head at
    # cell 0, zero the counters, then pop the dummy bottom as the final step.
    for acc in (True, False):
        d, p, z = drain[acc], park[acc], zeroc[acc]
        final = q_acc if acc else q_rej
        for s in reads:
            for blk in blocks:
                emit(d, s, anyg, blk, d, 0, noop, ("pop",))
        # Head left to cell 0 (flat moves, realized as push/pop pairs).
        for s in reads:
            if s == LEND:
                continue
            mid = chain_state("_pk")
            emit(d, s, anyg, dummy_bottom, mid, -1, noop, ("push", (pair_sym,)))
            for s2 in reads:
                emit(mid, s2, anyg, pair_sym, d, 0, noop, ("pop",))
        emit(d, LEND, anyg, dummy_bottom, p, 0, noop, ("push", (pair_sym,)))
        emit(p, LEND, anyg, pair_sym, z, 0, noop, ("pop",))
        # Zero the counters left to right; guards keep the rules disjoint.
        for ci in range(k):
            g = ["zero"] * ci + ["nonzero"] + ["any"] * (k - ci - 1)
            ops = list(noop)
            ops[ci] = "dec"
            mid = chain_state("_zc")
            emit(z, LEND, g, dummy_bottom, mid, 0, ops, ("push", (pair_sym,)))
            emit(mid, LEND, anyg, pair_sym, z, 0, noop, ("pop",))
        emit(z, LEND, ("zero",) * k, dummy_bottom, final, 0, noop, ("pop",))

    states = (
        q_init,
        *[q for q in spec.states if q not in spec.halting],
        *extra_states,
        *drain.values(),
        *park.values(),
        *zeroc.values(),
        q_acc,
        q_rej,
    )
    mode = spec.mode if spec.mode != "unambiguous-claimed" else "nondeterministic"
    out = MachineSpec(
        name=f"{spec.name}_slim",
        mode=mode,
        states=states,
        alphabet=spec.alphabet,
        counters=k,
        stack=StackSpec(new_alpha, 1),
        initial=q_init,
        accepting=frozenset({q_acc}),
        rejecting=frozenset({q_rej}),
        transitions=tuple(rules),
        provenance={"derived_from": spec.name, "transform": "normalize_slim", "parameters": {}},
    )
    validate_machine(out)
    return out
