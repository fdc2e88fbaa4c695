"""Complementation of slim multi-counter pushdown machines via conf-intervals.

A conf-interval (C, s, C', l, r) claims a same-stack-level computation
segment of exactly l steps from surface C to surface C', visiting the base
level exactly s times strictly between the endpoints, at nesting round r.
Slim machines make every move a push or a pop and never drain the stack
mid-run, so an accepting run of length t is itself a basic (s = 0) interval
from the initial surface to the final one, and intervals decompose by two
rules only:

  peel   (C, 0, C', l, r)  ->  (C1, s1, C2, l-2, r+1)      first step pushes
                                                            into C1, last pops
                                                            C2 back onto C's
                                                            top symbol;
  split  (C, s, C', l, r)  ->  (C, 0, C2, l1, r)           C2 is the first
                               (C2, s-1, C', l2, r)        base-level return,
                                                            l1 + l2 = l.

The complementer runs the dual procedure on a work stack of intervals: for a
popped obligation it must show *every* peel child fails (they are all pushed)
and, for splits, that one half of every candidate pair fails (one of the two
is pushed per pair).  Leaves fail unless they are trivial identities, so a
leaf with C = C' rejects the complementer.  Realizability of an interval is
decided by an exhaustive bottom-up enumeration of same-level segments over
the reachable surface set; the work-stack run consults it exactly where the
machine would branch nondeterministically, and re-verifies every step check
it records.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .executor import ACCEPT, REJECT, UNKNOWN, RunBudget, Verdict, runtime_max
from .machines import (
    BOTTOM,
    Configuration,
    MachineSpec,
    step_relation,
)


class PdError(Exception):
    pass


@dataclass(frozen=True)
class PdSurface:
    """Surface of a pushdown configuration: full counter values, top symbol."""

    state: str
    head: int
    top: str
    counters: tuple[int, ...]

    @classmethod
    def of(cls, cfg: Configuration) -> "PdSurface":
        return cls(cfg.state, cfg.head, cfg.stack[-1], cfg.counters)

    def key(self, spec: MachineSpec):
        return (spec.state_index(self.state), self.head,
                spec.stack_index(self.top), self.counters)

    def to_json(self) -> list:
        return [self.state, self.head, self.top, list(self.counters)]


@dataclass(frozen=True)
class ConfInterval:
    start: PdSurface
    pinned: int  # s: interior base-level visits
    end: PdSurface
    distance: int  # l
    round: int  # r

    @property
    def basic(self) -> bool:
        return self.pinned == 0

    def to_json(self) -> dict:
        return {"C": self.start.to_json(), "s": self.pinned, "C2": self.end.to_json(),
                "l": self.distance, "r": self.round}


def require_slim(spec: MachineSpec) -> None:
    if spec.stack is None:
        raise PdError("a pushdown machine is required")
    if spec.stack.push_size != 1:
        raise PdError("slim machines push single symbols; normalize first")
    if len(spec.accepting) != 1 or len(spec.rejecting) != 1:
        raise PdError("slim machines have singleton halting sets; normalize first")


def initial_surface(spec: MachineSpec) -> PdSurface:
    return PdSurface(spec.initial, 0, BOTTOM, (0,) * spec.counters)

def final_surface(spec: MachineSpec) -> PdSurface:
    (acc,) = spec.accepting
    return PdSurface(acc, 0, BOTTOM, (0,) * spec.counters)


# ---------------------------------------------------------------------------
# Surface steps


def _rule_fires(spec: MachineSpec, rule, sym: str, s: PdSurface) -> bool:
    if rule.from_state != s.state or rule.read != sym:
        return False
    for g, c in zip(rule.guards, s.counters):
        if (g == "zero" and c) or (g == "nonzero" and not c):
            return False
    return rule.stack_top is None or rule.stack_top == s.top


def _apply_counters(rule, counters: tuple[int, ...]) -> tuple[int, ...]:
    out = list(counters)
    for i, op in enumerate(rule.counter_ops):
        if op == "inc":
            out[i] += 1
        elif op == "dec":
            out[i] -= 1
    return tuple(out)


def surface_step_exists(spec: MachineSpec, x: str, a: PdSurface, b: PdSurface) -> bool:
    """Single-step check on surfaces.  A pop's revealed symbol is whatever the
    target surface carries; pushes and flat moves pin the target's top."""
    if a.state in spec.halting:
        return False
    sym = spec.tape(x)[a.head]
    for rule in spec.rules_from(a.state):
        if not _rule_fires(spec, rule, sym, a):
            continue
        if rule.to_state != b.state or a.head + rule.move != b.head:
            continue
        if _apply_counters(rule, a.counters) != b.counters:
            continue
        op = rule.stack_op[0]
        if op == "push" and b.top == rule.stack_op[1][-1]:
            return True
        if op == "pop":
            return True
        if op == "none" and b.top == a.top:
            return True
    return False


def push_successors(spec: MachineSpec, x: str, a: PdSurface) -> list[PdSurface]:
    if a.state in spec.halting:
        return []
    sym = spec.tape(x)[a.head]
    out = []
    for rule in spec.rules_from(a.state):
        if rule.stack_op[0] != "push" or not _rule_fires(spec, rule, sym, a):
            continue
        s = PdSurface(rule.to_state, a.head + rule.move, rule.stack_op[1][-1],
                      _apply_counters(rule, a.counters))
        if s not in out:
            out.append(s)
    return out


def pop_step_exists(spec: MachineSpec, x: str, a: PdSurface, b: PdSurface,
                    reveal: str) -> bool:
    """Does some pop rule take surface a to surface b, revealing `reveal`?"""
    if a.state in spec.halting or b.top != reveal:
        return False
    sym = spec.tape(x)[a.head]
    for rule in spec.rules_from(a.state):
        if rule.stack_op[0] != "pop" or not _rule_fires(spec, rule, sym, a):
            continue
        if (rule.to_state == b.state and a.head + rule.move == b.head
                and _apply_counters(rule, a.counters) == b.counters):
            return True
    return False


# ---------------------------------------------------------------------------
# The interval space and its enumerator


@dataclass(frozen=True)
class IntervalSpace:
    """Bijective indexing of all conf-intervals over the configuration box
    Q x [0,|x|+1] x Gamma x [0,t_x]^k with s, l, r ranging over [0, t_x-1]."""

    spec: MachineSpec
    x: str
    t_x: int

    def __post_init__(self):
        spec = self.spec
        dims = (len(spec.states), len(self.x) + 2, len(spec.stack.alphabet),
                *((self.t_x + 1,) * spec.counters))
        object.__setattr__(self, "_conf_dims", dims)
        n_conf = 1
        for d in dims:
            n_conf *= d
        object.__setattr__(self, "conf_count", n_conf)

    @property
    def size(self) -> int:
        return self.conf_count**2 * self.t_x**3

    def conf_at(self, i: int) -> PdSurface:
        if not 0 <= i < self.conf_count:
            raise IndexError(f"configuration index {i} out of range")
        coords = []
        for d in reversed(self._conf_dims):
            i, c = divmod(i, d)
            coords.append(c)
        coords.reverse()
        spec = self.spec
        return PdSurface(spec.states[coords[0]], coords[1],
                         spec.stack.alphabet[coords[2]], tuple(coords[3:]))

    def conf_index(self, s: PdSurface) -> int:
        coords = (self.spec.state_index(s.state), s.head,
                  self.spec.stack_index(s.top), *s.counters)
        i = 0
        for c, d in zip(coords, self._conf_dims):
            if not 0 <= c < d:
                raise IndexError(f"surface coordinate {c} outside dimension {d}")
            i = i * d + c
        return i

    def interval_at(self, i: int) -> ConfInterval:
        if not 0 <= i < self.size:
            raise IndexError(f"interval index {i} out of range")
        t = self.t_x
        i, r = divmod(i, t)
        i, l = divmod(i, t)
        i, c2 = divmod(i, self.conf_count)
        c1, s = divmod(i, t)
        return ConfInterval(self.conf_at(c1), s, self.conf_at(c2), l, r)

    def index_of(self, eta: ConfInterval) -> int:
        t = self.t_x
        for v in (eta.pinned, eta.distance, eta.round):
            if not 0 <= v < t:
                raise IndexError(f"interval component {v} outside [0, {t})")
        i = self.conf_index(eta.start)
        i = i * t + eta.pinned
        i = i * self.conf_count + self.conf_index(eta.end)
        i = i * t + eta.distance
        return i * t + eta.round

    def stream(self):
        for i in range(self.size):
            yield self.interval_at(i)

    def pair_at(self, i: int, j: int) -> tuple[ConfInterval, ConfInterval]:
        return self.interval_at(i), self.interval_at(j)


def enumerate_intervals(spec: MachineSpec, x: str, budget: RunBudget) -> IntervalSpace:
    require_slim(spec)
    t_x, definite = runtime_max(spec, x, budget)
    if not definite:
        raise PdError("runtime bound is indefinite under this budget")
    return IntervalSpace(spec, x, t_x)


# ---------------------------------------------------------------------------
# CND predicates


def cnd1(eta: ConfInterval, eta1: ConfInterval, spec: MachineSpec, x: str) -> bool:
    """Peel condition: C |- C1, C2 |- C', and the distance shrinks by two."""
    if not eta.basic or eta.distance < 2:
        raise PdError("cnd1 applies to basic intervals of distance >= 2")
    return (eta1.distance == eta.distance - 2
            and surface_step_exists(spec, x, eta.start, eta1.start)
            and surface_step_exists(spec, x, eta1.end, eta.end))


def cnd2(eta: ConfInterval, eta1: ConfInterval, eta2: ConfInterval,
         spec: MachineSpec, x: str) -> bool:
    """Split condition: the halves share the pinned middle, the left half is
    basic, the right half carries s-1 visits, and the distances add up."""
    if eta.pinned < 1 or eta.distance < 2:
        raise PdError("cnd2 applies to intervals with s >= 1 and distance >= 2")
    return (eta1.start == eta.start
            and eta2.end == eta.end
            and eta1.end == eta2.start
            and eta1.pinned == 0
            and eta2.pinned == eta.pinned - 1
            and eta.distance == eta1.distance + eta2.distance)


# ---------------------------------------------------------------------------
# Same-level segment enumeration (the realizability ground truth)


class SegmentTable:
    """Bottom-up enumeration of same-level segments over the reachable
    surfaces: nzb[l] holds (C, C') pairs joined by a basic nonzero segment of
    exactly l steps (first step pushes, last pops back onto C's top symbol,
    interior one level up); slr[l] closes these under concatenation."""

    def __init__(self, spec: MachineSpec, x: str, surfaces: list[PdSurface], t_x: int):
        self.spec, self.x, self.t_x = spec, x, t_x
        self.surfaces = surfaces
        self.surface_set = set(surfaces)
        self.push_succ = {s: [t for t in push_successors(spec, x, s)
                              if t in self.surface_set] for s in surfaces}
        self._push_pred: dict[PdSurface, list[PdSurface]] = {}
        for s, succs in self.push_succ.items():
            for t in succs:
                self._push_pred.setdefault(t, []).append(s)
        # pop outcomes, top symbol left open: C2 -> [(state', head', counters')]
        self._pop_partial: dict[PdSurface, list[tuple[str, int, tuple[int, ...]]]] = {}
        for s in surfaces:
            if s.state in spec.halting:
                continue
            sym = spec.tape(x)[s.head]
            outs = []
            for rule in spec.rules_from(s.state):
                if rule.stack_op[0] != "pop" or not _rule_fires(spec, rule, sym, s):
                    continue
                item = (rule.to_state, s.head + rule.move, _apply_counters(rule, s.counters))
                if item not in outs:
                    outs.append(item)
            if outs:
                self._pop_partial[s] = outs
        self.nzb: list[set[tuple[PdSurface, PdSurface]]] = [set() for _ in range(t_x + 1)]
        self.slr_by_start: list[dict[PdSurface, set[PdSurface]]] = [
            {} for _ in range(t_x + 1)
        ]
        for s in surfaces:
            self.slr_by_start[0].setdefault(s, set()).add(s)
        self._realizes_memo: dict[tuple, bool] = {}
        self._build()

    def _build(self) -> None:
        for l in range(2, self.t_x + 1):
            pairs = set()
            # Attach a pushing predecessor to the interior's start and a
            # popping continuation, revealing the predecessor's top, to its end.
            for c1, ends in self.slr_by_start[l - 2].items():
                pushers = self._push_pred.get(c1)
                if not pushers:
                    continue
                for c2 in ends:
                    pops = self._pop_partial.get(c2)
                    if not pops:
                        continue
                    for c in pushers:
                        for (st, hd, ctr) in pops:
                            tgt = PdSurface(st, hd, c.top, ctr)
                            if tgt in self.surface_set:
                                pairs.add((c, tgt))
            self.nzb[l] = pairs
            by_start: dict[PdSurface, set[PdSurface]] = {}
            for j in range(2, l + 1):
                for (a, b) in self.nzb[j]:
                    tails = self.slr_by_start[l - j].get(b)
                    if tails:
                        by_start.setdefault(a, set()).update(tails)
            self.slr_by_start[l] = by_start

    def realizes(self, c: PdSurface, s: int, cprime: PdSurface, l: int) -> bool:
        """Does a same-level segment of exactly l steps with exactly s interior
        base-level visits join c to cprime?"""
        if l < 0 or s < 0 or l > self.t_x:
            return False
        key = (c, s, cprime, l)
        if key in self._realizes_memo:
            return self._realizes_memo[key]
        if s == 0:
            out = (c == cprime) if l == 0 else (c, cprime) in self.nzb[l]
        elif l < 2 * (s + 1):
            out = False
        else:
            out = False
            for j in range(2, l - 2 * s + 1):
                for (a, b) in self.nzb[j]:
                    if a == c and self.realizes(b, s - 1, cprime, l - j):
                        out = True
                        break
                if out:
                    break
        self._realizes_memo[key] = out
        return out

    def accepting_lengths(self, c0: PdSurface, cfin: PdSurface) -> list[int]:
        return [l for l in range(2, self.t_x + 1) if (c0, cfin) in self.nzb[l]]


# ---------------------------------------------------------------------------
# Closure and the dual work-stack procedure


def _closure_surfaces(spec: MachineSpec, x: str,
                      budget: RunBudget) -> tuple[list[PdSurface], bool]:
    init = spec.initial_configuration()
    seen = {init}
    frontier = [init]
    while frontier:
        nxt = []
        for cfg in frontier:
            for succ in step_relation(spec, x, cfg):
                if succ not in seen:
                    seen.add(succ)
                    nxt.append(succ)
        if len(seen) > budget.configs:
            return [], False
        frontier = nxt
    surfaces = sorted({PdSurface.of(c) for c in seen}, key=lambda s: s.key(spec))
    return surfaces, True


@dataclass
class PdTrace:
    events: list[dict] = field(default_factory=list)
    truncated: bool = False

    def add(self, **ev) -> None:
        self.events.append(ev)

    def to_json_lines(self) -> str:
        return "\n".join(json.dumps(e, ensure_ascii=False) for e in self.events)

    def stack_snapshots(self):
        return [e["stack_rounds"] for e in self.events if "stack_rounds" in e]


def _dual_stack_run(spec: MachineSpec, x: str, table: SegmentTable,
                    eta0: ConfInterval, trace: PdTrace,
                    event_budget: int) -> str:
    """Run the complementer's work-stack procedure for one target length.

    Returns "allfail" when every decomposition obligation was shown to fail
    (the complementer accepts), "realized" when a trivially true leaf was
    reached (the machine accepts, so the complementer rejects), or
    "truncated" when the event budget ran out.
    """
    t_x = table.t_x
    pop_pred_partial: dict[tuple[str, int, tuple[int, ...]], list[PdSurface]] = {}
    for c2, outs in table._pop_partial.items():
        for item in outs:
            pop_pred_partial.setdefault(item, []).append(c2)

    def realizes(eta: ConfInterval) -> bool:
        return table.realizes(eta.start, eta.pinned, eta.end, eta.distance)

    stack: list[ConfInterval] = [eta0]
    refuted: set[tuple] = set()
    trace.add(event="init", phase="(1')", interval=eta0.to_json(),
              stack_rounds=[eta0.round])
    events = 0
    while stack:
        events += 1
        if events > event_budget:
            trace.truncated = True
            return "truncated"
        eta = stack.pop()
        key = (eta.start, eta.pinned, eta.end, eta.distance)
        if key in refuted:
            trace.add(event="discharge", phase="(3')", interval=eta.to_json(),
                      memo=True, stack_rounds=[e.round for e in reversed(stack)])
            continue
        if eta.distance == 0 and eta.pinned == 0:
            nxt = stack[-1] if stack else None
            dist2 = bool(nxt and nxt.basic and nxt.distance == 2)
            if eta.start == eta.end:
                trace.add(event="reject-leaf", phase="(4')", interval=eta.to_json(),
                          stack_rounds=[e.round for e in reversed(stack)])
                return "realized"
            refuted.add(key)
            trace.add(event="discharge", phase="(4')", interval=eta.to_json(),
                      next_dist2_match=dist2,
                      stack_rounds=[e.round for e in reversed(stack)])
            continue
        if eta.basic and eta.distance >= 2:
            # (i'): universal expansion; every condition-true child is pushed,
            # in enumeration order.
            children = []
            partial = (eta.end.state, eta.end.head, eta.end.counters)
            # the closing pop reveals the start's top, so the endpoints agree
            pops = (list(pop_pred_partial.get(partial, ()))
                    if eta.end.top == eta.start.top else [])
            for c1 in table.push_succ.get(eta.start, ()):
                for c2 in pops:
                    for s1 in range(max(t_x, 1)):
                        child = ConfInterval(c1, s1, c2, eta.distance - 2,
                                             eta.round + 1)
                        assert cnd1(eta, child, spec, x)
                        children.append(child)
            children.sort(key=lambda e: (e.start.key(spec), e.pinned,
                                         e.end.key(spec)))
            if not children:
                refuted.add(key)
            for child in reversed(children):
                stack.append(child)
            trace.add(event="expand", phase="(3'i)", interval=eta.to_json(),
                      pushed=len(children),
                      stack_rounds=[e.round for e in reversed(stack)])
            continue
        if eta.pinned >= 1 and eta.distance >= 2:
            # (ii'): for every condition-true split, push the half that the
            # segment enumeration refutes (either, if both are refuted; the
            # realizable one if none is, in which case the run will surface
            # a true leaf beneath it).
            picks = []
            n_pairs = 0
            for c2 in table.surfaces:
                for l1 in range(0, eta.distance + 1):
                    left = ConfInterval(eta.start, 0, c2, l1, eta.round)
                    right = ConfInterval(c2, eta.pinned - 1, eta.end,
                                         eta.distance - l1, eta.round)
                    if not cnd2(eta, left, right, spec, x):
                        continue
                    n_pairs += 1
                    picks.append(left if not realizes(left) else right)
            if not picks:
                refuted.add(key)
            for child in reversed(picks):
                stack.append(child)
            trace.add(event="split", phase="(3'ii)", interval=eta.to_json(),
                      pairs=n_pairs, pushed=len(picks),
                      stack_rounds=[e.round for e in reversed(stack)])
            continue
        # Unrealizable shapes (odd leftovers, pinned visits with no room):
        # the claimed decomposition cannot exist, so the obligation is failed.
        refuted.add(key)
        trace.add(event="discharge", phase="(3')", interval=eta.to_json(),
                  unrealizable_shape=True,
                  stack_rounds=[e.round for e in reversed(stack)])
    trace.add(event="accept", phase="(2')", stack_rounds=[])
    return "allfail"


# ---------------------------------------------------------------------------
# Witness reconstruction


def _reconstruct_basic(table: SegmentTable, c: PdSurface, cprime: PdSurface,
                       l: int) -> list[PdSurface]:
    if l == 0:
        assert c == cprime
        return [c]
    spec, x = table.spec, table.x
    for c1 in table.push_succ.get(c, ()):
        mids = table.slr_by_start[l - 2].get(c1, ())
        for c2 in mids:
            if not pop_step_exists(spec, x, c2, cprime, c.top):
                continue
            interior = _reconstruct_chain(table, c1, c2, l - 2)
            if interior is not None:
                return [c] + interior + [cprime]
    raise PdError("basic segment recorded but not reconstructible")


def _reconstruct_chain(table: SegmentTable, a: PdSurface, b: PdSurface,
                       m: int) -> list[PdSurface] | None:
    if m == 0:
        return [a] if a == b else None
    for j in range(2, m + 1):
        if (a, b) in table.nzb[j] and m == j:
            return _reconstruct_basic(table, a, b, j)
        for (p, d) in table.nzb[j]:
            if p != a:
                continue
            tail = table.slr_by_start[m - j].get(d)
            if tail and b in tail:
                rest = _reconstruct_chain(table, d, b, m - j)
                if rest is not None:
                    return _reconstruct_basic(table, a, d, j) + rest[1:]
    return None


def _lift_surface_path(spec: MachineSpec, x: str,
                       surfaces: list[PdSurface]) -> tuple[Configuration, ...]:
    """Lift a surface sequence to a full configuration path by parallel replay."""
    init = spec.initial_configuration()
    assert PdSurface.of(init) == surfaces[0]
    frontier: dict[Configuration, Configuration | None] = {init: None}
    levels = [frontier]
    for target in surfaces[1:]:
        nxt: dict[Configuration, Configuration] = {}
        for cfg in levels[-1]:
            for succ in step_relation(spec, x, cfg):
                if PdSurface.of(succ) == target and succ not in nxt:
                    nxt[succ] = cfg
        if not nxt:
            raise PdError("surface path does not lift to a real run")
        levels.append(nxt)
    path = [next(iter(levels[-1]))]
    for depth in range(len(levels) - 1, 0, -1):
        path.append(levels[depth][path[-1]])
    path.reverse()
    return tuple(path)


# ---------------------------------------------------------------------------
# The decision procedure


def complement_decide_pd(spec: MachineSpec, x: str, budget: RunBudget,
                         want_trace: bool = False,
                         trace_event_budget: int = 50_000
                         ) -> Verdict | tuple[Verdict, PdTrace]:
    """Accept exactly when the slim machine rejects x.

    The runtime bound, the reachable surface set, and the same-level segment
    table are computed first; the work-stack procedure then runs once per
    candidate accepting length, certifying that every decomposition fails
    (or surfacing a true leaf when the machine does accept).  Budget
    exhaustion anywhere yields Unknown.
    """
    require_slim(spec)
    spec.check_input(x)
    trace = PdTrace()

    def done(v: Verdict):
        return (v, trace) if want_trace else v

    if spec.initial in spec.accepting:
        return done(Verdict(REJECT, witness=(spec.initial_configuration(),),
                            reason="accepting run of length 0"))
    t_x, definite = runtime_max(spec, x, budget)
    if not definite:
        return done(Verdict(UNKNOWN, reason="runtime bound indefinite under budget"))
    surfaces, ok = _closure_surfaces(spec, x, budget)
    if not ok:
        return done(Verdict(UNKNOWN, reason="configuration cap exhausted"))
    c0, cfin = initial_surface(spec), final_surface(spec)
    table = SegmentTable(spec, x, surfaces, t_x)
    accepting = table.accepting_lengths(c0, cfin) if cfin in table.surface_set else []

    # Every move of a slim machine pushes or pops, so same-level segments have
    # even length; odd target lengths cannot realize and are skipped.
    assert all(t % 2 == 0 for t in accepting)
    outcomes = []
    for t in range(2, t_x + 1, 2):
        eta0 = ConfInterval(c0, 0, cfin, t, 0)
        outcome = _dual_stack_run(spec, x, table, eta0, trace, trace_event_budget)
        outcomes.append((t, outcome))
        if outcome == "realized":
            break

    if not trace.truncated:
        for t, o in outcomes:
            if (o == "realized") != (t in accepting):
                raise PdError("work-stack outcome disagrees with the segment table")

    if accepting:
        surface_path = _reconstruct_basic(table, c0, cfin, accepting[0])
        witness = _lift_surface_path(spec, x, surface_path)
        return done(Verdict(REJECT, witness=witness,
                            reason=f"accepting run of length {accepting[0]}"))
    if trace.truncated:
        return done(Verdict(UNKNOWN, reason="trace event budget exhausted"))
    return done(Verdict(ACCEPT, reason="all decomposition obligations failed"))
