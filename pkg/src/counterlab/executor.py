"""Acceptance decisions via breadth-first reachability over configuration graphs.

Semantics: a machine accepts when some computation path within the step cap
reaches an accepting state; it rejects (definitely) when the forward-reachable
set has been fully explored, holds no accepting configuration, and every
maximal path halts or gets stuck.  Anything else is Unknown — never a silent
wrong answer.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .machines import Configuration, MachineSpec, step_relation

ACCEPT = "accept"
REJECT = "reject"
UNKNOWN = "unknown"

DEFAULT_CAP_EXPONENT = 3
PATH_COUNT_LIMIT = 10**6


@dataclass(frozen=True)
class RunBudget:
    steps: int
    configs: int = 200_000

    def __post_init__(self):
        if self.steps <= 0 or self.configs <= 0:
            raise ValueError("budget components must be positive")


@dataclass(frozen=True)
class Verdict:
    outcome: str  # accept | reject | unknown
    witness: tuple[Configuration, ...] | None = None
    reason: str | None = None

    @property
    def definite(self) -> bool:
        return self.outcome != UNKNOWN

    def __bool__(self) -> bool:
        return self.outcome == ACCEPT


def default_cap(x_len: int, n: int = 1, exponent: int = DEFAULT_CAP_EXPONENT) -> int:
    """Step cap (n*|x| + 2)^exponent; COUNTERLAB_CAP overrides."""
    env = os.environ.get("COUNTERLAB_CAP")
    if env:
        return int(env)
    return (n * x_len + 2) ** exponent


def default_budget(x: str, n: int = 1, exponent: int = DEFAULT_CAP_EXPONENT) -> RunBudget:
    return RunBudget(steps=default_cap(len(x), n, exponent))


def decide(spec: MachineSpec, x: str, budget: RunBudget) -> Verdict:
    spec.check_input(x)
    init = spec.initial_configuration()
    parent: dict[Configuration, Configuration | None] = {init: None}
    frontier = [init]
    if init.state in spec.accepting:
        return Verdict(ACCEPT, witness=(init,))

    depth = 0
    complete = True
    while frontier:
        if depth >= budget.steps:
            complete = False
            break
        depth += 1
        nxt = []
        for cfg in frontier:
            for succ in step_relation(spec, x, cfg):
                if succ in parent:
                    continue
                parent[succ] = cfg
                if succ.state in spec.accepting:
                    return Verdict(ACCEPT, witness=_path_to(parent, succ))
                nxt.append(succ)
                if len(parent) > budget.configs:
                    return Verdict(UNKNOWN, reason="configuration cap exhausted")
        frontier = nxt

    if not complete:
        return Verdict(UNKNOWN, reason="step cap exhausted before closure")
    if _has_cycle(spec, x, parent.keys()):
        return Verdict(UNKNOWN, reason="reachable cycle: non-halting paths exist")
    return Verdict(REJECT)


def _path_to(parent: dict, cfg: Configuration) -> tuple[Configuration, ...]:
    path = [cfg]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return tuple(reversed(path))


def _has_cycle(spec: MachineSpec, x: str, universe) -> bool:
    universe = set(universe)
    state = dict.fromkeys(universe, 0)  # 0 new, 1 on stack, 2 done
    for root in universe:
        if state[root]:
            continue
        stack = [(root, iter(step_relation(spec, x, root)))]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for succ in it:
                if succ not in universe:
                    continue
                if state[succ] == 1:
                    return True
                if state[succ] == 0:
                    state[succ] = 1
                    stack.append((succ, iter(step_relation(spec, x, succ))))
                    advanced = True
                    break
            if not advanced:
                state[node] = 2
                stack.pop()
    return False


def reachable_exact(spec: MachineSpec, x: str, i: int,
                    config_cap: int = 200_000) -> frozenset[Configuration]:
    """Configurations reachable in exactly i steps from the initial one."""
    if i < 0:
        raise ValueError("step count must be non-negative")
    layer = frozenset({spec.initial_configuration()})
    for _ in range(i):
        nxt = set()
        for cfg in layer:
            nxt.update(step_relation(spec, x, cfg))
        if len(nxt) > config_cap:
            raise BudgetExceeded(f"layer exceeds configuration cap {config_cap}")
        layer = frozenset(nxt)
        if not layer:
            break
    return layer


class BudgetExceeded(Exception):
    pass


def count_accepting_paths(spec: MachineSpec, x: str, budget: RunBudget,
                          limit: int = PATH_COUNT_LIMIT) -> tuple[int, bool]:
    """Number of distinct accepting paths of length <= the step cap.

    Returns (count, exact); count saturates at `limit`, in which case exact
    is False and the value is a lower bound.  Paths are counted as
    configuration sequences, so a loop traversed different numbers of times
    yields distinct paths.
    """
    spec.check_input(x)
    init = spec.initial_configuration()
    memo: dict[tuple[Configuration, int], int] = {}
    work: list[tuple[Configuration, int, bool]] = [(init, budget.steps, False)]
    while work:
        cfg, t, expanded = work.pop()
        key = (cfg, t)
        if key in memo:
            continue
        if cfg.state in spec.accepting:
            memo[key] = 1
            continue
        if cfg.state in spec.rejecting or t == 0:
            memo[key] = 0
            continue
        succs = step_relation(spec, x, cfg)
        if not expanded:
            work.append((cfg, t, True))
            work.extend((s, t - 1, False) for s in succs if (s, t - 1) not in memo)
        else:
            total = 0
            for s in succs:
                total += memo[(s, t - 1)]
                if total >= limit:
                    total = limit
                    break
            memo[key] = total
    n = memo[(init, budget.steps)]
    return (n, n < limit)


def runtime_max(spec: MachineSpec, x: str, budget: RunBudget) -> tuple[int, bool]:
    """Length of the longest halting path, with a definiteness flag.

    Stuck configurations terminate paths the same way halting states do.
    Returns (cap, False) when a reachable cycle or budget exhaustion leaves
    longer runs possible.
    """
    spec.check_input(x)
    init = spec.initial_configuration()
    seen = {init}
    frontier = [init]
    depth = 0
    while frontier:
        if depth >= budget.steps or len(seen) > budget.configs:
            return (budget.steps, False)
        nxt = []
        for cfg in frontier:
            for succ in step_relation(spec, x, cfg):
                if succ not in seen:
                    seen.add(succ)
                    nxt.append(succ)
        frontier = nxt
        if frontier:
            depth += 1
    if _has_cycle(spec, x, seen):
        return (budget.steps, False)

    # Acyclic and fully explored: exact longest path by memoized DFS.
    memo: dict[Configuration, int] = {}

    def longest(cfg: Configuration) -> int:
        if cfg in memo:
            return memo[cfg]
        succs = step_relation(spec, x, cfg)
        val = 0 if not succs else 1 + max(longest(s) for s in succs)
        memo[cfg] = val
        return val

    order = _topo_order(spec, x, seen)
    for cfg in order:
        longest(cfg)
    return (longest(init), True)


def _topo_order(spec: MachineSpec, x: str, universe) -> list[Configuration]:
    indeg = dict.fromkeys(universe, 0)
    for cfg in universe:
        for succ in step_relation(spec, x, cfg):
            if succ in indeg:
                indeg[succ] += 1
    order = [c for c, d in indeg.items() if d == 0]
    out = []
    while order:
        cfg = order.pop()
        out.append(cfg)
        for succ in step_relation(spec, x, cfg):
            if succ in indeg:
                indeg[succ] -= 1
                if indeg[succ] == 0:
                    order.append(succ)
    return list(reversed(out))
