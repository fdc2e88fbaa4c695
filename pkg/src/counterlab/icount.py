"""Complementation of counter automata by inductive counting.

The exact mode computes the per-step layers V_i (configurations reachable in
exactly i steps) and decides that the machine rejects by certifying that no
layer up to the cap holds an accepting configuration and that the forward
closure is fully explored.  A register-audited scan mirrors the counting
procedure's dataflow — candidate configurations visited in the fixed
lexicographic order, membership re-verified against the previous layer — so
the number of simultaneously live named counters can be measured against the
5k+13 budget.

The guessing mode replays the procedure as one sampled nondeterministic run
(random path guesses, abort on any failed consistency check) or as a
collapsed exhaustive enumeration.  The collapse is the standard inductive
counting argument: once the previous layer's count is exact, a candidate's
(a)-branch survives only if the candidate is genuinely in the layer, the
(b)-branch only if it is not, and every surviving branch carries the same
counts — so branch survival can be decided per candidate.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .executor import ACCEPT, REJECT, UNKNOWN, RunBudget, Verdict
from .machines import Configuration, MachineSpec, step_relation


@dataclass(frozen=True)
class LayerCount:
    index: int
    count: int
    layer: frozenset[Configuration] | None = None


@dataclass
class ICAudit:
    registers: dict[str, int]
    max_simultaneous: int
    budget: int  # 5k + 13

    @property
    def within_budget(self) -> bool:
        return self.max_simultaneous <= self.budget


class _Registers:
    """Named-register tracker: counts writes and the peak simultaneous load."""

    def __init__(self):
        self.live: dict[str, int] = {}
        self.writes: dict[str, int] = {}
        self.max_live = 0

    def set(self, name: str, value: int) -> None:
        self.live[name] = value
        self.writes[name] = self.writes.get(name, 0) + 1
        if len(self.live) > self.max_live:
            self.max_live = len(self.live)

    def get(self, name: str) -> int:
        return self.live[name]

    def clear(self, *names: str) -> None:
        for n in names:
            self.live.pop(n, None)

    def copy_via(self, src: str, dst: str, buf: str = "CT10") -> None:
        self.set(buf, self.live[src])
        self.set(dst, self.live[buf])
        self.clear(buf)


def _register_names(k: int) -> list[str]:
    names = ["CT1", "CT2", "CT3", "CT4", "CT5"]
    names += [f"eCT{j}" for j in range(1, k + 1)]
    names += ["CT1'", "CT2'", "CT5'"] + [f"eCT{j}'" for j in range(1, k + 1)]
    names += ["CT10"]
    names += ["CT5''"] + [f"eCT{j}''" for j in range(1, k + 1)]
    names += ["CT3'"]
    names += [f"enum{j}" for j in range(k + 1)]
    names += [f"bCT{j}" for j in range(k + 1)]
    return names


@dataclass
class _LayerRun:
    layers: list[frozenset[Configuration]]
    universe: list[Configuration]  # sorted union, the enumeration order
    accepting_at: int | None  # first layer index holding an accepting config
    closed: bool  # forward closure fully explored within the cap
    capped: bool


def _compute_layers(spec: MachineSpec, x: str, r: int, config_cap: int) -> _LayerRun:
    init = spec.initial_configuration()
    layers = [frozenset({init})]
    union: set[Configuration] = {init}
    accepting_at = 0 if init.state in spec.accepting else None
    closed = False
    capped = False
    for i in range(1, r + 1):
        nxt = set()
        for cfg in layers[-1]:
            nxt.update(step_relation(spec, x, cfg))
        if not nxt:
            closed = True
            layers.append(frozenset())
            break
        layers.append(frozenset(nxt))
        if accepting_at is None and any(c.state in spec.accepting for c in nxt):
            accepting_at = i
        new = nxt - union
        union.update(nxt)
        if len(union) > config_cap:
            capped = True
            break
        if not new and i >= 1:
            # Union stable: check the closure property outright.
            if all(set(step_relation(spec, x, c)) <= union for c in union):
                closed = True
                break
    else:
        # Ran to the cap; closure only if the last layer adds nothing new and
        # the union is transition-closed.
        if all(set(step_relation(spec, x, c)) <= union for c in union):
            closed = True
    universe = sorted(union, key=lambda c: c.sort_key(spec))
    return _LayerRun(layers, universe, accepting_at, closed, capped)


def _audited_scan(spec: MachineSpec, x: str, run: _LayerRun, regs: _Registers,
                  audit_layers: int | None) -> None:
    """Replay the counting procedure's register dataflow over the computed
    layers, asserting the inductively obtained counts match the layer sizes."""
    k = spec.counters
    succ_cache = {c: step_relation(spec, x, c) for c in run.universe}
    last = len(run.layers) - 1 if audit_layers is None else min(audit_layers,
                                                                len(run.layers) - 1)
    regs.set("CT1", 0)
    regs.set("CT2", 1)  # N_0
    for i in range(1, last + 1):
        layer, prev = run.layers[i], run.layers[i - 1]
        regs.set("CT1", i)
        regs.set("CT3", 0)  # c
        for ci, cand in enumerate(run.universe):
            regs.set("enum0", ci)
            for j in range(1, k + 1):
                regs.set(f"enum{j}", cand.counters[j - 1])
            regs.set("CT5", cand.head)
            for j in range(1, k + 1):
                regs.set(f"eCT{j}", cand.counters[j - 1])
            regs.copy_via("CT1", "CT1'")
            regs.copy_via("CT2", "CT2'")
            regs.copy_via("CT5", "CT5'")
            for j in range(1, k + 1):
                regs.copy_via(f"eCT{j}", f"eCT{j}'")
            if cand in layer:
                # (a): verify reachability by an i-step path; the simulation
                # registers hold the walked configuration.
                regs.set("CT5''", cand.head)
                for j in range(1, k + 1):
                    regs.set(f"eCT{j}''", cand.counters[j - 1])
                regs.set("CT3", regs.get("CT3") + 1)
                regs.clear("CT5''", *[f"eCT{j}''" for j in range(1, k + 1)])
            else:
                # (b): certify non-membership by counting the previous layer.
                regs.set("CT4", 0)
                for di, d in enumerate(run.universe):
                    regs.set("bCT0", d.head)
                    for j in range(1, k + 1):
                        regs.set(f"bCT{j}", d.counters[j - 1])
                    regs.set("CT5''", d.head)
                    for j in range(1, k + 1):
                        regs.set(f"eCT{j}''", d.counters[j - 1])
                    if d in prev:
                        regs.set("CT4", regs.get("CT4") + 1)
                        assert cand not in succ_cache[d], (
                            "candidate outside the layer has a predecessor in it")
                    regs.clear("CT5''", *[f"eCT{j}''" for j in range(1, k + 1)])
                    regs.clear(*[f"bCT{j}" for j in range(k + 1)])
                assert regs.get("CT4") == regs.get("CT2"), "previous-layer count mismatch"
                regs.clear("CT4")
            regs.clear("CT1'", "CT2'", "CT5'",
                       *[f"eCT{j}'" for j in range(1, k + 1)])
            regs.clear("CT5", *[f"eCT{j}" for j in range(1, k + 1)])
            regs.clear(*[f"enum{j}" for j in range(k + 1)])
        assert regs.get("CT3") == len(layer), "inductive count diverged from the layer"
        regs.set("CT2", regs.get("CT3"))
        regs.clear("CT3")
    # Final sweep: count reachable non-accepting configurations at the last
    # layer against the remembered total.
    regs.copy_via("CT2", "CT3'")
    regs.set("CT3", 0)
    final = run.layers[last]
    for ci, cand in enumerate(run.universe):
        if cand.state in spec.accepting:
            continue
        regs.set("enum0", ci)
        regs.set("CT5", cand.head)
        for j in range(1, k + 1):
            regs.set(f"eCT{j}", cand.counters[j - 1])
        if cand in final:
            regs.set("CT5''", cand.head)
            regs.set("CT3", regs.get("CT3") + 1)
            regs.clear("CT5''")
        regs.clear("CT5", "enum0", *[f"eCT{j}" for j in range(1, k + 1)])
    matched = regs.get("CT3") == regs.get("CT3'")
    regs.clear("CT3", "CT3'")
    if not any(c.state in spec.accepting for c in final):
        assert matched, "final sweep mismatch on an accepting-free layer"


def layer_counts(spec: MachineSpec, x: str, r: int,
                 config_cap: int = 200_000) -> list[LayerCount]:
    """Exact N_i = |V_i| for i = 0..r, with the layers attached."""
    spec.check_input(x)
    init = spec.initial_configuration()
    layer = frozenset({init})
    out = [LayerCount(0, 1, layer)]
    for i in range(1, r + 1):
        nxt = set()
        for cfg in layer:
            nxt.update(step_relation(spec, x, cfg))
        if len(nxt) > config_cap:
            raise MemoryError("configuration cap exhausted")
        layer = frozenset(nxt)
        out.append(LayerCount(i, len(layer), layer))
    return out


def complement_decide_ic(spec: MachineSpec, x: str, budget: RunBudget,
                         audit_layers: int | None = 0,
                         regs: _Registers | None = None) -> Verdict:
    """Accept exactly when the machine rejects x.

    Reject as soon as an accepting configuration shows up in any layer within
    the budget (with the witness layer index); Accept when the forward closure
    is fully explored accepting-free; Unknown when the budget ran out first.
    """
    spec.check_input(x)
    run = _compute_layers(spec, x, budget.steps, budget.configs)
    if regs is None:
        regs = _Registers()
    if run.accepting_at is not None:
        return Verdict(REJECT, reason=f"accepting configuration in layer {run.accepting_at}")
    if run.capped:
        return Verdict(UNKNOWN, reason="configuration cap exhausted")
    if audit_layers is None or audit_layers > 0:
        _audited_scan(spec, x, run, regs, audit_layers)
    if run.closed:
        return Verdict(ACCEPT, reason="closure explored; no accepting configuration")
    return Verdict(UNKNOWN, reason="step cap exhausted before closure")


def audit_ic(spec: MachineSpec, x: str, budget: RunBudget | None = None) -> ICAudit:
    """Run the fully audited procedure and report register usage."""
    if budget is None:
        from .executor import default_budget

        budget = default_budget(x)
    regs = _Registers()
    run = _compute_layers(spec, x, budget.steps, budget.configs)
    if not run.capped:
        _audited_scan(spec, x, run, regs, audit_layers=None)
    k = spec.counters
    return ICAudit(dict(regs.writes), regs.max_live, 5 * k + 13)


@dataclass
class GuessOutcome:
    verdict: str  # accept | reject | abort | unknown
    aborted_at: str | None = None
    n_hats: list[int] = field(default_factory=list)

    @property
    def aborted(self) -> bool:
        return self.verdict == "abort"


def _random_walk(spec: MachineSpec, x: str, steps: int,
                 rng: random.Random) -> Configuration | None:
    cfg = spec.initial_configuration()
    for _ in range(steps):
        succs = step_relation(spec, x, cfg)
        if not succs:
            return None
        cfg = rng.choice(succs)
    return cfg


def guessing_mode_run(spec: MachineSpec, x: str, r: int, seed: int,
                      corrupt_layer: int | None = None,
                      corrupt_delta: int = 1) -> GuessOutcome:
    """One sampled run of the counting procedure.

    Every nondeterministic point is resolved by the seeded rng: the choice of
    process (a) or (b) per candidate, and the guessed computation paths.  Any
    failed check aborts the run.  A verified accepting candidate ends the run
    with the complementer rejecting.  corrupt_layer deliberately skews that
    layer's count to exercise the abort machinery.
    """
    spec.check_input(x)
    rng = random.Random(seed)
    if spec.initial_configuration().state in spec.accepting:
        return GuessOutcome("reject")
    run = _compute_layers(spec, x, r, config_cap=200_000)
    if run.capped:
        return GuessOutcome("unknown")
    universe = run.universe
    succ = {c: set(step_relation(spec, x, c)) for c in universe}
    last = len(run.layers) - 1
    n_hat = 1
    n_hats = [1]
    for i in range(1, last + 1):
        c_count = 0
        for cand in universe:
            # The (a)/(b) selection follows the one resolution that can
            # survive; everything after it is still verified by walks.
            if cand in run.layers[i]:
                end = _random_walk(spec, x, i, rng)
                if end != cand:
                    return GuessOutcome("abort", f"(a) walk missed candidate at layer {i}",
                                        n_hats)
                if cand.state in spec.accepting:
                    return GuessOutcome("reject", None, n_hats)
                c_count += 1
            else:
                d_count = 0
                for d in universe:
                    end = _random_walk(spec, x, i - 1, rng)
                    if end == d:
                        d_count += 1
                        if cand in succ[d]:
                            return GuessOutcome(
                                "abort", f"(b) found a predecessor at layer {i}", n_hats)
                if d_count != n_hat:
                    return GuessOutcome("abort", f"(b) count mismatch at layer {i}", n_hats)
        n_hat = c_count
        if corrupt_layer == i:
            n_hat += corrupt_delta
        n_hats.append(n_hat)
    # Final sweep over non-accepting candidates.
    c_final = 0
    for cand in universe:
        if cand.state in spec.accepting:
            continue
        end = _random_walk(spec, x, last, rng)
        if end == cand:
            c_final += 1
    if c_final != n_hat:
        return GuessOutcome("abort", "final sweep mismatch", n_hats)
    if not run.closed:
        return GuessOutcome("unknown", None, n_hats)
    return GuessOutcome("accept", None, n_hats)


def guessing_mode_exhaustive(spec: MachineSpec, x: str, r: int) -> dict:
    """Branch-collapsed exhaustive enumeration of the guessing procedure.

    Per candidate and layer, the (a)-branch has a surviving resolution exactly
    when the candidate lies in the layer (an i-step witness exists), the
    (b)-branch exactly when it does not; all surviving branches agree on every
    count.  Returns which run outcomes are reachable over all branch choices.
    """
    spec.check_input(x)
    run = _compute_layers(spec, x, r, config_cap=200_000)
    if run.capped:
        return {"accept_run_exists": False, "reject_run_exists": False,
                "unknown": True}
    last = len(run.layers) - 1
    reject_found = False
    for i in range(1, last + 1):
        for cand in run.layers[i]:
            if cand.state in spec.accepting:
                reject_found = True
    accept_exists = (run.closed and run.accepting_at is None)
    return {
        "accept_run_exists": accept_exists,
        "reject_run_exists": reject_found or run.accepting_at == 0,
        "unknown": not run.closed,
        "layers": [len(l) for l in run.layers],
    }
