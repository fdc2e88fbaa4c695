"""Independent ground truth for acceptance, equivalence, and unambiguity.

Everything here re-derives its answers by depth-first path exploration over
the raw transition rules, deliberately sharing no graph-search code with the
executor module.  Successors are visited in rule-declaration order so
witnesses are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .machines import Configuration, MachineSpec, apply_rule, rule_applies


def _successors(spec: MachineSpec, x: str, cfg: Configuration) -> list[Configuration]:
    if cfg.state in spec.halting:
        return []
    symbol = spec.tape(x)[cfg.head]
    out = []
    for rule in spec.rules_from(cfg.state):
        if rule_applies(spec, rule, symbol, cfg):
            nxt = apply_rule(rule, cfg)
            if nxt not in out:
                out.append(nxt)
    return out


def brute_force_decide(spec: MachineSpec, x: str, cap: int):
    """Depth-first search for an accepting path of length <= cap.

    Accept on the first accepting leaf (witness attached).  Reject when
    every path halts, sticks, or revisits an already-seen configuration at
    an equal or greater depth before the cap.  Unknown when some path was
    truncated by the cap.  Revisit pruning is sound for acceptance since a
    shortest accepting path never repeats a configuration.
    """
    from .executor import ACCEPT, REJECT, UNKNOWN, Verdict  # verdict type only

    spec.check_input(x)
    init = spec.initial_configuration()
    best_depth: dict[Configuration, int] = {init: 0}
    truncated = False
    stack: list[tuple[Configuration, int, tuple[Configuration, ...]]] = [(init, 0, (init,))]
    while stack:
        cfg, depth, path = stack.pop()
        if cfg.state in spec.accepting:
            return Verdict(ACCEPT, witness=path)
        if cfg.state in spec.rejecting:
            continue
        succs = _successors(spec, x, cfg)
        if not succs:
            continue  # stuck: counts as a rejecting path
        if depth == cap:
            truncated = True
            continue
        for nxt in reversed(succs):
            prev = best_depth.get(nxt)
            if prev is not None and prev <= depth + 1:
                continue
            best_depth[nxt] = depth + 1
            stack.append((nxt, depth + 1, path + (nxt,)))
    if truncated:
        return Verdict(UNKNOWN, reason="cap exhausted")
    return Verdict(REJECT)


@dataclass
class EquivalenceReport:
    inputs_checked: int
    disagreements: list[tuple[str, str, str]] = field(default_factory=list)
    unknowns: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def equivalent(self) -> bool:
        return not self.disagreements

    def to_dict(self) -> dict:
        return {
            "inputs_checked": self.inputs_checked,
            "disagreements": [list(d) for d in self.disagreements],
            "unknowns": [list(u) for u in self.unknowns],
            "equivalent": self.equivalent,
        }


def check_equivalence(m1: MachineSpec, m2: MachineSpec, inputs, cap: int,
                      cap2: int | None = None) -> EquivalenceReport:
    """Compare verdicts input by input; Unknowns are reported, never assumed equal.

    cap2 lets the second machine run under a larger cap, for transforms that
    dilate step counts without changing the language.
    """
    report = EquivalenceReport(inputs_checked=0)
    for x in sorted(inputs):
        v1 = brute_force_decide(m1, x, cap)
        v2 = brute_force_decide(m2, x, cap if cap2 is None else cap2)
        report.inputs_checked += 1
        if not v1.definite or not v2.definite:
            report.unknowns.append((x, v1.outcome, v2.outcome))
        elif v1.outcome != v2.outcome:
            report.disagreements.append((x, v1.outcome, v2.outcome))
    return report


def enumerate_accepting_paths(spec: MachineSpec, x: str, cap: int, limit: int = 64):
    """Distinct accepting paths of length <= cap, in declaration order (true
    path enumeration, no pruning), stopping after `limit` paths."""
    spec.check_input(x)
    found: list[tuple[Configuration, ...]] = []
    stack = [(spec.initial_configuration(), ())]
    while stack and len(found) < limit:
        cfg, path = stack.pop()
        path = path + (cfg,)
        if cfg.state in spec.accepting:
            found.append(path)
            continue
        if cfg.state in spec.rejecting or len(path) > cap:
            continue
        for nxt in reversed(_successors(spec, x, cfg)):
            stack.append((nxt, path))
    return found


def check_unambiguous(spec: MachineSpec, family, n: int, max_len: int, cap: int):
    """True when every promised string of index n (length <= max_len) has at
    most one accepting path; otherwise a witness (input, two paths)."""
    for x in family.sample(n, max_len):
        paths = enumerate_accepting_paths(spec, x, cap, limit=2)
        if len(paths) > 1:
            return False, (x, paths[0], paths[1])
    return True, None


def assert_coherent(spec: MachineSpec, x: str, executor_verdict, oracle_verdict) -> None:
    """Hard global invariant: definite verdicts never contradict."""
    if executor_verdict.definite and oracle_verdict.definite:
        if executor_verdict.outcome != oracle_verdict.outcome:
            raise AssertionError(
                f"oracle/executor contradiction on {spec.name!r} input {x!r}: "
                f"{executor_verdict.outcome} vs {oracle_verdict.outcome}"
            )
