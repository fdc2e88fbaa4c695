"""Command-line surface.

Every command prints a single JSON document to stdout; diagnostics go to
stderr.  Exit codes: 0 success, 1 validation failure, 2 disagreement found,
3 budget exhaustion.  COUNTERLAB_CAP overrides the default step cap.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import executor, families, icount, oracle, pdcomplement, transforms
from .machines import (
    MachineError,
    parse_machine,
    serialize_machine,
    state_complexity,
    stack_state_complexity,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_DISAGREEMENT = 2
EXIT_BUDGET = 3


def _load(path: str):
    try:
        return parse_machine(Path(path).read_text(encoding="utf-8"))
    except MachineError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INVALID)


def _emit(doc: dict) -> None:
    click.echo(json.dumps(doc, ensure_ascii=False, indent=2))


def _budget(x: str, cap: int | None) -> executor.RunBudget:
    steps = cap if cap is not None else executor.default_cap(len(x))
    return executor.RunBudget(steps=steps)


FAMILIES = {"leq": families.scaled_leq_family}


@click.group()
def main() -> None:
    """Simulate, transform, and complement two-way multi-counter machines."""


@main.command()
@click.argument("machine", type=click.Path(exists=True))
def validate(machine: str) -> None:
    """Parse and validate a machine document."""
    spec = _load(machine)
    _emit({"machine": spec.name, "valid": True, "states": len(spec.states),
           "transitions": len(spec.transitions)})


@main.command()
@click.argument("machine", type=click.Path(exists=True))
@click.option("--input", "x", required=True, help="input string over the alphabet")
@click.option("--cap", type=int, default=None, help="step cap (default (|x|+2)^3)")
@click.option("--count-paths", is_flag=True, help="also count accepting paths")
def run(machine: str, x: str, cap: int | None, count_paths: bool) -> None:
    """Decide acceptance by bounded reachability."""
    spec = _load(machine)
    budget = _budget(x, cap)
    try:
        verdict = executor.decide(spec, x, budget)
    except ValueError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INVALID)
    doc = {"machine": spec.name, "input": x, "verdict": verdict.outcome,
           "cap": budget.steps}
    if verdict.reason:
        doc["reason"] = verdict.reason
    if verdict.witness is not None:
        doc["witness_length"] = len(verdict.witness) - 1
    if count_paths:
        n, exact = executor.count_accepting_paths(spec, x, budget)
        doc["accepting_paths"] = n
        doc["accepting_paths_exact"] = exact
    _emit(doc)
    if verdict.outcome == "unknown":
        sys.exit(EXIT_BUDGET)


@main.command()
@click.argument("machine", type=click.Path(exists=True))
@click.option("--op", required=True,
              type=click.Choice(["pair", "reduce4", "reduce3pd", "eliminate"]))
@click.option("--pair", "pair_arg", default=None, help="counter pair a,b for --op pair")
@click.option("--ceiling", type=int, default=None, help="counter ceiling for --op eliminate")
@click.option("-o", "out", required=True, type=click.Path(), help="output machine file")
def transform(machine: str, op: str, pair_arg: str | None, ceiling: int | None,
              out: str) -> None:
    """Apply a counter transformation and write the resulting machine."""
    spec = _load(machine)
    try:
        if op == "pair":
            if not pair_arg:
                raise transforms.TransformError("--op pair requires --pair a,b")
            a, b = (int(v) for v in pair_arg.split(","))
            result = transforms.pair_counters(spec, (a, b))
        elif op == "reduce4":
            result = transforms.reduce_counters(spec)
        elif op == "reduce3pd":
            result = transforms.reduce_counters_pd(spec)
        else:
            if ceiling is None:
                raise transforms.TransformError("--op eliminate requires --ceiling")
            result = transforms.eliminate_counters(spec, ceiling)
    except (transforms.TransformError, MachineError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INVALID)
    Path(out).write_text(serialize_machine(result), encoding="utf-8")
    _emit({"machine": result.name, "written": out, "states": len(result.states),
           "counters": result.counters, "transform": op})


@main.command()
@click.argument("machine", type=click.Path(exists=True))
@click.option("--input", "x", required=True)
@click.option("--mode", type=click.Choice(["exact", "guess"]), default="exact")
@click.option("--seed", type=int, default=0, help="seed for --mode guess")
@click.option("--pd", is_flag=True, help="use the conf-interval pushdown procedure")
@click.option("--cap", type=int, default=None)
def complement(machine: str, x: str, mode: str, seed: int, pd: bool,
               cap: int | None) -> None:
    """Decide that the machine rejects the input (complementation)."""
    spec = _load(machine)
    budget = _budget(x, cap)
    doc = {"machine": spec.name, "input": x, "mode": mode, "cap": budget.steps}
    if pd:
        try:
            verdict = pdcomplement.complement_decide_pd(spec, x, budget)
        except pdcomplement.PdError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_INVALID)
        doc["verdict"] = verdict.outcome
        if verdict.reason:
            doc["reason"] = verdict.reason
    elif mode == "guess":
        outcome = icount.guessing_mode_run(spec, x, budget.steps, seed)
        doc["verdict"] = outcome.verdict
        doc["layer_counts"] = outcome.n_hats
        if outcome.aborted_at:
            doc["aborted_at"] = outcome.aborted_at
    else:
        verdict = icount.complement_decide_ic(spec, x, budget)
        audit = icount.audit_ic(spec, x, budget)
        doc["verdict"] = verdict.outcome
        if verdict.reason:
            doc["reason"] = verdict.reason
        doc["audit"] = {"max_simultaneous_counters": audit.max_simultaneous,
                        "counter_budget": audit.budget,
                        "within_budget": audit.within_budget}
    _emit(doc)
    if doc["verdict"] == "unknown":
        sys.exit(EXIT_BUDGET)


@main.command("check-equiv")
@click.argument("machine1", type=click.Path(exists=True))
@click.argument("machine2", type=click.Path(exists=True))
@click.option("--max-len", type=int, default=3, help="check all inputs up to this length")
@click.option("--family", "family_name", type=click.Choice(sorted(FAMILIES)), default=None,
              help="check the family's promised strings instead of all strings")
@click.option("--index", "n", type=int, default=1, help="family index for --family")
@click.option("--cap", type=int, default=None)
@click.option("--cap2", type=int, default=None,
              help="separate cap for the second machine (transform dilation)")
def check_equiv(machine1: str, machine2: str, max_len: int, family_name: str | None,
                n: int, cap: int | None, cap2: int | None) -> None:
    """Compare two machines' verdicts input by input."""
    m1, m2 = _load(machine1), _load(machine2)
    if family_name:
        fam = FAMILIES[family_name]()
        inputs = list(fam.sample(n, max_len))
    else:
        import itertools

        inputs = ["".join(t) for L in range(max_len + 1)
                  for t in itertools.product(m1.alphabet, repeat=L)]
    base_cap = cap if cap is not None else executor.default_cap(max_len)
    report = oracle.check_equivalence(m1, m2, inputs, base_cap, cap2)
    _emit({"machine1": m1.name, "machine2": m2.name, **report.to_dict()})
    if report.disagreements:
        sys.exit(EXIT_DISAGREEMENT)
    if report.unknowns:
        sys.exit(EXIT_BUDGET)


@main.command()
@click.argument("machine", type=click.Path(exists=True))
@click.option("--input", "x", default=None,
              help="also profile layer counts on this input")
@click.option("--figures", "figures_dir", type=click.Path(), default=None,
              help="write layers.csv and figures to this directory")
@click.option("--cap", type=int, default=None)
def report(machine: str, x: str | None, figures_dir: str | None,
           cap: int | None) -> None:
    """Complexity metrics, optionally with a layer profile and figures."""
    spec = _load(machine)
    doc = {
        "machine": spec.name,
        "mode": spec.mode,
        "state_complexity": state_complexity(spec),
        "counters": spec.counters,
    }
    if spec.stack is not None:
        doc["stack_state_complexity"] = stack_state_complexity(spec)
        doc["push_size"] = spec.stack.push_size
    if x is not None:
        budget = _budget(x, cap)
        r = min(budget.steps, 64) if cap is None else budget.steps
        layers = icount.layer_counts(spec, x, r)
        doc["input"] = x
        doc["layer_counts"] = [lc.count for lc in layers]
        if figures_dir:
            from . import figures

            files = figures.render_report_figures(layers, Path(figures_dir),
                                                  spec.name, x)
            doc["figures"] = files
    _emit(doc)
