"""counterlab: two-way multi-counter automata — simulation, complementation,
and counter transformations, certified against a brute-force oracle."""

from .machines import (
    BOTTOM,
    Configuration,
    LEND,
    MachineError,
    MachineSemanticsError,
    MachineSpec,
    MachineSyntaxError,
    REND,
    StackSpec,
    SurfaceView,
    TransitionRule,
    is_slim,
    machine_from_dict,
    machine_to_dict,
    normalize_slim,
    parse_machine,
    serialize_machine,
    state_complexity,
    stack_state_complexity,
    step_relation,
    validate_machine,
)
from .executor import (
    RunBudget,
    Verdict,
    count_accepting_paths,
    decide,
    default_budget,
    default_cap,
    reachable_exact,
    runtime_max,
)

__all__ = [
    "BOTTOM",
    "Configuration",
    "LEND",
    "MachineError",
    "MachineSemanticsError",
    "MachineSpec",
    "MachineSyntaxError",
    "REND",
    "RunBudget",
    "StackSpec",
    "SurfaceView",
    "TransitionRule",
    "Verdict",
    "count_accepting_paths",
    "decide",
    "default_budget",
    "default_cap",
    "is_slim",
    "machine_from_dict",
    "machine_to_dict",
    "normalize_slim",
    "parse_machine",
    "reachable_exact",
    "runtime_max",
    "serialize_machine",
    "state_complexity",
    "stack_state_complexity",
    "step_relation",
    "validate_machine",
]

__version__ = "0.1.0"
