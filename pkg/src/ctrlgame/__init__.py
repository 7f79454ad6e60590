"""Game-theoretic security control selection.

Specify a family of candidate security controls algebraically, generate
every dependency-respecting combination under a budget, tabulate each
combination's noisy-or effectiveness against the (asset, objective) cells
an attacker may target, and solve lexicographically against prioritized
attacker profiles.  Ships a textual model DSL, a JSON schema, a CLI, and
an HTTP service for the browser workbench.
"""

from .algebra import (
    ONE,
    ZERO,
    AlgebraError,
    Atom,
    Choice,
    Comp,
    Combination,
    ExpansionLimitError,
    Family,
    One,
    Requirement,
    Term,
    Zero,
    apply_requirement,
    atom,
    choice_count,
    expand,
    normalize,
    opt,
    refines,
)
from .dsl import format_number, parse_model, parse_term, print_model, print_term
from .game import (
    AttackerObjective,
    AttackerProfile,
    GameError,
    PlayResult,
    StageOutcome,
    play,
    residual_risk_report,
    total_effectiveness,
)
from .jsonio import SCHEMA_VERSION, from_json, to_json
from .model import (
    ControlDef,
    Diagnostic,
    ExpansionRow,
    ModelError,
    ModelSpec,
    NoStrategiesError,
    ensure_valid,
    expansion_rows,
    model_matrix,
    play_model,
    validate,
)
from .valuation import (
    DEFAULT_SCALE,
    AtomicPayoff,
    Budget,
    Cell,
    CostTable,
    EffScale,
    GameMatrix,
    ValuationError,
    build_game_matrix,
    combination_cost,
    combination_effectiveness,
    filter_valid,
    is_valid,
)
from .whatif import (
    SensitivityEntry,
    SensitivityReport,
    SweepEntry,
    budget_sweep,
    sensitivity_scan,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # algebra
    "Term", "Zero", "One", "Atom", "Choice", "Comp", "ZERO", "ONE",
    "atom", "opt", "Combination", "Family", "Requirement",
    "normalize", "refines", "apply_requirement", "expand", "choice_count",
    "AlgebraError", "ExpansionLimitError",
    # valuation
    "Cell", "EffScale", "DEFAULT_SCALE", "AtomicPayoff", "CostTable",
    "Budget", "GameMatrix", "combination_cost", "is_valid", "filter_valid",
    "combination_effectiveness", "build_game_matrix", "ValuationError",
    # game
    "AttackerObjective", "AttackerProfile", "StageOutcome", "PlayResult",
    "total_effectiveness", "play", "residual_risk_report", "GameError",
    # model + pipeline
    "ModelSpec", "ControlDef", "Diagnostic", "ModelError", "NoStrategiesError",
    "validate", "ensure_valid", "ExpansionRow", "expansion_rows",
    "model_matrix", "play_model",
    # io
    "parse_model", "print_model", "parse_term", "print_term", "format_number",
    "to_json", "from_json", "SCHEMA_VERSION",
    # what-if
    "SweepEntry", "budget_sweep", "SensitivityEntry", "SensitivityReport",
    "sensitivity_scan",
]
