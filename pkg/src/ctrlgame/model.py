"""Complete selection models: declarations, cross-reference validation,
and the expansion/matrix/play pipeline.

A :class:`ModelSpec` gathers everything an analyst authors: the asset and
objective declarations, the control catalog with costs and payoff entries,
the family term with its requirements, the budget, and the attacker
profiles.  :func:`validate` checks every cross-reference and value range,
returning :class:`Diagnostic` records instead of raising, so callers can
render precise error lists.

The pipeline helpers number the expanded combinations once ("Combo 1",
"Combo 2", ...) before any budget filtering, so a combination keeps its
identity when the analyst replays the game under a different budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .algebra import (
    CONTROL_ID_CHARS,
    DEFAULT_CHOICE_LIMIT,
    Combination,
    Family,
    Requirement,
    Term,
    choice_count,
    expand,
    term_atoms,
)
from .game import AttackerProfile, GameError, PlayResult, play
from .valuation import (
    AtomicPayoff,
    Budget,
    Cell,
    CostTable,
    EffScale,
    GameMatrix,
    build_game_matrix,
    combination_cost,
    is_valid,
)

__all__ = [
    "Diagnostic",
    "ControlDef",
    "ModelSpec",
    "ModelError",
    "validate",
    "ExpansionRow",
    "expansion_rows",
    "model_matrix",
    "play_model",
    "ensure_valid",
    "NoStrategiesError",
    "EMPTY_LABEL",
]

# Rendered name for the combination with no controls.
EMPTY_LABEL = "(empty)"

_ID_KINDS = {"asset", "objective", "control"}


@dataclass(frozen=True)
class Diagnostic:
    """One validation or parse finding, always carrying a location."""

    severity: str  # "error" | "warning"
    code: str  # stable machine-readable token
    message: str
    location: str  # "line:column" for DSL sources, a JSON-ish path otherwise

    def __str__(self) -> str:
        return f"{self.severity}[{self.code}] at {self.location}: {self.message}"


class ModelError(ValueError):
    """Raised when a model cannot be built; carries the diagnostics."""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics) or "invalid model")


@dataclass(frozen=True)
class ControlDef:
    """One catalog entry: identity, display title, cost, and its stored
    payoff entries (cells without an entry default to 0)."""

    id: str
    title: str
    cost: float
    payoffs: dict[Cell, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ModelSpec:
    name: str
    scale: EffScale
    assets: tuple[str, ...]
    objectives: tuple[str, ...]
    controls: tuple[ControlDef, ...]
    family: Term
    requirements: tuple[Requirement, ...]
    budget: float
    profiles: tuple[AttackerProfile, ...]
    # Execution guard, not model content: excluded from equality so parse
    # and serialization round-trips stay identities.
    choice_limit: int = field(default=DEFAULT_CHOICE_LIMIT, compare=False)

    def cells(self) -> tuple[Cell, ...]:
        """All matrix columns, asset-major in declaration order."""
        return tuple(
            Cell(asset, objective)
            for asset in self.assets
            for objective in self.objectives
        )

    def control_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.controls)

    def control(self, control_id: str) -> ControlDef:
        for c in self.controls:
            if c.id == control_id:
                return c
        raise KeyError(control_id)

    def cost_table(self) -> CostTable:
        return CostTable({c.id: c.cost for c in self.controls})

    def atomic_payoff(self) -> AtomicPayoff:
        return AtomicPayoff(
            {
                (c.id, cell): value
                for c in self.controls
                for cell, value in c.payoffs.items()
            }
        )

    def profile(self, name: str) -> AttackerProfile:
        for p in self.profiles:
            if p.name == name:
                return p
        raise GameError(
            f"unknown profile {name!r}; available: "
            + ", ".join(p.name for p in self.profiles)
        )

    def combination_label(self, p: Combination) -> str:
        """Atoms in catalog declaration order, space separated."""
        order = {cid: i for i, cid in enumerate(self.control_ids())}
        atoms = sorted(p.atoms, key=lambda a: (order.get(a, len(order)), a))
        return " ".join(atoms) if atoms else EMPTY_LABEL

    def with_budget(self, budget: float) -> "ModelSpec":
        return replace(self, budget=budget)


# ── validation ──────────────────────────────────────────────────────


def _valid_id(token: str) -> bool:
    return bool(token) and set(token) <= CONTROL_ID_CHARS


def validate(spec: ModelSpec) -> list[Diagnostic]:
    """All invariant violations (errors) and analyst hints (warnings).

    An empty list means the model is ready for the pipeline.
    """
    diags: list[Diagnostic] = []

    def error(code: str, message: str, location: str) -> None:
        diags.append(Diagnostic("error", code, message, location))

    def warning(code: str, message: str, location: str) -> None:
        diags.append(Diagnostic("warning", code, message, location))

    if not spec.name:
        error("missing-model-header", "model needs a non-empty name", "$.name")

    for kind, tokens in (("asset", spec.assets), ("objective", spec.objectives)):
        seen: set[str] = set()
        for i, token in enumerate(tokens):
            where = f"$.{kind}s[{i}]"
            if not _valid_id(token):
                error(f"invalid-{kind}", f"invalid {kind} id {token!r}", where)
            if token in seen:
                error(f"duplicate-{kind}", f"{kind} {token!r} declared twice", where)
            seen.add(token)
    if not spec.assets:
        error("no-assets", "declare at least one asset", "$.assets")
    if not spec.objectives:
        error("no-objectives", "declare at least one objective", "$.objectives")

    declared_cells = set(spec.cells())
    control_ids: set[str] = set()
    for i, control in enumerate(spec.controls):
        where = f"$.controls[{i}]"
        if not _valid_id(control.id):
            error("invalid-control", f"invalid control id {control.id!r}", where)
        if control.id in control_ids:
            error("duplicate-control", f"control {control.id!r} declared twice", where)
        control_ids.add(control.id)
        if not math.isfinite(control.cost) or control.cost < 0:
            error(
                "negative-cost",
                f"control {control.id}: negative cost not supported (got {control.cost})",
                f"{where}.cost",
            )
        for cell, value in control.payoffs.items():
            cell_path = f"{where}.payoffs.{cell}"
            if cell.asset not in spec.assets:
                error("unknown-asset", f"unknown asset {cell.asset!r}", cell_path)
            elif cell.objective not in spec.objectives:
                error(
                    "unknown-objective", f"unknown objective {cell.objective!r}", cell_path
                )
            if not 0.0 <= value <= 1.0:
                error(
                    "effectiveness-range",
                    f"effectiveness {value} outside [0, 1]",
                    cell_path,
                )
    if not spec.controls:
        error("no-controls", "declare at least one control", "$.controls")

    for control in sorted(term_atoms(spec.family) - control_ids):
        error(
            "unknown-control",
            f"family term uses undeclared control {control!r}",
            "$.family",
        )
    for i, req in enumerate(spec.requirements):
        for side, term in (("antecedent", req.antecedent), ("consequent", req.consequent)):
            for control in sorted(term_atoms(term) - control_ids):
                error(
                    "unknown-control",
                    f"requirement {side} uses undeclared control {control!r}",
                    f"$.requirements[{i}].{side}",
                )

    if not math.isfinite(spec.budget) or spec.budget < 0:
        error("negative-budget", f"budget must be non-negative, got {spec.budget}", "$.budget")

    profile_names: set[str] = set()
    referenced_cells: set[Cell] = set()
    for i, profile in enumerate(spec.profiles):
        where = f"$.profiles[{i}]"
        if profile.name in profile_names:
            error("duplicate-profile", f"profile {profile.name!r} declared twice", where)
        profile_names.add(profile.name)
        for k, stage in enumerate(profile.stages):
            for cell in sorted(stage.cells, key=str):
                referenced_cells.add(cell)
                if cell not in declared_cells:
                    bad = "asset" if cell.asset not in spec.assets else "objective"
                    token = cell.asset if bad == "asset" else cell.objective
                    error(
                        f"unknown-{bad}",
                        f"unknown {bad} {token!r}",
                        f"{where}.stages[{k}].{cell}",
                    )
    if not spec.profiles:
        error("no-profiles", "declare at least one attacker profile", "$.profiles")

    if diags and any(d.severity == "error" for d in diags):
        return diags

    # Warnings only below; the model is structurally sound.
    n_choices = choice_count(spec.family)
    if n_choices > spec.choice_limit:
        warning(
            "choice-limit",
            f"family term has {n_choices} choice points, above the expansion "
            f"limit of {spec.choice_limit}; expansion will be refused",
            "$.family",
        )
    else:
        family = expand(spec.family, spec.requirements, max_choices=spec.choice_limit)
        if family.is_empty:
            warning(
                "empty-family",
                "the requirements exclude every combination; no strategies available",
                "$.family",
            )

    for i, control in enumerate(spec.controls):
        if control.payoffs and all(v == 0.0 for v in control.payoffs.values()):
            warning(
                "all-zero-control",
                f"control {control.id} has only zero-effectiveness entries",
                f"$.controls[{i}].payoffs",
            )

    for cell in spec.cells():
        has_signal = any(c.payoffs.get(cell, 0.0) > 0.0 for c in spec.controls)
        if has_signal and cell not in referenced_cells:
            warning(
                "unreferenced-payoff",
                f"cell {cell} has effectiveness entries but no profile targets it",
                f"$.profiles.{cell}",
            )

    return diags


def ensure_valid(spec: ModelSpec) -> ModelSpec:
    """Raise :class:`ModelError` when validation finds errors; warnings pass."""
    diags = [d for d in validate(spec) if d.severity == "error"]
    if diags:
        raise ModelError(diags)
    return spec


# ── pipeline ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ExpansionRow:
    """One generated combination with its stable id, cost, and validity."""

    label: str
    combination: Combination
    cost: float
    valid: bool


def expansion_rows(spec: ModelSpec, budget: float | None = None) -> list[ExpansionRow]:
    """Expand the family and number every combination before budget filtering.

    Rows are ordered smallest combination first, then by catalog
    declaration order of the atoms, which keeps ids stable across budgets.
    """
    family = expand(spec.family, spec.requirements, max_choices=spec.choice_limit)
    costs = spec.cost_table()
    b = Budget(spec.budget if budget is None else budget)
    order = {cid: i for i, cid in enumerate(spec.control_ids())}

    def key(p: Combination) -> tuple[int, tuple[int, ...]]:
        return (len(p.atoms), tuple(sorted(order.get(a, len(order)) for a in p.atoms)))

    return [
        ExpansionRow(
            label=f"Combo {i + 1}",
            combination=p,
            cost=combination_cost(p, costs),
            valid=is_valid(p, costs, b),
        )
        for i, p in enumerate(sorted(family.combinations, key=key))
    ]


class NoStrategiesError(GameError):
    """The strategy space is empty: nothing to tabulate or play."""


def model_matrix(spec: ModelSpec, budget: float | None = None) -> GameMatrix:
    """Game matrix over the budget-valid combinations, ids preserved."""
    all_rows = expansion_rows(spec, budget)
    rows = [r for r in all_rows if r.valid]
    if not rows:
        if all_rows:
            b = spec.budget if budget is None else budget
            raise NoStrategiesError(
                f"no combination fits the budget {b:g}; the cheapest costs "
                f"{min(r.cost for r in all_rows):g}"
            )
        raise NoStrategiesError(
            "the requirements exclude every combination; no strategies available"
        )
    return build_game_matrix(
        Family(r.combination for r in rows),
        spec.cells(),
        spec.atomic_payoff(),
        row_order=[r.combination for r in rows],
        row_labels=[r.label for r in rows],
    )


def play_model(
    spec: ModelSpec, profile: AttackerProfile | str, budget: float | None = None
) -> PlayResult:
    """Build the matrix for the (possibly overridden) budget and play it."""
    if isinstance(profile, str):
        profile = spec.profile(profile)
    return play(model_matrix(spec, budget), profile)
