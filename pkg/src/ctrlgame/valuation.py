"""Costs, effectiveness payoffs, budget validity, and the game matrix.

Every atomic control carries a cost and a per-cell effectiveness in [0, 1],
where a cell is one (asset, security objective) pair.  Combination cost is
the sum of atom costs; combination effectiveness stacks atoms with the
noisy-or rule ``1 - (1 - e1)(1 - e2)``, so adding a control never lowers
protection.  A combination is valid when its cost fits the budget, and the
game matrix tabulates the effectiveness of each valid combination against
each cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .algebra import Combination, Family

__all__ = [
    "ValuationError",
    "Cell",
    "EffScale",
    "DEFAULT_SCALE",
    "AtomicPayoff",
    "CostTable",
    "Budget",
    "GameMatrix",
    "combination_cost",
    "is_valid",
    "filter_valid",
    "combination_effectiveness",
    "build_game_matrix",
    "EFFECTIVENESS_TOLERANCE",
]

# Derived effectiveness values are compared within this tolerance; budget
# checks stay exact because costs are analyst-entered quantities.
EFFECTIVENESS_TOLERANCE = 1e-9


class ValuationError(ValueError):
    """Invalid cost/effectiveness data or a lookup of an undeclared control."""


@dataclass(frozen=True)
class Cell:
    """One potential attacker target: a security objective on an asset."""

    asset: str
    objective: str

    def __str__(self) -> str:
        return f"{self.asset}.{self.objective}"


@dataclass(frozen=True)
class EffScale:
    """Ordered qualitative rating labels mapped to effectiveness values."""

    labels: Mapping[str, float]

    def __post_init__(self) -> None:
        for label, value in self.labels.items():
            if not 0.0 <= value <= 1.0:
                raise ValuationError(
                    f"scale label {label!r} maps to {value}, outside [0, 1]"
                )

    def value_of(self, label: str) -> float:
        try:
            return self.labels[label]
        except KeyError:
            raise ValuationError(f"unknown scale label {label!r}") from None

    def __contains__(self, label: str) -> bool:
        return label in self.labels


# CVSS-style qualitative ratings; no label maps to 1.0 because a single
# control is never assumed to fully protect an objective.
DEFAULT_SCALE = EffScale(
    {"none": 0.0, "low": 0.2, "medium": 0.5, "high": 0.8, "very_high": 0.9}
)


@dataclass(frozen=True)
class AtomicPayoff:
    """Per-control, per-cell effectiveness; missing entries read as 0."""

    entries: Mapping[tuple[str, Cell], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for (control, cell), value in self.entries.items():
            if not 0.0 <= value <= 1.0:
                raise ValuationError(
                    f"effectiveness of {control} at {cell} is {value}, outside [0, 1]"
                )

    def get(self, control: str, cell: Cell) -> float:
        return self.entries.get((control, cell), 0.0)


@dataclass(frozen=True)
class CostTable:
    """Implementation cost per atomic control; costs are non-negative."""

    entries: Mapping[str, float]

    def __post_init__(self) -> None:
        for control, cost in self.entries.items():
            if not math.isfinite(cost) or cost < 0:
                raise ValuationError(
                    f"cost of {control} is {cost}; negative or non-finite costs "
                    "are not supported"
                )

    def cost_of(self, control: str) -> float:
        try:
            return self.entries[control]
        except KeyError:
            raise ValuationError(f"control {control!r} has no declared cost") from None


@dataclass(frozen=True)
class Budget:
    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value) or self.value < 0:
            raise ValuationError(f"budget must be finite and non-negative, got {self.value}")


def combination_cost(p: Combination, costs: CostTable) -> float:
    """Summed cost of the combination's atoms; the empty combination is free."""
    return sum(costs.cost_of(control) for control in p.sorted_atoms)


def is_valid(p: Combination, costs: CostTable, budget: Budget) -> bool:
    """Budget rule: the combination's cost must not exceed the budget (exact
    comparison, boundary included)."""
    return combination_cost(p, costs) <= budget.value


def filter_valid(family: Family, costs: CostTable, budget: Budget) -> Family:
    return Family(p for p in family.combinations if is_valid(p, costs, budget))


def combination_effectiveness(p: Combination, cell: Cell, payoffs: AtomicPayoff) -> float:
    """Noisy-or stacking of the atoms' effectiveness at one cell.

    The empty combination protects nothing (0.0); unknown atoms contribute
    nothing rather than failing, since absent payoff entries mean
    "not effective".
    """
    survival = 1.0
    for control in p.sorted_atoms:
        survival *= 1.0 - payoffs.get(control, cell)
    return 1.0 - survival


@dataclass(frozen=True)
class GameMatrix:
    """Dense payoff table: one row per combination, one column per cell."""

    rows: tuple[Combination, ...]
    row_labels: tuple[str, ...]
    columns: tuple[Cell, ...]
    payoff: np.ndarray

    def __post_init__(self) -> None:
        if len(self.rows) != len(self.row_labels):
            raise ValuationError("one label per matrix row required")
        if self.payoff.shape != (len(self.rows), len(self.columns)):
            raise ValuationError(
                f"payoff shape {self.payoff.shape} does not match "
                f"{len(self.rows)} rows x {len(self.columns)} columns"
            )
        self.payoff.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def row_index(self, p: Combination) -> int:
        try:
            return self.rows.index(p)
        except ValueError:
            raise ValuationError(
                f"combination {{{' '.join(p.sorted_atoms)}}} is not a matrix row"
            ) from None

    def column_index(self, cell: Cell) -> int:
        try:
            return self.columns.index(cell)
        except ValueError:
            raise ValuationError(f"cell {cell} is not a matrix column") from None

    def value(self, p: Combination, cell: Cell) -> float:
        return float(self.payoff[self.row_index(p), self.column_index(cell)])


def build_game_matrix(
    family: Family,
    cells: Sequence[Cell],
    payoffs: AtomicPayoff,
    *,
    row_order: Iterable[Combination] | None = None,
    row_labels: Sequence[str] | None = None,
) -> GameMatrix:
    """Tabulate the family's effectiveness against every cell.

    Rows default to the family's canonical order with labels "Combo 1..N";
    callers that number combinations before budget filtering pass their own
    ``row_order``/``row_labels`` so identities stay stable across budgets.
    """
    if family.is_empty:
        raise ValuationError("no strategies to tabulate: the family is empty")
    if not cells:
        raise ValuationError("no cells to tabulate: declare at least one column")
    rows = tuple(row_order) if row_order is not None else tuple(family.in_order())
    if set(rows) != set(family.combinations) or len(rows) != len(family.combinations):
        raise ValuationError("row_order must list exactly the family's combinations")
    labels = (
        tuple(row_labels)
        if row_labels is not None
        else tuple(f"Combo {i + 1}" for i in range(len(rows)))
    )
    matrix = np.array(
        [[combination_effectiveness(p, cell, payoffs) for cell in cells] for p in rows],
        dtype=float,
    )
    return GameMatrix(rows=rows, row_labels=labels, columns=tuple(cells), payoff=matrix)
