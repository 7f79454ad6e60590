"""Playing the control selection game against an attacker profile.

The analyst's strategies are the rows of a :class:`~ctrlgame.valuation.GameMatrix`;
the attacker is assumed to target a priority-ordered list of objectives,
each a set of cells hit with equal likelihood.  Solving is lexicographic:
stage by stage, only the rows with the maximal summed effectiveness over
that stage's cells survive, and ties (within a small tolerance) are all
kept as equally valid suggestions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .algebra import Combination
from .valuation import Cell, GameMatrix

__all__ = [
    "GameError",
    "AttackerObjective",
    "AttackerProfile",
    "StageOutcome",
    "PlayResult",
    "total_effectiveness",
    "play",
    "residual_risk_report",
    "PLAY_TOLERANCE",
]

# Two stage totals within this distance count as a tie; both rows survive.
PLAY_TOLERANCE = 1e-9


class GameError(ValueError):
    """The game cannot be played as requested."""


@dataclass(frozen=True)
class AttackerObjective:
    """Cells the attacker is assumed to target with equal likelihood."""

    cells: frozenset[Cell]

    def __init__(self, cells: Iterable[Cell]) -> None:
        object.__setattr__(self, "cells", frozenset(cells))
        if not self.cells:
            raise GameError("an attacker objective needs at least one cell")

    def ordered_cells(self, columns: Sequence[Cell]) -> tuple[Cell, ...]:
        """Cells in the matrix's column order (unknown cells last, by name)."""
        position = {cell: i for i, cell in enumerate(columns)}
        return tuple(
            sorted(self.cells, key=lambda c: (position.get(c, len(columns)), str(c)))
        )


@dataclass(frozen=True)
class AttackerProfile:
    """Named, priority-ordered attacker objectives (highest priority first)."""

    name: str
    stages: tuple[AttackerObjective, ...]

    def __init__(self, name: str, stages: Iterable[AttackerObjective]) -> None:
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "stages", tuple(stages))
        if not self.stages:
            raise GameError(f"attacker profile {name!r} has no objectives")


@dataclass(frozen=True)
class StageOutcome:
    stage: int  # 1-based priority position
    cells: tuple[Cell, ...]
    best: float
    survivors: tuple[str, ...]  # row labels, in matrix row order


@dataclass(frozen=True)
class PlayResult:
    stages: tuple[StageOutcome, ...]
    suggested: tuple[Combination, ...]
    suggested_labels: tuple[str, ...]
    trace: str


def total_effectiveness(
    row: Combination, objective: AttackerObjective, gm: GameMatrix
) -> float:
    """Summed effectiveness of one row over the objective's cells."""
    i = gm.row_index(row)
    cols = [_column(gm, cell) for cell in objective.ordered_cells(gm.columns)]
    return float(gm.payoff[i, cols].sum())


def _column(gm: GameMatrix, cell: Cell) -> int:
    try:
        return gm.column_index(cell)
    except ValueError as exc:
        raise GameError(str(exc)) from None


def play(gm: GameMatrix, profile: AttackerProfile) -> PlayResult:
    """Lexicographically filter the matrix rows over the profile's stages.

    Each stage keeps the surviving rows whose stage total is within
    ``PLAY_TOLERANCE`` of the stage maximum; the rows left after the last
    stage are the suggested combinations, all equally valid.
    """
    if gm.n_rows == 0:
        raise GameError("no valid strategies under the current budget")

    alive = np.ones(gm.n_rows, dtype=bool)
    outcomes: list[StageOutcome] = []
    lines: list[str] = []
    for k, objective in enumerate(profile.stages, start=1):
        cells = objective.ordered_cells(gm.columns)
        cols = [_column(gm, cell) for cell in cells]
        totals = gm.payoff[:, cols].sum(axis=1)
        best = float(totals[alive].max())
        alive &= totals >= best - PLAY_TOLERANCE
        survivors = tuple(
            label for label, keep in zip(gm.row_labels, alive) if keep
        )
        outcomes.append(StageOutcome(stage=k, cells=cells, best=best, survivors=survivors))
        lines.append(
            f"Stage {k} ({', '.join(str(c) for c in cells)}): "
            f"best total {best:.9g}; survivors: {', '.join(survivors)}"
        )

    suggested = tuple(p for p, keep in zip(gm.rows, alive) if keep)
    labels = outcomes[-1].survivors
    lines.append(
        "Suggested: "
        + "; ".join(
            f"{label} ({' '.join(p.sorted_atoms) or 'no controls'})"
            for label, p in zip(labels, suggested)
        )
    )
    return PlayResult(
        stages=tuple(outcomes),
        suggested=suggested,
        suggested_labels=labels,
        trace="\n".join(lines),
    )


def residual_risk_report(
    chosen: Combination, gm: GameMatrix, threshold: float
) -> list[tuple[Cell, float]]:
    """Cells the chosen combination protects below the threshold, weakest first."""
    if not 0.0 <= threshold <= 1.0:
        raise GameError(f"threshold must lie in [0, 1], got {threshold}")
    i = gm.row_index(chosen)
    flagged = [
        (cell, float(gm.payoff[i, j]))
        for j, cell in enumerate(gm.columns)
        if gm.payoff[i, j] < threshold
    ]
    flagged.sort(key=lambda item: (item[1], str(item[0])))
    return flagged
