"""What-if analyses: replaying the game under varied budgets and payoffs.

The game is meant to be rebuilt and replayed, not solved once: sweeping the
budget shows where cheaper or richer strategy spaces change the suggestion,
and the sensitivity scan shows whether small errors in the analyst's
effectiveness estimates would have changed the outcome at all.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .algebra import Combination
from .game import AttackerProfile, GameError, PlayResult
from .model import ControlDef, ModelSpec, NoStrategiesError, play_model
from .valuation import Cell

__all__ = [
    "SweepEntry",
    "budget_sweep",
    "SensitivityEntry",
    "SensitivityReport",
    "sensitivity_scan",
]


@dataclass(frozen=True)
class SweepEntry:
    budget: float
    result: PlayResult | None
    error: str | None = None  # "no-strategies" or another failure, result is None

    @property
    def no_strategies(self) -> bool:
        return self.error == "no-strategies"


def budget_sweep(
    spec: ModelSpec, budgets: list[float], profile: AttackerProfile | str
) -> list[SweepEntry]:
    """Replay the game at each budget, in the given order.

    Budgets that leave no valid combination produce a marker entry instead
    of aborting the sweep.
    """
    if not budgets:
        raise GameError("budget_sweep needs at least one budget")
    if isinstance(profile, str):
        profile = spec.profile(profile)
    entries: list[SweepEntry] = []
    for budget in budgets:
        try:
            entries.append(SweepEntry(budget=budget, result=play_model(spec, profile, budget)))
        except NoStrategiesError:
            entries.append(SweepEntry(budget=budget, result=None, error="no-strategies"))
        except (GameError, ValueError) as exc:
            entries.append(SweepEntry(budget=budget, result=None, error=str(exc)))
    return entries


@dataclass(frozen=True)
class SensitivityEntry:
    control: str
    cell: Cell
    value: float
    suggested_up: frozenset[Combination]
    suggested_down: frozenset[Combination]
    changed_up: bool
    changed_down: bool

    @property
    def stable(self) -> bool:
        return not (self.changed_up or self.changed_down)


@dataclass(frozen=True)
class SensitivityReport:
    profile: str
    delta: float
    baseline: PlayResult
    entries: tuple[SensitivityEntry, ...]

    @property
    def stable_entries(self) -> tuple[SensitivityEntry, ...]:
        return tuple(e for e in self.entries if e.stable)

    @property
    def unstable_entries(self) -> tuple[SensitivityEntry, ...]:
        return tuple(e for e in self.entries if not e.stable)


def _with_payoff(spec: ModelSpec, control_id: str, cell: Cell, value: float) -> ModelSpec:
    controls = []
    for control in spec.controls:
        if control.id == control_id:
            payoffs = dict(control.payoffs)
            payoffs[cell] = value
            control = ControlDef(
                id=control.id, title=control.title, cost=control.cost, payoffs=payoffs
            )
        controls.append(control)
    return replace(spec, controls=tuple(controls))


def sensitivity_scan(
    spec: ModelSpec,
    profile: AttackerProfile | str,
    delta: float,
    budget: float | None = None,
) -> SensitivityReport:
    """Perturb each stored payoff entry by +/-delta and replay.

    An entry is stable when neither perturbation (clamped to [0, 1])
    changes the suggested combination set.  Costs and validity never
    change, so the strategy space is identical across replays.
    """
    if not 0.0 < delta <= 1.0:
        raise GameError(f"delta must lie in (0, 1], got {delta}")
    if isinstance(profile, str):
        profile = spec.profile(profile)

    baseline = play_model(spec, profile, budget)
    suggested_before = frozenset(baseline.suggested)

    entries: list[SensitivityEntry] = []
    cell_order = {cell: i for i, cell in enumerate(spec.cells())}
    for control in spec.controls:
        for cell in sorted(control.payoffs, key=lambda c: cell_order.get(c, len(cell_order))):
            value = control.payoffs[cell]
            outcomes = {}
            for direction, perturbed in (
                ("up", min(1.0, value + delta)),
                ("down", max(0.0, value - delta)),
            ):
                shifted = _with_payoff(spec, control.id, cell, perturbed)
                outcomes[direction] = frozenset(play_model(shifted, profile, budget).suggested)
            entries.append(
                SensitivityEntry(
                    control=control.id,
                    cell=cell,
                    value=value,
                    suggested_up=outcomes["up"],
                    suggested_down=outcomes["down"],
                    changed_up=outcomes["up"] != suggested_before,
                    changed_down=outcomes["down"] != suggested_before,
                )
            )
    return SensitivityReport(
        profile=profile.name, delta=delta, baseline=baseline, entries=tuple(entries)
    )
