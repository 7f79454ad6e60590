"""Seeded random model generator shared by round-trip and solver tests.

Effectiveness values come from a coarse grid so that distinct stage totals
are far apart: ties are exact and tolerance handling cannot blur oracle
comparisons.
"""

from __future__ import annotations

import random

from ctrlgame.algebra import Atom, Choice, Comp, Requirement, Term, opt
from ctrlgame.game import AttackerObjective, AttackerProfile
from ctrlgame.model import ControlDef, ModelSpec, expansion_rows
from ctrlgame.valuation import DEFAULT_SCALE, Cell

CONTROL_POOL = [
    "AC-2", "AC-3", "AC-4", "AC-6", "AU-2", "CM-7", "IA-5", "SC-7", "SI-10", "SI-4",
]
ASSET_POOL = ["database", "user_interface", "gateway", "processor"]
OBJECTIVE_POOL = ["C", "I", "A"]
GRID = [0.0, 0.1, 0.2, 0.5, 0.8, 0.9]


def random_family_term(rng: random.Random, controls: list[str]) -> Term:
    shuffled = controls[:]
    rng.shuffle(shuffled)
    n_mandatory = rng.randint(0, min(2, len(shuffled)))
    mandatory, rest = shuffled[:n_mandatory], shuffled[n_mandatory:]

    term: Term | None = None
    for cid in mandatory:
        term = Atom(cid) if term is None else Comp(term, Atom(cid))
    if len(rest) >= 2 and rng.random() < 0.3:
        # an exclusive alternative between two controls
        group = Choice(Atom(rest[0]), Atom(rest[1]))
        rest = rest[2:]
        term = group if term is None else Comp(term, group)
    if rest:
        optional = opt(rest)
        term = optional if term is None else Comp(term, optional)
    return term if term is not None else opt([])


def random_spec(
    rng: random.Random,
    *,
    max_atoms: int = 6,
    max_assets: int = 4,
    max_objectives: int = 3,
    max_profiles: int = 3,
    max_stages: int = 4,
) -> ModelSpec:
    """A validated random model with at least one budget-valid combination."""
    while True:
        controls = rng.sample(CONTROL_POOL, rng.randint(1, max_atoms))
        assets = rng.sample(ASSET_POOL, rng.randint(1, max_assets))
        objectives = OBJECTIVE_POOL[: rng.randint(1, max_objectives)]
        cells = [Cell(a, o) for a in assets for o in objectives]

        control_defs = tuple(
            ControlDef(
                id=cid,
                title=f"{cid} safeguard",
                cost=float(rng.randint(0, 9)),
                payoffs={
                    cell: rng.choice(GRID) for cell in cells if rng.random() < 0.6
                },
            )
            for cid in controls
        )

        family = random_family_term(rng, controls)
        requirements = []
        if len(controls) >= 2 and rng.random() < 0.6:
            a, b = rng.sample(controls, 2)
            requirements.append(Requirement(Atom(a), Atom(b)))

        profiles = tuple(
            AttackerProfile(
                f"profile{i + 1}",
                [
                    AttackerObjective(rng.sample(cells, rng.randint(1, min(4, len(cells)))))
                    for _ in range(rng.randint(1, max_stages))
                ],
            )
            for i in range(rng.randint(1, max_profiles))
        )

        spec = ModelSpec(
            name=f"random-{rng.randrange(10**6)}",
            scale=DEFAULT_SCALE,
            assets=tuple(assets),
            objectives=tuple(objectives),
            controls=control_defs,
            family=family,
            requirements=tuple(requirements),
            budget=0.0,
            profiles=profiles,
        )
        rows = expansion_rows(spec)
        if not rows:
            continue  # requirements excluded everything; roll again
        budget = rng.choice([r.cost for r in rows] + [max(r.cost for r in rows) + 5.0])
        return spec.with_budget(budget)
