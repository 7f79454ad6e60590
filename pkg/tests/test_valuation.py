"""Cost, budget validity, noisy-or effectiveness, and game matrix tests."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctrlgame.algebra import Atom, Comp, Combination, Family, Requirement, expand, opt
from ctrlgame.valuation import (
    DEFAULT_SCALE,
    AtomicPayoff,
    Budget,
    Cell,
    CostTable,
    EffScale,
    ValuationError,
    build_game_matrix,
    combination_cost,
    combination_effectiveness,
    filter_valid,
    is_valid,
)

TOL = 1e-9

DB_C, DB_I, DB_A = Cell("database", "C"), Cell("database", "I"), Cell("database", "A")
UI_C, UI_I, UI_A = (
    Cell("user_interface", "C"),
    Cell("user_interface", "I"),
    Cell("user_interface", "A"),
)
FIREBIRD_CELLS = (DB_C, DB_I, DB_A, UI_C, UI_I, UI_A)

FIREBIRD_COSTS = CostTable({"SI-10": 5, "AC-3": 6, "AC-4": 4, "AC-6": 3})

FIREBIRD_PAYOFF = AtomicPayoff(
    {
        ("SI-10", DB_C): 0.5,
        ("SI-10", DB_I): 0.9,
        ("SI-10", UI_C): 0.5,
        ("SI-10", UI_I): 0.8,
        ("AC-3", UI_C): 0.5,
        ("AC-3", UI_I): 0.8,
        ("AC-4", DB_C): 0.5,
        ("AC-4", DB_I): 0.5,
        ("AC-4", UI_C): 0.5,
        ("AC-4", UI_I): 0.2,
        ("AC-6", DB_C): 0.8,
        ("AC-6", UI_C): 0.5,
        ("AC-6", UI_I): 0.2,
    }
)


def firebird_family() -> Family:
    term = Comp(Atom("SI-10"), opt(["AC-3", "AC-4", "AC-6"]))
    return expand(term, [Requirement(Atom("AC-3"), Atom("AC-6"))])


def combo(*atoms: str) -> Combination:
    return Combination(atoms)


# ── scale and input validation ──────────────────────────────────────


class TestTypes:
    def test_default_scale_values(self):
        assert DEFAULT_SCALE.labels == {
            "none": 0.0,
            "low": 0.2,
            "medium": 0.5,
            "high": 0.8,
            "very_high": 0.9,
        }

    def test_scale_rejects_out_of_range(self):
        with pytest.raises(ValuationError, match="outside"):
            EffScale({"huge": 1.2})

    def test_unknown_scale_label(self):
        with pytest.raises(ValuationError, match="unknown scale label"):
            DEFAULT_SCALE.value_of("extreme")

    def test_payoff_rejects_out_of_range(self):
        with pytest.raises(ValuationError, match="outside"):
            AtomicPayoff({("a", DB_C): 1.01})

    def test_negative_cost_rejected(self):
        with pytest.raises(ValuationError, match="negative"):
            CostTable({"a": -3})

    def test_negative_budget_rejected(self):
        with pytest.raises(ValuationError):
            Budget(-1)

    def test_missing_payoff_reads_as_zero(self):
        assert FIREBIRD_PAYOFF.get("AC-3", DB_C) == 0.0
        assert FIREBIRD_PAYOFF.get("nonexistent", DB_C) == 0.0


# ── cost and budget rule ────────────────────────────────────────────


class TestCost:
    def test_empty_combination_is_free(self):
        assert combination_cost(combo(), FIREBIRD_COSTS) == 0

    def test_firebird_combo2(self):
        assert combination_cost(combo("SI-10", "AC-4"), FIREBIRD_COSTS) == 9

    def test_firebird_combo6(self):
        assert combination_cost(combo("SI-10", "AC-3", "AC-4", "AC-6"), FIREBIRD_COSTS) == 18

    def test_unknown_atom_names_the_control(self):
        with pytest.raises(ValuationError, match="XY-9"):
            combination_cost(combo("XY-9"), FIREBIRD_COSTS)

    def test_additive_over_disjoint_parts(self):
        p, q = combo("SI-10", "AC-3"), combo("AC-4", "AC-6")
        assert combination_cost(p.union(q), FIREBIRD_COSTS) == pytest.approx(
            combination_cost(p, FIREBIRD_COSTS) + combination_cost(q, FIREBIRD_COSTS)
        )


class TestBudgetRule:
    def test_combo6_exceeds_budget_15(self):
        assert not is_valid(combo("SI-10", "AC-3", "AC-4", "AC-6"), FIREBIRD_COSTS, Budget(15))

    def test_combo4_fits_budget_15(self):
        assert is_valid(combo("SI-10", "AC-3", "AC-6"), FIREBIRD_COSTS, Budget(15))

    def test_boundary_budget_is_included(self):
        p = combo("SI-10", "AC-3", "AC-4", "AC-6")
        assert is_valid(p, FIREBIRD_COSTS, Budget(combination_cost(p, FIREBIRD_COSTS)))

    def test_filter_valid_drops_only_combo6(self):
        family = firebird_family()
        kept = filter_valid(family, FIREBIRD_COSTS, Budget(15))
        assert len(kept) == 5
        assert combo("SI-10", "AC-3", "AC-4", "AC-6") not in kept

    def test_filter_valid_keeps_everything_under_maximal_budget(self):
        family = firebird_family()
        total = sum(FIREBIRD_COSTS.entries.values())
        assert filter_valid(family, FIREBIRD_COSTS, Budget(total)) == family

    @given(
        st.sets(st.sampled_from(["SI-10", "AC-3", "AC-4", "AC-6"]), max_size=4),
        st.floats(min_value=0, max_value=20),
    )
    @settings(max_examples=100)
    def test_matches_per_member_check(self, atoms, budget_value):
        family = Family(
            Combination(s)
            for r in range(len(atoms) + 1)
            for s in itertools.combinations(sorted(atoms), r)
        )
        budget = Budget(budget_value)
        kept = filter_valid(family, FIREBIRD_COSTS, budget)
        expected = {
            p for p in family if combination_cost(p, FIREBIRD_COSTS) <= budget_value
        }
        assert set(kept.combinations) == expected

    def test_budget_nesting(self):
        family = firebird_family()
        lo = filter_valid(family, FIREBIRD_COSTS, Budget(9))
        hi = filter_valid(family, FIREBIRD_COSTS, Budget(14))
        assert lo.combinations <= hi.combinations


# ── noisy-or effectiveness ──────────────────────────────────────────


def effectiveness_oracle(p: Combination, cell: Cell, payoffs: AtomicPayoff) -> float:
    # Same definition, different arithmetic path: fold right-to-left with
    # the a + b - a*b form instead of multiplying survival terms.
    acc = 0.0
    for control in reversed(p.sorted_atoms):
        e = payoffs.get(control, cell)
        acc = e + acc - e * acc
    return acc


class TestEffectiveness:
    def test_empty_combination_protects_nothing(self):
        assert combination_effectiveness(combo(), DB_C, FIREBIRD_PAYOFF) == 0.0

    def test_combo2_database_integrity(self):
        val = combination_effectiveness(combo("SI-10", "AC-4"), DB_I, FIREBIRD_PAYOFF)
        assert val == pytest.approx(0.95, abs=TOL)

    def test_combo4_interface_integrity(self):
        val = combination_effectiveness(
            combo("SI-10", "AC-3", "AC-6"), UI_I, FIREBIRD_PAYOFF
        )
        assert val == pytest.approx(0.968, abs=TOL)

    def test_all_zero_column_stays_zero(self):
        for p in firebird_family():
            assert combination_effectiveness(p, DB_A, FIREBIRD_PAYOFF) == 0.0

    @given(
        st.frozensets(st.sampled_from("abcdef"), max_size=6),
        st.dictionaries(
            st.sampled_from("abcdef"), st.floats(min_value=0, max_value=1), max_size=6
        ),
    )
    @settings(max_examples=200)
    def test_fold_order_does_not_matter(self, atoms, values):
        cell = Cell("x", "o")
        payoffs = AtomicPayoff({(a, cell): v for a, v in values.items()})
        p = Combination(atoms)
        forward = combination_effectiveness(p, cell, payoffs)
        backward = effectiveness_oracle(p, cell, payoffs)
        assert forward == pytest.approx(backward, abs=1e-12)
        assert 0.0 <= forward <= 1.0

    @given(
        st.frozensets(st.sampled_from("abcdef"), max_size=5),
        st.frozensets(st.sampled_from("abcdef"), max_size=6),
        st.dictionaries(
            st.sampled_from("abcdef"), st.floats(min_value=0, max_value=1), max_size=6
        ),
    )
    @settings(max_examples=200)
    def test_monotone_under_inclusion(self, small, extra, values):
        cell = Cell("x", "o")
        payoffs = AtomicPayoff({(a, cell): v for a, v in values.items()})
        p, q = Combination(small), Combination(small | extra)
        assert combination_effectiveness(p, cell, payoffs) <= combination_effectiveness(
            q, cell, payoffs
        ) + 1e-12


# ── game matrix ─────────────────────────────────────────────────────

# Effectiveness of the five budget-valid combinations against each cell,
# exact products of the atomic values above.
FIREBIRD_MATRIX_EXPECTED = {
    "Combo 1": [0.5, 0.9, 0.0, 0.5, 0.8, 0.0],
    "Combo 2": [0.75, 0.95, 0.0, 0.75, 0.84, 0.0],
    "Combo 3": [0.9, 0.9, 0.0, 0.75, 0.84, 0.0],
    "Combo 4": [0.9, 0.9, 0.0, 0.875, 0.968, 0.0],
    "Combo 5": [0.95, 0.95, 0.0, 0.875, 0.872, 0.0],
}


def build_firebird_matrix(budget: float = 15):
    family = firebird_family()
    ordered = family.in_order()
    labels = [f"Combo {i + 1}" for i in range(len(ordered))]
    valid = [
        (label, p)
        for label, p in zip(labels, ordered)
        if is_valid(p, FIREBIRD_COSTS, Budget(budget))
    ]
    return build_game_matrix(
        Family(p for _, p in valid),
        FIREBIRD_CELLS,
        FIREBIRD_PAYOFF,
        row_order=[p for _, p in valid],
        row_labels=[label for label, _ in valid],
    )


class TestGameMatrix:
    def test_firebird_matrix_values(self):
        gm = build_firebird_matrix()
        assert gm.row_labels == tuple(FIREBIRD_MATRIX_EXPECTED)
        expected = np.array([FIREBIRD_MATRIX_EXPECTED[label] for label in gm.row_labels])
        assert np.allclose(gm.payoff, expected, atol=TOL, rtol=0)

    def test_single_empty_combination_row_is_zero(self):
        gm = build_game_matrix(Family([combo()]), FIREBIRD_CELLS, FIREBIRD_PAYOFF)
        assert np.all(gm.payoff == 0.0)
        assert gm.row_labels == ("Combo 1",)

    def test_empty_family_rejected(self):
        with pytest.raises(ValuationError, match="no strategies"):
            build_game_matrix(Family(), FIREBIRD_CELLS, FIREBIRD_PAYOFF)

    def test_no_cells_rejected(self):
        with pytest.raises(ValuationError, match="no cells"):
            build_game_matrix(Family([combo()]), (), FIREBIRD_PAYOFF)

    def test_entries_match_both_fold_orders(self):
        gm = build_firebird_matrix()
        for i, p in enumerate(gm.rows):
            for j, cell in enumerate(gm.columns):
                assert gm.payoff[i, j] == pytest.approx(
                    combination_effectiveness(p, cell, FIREBIRD_PAYOFF), abs=TOL
                )
                assert gm.payoff[i, j] == pytest.approx(
                    effectiveness_oracle(p, cell, FIREBIRD_PAYOFF), abs=TOL
                )

    def test_payoff_array_is_read_only(self):
        gm = build_firebird_matrix()
        with pytest.raises(ValueError):
            gm.payoff[0, 0] = 0.3

    def test_lookup_helpers(self):
        gm = build_firebird_matrix()
        assert gm.value(combo("SI-10", "AC-4"), DB_I) == pytest.approx(0.95, abs=TOL)
        with pytest.raises(ValuationError, match="not a matrix row"):
            gm.row_index(combo("AC-3"))
        with pytest.raises(ValuationError, match="not a matrix column"):
            gm.column_index(Cell("mainframe", "C"))
