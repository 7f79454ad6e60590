"""Security control algebra: terms, normalization, and dependency filtering.

Control families are described by terms of a commutative idempotent
semiring.  ``+`` (:class:`Choice`) picks between alternatives, ``.``
(:class:`Comp`) composes controls that are installed together, ``1`` is the
empty combination and ``0`` the non-implementable one.  Normalizing a term
yields a :class:`Family`: the finite set of concrete control
:class:`Combination` values the term denotes.  Composition is interpreted
over *sets* of controls, so composing a control with itself is the same as
installing it once.

Dependencies between controls ("AC-3 requires AC-6") are expressed as
:class:`Requirement` values and applied to a normalized family, dropping
every combination that provides the antecedent without the consequent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

__all__ = [
    "AlgebraError",
    "ExpansionLimitError",
    "Term",
    "Zero",
    "One",
    "Atom",
    "Choice",
    "Comp",
    "ZERO",
    "ONE",
    "atom",
    "opt",
    "Combination",
    "Family",
    "Requirement",
    "normalize",
    "refines",
    "apply_requirement",
    "expand",
    "choice_count",
    "contains_zero",
    "term_atoms",
    "DEFAULT_CHOICE_LIMIT",
]

# Expansion is exponential in the number of choices; refuse terms beyond
# this many Choice nodes unless the caller raises the limit explicitly.
DEFAULT_CHOICE_LIMIT = 24

CONTROL_ID_CHARS = frozenset(
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_"
)


class AlgebraError(ValueError):
    """A control-algebra operation was applied outside its contract."""


class ExpansionLimitError(AlgebraError):
    """The term has more choice points than the configured expansion limit."""


def _check_control_id(control: str) -> str:
    if not control or not set(control) <= CONTROL_ID_CHARS:
        raise AlgebraError(
            f"invalid control id {control!r}: expected a non-empty string of "
            "letters, digits, '-' and '_'"
        )
    return control


class Term:
    """Base class for control-algebra terms.

    ``t1 + t2`` builds a choice and ``t1 * t2`` a composition, mirroring the
    textual operators of the model DSL (``+`` and ``.``).
    """

    __slots__ = ()

    def __add__(self, other: "Term") -> "Term":
        return Choice(self, other)

    def __mul__(self, other: "Term") -> "Term":
        return Comp(self, other)


@dataclass(frozen=True, slots=True)
class Zero(Term):
    """The non-implementable family: no combination realizes it."""


@dataclass(frozen=True, slots=True)
class One(Term):
    """The empty combination: implementable with no controls at all."""


@dataclass(frozen=True, slots=True)
class Atom(Term):
    control: str

    def __post_init__(self) -> None:
        _check_control_id(self.control)


@dataclass(frozen=True, slots=True)
class Choice(Term):
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class Comp(Term):
    left: Term
    right: Term


ZERO = Zero()
ONE = One()


def atom(control: str) -> Atom:
    return Atom(control)


def opt(controls: Iterable[str]) -> Term:
    """Optional controls: a composition of ``(control + 1)`` choices.

    ``opt([])`` is ``1``; each listed control may independently be present
    or absent in the resulting combinations.
    """
    seen: set[str] = set()
    term: Term = ONE
    first = True
    for control in controls:
        if control in seen:
            raise AlgebraError(f"duplicate control {control!r} in optional list")
        seen.add(control)
        clause = Choice(Atom(control), ONE)
        term = clause if first else Comp(term, clause)
        first = False
    return term


@dataclass(frozen=True)
class Combination:
    """A concrete set of atomic controls; the empty set is the combination 1."""

    atoms: frozenset[str]

    def __init__(self, atoms: Iterable[str] = ()) -> None:
        object.__setattr__(self, "atoms", frozenset(atoms))
        for control in self.atoms:
            _check_control_id(control)

    @property
    def sorted_atoms(self) -> tuple[str, ...]:
        return tuple(sorted(self.atoms))

    @property
    def sort_key(self) -> tuple[int, tuple[str, ...]]:
        # Smaller combinations first, then alphabetical: keeps generated
        # combination listings stable across runs.
        return (len(self.atoms), self.sorted_atoms)

    def issubset(self, other: "Combination") -> bool:
        return self.atoms <= other.atoms

    def union(self, other: "Combination") -> "Combination":
        return Combination(self.atoms | other.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def __contains__(self, control: str) -> bool:
        return control in self.atoms

    def __repr__(self) -> str:
        return f"Combination({{{', '.join(self.sorted_atoms)}}})"


@dataclass(frozen=True)
class Family:
    """A deduplicated set of combinations; the empty family is the element 0."""

    combinations: frozenset[Combination]

    def __init__(self, combinations: Iterable[Combination] = ()) -> None:
        object.__setattr__(self, "combinations", frozenset(combinations))

    def in_order(self) -> list[Combination]:
        """Members sorted by size then alphabetical atom tuple."""
        return sorted(self.combinations, key=lambda c: c.sort_key)

    @property
    def is_empty(self) -> bool:
        return not self.combinations

    def __iter__(self) -> Iterator[Combination]:
        return iter(self.in_order())

    def __len__(self) -> int:
        return len(self.combinations)

    def __contains__(self, combination: Combination) -> bool:
        return combination in self.combinations

    def __repr__(self) -> str:
        members = ", ".join("{%s}" % " ".join(c.sorted_atoms) for c in self.in_order())
        return f"Family([{members}])"


def contains_zero(term: Term) -> bool:
    if isinstance(term, Zero):
        return True
    if isinstance(term, (Choice, Comp)):
        return contains_zero(term.left) or contains_zero(term.right)
    return False


def term_atoms(term: Term) -> frozenset[str]:
    """All control ids mentioned anywhere in the term."""
    if isinstance(term, Atom):
        return frozenset((term.control,))
    if isinstance(term, (Choice, Comp)):
        return term_atoms(term.left) | term_atoms(term.right)
    return frozenset()


def choice_count(term: Term) -> int:
    """Number of Choice nodes in the term; bounds the expansion blow-up."""
    if isinstance(term, Choice):
        return 1 + choice_count(term.left) + choice_count(term.right)
    if isinstance(term, Comp):
        return choice_count(term.left) + choice_count(term.right)
    return 0


@dataclass(frozen=True)
class Requirement:
    """Dependency constraint: any combination providing ``antecedent`` must
    also provide ``consequent``."""

    antecedent: Term
    consequent: Term

    def __post_init__(self) -> None:
        for side, term in (("antecedent", self.antecedent), ("consequent", self.consequent)):
            if contains_zero(term):
                raise AlgebraError(
                    f"requirement {side} contains the element 0 and can never be provided"
                )


def normalize(term: Term) -> Family:
    """Canonical family of a term.

    Choices become set union, compositions the pairwise union of member
    combinations, and duplicates collapse (idempotent choice).
    """
    if isinstance(term, Zero):
        return Family()
    if isinstance(term, One):
        return Family((Combination(),))
    if isinstance(term, Atom):
        return Family((Combination((term.control,)),))
    if isinstance(term, Choice):
        left = normalize(term.left)
        right = normalize(term.right)
        return Family(left.combinations | right.combinations)
    if isinstance(term, Comp):
        left = normalize(term.left)
        right = normalize(term.right)
        return Family(
            p.union(q) for p in left.combinations for q in right.combinations
        )
    raise AlgebraError(f"not a term: {term!r}")


def refines(x: Combination, c: Term) -> bool:
    """True when ``x`` provides at least one combination of ``c`` as a subset."""
    family = normalize(c)
    if family.is_empty:
        raise AlgebraError(
            "refinement against a non-implementable family (term normalizes to 0)"
        )
    return _refines_family(x, family)


def _refines_family(x: Combination, family: Family) -> bool:
    return any(q.atoms <= x.atoms for q in family.combinations)


def apply_requirement(family: Family, requirement: Requirement) -> Family:
    """Keep the members for which providing the antecedent implies providing
    the consequent; the result is always a subset of ``family``."""
    antecedent = normalize(requirement.antecedent)
    consequent = normalize(requirement.consequent)
    if antecedent.is_empty or consequent.is_empty:
        raise AlgebraError("requirement terms must normalize to non-empty families")
    return Family(
        x
        for x in family.combinations
        if not _refines_family(x, antecedent) or _refines_family(x, consequent)
    )


def expand(
    term: Term,
    requirements: Iterable[Requirement] = (),
    *,
    max_choices: int = DEFAULT_CHOICE_LIMIT,
) -> Family:
    """Normalize a term and apply every requirement in sequence.

    An empty result signals an over-constrained specification, not an
    error.  Terms with more than ``max_choices`` choice points are refused
    because the family size is exponential in that count.
    """
    n = choice_count(term)
    if n > max_choices:
        raise ExpansionLimitError(
            f"term has {n} choice points, above the expansion limit of "
            f"{max_choices}; raise max_choices to force expansion"
        )
    family = normalize(term)
    for requirement in requirements:
        family = apply_requirement(family, requirement)
    return family
