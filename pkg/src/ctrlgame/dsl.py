"""Textual model language: tokenizer, recursive-descent parser, printer.

A model source declares, in order: the model header, an optional rating
scale, assets, objectives, the control catalog, the family term, any
requirements, the budget, and the attacker profiles.  ``#`` starts a line
comment and whitespace is free-form.  Example::

    model "Firebird"
    scale { none = 0 low = 0.2 medium = 0.5 high = 0.8 very_high = 0.9 }
    assets { database, user_interface }
    objectives { C, I, A }
    control SI-10 "Input Validation" cost 5 {
      database: C = medium, I = very_high
      user_interface: C = medium, I = high
    }
    family = SI-10 . opt[AC-3, AC-4, AC-6]
    require AC-3 -> AC-6
    budget 15
    profile "scenario1" { objective { database.C, user_interface.C } }

In family terms ``+`` is choice, ``.`` is composition, ``1`` the empty
combination, ``0`` the non-implementable one, and ``opt[...]`` marks
optional controls.  Effectiveness entries take either a scale label or a
numeric literal.

Parsing never half-succeeds: :func:`parse_model` returns a validated
:class:`~ctrlgame.model.ModelSpec` or raises
:class:`~ctrlgame.model.ModelError` carrying located diagnostics.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .algebra import (
    ONE,
    ZERO,
    AlgebraError,
    Atom,
    Choice,
    Comp,
    One,
    Requirement,
    Term,
    Zero,
    opt,
)
from .game import AttackerObjective, AttackerProfile, GameError
from .model import ControlDef, Diagnostic, ModelError, ModelSpec, validate
from .valuation import DEFAULT_SCALE, Cell, EffScale

__all__ = ["parse_model", "print_model", "parse_term", "print_term", "format_number"]

KEYWORDS = frozenset(
    {
        "model",
        "scale",
        "assets",
        "objectives",
        "control",
        "cost",
        "family",
        "require",
        "budget",
        "profile",
        "objective",
        "opt",
    }
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<arrow>->)
  | (?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_](?:[A-Za-z0-9_]|-(?!>))*)
  | (?P<string>"(?:\\.|[^"\\\n])*")
  | (?P<punct>[{}\[\](),=:.+])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # IDENT | NUMBER | STRING | PUNCT | EOF
    text: str
    line: int
    col: int

    @property
    def location(self) -> str:
        return f"{self.line}:{self.col}"


class _ParseAbort(Exception):
    """Internal signal; converted to ModelError by parse_model."""


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise _ParseAbort(
                Diagnostic(
                    "error",
                    "syntax",
                    f"unexpected character {source[pos]!r}",
                    f"{line}:{col}",
                )
            )
        text = m.group(0)
        kind = m.lastgroup
        if kind == "ws":
            pass
        elif kind == "arrow":
            tokens.append(_Token("PUNCT", "->", line, col))
        elif kind == "number":
            tokens.append(_Token("NUMBER", text, line, col))
        elif kind == "ident":
            tokens.append(_Token("IDENT", text, line, col))
        elif kind == "string":
            tokens.append(_Token("STRING", text, line, col))
        else:
            tokens.append(_Token("PUNCT", text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    tokens.append(_Token("EOF", "", line, col))
    return tokens


def _unquote(raw: str) -> str:
    return raw[1:-1].replace('\\"', '"').replace("\\\\", "\\")


def _quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.diagnostics: list[Diagnostic] = []

    # ── cursor helpers ────────────────────────────────────────────

    @property
    def here(self) -> _Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 0) -> _Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        token = self.here
        if token.kind != "EOF":
            self.pos += 1
        return token

    def fail(self, message: str, token: _Token | None = None, code: str = "syntax"):
        token = token or self.here
        found = f"'{token.text}'" if token.kind != "EOF" else "end of input"
        raise _ParseAbort(
            Diagnostic("error", code, f"{message}, found {found}", token.location)
        )

    def error(self, code: str, message: str, token: _Token) -> None:
        self.diagnostics.append(Diagnostic("error", code, message, token.location))

    def at_keyword(self, word: str) -> bool:
        return self.here.kind == "IDENT" and self.here.text == word

    def expect_keyword(self, word: str) -> _Token:
        if not self.at_keyword(word):
            self.fail(f"expected keyword '{word}'")
        return self.advance()

    def expect_punct(self, text: str) -> _Token:
        if self.here.kind != "PUNCT" or self.here.text != text:
            self.fail(f"expected '{text}'")
        return self.advance()

    def expect_ident(self, what: str) -> _Token:
        if self.here.kind != "IDENT":
            self.fail(f"expected {what}")
        if self.here.text in KEYWORDS:
            self.fail(f"expected {what}; {self.here.text!r} is a reserved word")
        return self.advance()

    def expect_string(self, what: str) -> tuple[str, _Token]:
        if self.here.kind != "STRING":
            self.fail(f"expected quoted {what}")
        token = self.advance()
        return _unquote(token.text), token

    def expect_number(self, what: str) -> tuple[float, _Token]:
        if self.here.kind != "NUMBER":
            self.fail(f"expected {what} (a number)")
        token = self.advance()
        return float(token.text), token

    # ── grammar rules ─────────────────────────────────────────────

    def parse_model(self) -> ModelSpec:
        if self.here.kind == "EOF" or not self.at_keyword("model"):
            raise _ParseAbort(
                Diagnostic(
                    "error",
                    "missing-model-header",
                    'missing model header: a model starts with model "<name>"',
                    self.here.location,
                )
            )
        self.advance()
        name, _ = self.expect_string("model name")

        scale = self.parse_scale() if self.at_keyword("scale") else DEFAULT_SCALE
        assets = self.parse_id_block("assets")
        objectives = self.parse_id_block("objectives")

        controls = []
        while self.at_keyword("control"):
            controls.append(self.parse_control(scale))
        if not controls:
            self.fail("expected at least one 'control' declaration")

        self.expect_keyword("family")
        self.expect_punct("=")
        family = self.parse_term_expr()

        requirements = []
        while self.at_keyword("require"):
            requirements.append(self.parse_requirement())

        self.expect_keyword("budget")
        budget, _ = self.expect_number("budget")

        profiles = []
        while self.at_keyword("profile"):
            profiles.append(self.parse_profile())
        if not profiles:
            self.fail("expected at least one 'profile'")
        if self.here.kind != "EOF":
            self.fail("expected end of model")

        return ModelSpec(
            name=name,
            scale=scale,
            assets=tuple(assets),
            objectives=tuple(objectives),
            controls=tuple(controls),
            family=family,
            requirements=tuple(r for r in requirements if r is not None),
            budget=budget,
            profiles=tuple(profiles),
        )

    def parse_scale(self) -> EffScale:
        self.expect_keyword("scale")
        self.expect_punct("{")
        labels: dict[str, float] = {}
        while self.here.kind == "IDENT":
            label_tok = self.expect_ident("scale label")
            self.expect_punct("=")
            value, value_tok = self.expect_number("scale value")
            if label_tok.text in labels:
                self.error(
                    "duplicate-scale-label",
                    f"scale label {label_tok.text!r} declared twice",
                    label_tok,
                )
            if not 0.0 <= value <= 1.0:
                self.error(
                    "effectiveness-range",
                    f"scale value {value:g} outside [0, 1]",
                    value_tok,
                )
                value = 0.0
            labels[label_tok.text] = value
        if not labels:
            self.fail("expected at least one label = value entry in scale")
        self.expect_punct("}")
        return EffScale(labels)

    def parse_id_block(self, keyword: str) -> list[str]:
        self.expect_keyword(keyword)
        self.expect_punct("{")
        ids = [self.expect_ident(f"{keyword[:-1]} id").text]
        while self.here.text == ",":
            self.advance()
            ids.append(self.expect_ident(f"{keyword[:-1]} id").text)
        self.expect_punct("}")
        return ids

    def parse_control(self, scale: EffScale) -> ControlDef:
        self.expect_keyword("control")
        ident = self.expect_ident("control id")
        title, _ = self.expect_string("control title")
        self.expect_keyword("cost")
        cost, _ = self.expect_number("cost")
        self.expect_punct("{")
        payoffs: dict[Cell, float] = {}
        while self.here.kind == "IDENT":
            asset_tok = self.expect_ident("asset id")
            self.expect_punct(":")
            self.parse_assign(asset_tok.text, payoffs, scale)
            while self.here.text == ",":
                self.advance()
                self.parse_assign(asset_tok.text, payoffs, scale)
        self.expect_punct("}")
        return ControlDef(id=ident.text, title=title, cost=cost, payoffs=payoffs)

    def parse_assign(
        self, asset: str, payoffs: dict[Cell, float], scale: EffScale
    ) -> None:
        objective_tok = self.expect_ident("objective id")
        self.expect_punct("=")
        if self.here.kind == "NUMBER":
            value = float(self.advance().text)
        elif self.here.kind == "IDENT":
            label_tok = self.advance()
            if label_tok.text in scale:
                value = scale.value_of(label_tok.text)
            else:
                self.error(
                    "unknown-scale-label",
                    f"unknown scale label {label_tok.text!r}",
                    label_tok,
                )
                value = 0.0
        else:
            self.fail("expected a scale label or number")
        cell = Cell(asset, objective_tok.text)
        if cell in payoffs:
            self.error(
                "duplicate-payoff",
                f"effectiveness for {cell} assigned twice",
                objective_tok,
            )
        payoffs[cell] = value

    # term grammar: choice < composition < atoms

    def parse_term_expr(self) -> Term:
        term = self.parse_term_factor()
        while self.here.text == "+":
            self.advance()
            term = Choice(term, self.parse_term_factor())
        return term

    def parse_term_factor(self) -> Term:
        term = self.parse_term_atom()
        while self.here.text == ".":
            self.advance()
            term = Comp(term, self.parse_term_atom())
        return term

    def parse_term_atom(self) -> Term:
        token = self.here
        if token.kind == "NUMBER":
            if token.text == "0":
                self.advance()
                return ZERO
            if token.text == "1":
                self.advance()
                return ONE
            self.fail("expected a control id, 0, 1, opt[...] or a parenthesized term")
        if token.text == "(":
            self.advance()
            term = self.parse_term_expr()
            self.expect_punct(")")
            return term
        if self.at_keyword("opt"):
            self.advance()
            self.expect_punct("[")
            ids = [self.expect_ident("control id").text]
            while self.here.text == ",":
                self.advance()
                ids.append(self.expect_ident("control id").text)
            self.expect_punct("]")
            try:
                return opt(ids)
            except AlgebraError as exc:
                self.error("duplicate-optional", str(exc), token)
                return opt(dict.fromkeys(ids))
        if token.kind == "IDENT" and token.text not in KEYWORDS:
            self.advance()
            return Atom(token.text)
        self.fail("expected a control id, 0, 1, opt[...] or a parenthesized term")

    def parse_requirement(self) -> Requirement | None:
        start = self.expect_keyword("require")
        antecedent = self.parse_term_atom()
        self.expect_punct("->")
        consequent = self.parse_term_atom()
        try:
            return Requirement(antecedent, consequent)
        except AlgebraError as exc:
            self.error("zero-in-requirement", str(exc), start)
            return None

    def parse_profile(self) -> AttackerProfile:
        self.expect_keyword("profile")
        name, name_tok = self.expect_string("profile name")
        self.expect_punct("{")
        stages = []
        while self.at_keyword("objective"):
            self.advance()
            self.expect_punct("{")
            cells = [self.parse_cell()]
            while self.here.text == ",":
                self.advance()
                cells.append(self.parse_cell())
            self.expect_punct("}")
            stages.append(AttackerObjective(cells))
        if not stages:
            self.fail("expected at least one 'objective { ... }' stage")
        self.expect_punct("}")
        if not name:
            self.error("invalid-profile", "profile name must be non-empty", name_tok)
        return AttackerProfile(name or "unnamed", stages)

    def parse_cell(self) -> Cell:
        asset = self.expect_ident("asset id")
        self.expect_punct(".")
        objective = self.expect_ident("objective id")
        return Cell(asset.text, objective.text)


def parse_model(source: str) -> ModelSpec:
    """Parse and validate a model source.

    Raises :class:`ModelError` with located diagnostics on any syntax or
    validation error; warnings do not block (retrieve them via
    :func:`ctrlgame.model.validate`).
    """
    try:
        parser = _Parser(_tokenize(source))
        spec = parser.parse_model()
    except _ParseAbort as abort:
        raise ModelError([abort.args[0]]) from None
    if parser.diagnostics:
        raise ModelError(parser.diagnostics)
    errors = [d for d in validate(spec) if d.severity == "error"]
    if errors:
        raise ModelError(errors)
    return spec


def parse_term(source: str, *, what: str = "term") -> Term:
    """Parse a standalone family term, e.g. ``"SI-10 . opt[AC-3, AC-6]"``."""
    try:
        parser = _Parser(_tokenize(source))
        term = parser.parse_term_expr()
        if parser.here.kind != "EOF":
            parser.fail(f"expected end of {what}")
    except _ParseAbort as abort:
        raise ModelError([abort.args[0]]) from None
    return term


# ── printing ────────────────────────────────────────────────────────


def format_number(value: float) -> str:
    """Shortest exact decimal form; integral values drop the trailing .0."""
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def print_term(term: Term) -> str:
    """Render a term; re-parsing yields the identical tree."""

    def render(t: Term, level: int) -> str:
        # level 1 accepts choices, 2 compositions, 3 only atoms
        if isinstance(t, Choice):
            s = f"{render(t.left, 1)} + {render(t.right, 2)}"
            return f"({s})" if level > 1 else s
        if isinstance(t, Comp):
            s = f"{render(t.left, 2)} . {render(t.right, 3)}"
            return f"({s})" if level > 2 else s
        if isinstance(t, Atom):
            return t.control
        return "1" if t == ONE else "0"

    return render(term, 1)


def _label_for(value: float, scale: EffScale) -> str:
    for label, mapped in scale.labels.items():
        if mapped == value:
            return label
    return format_number(value)


def print_model(spec: ModelSpec) -> str:
    """Render a model back to source; parsing the result yields an equal spec.

    Output is canonical: payoff entries follow declaration order and values
    matching a scale label print as that label.
    """
    out: list[str] = [f"model {_quote(spec.name)}", ""]

    scale_entries = " ".join(
        f"{label} = {format_number(value)}" for label, value in spec.scale.labels.items()
    )
    out.append(f"scale {{ {scale_entries} }}")
    out.append("")
    out.append(f"assets {{ {', '.join(spec.assets)} }}")
    out.append(f"objectives {{ {', '.join(spec.objectives)} }}")
    out.append("")

    for control in spec.controls:
        header = (
            f"control {control.id} {_quote(control.title)} "
            f"cost {format_number(control.cost)} {{"
        )
        out.append(header)
        for asset in spec.assets:
            entries = [
                f"{objective} = {_label_for(control.payoffs[Cell(asset, objective)], spec.scale)}"
                for objective in spec.objectives
                if Cell(asset, objective) in control.payoffs
            ]
            if entries:
                out.append(f"  {asset}: {', '.join(entries)}")
        out.append("}")
    out.append("")

    out.append(f"family = {print_term(spec.family)}")
    for req in spec.requirements:
        out.append(
            f"require {_print_term_atom(req.antecedent)} -> "
            f"{_print_term_atom(req.consequent)}"
        )
    out.append("")
    out.append(f"budget {format_number(spec.budget)}")
    out.append("")

    cell_order = {cell: i for i, cell in enumerate(spec.cells())}
    for profile in spec.profiles:
        out.append(f"profile {_quote(profile.name)} {{")
        for stage in profile.stages:
            cells = sorted(stage.cells, key=lambda c: (cell_order.get(c, len(cell_order)), str(c)))
            out.append(f"  objective {{ {', '.join(str(c) for c in cells)} }}")
        out.append("}")
    out.append("")
    return "\n".join(out)


def _print_term_atom(term: Term) -> str:
    """Render a term in a position where the grammar wants a single atom."""
    rendered = print_term(term)
    if isinstance(term, (Atom, Zero, One)):
        return rendered
    return f"({rendered})"
