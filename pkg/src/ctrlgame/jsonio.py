"""JSON form of a model: canonical emission and strict decoding.

The document mirrors :class:`~ctrlgame.model.ModelSpec` one to one; family
and requirement terms appear as DSL term strings, and stage cells as
``"asset.objective"`` strings.  Decoding is strict: unknown keys, missing
keys, and type mismatches each produce a :class:`Diagnostic` whose
location is the JSON path of the offending value.
"""

from __future__ import annotations

from typing import Any

from .algebra import ONE, AlgebraError, Requirement
from .game import AttackerObjective, AttackerProfile
from .model import ControlDef, Diagnostic, ModelError, ModelSpec, validate
from .valuation import DEFAULT_SCALE, Cell, EffScale

__all__ = ["SCHEMA_VERSION", "to_json", "from_json"]

SCHEMA_VERSION = 1

_TOP_LEVEL_KEYS = {
    "schema_version",
    "name",
    "scale",
    "assets",
    "objectives",
    "controls",
    "family",
    "requirements",
    "budget",
    "profiles",
}


def to_json(spec: ModelSpec) -> dict[str, Any]:
    """Canonical JSON-serializable document for a model."""
    from .dsl import print_term  # late import: dsl and jsonio are siblings

    controls = []
    for control in spec.controls:
        payoffs: dict[str, dict[str, float]] = {}
        for asset in spec.assets:
            entries = {
                objective: control.payoffs[Cell(asset, objective)]
                for objective in spec.objectives
                if Cell(asset, objective) in control.payoffs
            }
            if entries:
                payoffs[asset] = {k: float(v) for k, v in entries.items()}
        controls.append(
            {
                "id": control.id,
                "title": control.title,
                "cost": float(control.cost),
                "payoffs": payoffs,
            }
        )

    cell_order = {cell: i for i, cell in enumerate(spec.cells())}
    profiles = []
    for profile in spec.profiles:
        stages = [
            [
                str(cell)
                for cell in sorted(
                    stage.cells, key=lambda c: (cell_order.get(c, len(cell_order)), str(c))
                )
            ]
            for stage in profile.stages
        ]
        profiles.append({"name": profile.name, "stages": stages})

    return {
        "schema_version": SCHEMA_VERSION,
        "name": spec.name,
        "scale": {label: float(v) for label, v in spec.scale.labels.items()},
        "assets": list(spec.assets),
        "objectives": list(spec.objectives),
        "controls": controls,
        "family": print_term(spec.family),
        "requirements": [
            {
                "antecedent": print_term(req.antecedent),
                "consequent": print_term(req.consequent),
            }
            for req in spec.requirements
        ],
        "budget": float(spec.budget),
        "profiles": profiles,
    }


class _Decoder:
    def __init__(self) -> None:
        self.diagnostics: list[Diagnostic] = []

    def error(self, code: str, message: str, path: str) -> None:
        self.diagnostics.append(Diagnostic("error", code, message, path))

    # ── typed readers ─────────────────────────────────────────────

    def str_at(self, obj: dict, key: str, path: str, default: str = "") -> str:
        value = obj.get(key)
        if not isinstance(value, str):
            kind = "missing-key" if key not in obj else "expected-string"
            self.error(kind, f"expected string for {key!r}", f"{path}.{key}")
            return default
        return value

    def number_at(self, obj: dict, key: str, path: str, default: float = 0.0) -> float:
        value = obj.get(key)
        if type(value) not in (int, float):
            kind = "missing-key" if key not in obj else "expected-number"
            self.error(kind, f"expected number for {key!r}", f"{path}.{key}")
            return default
        return float(value)

    def list_at(self, obj: dict, key: str, path: str) -> list:
        value = obj.get(key)
        if not isinstance(value, list):
            kind = "missing-key" if key not in obj else "expected-array"
            self.error(kind, f"expected array for {key!r}", f"{path}.{key}")
            return []
        return value

    def dict_at(self, obj: dict, key: str, path: str) -> dict:
        value = obj.get(key)
        if not isinstance(value, dict):
            kind = "missing-key" if key not in obj else "expected-object"
            self.error(kind, f"expected object for {key!r}", f"{path}.{key}")
            return {}
        return value

    def string_list(self, obj: dict, key: str, path: str) -> tuple[str, ...]:
        out = []
        for i, token in enumerate(self.list_at(obj, key, path)):
            if isinstance(token, str):
                out.append(token)
            else:
                self.error(
                    "expected-string", f"{key} entries are strings", f"{path}.{key}[{i}]"
                )
        return tuple(out)

    def term_at(self, obj: dict, key: str, path: str):
        from .dsl import parse_term

        source = self.str_at(obj, key, path)
        if not source:
            return ONE
        try:
            return parse_term(source)
        except ModelError as exc:
            for d in exc.diagnostics:
                self.error("invalid-term", f"cannot parse term {source!r}: {d.message}", f"{path}.{key}")
            return ONE

    def cell_at(self, raw: Any, path: str) -> Cell:
        if not isinstance(raw, str) or raw.count(".") != 1:
            self.error(
                "invalid-cell",
                f"expected a cell of the form \"asset.objective\", got {raw!r}",
                path,
            )
            return Cell("invalid", "invalid")
        asset, objective = raw.split(".")
        if not asset or not objective:
            self.error("invalid-cell", f"cell {raw!r} has an empty component", path)
            return Cell("invalid", "invalid")
        return Cell(asset, objective)

    # ── document ──────────────────────────────────────────────────

    def decode(self, doc: Any) -> ModelSpec | None:
        if not isinstance(doc, dict):
            self.error("expected-object", "the model document must be a JSON object", "$")
            return None
        for key in doc:
            if key not in _TOP_LEVEL_KEYS:
                self.error("unknown-key", f"unknown top-level key {key!r}", f"$.{key}")
        if "schema_version" in doc and doc["schema_version"] != SCHEMA_VERSION:
            self.error(
                "unsupported-schema-version",
                f"expected schema_version {SCHEMA_VERSION}, got {doc['schema_version']!r}",
                "$.schema_version",
            )

        name = self.str_at(doc, "name", "$")

        scale = DEFAULT_SCALE
        if "scale" in doc:
            raw_scale = self.dict_at(doc, "scale", "$")
            labels: dict[str, float] = {}
            for label, value in raw_scale.items():
                if type(value) not in (int, float):
                    self.error("expected-number", "scale values are numbers", f"$.scale.{label}")
                elif not 0.0 <= value <= 1.0:
                    self.error(
                        "effectiveness-range",
                        f"scale value {value} outside [0, 1]",
                        f"$.scale.{label}",
                    )
                else:
                    labels[label] = float(value)
            if not raw_scale:
                self.error("empty-scale", "scale must declare at least one label", "$.scale")
            if labels:
                scale = EffScale(labels)

        assets = self.string_list(doc, "assets", "$")
        objectives = self.string_list(doc, "objectives", "$")

        controls = []
        for i, raw in enumerate(self.list_at(doc, "controls", "$")):
            path = f"$.controls[{i}]"
            if not isinstance(raw, dict):
                self.error("expected-object", "each control is an object", path)
                continue
            for key in raw:
                if key not in {"id", "title", "cost", "payoffs"}:
                    self.error("unknown-key", f"unknown control key {key!r}", f"{path}.{key}")
            payoffs: dict[Cell, float] = {}
            raw_payoffs = raw.get("payoffs", {})
            if not isinstance(raw_payoffs, dict):
                self.error("expected-object", "payoffs is an object keyed by asset", f"{path}.payoffs")
                raw_payoffs = {}
            for asset, per_objective in raw_payoffs.items():
                if not isinstance(per_objective, dict):
                    self.error(
                        "expected-object",
                        "per-asset payoffs are objects keyed by objective",
                        f"{path}.payoffs.{asset}",
                    )
                    continue
                for objective, value in per_objective.items():
                    if type(value) not in (int, float):
                        self.error(
                            "expected-number",
                            "effectiveness values are numbers",
                            f"{path}.payoffs.{asset}.{objective}",
                        )
                        continue
                    payoffs[Cell(asset, objective)] = float(value)
            controls.append(
                ControlDef(
                    id=self.str_at(raw, "id", path),
                    title=self.str_at(raw, "title", path),
                    cost=self.number_at(raw, "cost", path),
                    payoffs=payoffs,
                )
            )

        family = self.term_at(doc, "family", "$")

        requirements = []
        raw_requirements = self.list_at(doc, "requirements", "$") if "requirements" in doc else []
        for i, raw in enumerate(raw_requirements):
            path = f"$.requirements[{i}]"
            if not isinstance(raw, dict):
                self.error("expected-object", "each requirement is an object", path)
                continue
            for key in raw:
                if key not in {"antecedent", "consequent"}:
                    self.error("unknown-key", f"unknown requirement key {key!r}", f"{path}.{key}")
            antecedent = self.term_at(raw, "antecedent", path)
            consequent = self.term_at(raw, "consequent", path)
            try:
                requirements.append(Requirement(antecedent, consequent))
            except AlgebraError as exc:
                self.error("zero-in-requirement", str(exc), path)

        budget = self.number_at(doc, "budget", "$")

        profiles = []
        for i, raw in enumerate(self.list_at(doc, "profiles", "$")):
            path = f"$.profiles[{i}]"
            if not isinstance(raw, dict):
                self.error("expected-object", "each profile is an object", path)
                continue
            for key in raw:
                if key not in {"name", "stages"}:
                    self.error("unknown-key", f"unknown profile key {key!r}", f"{path}.{key}")
            stages = []
            for k, raw_stage in enumerate(self.list_at(raw, "stages", path)):
                stage_path = f"{path}.stages[{k}]"
                if not isinstance(raw_stage, list) or not raw_stage:
                    self.error(
                        "invalid-stage", "each stage is a non-empty array of cells", stage_path
                    )
                    continue
                cells = [
                    self.cell_at(raw_cell, f"{stage_path}[{j}]")
                    for j, raw_cell in enumerate(raw_stage)
                ]
                stages.append(AttackerObjective(cells))
            pname = self.str_at(raw, "name", path)
            if stages:
                profiles.append(AttackerProfile(pname, stages))
            else:
                self.error("invalid-profile", "profile needs at least one stage", path)

        if self.diagnostics:
            return None
        return ModelSpec(
            name=name,
            scale=scale,
            assets=assets,
            objectives=objectives,
            controls=tuple(controls),
            family=family,
            requirements=tuple(requirements),
            budget=budget,
            profiles=tuple(profiles),
        )


def from_json(doc: Any) -> ModelSpec:
    """Decode and validate a model document.

    Raises :class:`ModelError` with JSON-path diagnostics on schema or
    validation errors.
    """
    decoder = _Decoder()
    spec = decoder.decode(doc)
    if decoder.diagnostics or spec is None:
        raise ModelError(
            decoder.diagnostics
            or [Diagnostic("error", "invalid-model", "cannot decode model", "$")]
        )
    errors = [d for d in validate(spec) if d.severity == "error"]
    if errors:
        raise ModelError(errors)
    return spec
