"""HTTP service: the JSON API behind the browser workbench.

One model per server instance.  ``PUT /api/model`` replaces it atomically
after validation (optionally persisting to disk), and every analysis
endpoint computes on an immutable snapshot taken at request start, so
concurrent readers never observe a half-swapped model.

Endpoints (all JSON, all carrying ``schema_version``):

=====================  ====================================================
``GET  /api/model``     current model document
``PUT  /api/model``     replace the model; 400 + diagnostics when invalid
``POST /api/expand``    body ``{budget?}``
``POST /api/matrix``    body ``{budget?}``
``POST /api/play``      body ``{profile, budget?}``; 409 when no strategies
``POST /api/sweep``     body ``{profile, budgets: [..]}``
``POST /api/sensitivity``  body ``{profile, delta, budget?}``
``POST /api/residual``  body ``{combination, threshold, budget?}``
``GET  /``              workbench static assets
=====================  ====================================================
"""

from __future__ import annotations

import json
import math
import threading
from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from . import __version__
from .dsl import parse_model
from .game import GameError, residual_risk_report
from .jsonio import SCHEMA_VERSION, from_json, to_json
from .model import (
    Diagnostic,
    ModelError,
    ModelSpec,
    NoStrategiesError,
    model_matrix,
    play_model,
    validate,
)
from .render import (
    expand_payload,
    matrix_payload,
    play_payload,
    residual_payload,
    sensitivity_payload,
    sweep_payload,
)
from .valuation import ValuationError
from .whatif import budget_sweep, sensitivity_scan

__all__ = ["create_app", "load_served_model"]

MODEL_FILENAME = "model.json"

_FALLBACK_PAGE = f"""<!doctype html>
<html><head><title>ctrlgame</title></head>
<body>
<h1>ctrlgame {__version__}</h1>
<p>The workbench UI bundle is not installed. The JSON API is live under
<code>/api/</code>: GET/PUT <code>/api/model</code>, POST
<code>/api/expand</code>, <code>/api/matrix</code>, <code>/api/play</code>,
<code>/api/sweep</code>, <code>/api/sensitivity</code>,
<code>/api/residual</code>.</p>
</body></html>"""


class _BadRequest(Exception):
    def __init__(self, code: str, message: str, location: str = "$"):
        self.diagnostic = Diagnostic("error", code, message, location)


def load_served_model(
    file: str | None, model_dir: str | None
) -> tuple[ModelSpec, Path | None]:
    """Initial model for ``serve``: a saved model.json wins over the file
    argument so analyst edits survive restarts."""
    directory = Path(model_dir) if model_dir else None
    if directory is not None:
        saved = directory / MODEL_FILENAME
        if saved.exists():
            return from_json(json.loads(saved.read_text())), directory
    if file is not None:
        if file.endswith(".json"):
            return from_json(json.loads(Path(file).read_text())), directory
        return parse_model(Path(file).read_text()), directory
    if directory is not None:
        raise FileNotFoundError(
            f"no {MODEL_FILENAME} in {directory}; pass a model file for the first start"
        )
    raise ValueError("serve needs a model file or --model-dir with a saved model")


class _ModelStore:
    """Single current model with an atomic swap."""

    def __init__(self, spec: ModelSpec, model_dir: Path | None):
        self._spec = spec
        self._model_dir = model_dir
        self._lock = threading.Lock()

    @property
    def spec(self) -> ModelSpec:
        return self._spec  # attribute read is atomic; handlers keep their snapshot

    def replace(self, spec: ModelSpec) -> None:
        with self._lock:
            if self._model_dir is not None:
                self._model_dir.mkdir(parents=True, exist_ok=True)
                path = self._model_dir / MODEL_FILENAME
                path.write_text(json.dumps(to_json(spec), indent=2) + "\n")
            self._spec = spec


def _diagnostics_response(diagnostics, status: int = 400) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={
            "schema_version": SCHEMA_VERSION,
            "diagnostics": [
                {
                    "severity": d.severity,
                    "code": d.code,
                    "message": d.message,
                    "location": d.location,
                }
                for d in diagnostics
            ],
        },
    )


def _read_budget(body: dict[str, Any], spec: ModelSpec) -> float | None:
    budget = body.get("budget")
    if budget is None:
        return None
    if type(budget) not in (int, float):
        raise _BadRequest("expected-number", "budget override must be a number", "$.budget")
    if not math.isfinite(float(budget)) or budget < 0:
        raise _BadRequest(
            "negative-budget", f"budget must be non-negative, got {budget}", "$.budget"
        )
    return float(budget)


def _read_profile(body: dict[str, Any], spec: ModelSpec) -> str:
    name = body.get("profile")
    if not isinstance(name, str):
        raise _BadRequest("missing-key", "request needs a profile name", "$.profile")
    if all(p.name != name for p in spec.profiles):
        raise _BadRequest(
            "unknown-profile",
            f"unknown profile {name!r}; available: "
            + ", ".join(p.name for p in spec.profiles),
            "$.profile",
        )
    return name


def create_app(
    spec: ModelSpec,
    model_dir: str | Path | None = None,
    assets_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="ctrlgame", version=__version__, docs_url=None, redoc_url=None)
    store = _ModelStore(spec, Path(model_dir) if model_dir else None)
    app.state.store = store

    @app.exception_handler(_BadRequest)
    async def bad_request_handler(_, exc: _BadRequest):
        return _diagnostics_response([exc.diagnostic])

    @app.exception_handler(NoStrategiesError)
    async def no_strategies_handler(_, exc: NoStrategiesError):
        return JSONResponse(
            status_code=409,
            content={
                "schema_version": SCHEMA_VERSION,
                "code": "no-strategies",
                "message": str(exc),
            },
        )

    @app.exception_handler(GameError)
    async def game_error_handler(_, exc: GameError):
        return _diagnostics_response([Diagnostic("error", "game-error", str(exc), "$")])

    @app.exception_handler(ValuationError)
    async def valuation_error_handler(_, exc: ValuationError):
        return _diagnostics_response([Diagnostic("error", "valuation-error", str(exc), "$")])

    @app.get("/api/model")
    def get_model():
        return to_json(store.spec)

    @app.put("/api/model")
    def put_model(doc: dict[str, Any] = Body(...)):
        try:
            new_spec = from_json(doc)
        except ModelError as exc:
            return _diagnostics_response(exc.diagnostics)
        store.replace(new_spec)
        warnings = validate(new_spec)
        return {
            "schema_version": SCHEMA_VERSION,
            "ok": True,
            "diagnostics": [
                {
                    "severity": d.severity,
                    "code": d.code,
                    "message": d.message,
                    "location": d.location,
                }
                for d in warnings
            ],
        }

    @app.post("/api/expand")
    def post_expand(body: dict[str, Any] = Body(default={})):
        snapshot = store.spec
        return expand_payload(snapshot, _read_budget(body, snapshot))

    @app.post("/api/matrix")
    def post_matrix(body: dict[str, Any] = Body(default={})):
        snapshot = store.spec
        return matrix_payload(snapshot, _read_budget(body, snapshot))

    @app.post("/api/play")
    def post_play(body: dict[str, Any] = Body(default={})):
        snapshot = store.spec
        profile = _read_profile(body, snapshot)
        budget = _read_budget(body, snapshot)
        result = play_model(snapshot, profile, budget)
        return play_payload(snapshot, result, profile, budget)

    @app.post("/api/sweep")
    def post_sweep(body: dict[str, Any] = Body(default={})):
        snapshot = store.spec
        profile = _read_profile(body, snapshot)
        budgets = body.get("budgets")
        if (
            not isinstance(budgets, list)
            or not budgets
            or any(type(b) not in (int, float) for b in budgets)
        ):
            raise _BadRequest(
                "expected-array", "budgets must be a non-empty array of numbers", "$.budgets"
            )
        entries = budget_sweep(snapshot, [float(b) for b in budgets], profile)
        return sweep_payload(snapshot, entries, profile)

    @app.post("/api/sensitivity")
    def post_sensitivity(body: dict[str, Any] = Body(default={})):
        snapshot = store.spec
        profile = _read_profile(body, snapshot)
        budget = _read_budget(body, snapshot)
        delta = body.get("delta")
        if type(delta) not in (int, float) or not 0.0 < float(delta) <= 1.0:
            raise _BadRequest(
                "invalid-delta", f"delta must be a number in (0, 1], got {delta!r}", "$.delta"
            )
        report = sensitivity_scan(snapshot, profile, float(delta), budget)
        return sensitivity_payload(snapshot, report)

    @app.post("/api/residual")
    def post_residual(body: dict[str, Any] = Body(default={})):
        snapshot = store.spec
        budget = _read_budget(body, snapshot)
        threshold = body.get("threshold")
        if type(threshold) not in (int, float) or not 0.0 <= float(threshold) <= 1.0:
            raise _BadRequest(
                "invalid-threshold",
                f"threshold must be a number in [0, 1], got {threshold!r}",
                "$.threshold",
            )
        row_id = body.get("combination")
        gm = model_matrix(snapshot, budget)
        if row_id not in gm.row_labels:
            raise _BadRequest(
                "unknown-combination",
                f"combination {row_id!r} is not a row of the matrix; "
                f"rows: {', '.join(gm.row_labels)}",
                "$.combination",
            )
        chosen = gm.rows[gm.row_labels.index(row_id)]
        flagged = residual_risk_report(chosen, gm, float(threshold))
        return residual_payload(snapshot, gm, row_id, flagged, float(threshold), budget)

    assets = Path(assets_dir) if assets_dir else None
    if assets is not None and assets.is_dir():
        app.mount("/", StaticFiles(directory=assets, html=True), name="workbench")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index():
            return _FALLBACK_PAGE

    return app
