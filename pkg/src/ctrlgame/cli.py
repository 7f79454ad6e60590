"""Command-line interface.

Subcommands mirror the analysis pipeline: ``validate``, ``expand``,
``matrix``, ``play``, ``sweep``, ``sensitivity``, and ``serve``.  Read
commands accept ``--format table|csv|json``; everything the CLI prints as
JSON is byte-identical to what the HTTP API returns for the same request.

Exit codes: 0 success, 1 diagnostics or analysis errors, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .dsl import parse_model
from .game import GameError
from .jsonio import from_json
from .model import ModelError, ModelSpec, play_model, validate
from .render import (
    expand_payload,
    matrix_payload,
    play_payload,
    render_csv,
    render_table,
    sensitivity_payload,
    sweep_payload,
    validate_payload,
)
from .valuation import ValuationError
from .whatif import budget_sweep, sensitivity_scan

DEFAULT_PORT = 8000


def load_model(path: str) -> ModelSpec:
    """Load a model from DSL source (default) or JSON (``.json``)."""
    text = Path(path).read_text()
    if path.endswith(".json"):
        return from_json(json.loads(text))
    return parse_model(text)


def _print_diagnostics(diagnostics, stream=None) -> None:
    stream = stream or sys.stderr
    for d in diagnostics:
        print(str(d), file=stream)


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2))
    elif fmt == "csv":
        sys.stdout.write(render_csv(payload))
    else:
        print(render_table(payload))


def _add_common(parser: argparse.ArgumentParser, *, budget: bool = True) -> None:
    parser.add_argument("file", help="model file (.scm DSL source or .json)")
    if budget:
        parser.add_argument(
            "--budget", type=float, default=None, help="override the model budget"
        )
    parser.add_argument(
        "--format",
        choices=("table", "csv", "json"),
        default="table",
        help="output format (default: table)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctrlgame",
        description="Game-theoretic security control selection workbench",
    )
    parser.add_argument("--version", action="version", version=f"ctrlgame {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse a model and report diagnostics")
    _add_common(p, budget=False)

    p = sub.add_parser("expand", help="list every combination with cost and validity")
    _add_common(p)

    p = sub.add_parser("matrix", help="print the game matrix for the valid combinations")
    _add_common(p)

    p = sub.add_parser("play", help="play the game against an attacker profile")
    _add_common(p)
    p.add_argument("--profile", required=True, help="attacker profile name")

    p = sub.add_parser("sweep", help="replay the game across several budgets")
    _add_common(p, budget=False)
    p.add_argument("--profile", required=True, help="attacker profile name")
    p.add_argument(
        "--budgets",
        required=True,
        help="comma-separated budgets, e.g. 10,15,20",
    )

    p = sub.add_parser(
        "sensitivity", help="perturb each payoff entry and report outcome stability"
    )
    _add_common(p)
    p.add_argument("--profile", required=True, help="attacker profile name")
    p.add_argument("--delta", required=True, type=float, help="perturbation size in (0, 1]")

    p = sub.add_parser("serve", help="serve the HTTP API and workbench UI")
    p.add_argument("file", nargs="?", default=None, help="initial model file")
    p.add_argument(
        "--model-dir",
        default=None,
        help="persist model edits to DIR/model.json and reload them on restart",
    )
    p.add_argument(
        "--port",
        type=int,
        default=None,
        help=f"listen port (default: $CTRLGAME_PORT or {DEFAULT_PORT})",
    )
    p.add_argument("--host", default="127.0.0.1", help="bind address")
    p.add_argument("--assets", default=None, help="workbench static assets directory")
    return parser


def _parse_budgets(raw: str) -> list[float]:
    try:
        budgets = [float(token) for token in raw.split(",") if token.strip() != ""]
    except ValueError:
        raise GameError(f"cannot parse budget list {raw!r}; expected numbers like 10,15,20")
    if not budgets:
        raise GameError("at least one budget required")
    return budgets


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        return _serve(args)

    try:
        spec = load_model(args.file)
    except ModelError as exc:
        if args.command == "validate" and args.format == "json":
            _emit(validate_payload(exc.diagnostics), "json")
        else:
            _print_diagnostics(exc.diagnostics)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read {args.file}: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "validate":
            _emit(validate_payload(validate(spec)), args.format)
            return 0
        if args.command == "expand":
            _emit(expand_payload(spec, args.budget), args.format)
            return 0
        if args.command == "matrix":
            _emit(matrix_payload(spec, args.budget), args.format)
            return 0
        if args.command == "play":
            result = play_model(spec, args.profile, args.budget)
            _emit(play_payload(spec, result, args.profile, args.budget), args.format)
            return 0
        if args.command == "sweep":
            entries = budget_sweep(spec, _parse_budgets(args.budgets), args.profile)
            _emit(sweep_payload(spec, entries, args.profile), args.format)
            return 0
        if args.command == "sensitivity":
            report = sensitivity_scan(spec, args.profile, args.delta, args.budget)
            _emit(sensitivity_payload(spec, report), args.format)
            return 0
    except (GameError, ValuationError, ModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command}")


def _serve(args) -> int:
    import uvicorn

    from .server import create_app, load_served_model

    try:
        spec, model_dir = load_served_model(args.file, args.model_dir)
    except (ModelError, FileNotFoundError, ValueError) as exc:
        if isinstance(exc, ModelError):
            _print_diagnostics(exc.diagnostics)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 1

    port = args.port
    if port is None:
        port = int(os.environ.get("CTRLGAME_PORT", DEFAULT_PORT))
    app = create_app(spec, model_dir=model_dir, assets_dir=args.assets)
    uvicorn.run(app, host=args.host, port=port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
