"""Command-line interface.

Three subcommands share one report pipeline:

- ``finsler verify``      two-sided checks of the rescaling identities
- ``finsler classify``    residual-based structure classification
- ``finsler invariance``  verdict agreement between a structure and its rescaling

Exit codes: 0 all items passed (or inapplicable), 1 any failure or error,
2 configuration problems.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .errors import FinslerError, SchemaError
from .harness import RunConfig, run_suite


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--metric", help="path to a metric document, or inline JSON")
    sp.add_argument("--samples", type=int, default=None,
                    help="number of admissible sample points (default 20)")
    sp.add_argument("--seed", type=int, default=None,
                    help="RNG seed for sampling (default 7)")
    sp.add_argument("--tol", type=float, default=None,
                    help="residual tolerance override")
    sp.add_argument("--out", default=None, help="write the report to this file")
    sp.add_argument("--format", choices=("json", "markdown"), default=None,
                    help="report format (default json)")
    sp.add_argument("--config", default=None,
                    help="JSON file of defaults; explicit flags win")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="finsler",
        description="numerical Finsler geometry: connections, curvature, "
                    "conformal rescaling checks, and classification")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check rescaling identities two-sidedly")
    v.add_argument("--sigma", default=None,
                   help="scale-function expression in x variables, e.g. '0.1*x1'")
    v.add_argument("--theorems", default=None,
                   help="comma-separated theorem ids, or 'all'")
    _add_common(v)

    c = sub.add_parser("classify", help="classify a structure against the catalogue")
    c.add_argument("--predicates", default=None,
                   help="comma-separated predicate names, or 'all'")
    _add_common(c)

    i = sub.add_parser("invariance",
                       help="compare classification verdicts across a rescaling")
    i.add_argument("--sigma", default=None,
                   help="scale-function expression in x variables")
    i.add_argument("--propositions", default=None,
                   help="comma-separated predicate names, or 'all'")
    _add_common(i)
    return ap


def _csv(value: Optional[str]) -> tuple:
    if value is None:
        return ()
    parts = tuple(p.strip() for p in value.split(",") if p.strip())
    return parts


def _merge(args: argparse.Namespace) -> RunConfig:
    file_cfg: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError(f"cannot read config file: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise SchemaError("config file must hold a JSON object")

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        if key in file_cfg and file_cfg[key] is not None:
            return file_cfg[key]
        return default

    metric = pick(args.metric, "metric", None)
    if not metric:
        raise SchemaError("a metric is required (--metric or config file)")
    listify = lambda v: tuple(v) if isinstance(v, (list, tuple)) else _csv(v)
    return RunConfig(
        command=args.command,
        metric=metric,
        sigma=pick(getattr(args, "sigma", None), "sigma", None),
        theorems=listify(pick(_csv(getattr(args, "theorems", None)) or None,
                              "theorems", ())),
        predicates=listify(pick(_csv(getattr(args, "predicates", None)) or None,
                                "predicates", ())),
        propositions=listify(pick(
            _csv(getattr(args, "propositions", None)) or None,
            "propositions", ())),
        samples=int(pick(args.samples, "samples", 20)),
        seed=int(pick(args.seed, "seed", 7)),
        tol=pick(args.tol, "tol", None),
        out=pick(args.out, "out", None),
        format=pick(args.format, "format", "json"),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        config = _merge(args)
        report = run_suite(config)
    except SchemaError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FinslerError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if not config.out:
        text = report.to_markdown() if config.format == "markdown" \
            else report.to_json()
        sys.stdout.write(text)
    else:
        print(f"report written to {config.out}")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
