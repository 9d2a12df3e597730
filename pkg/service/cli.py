# service/cli.py
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

import quiet
from errors import AlexanderError, ConfigError, ElocusError, PresentationError, TrackingError
from group_pipeline.alexander import summarize_alexander
from group_pipeline.homology import abelianization_data
from group_pipeline.presentation import parse_manifold
from service.pipeline import run_analysis
from service.report import AlexanderModel, render_text
from service.settings import RunConfig

logger = logging.getLogger("elocus")

EXIT_OK = 0
EXIT_TRACKING = 2
EXIT_INPUT = 3

# argparse dest -> RunConfig field
_FLAG_FIELDS = {
    "samples": "n_samples",
    "bits": "polish_bits",
    "attempts": "seed_attempts",
    "sym_range": "sym_range",
    "seed": "rng_seed",
    "csv": "csv",
    "svg": "svg",
    "report": "report",
    "frames": "frames",
    "resume": "resume",
    "assume_small": "assume_small",
    "tol_real": "tol_real",
    "tol_parabolic": "tol_parabolic",
    "workers": "workers",
    "branched_max": "branched_max",
    "log_level": "log_level",
}


def setup_logging(level: str = "INFO") -> None:
    """
    Route the package logger to standard error through rich.
    """
    handler = RichHandler(
        console=Console(stderr=True),
        show_path=False,
        rich_tracebacks=True,
        markup=False,
    )
    handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    root = logging.getLogger("elocus")
    root.handlers[:] = [handler]
    root.setLevel(level.upper())
    root.propagate = False
    quiet.apply_library_quiet_logging()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elocus",
        description="Translation extension loci of knot manifolds and the orderable Dehn fillings they certify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the full locus pipeline on a manifold file")
    a.add_argument("input", type=Path, help="manifold JSON file")
    a.add_argument("--samples", type=int, default=None, help="sample angles N (power of 2)")
    a.add_argument("--bits", type=int, default=None, help="polish precision in bits")
    a.add_argument("--attempts", type=int, default=None, help="random Newton starts when seeding")
    a.add_argument("--sym-range", type=int, default=None, help="translates x + nk with |n| <= this")
    a.add_argument("--seed", type=int, default=None, help="random seed")
    a.add_argument("--csv", type=Path, default=None)
    a.add_argument("--svg", type=Path, default=None)
    a.add_argument("--report", type=Path, default=None, help="JSON report path")
    a.add_argument("--frames", type=Path, default=None, help="write tracked frames here")
    a.add_argument("--resume", type=Path, default=None, help="reuse a frame dump instead of tracking")
    a.add_argument("--assume-small", action=argparse.BooleanOptionalAction, default=None,
                   help="treat the manifold as small (no closed essential surface)")
    a.add_argument("--tol-real", type=float, default=None)
    a.add_argument("--tol-parabolic", type=float, default=None)
    a.add_argument("--workers", type=int, default=None, help="worker processes")
    a.add_argument("--branched-max", type=int, default=None, help="largest n for branched covers")
    a.add_argument("--log-level", default=None)
    a.add_argument("--quiet", action="store_true", help="do not print the text report")

    x = sub.add_parser("alexander", help="Alexander polynomial and its unit-circle roots")
    x.add_argument("input", type=Path, help="manifold JSON file")
    x.add_argument("--tol", type=float, default=1e-9, help="unit-circle tolerance")
    x.add_argument("--json", action="store_true", help="print JSON instead of text")
    x.add_argument("--log-level", default=None)
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    overrides = {"input": args.input}
    for dest, name in _FLAG_FIELDS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[name] = value
    return RunConfig(**overrides)


def run_analyze(cfg: RunConfig, *, show: bool = True) -> int:
    """
    Run the pipeline and map failures to exit codes.

    Returns:
        int: 0 on success, 2 on a fatal tracking failure, 3 on an input error.
    """
    try:
        result = run_analysis(cfg)
    except (PresentationError, AlexanderError, ConfigError) as e:
        logger.error("input error: %s", e)
        return EXIT_INPUT
    except TrackingError as e:
        logger.error("tracking failed: %s", e)
        return EXIT_TRACKING
    except ElocusError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_TRACKING
    if show:
        sys.stdout.write(render_text(result.report_model))
    return EXIT_OK


def run_alexander(path: Path, tol: float, as_json: bool) -> int:
    try:
        p = parse_manifold(path)
        h = abelianization_data(p)
        s = summarize_alexander(p, h, tol)
    except (PresentationError, AlexanderError) as e:
        logger.error("input error: %s", e)
        return EXIT_INPUT
    model = AlexanderModel.from_summary(s)
    if as_json:
        sys.stdout.write(model.model_dump_json(indent=2) + "\n")
        return EXIT_OK
    console = Console()
    console.print(f"{p.name}: H_1 = Z" + "".join(f" + Z/{d}" for d in h.torsion) + f", k = {h.k}")
    console.print(f"Δ(t) = {model.polynomial}")
    console.print(f"|Δ(1)| = {abs(model.value_at_one)}")
    for r in model.roots:
        console.print(
            f"  root e^(2πi·{r.argument / (2 * math.pi):.9f})  multiplicity {r.multiplicity}"
        )
    for a in model.points:
        tags = [t for t, on in (("multiple", a.multiple), ("excluded", a.excluded)) if on]
        console.print(f"  Alexander point x = {a.x:.9f}" + (f" ({', '.join(tags)})" if tags else ""))
    console.print(f"L-space form: {'yes' if model.lspace_form else 'no'}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "alexander":
        setup_logging(args.log_level or "WARNING")
        return run_alexander(args.input, args.tol, args.json)

    try:
        cfg = _run_config(args)
    except ValidationError as e:
        setup_logging("INFO")
        logger.error("invalid configuration: %s", e)
        return EXIT_INPUT
    setup_logging(cfg.log_level)
    return run_analyze(cfg, show=not args.quiet)


if __name__ == "__main__":
    sys.exit(main())
