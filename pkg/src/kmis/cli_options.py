"""Argument parsing and version lookup for the ``kmis`` entrypoint."""

from __future__ import annotations

import argparse
import tomllib
from pathlib import Path
from typing import Final

from kmis.domains.registry import DomainName
from kmis.estimators.report import EstimatorKind

FALLBACK_VERSION: Final[str] = "0.1.0"
LOG_LEVELS: Final[tuple[str, ...]] = ("DEBUG", "INFO", "WARNING", "ERROR")
AUTO_KALLUS: Final[str] = "auto-kallus"
AUTO_SLOPE: Final[str] = "auto-slope"


def project_version(repo_root: Path) -> str:
    """Version from ``pyproject.toml``, or 0.1.0 when it cannot be read."""
    toml_path = repo_root / "pyproject.toml"
    if not toml_path.exists():
        return FALLBACK_VERSION
    with open(toml_path, "rb") as fh:
        data = tomllib.load(fh)
    project_data: dict[str, object] = data.get("project", {})
    raw_version: object = project_data.get("version")
    return str(raw_version) if raw_version is not None else FALLBACK_VERSION


def parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in {"true", "1", "yes", "on"}:
        return True
    if lowered in {"false", "0", "no", "off"}:
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def bandwidth_argument(text: str) -> str | float:
    """``auto-kallus``, ``auto-slope`` or a positive float."""
    if text in (AUTO_KALLUS, AUTO_SLOPE):
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bandwidth must be {AUTO_KALLUS}, {AUTO_SLOPE} or a number, got {text!r}"
        ) from None
    if not value > 0.0:
        raise argparse.ArgumentTypeError(f"bandwidth must be > 0, got {value}")
    return value


def _add_domain_options(parser: argparse.ArgumentParser, *, required: bool) -> None:
    parser.add_argument(
        "--domain",
        required=required,
        choices=[name.value for name in DomainName],
        help="Environment that generated (or generates) the logged data",
    )
    parser.add_argument("--dummy-dims", type=int, default=0, help="abs_error extra action dims")
    parser.add_argument("--noise-sd", type=float, default=0.5, help="quadratic reward noise sd")
    parser.add_argument("--warfarin-csv", type=Path, default=None, help="Warfarin patient table")
    parser.add_argument("--target-bmi", choices=["z", "raw"], default="z")


def build_parser(repo_root: Path) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kmis", description="Kernel IS with learned metrics for continuous-action OPE"
    )
    parser.add_argument("--version", action="version", version=project_version(repo_root))
    parser.add_argument(
        "--log-level",
        type=str.upper,
        choices=LOG_LEVELS,
        default=None,
        help="Logging level (default: $KMIS_LOG_LEVEL or WARNING)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", help="Sample a logged dataset to CSV")
    _add_domain_options(generate, required=True)
    generate.add_argument("--n", type=int, required=True, help="Number of logged records")
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--out", type=Path, required=True)

    fit_reward = commands.add_parser("fit-reward", help="Fit the reward regressor")
    fit_reward.add_argument("--data", type=Path, required=True)
    fit_reward.add_argument("--out", type=Path, required=True, help="Model JSON path")
    fit_reward.add_argument("--seed", type=int, default=0)
    fit_reward.add_argument(
        "--preset",
        choices=[name.value for name in DomainName],
        default=DomainName.QUADRATIC.value,
        help="Domain whose hyperparameter preset is the starting point",
    )
    fit_reward.add_argument("--dropout", type=float, default=None)
    fit_reward.add_argument("--l2", type=float, default=None)
    fit_reward.add_argument("--learning-rate", type=float, default=None)
    fit_reward.add_argument("--max-epochs", type=int, default=None)
    search = fit_reward.add_mutually_exclusive_group()
    search.add_argument(
        "--l2-grid", default=None, help='Comma-separated L2 values to select from, or "default"'
    )
    search.add_argument(
        "--learning-rate-grid",
        default=None,
        help='Comma-separated learning rates to select from, or "default"',
    )

    evaluate = commands.add_parser("evaluate", help="Estimate the target policy value")
    evaluate.add_argument("--data", type=Path, required=True)
    evaluate.add_argument("--model", type=Path, default=None, help="Reward model JSON")
    evaluate.add_argument(
        "--estimator", required=True, choices=[kind.value for kind in EstimatorKind]
    )
    evaluate.add_argument("--bandwidth", type=bandwidth_argument, default=AUTO_KALLUS)
    evaluate.add_argument("--grid", default=None, help='Bandwidth grid, e.g. "2^-1..2^-7"')
    evaluate.add_argument("--self-normalize", type=parse_bool, default=True)
    evaluate.add_argument("--bins-per-dim", type=int, default=10)
    evaluate.add_argument("--epsilon-scale", type=float, default=0.01)
    _add_domain_options(evaluate, required=True)

    run = commands.add_parser("run", help="Run an experiment config")
    run.add_argument("--config", type=Path, required=True)
    run.add_argument("--workers", type=int, default=None, help="Default: $KMIS_WORKERS")
    run.add_argument("--no-progress", action="store_true", help="Disable the live tree")

    aggregate = commands.add_parser("aggregate", help="Recompute summaries from trials.csv")
    aggregate.add_argument("--trials", type=Path, required=True)
    aggregate.add_argument("--out", type=Path, required=True)

    synth = commands.add_parser("warfarin-synth", help="Write a synthetic Warfarin-like table")
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", type=Path, required=True)
    return parser


def parse_cli_args(repo_root: Path, argv: list[str]) -> argparse.Namespace:
    return build_parser(repo_root).parse_args(argv)
