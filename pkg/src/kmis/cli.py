"""``kmis`` command-line entrypoint.

Subcommands generate logged data, fit and select reward models, evaluate a
single estimator, run full experiment configs and recompute summaries. Library
errors surface as ``SystemExit`` with the failing subcommand in the message;
``run`` exits 1 when any trial record carries an error tag.

Dependencies: everything above
Wired in: pyproject.toml → [project.scripts] kmis
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from collections.abc import Callable
from pathlib import Path

from dotenv import load_dotenv
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from kmis.bandwidth.grid import BandwidthGrid
from kmis.bandwidth.plugin import kallus_bandwidth
from kmis.bandwidth.slope import slope_select
from kmis.cli_options import AUTO_KALLUS, AUTO_SLOPE, LOG_LEVELS
from kmis.cli_options import parse_cli_args as parse_entrypoint_args
from kmis.display.progress import SweepProgressDisplay
from kmis.display.summary import render_summary
from kmis.domains.base import Domain
from kmis.domains.registry import build_domain, default_grid, default_reward_config
from kmis.domains.warfarin import warfarin_synthetic
from kmis.errors import InvalidInputError, KmisError
from kmis.estimators.direct import dm_report
from kmis.estimators.discretized import discretized_is
from kmis.estimators.kernel import kernel_evaluation
from kmis.estimators.kmis import kmis_metrics, target_hessians
from kmis.estimators.report import EstimatorKind, EstimatorReport
from kmis.harness.aggregate import aggregate
from kmis.harness.config import load_experiment_config, workers_from_env
from kmis.harness.emit import emit, emit_summary, load_trials
from kmis.harness.runner import ExperimentRunner
from kmis.infra import otel_tracing
from kmis.numerics.types import FloatArray
from kmis.policies.dataset import LoggedDataset, load_dataset_csv, save_dataset_csv
from kmis.reward.model import RewardModel, fit, load_reward_model, save_reward_model
from kmis.reward.selection import grid_search

_log = logging.getLogger(__name__)

_Command = Callable[[argparse.Namespace], int]


def parse_cli_args(repo_root: Path, argv: list[str] | None = None) -> argparse.Namespace:
    args = argv if argv is not None else sys.argv[1:]
    return parse_entrypoint_args(repo_root, args)


def configure_logging(level: str | None) -> None:
    """Route all records through a rich handler on stderr."""
    name = (level or os.getenv("KMIS_LOG_LEVEL") or "WARNING").upper()
    if name not in LOG_LEVELS:
        raise SystemExit(f"KMIS_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, got {name!r}")
    logging.basicConfig(
        level=name,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _domain_from_args(args: argparse.Namespace) -> Domain:
    return build_domain(
        args.domain,
        dummy_dims=args.dummy_dims,
        noise_sd=args.noise_sd,
        warfarin_csv=args.warfarin_csv,
        target_bmi=args.target_bmi,
    )


def _float_list(text: str) -> list[float] | None:
    """``None`` for ``default``; otherwise the comma-separated values."""
    if text.strip().lower() == "default":
        return None
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise InvalidInputError(f"Cannot parse grid {text!r}") from exc


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_generate(args: argparse.Namespace) -> int:
    data = _domain_from_args(args).generate(args.n, args.seed)
    print(save_dataset_csv(data, args.out))
    return 0


def _cmd_fit_reward(args: argparse.Namespace) -> int:
    data = load_dataset_csv(args.data)
    base = default_reward_config(args.preset).with_overrides(
        dropout=args.dropout,
        l2=args.l2,
        learning_rate=args.learning_rate,
        max_epochs=args.max_epochs,
    )
    if args.l2_grid is not None or args.learning_rate_grid is not None:
        parameter = "l2" if args.l2_grid is not None else "learning_rate"
        values = _float_list(args.l2_grid if args.l2_grid is not None else args.learning_rate_grid)
        result = grid_search(data, parameter, values, base, args.seed)
        model, report = result.model, result.report
        print(f"selected {parameter}={result.chosen:g}")
    else:
        model, report = fit(data, base, args.seed)
    save_reward_model(model, args.out)
    print(report.model_dump_json(indent=2, exclude={"validation_history"}))
    return 0


def _require_model(args: argparse.Namespace, purpose: str) -> RewardModel:
    if args.model is None:
        raise InvalidInputError(f"--model is required for {purpose}")
    return load_reward_model(args.model)


def _evaluate_kernel(
    args: argparse.Namespace, data: LoggedDataset, domain: Domain, kind: EstimatorKind
) -> EstimatorReport:
    target = domain.target
    needs_model = kind is EstimatorKind.KMIS or args.bandwidth == AUTO_KALLUS
    model = None
    if needs_model:
        model = _require_model(args, f"{kind} with --bandwidth {args.bandwidth}")
    hessians: FloatArray | None = None
    transform: FloatArray | None = None
    diagnostics: dict[str, object] = {}
    if model is not None:
        hessians = target_hessians(model, data, target)
    if kind is EstimatorKind.KMIS and model is not None:
        metrics = kmis_metrics(model, data, target, args.epsilon_scale, hessians)
        transform = metrics.l_hat
        diagnostics["identity_metric_states"] = int(metrics.degenerate.sum())

    grid = BandwidthGrid.parse(args.grid) if args.grid else default_grid(domain.name)
    if args.bandwidth == AUTO_KALLUS and model is not None:
        choice = kallus_bandwidth(model, data, target, domain.behavior, grid, hessians)
        h = choice.bandwidth
        diagnostics["bandwidth_fallback"] = choice.fallback
    elif args.bandwidth == AUTO_SLOPE:
        h, slope = slope_select(
            data,
            target,
            grid,
            lambda d, t, bw: kernel_evaluation(
                d, t, bw, args.self_normalize, transform, estimator=kind
            ),
        )
        diagnostics["slope"] = slope.model_dump(mode="json")
    else:
        h = float(args.bandwidth)

    report = kernel_evaluation(
        data, target, h, args.self_normalize, transform, estimator=kind
    ).report
    return report.model_copy(update={"diagnostics": {**report.diagnostics, **diagnostics}})


def _cmd_evaluate(args: argparse.Namespace) -> int:
    data = load_dataset_csv(args.data)
    domain = _domain_from_args(args)
    if data.action_dim != domain.action_dim:
        raise InvalidInputError(
            f"{args.data} has {data.action_dim} action dims, "
            f"domain {domain.name} expects {domain.action_dim}"
        )
    kind = EstimatorKind(args.estimator)
    match kind:
        case EstimatorKind.DM:
            report = dm_report(_require_model(args, "dm"), data, domain.target)
        case EstimatorKind.DISC:
            report = discretized_is(
                data, domain.target, domain.behavior, args.bins_per_dim, args.self_normalize
            )
        case EstimatorKind.KIS | EstimatorKind.KMIS:
            report = _evaluate_kernel(args, data, domain, kind)
    print(report.model_dump_json(indent=2))
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_experiment_config(args.config)
    workers = args.workers if args.workers is not None else workers_from_env()
    progress = None
    if not args.no_progress:
        progress = SweepProgressDisplay(
            config.sweep.axis.value, config.sweep.values, config.n_trials
        )
    runner = ExperimentRunner(config, workers=workers, progress=progress)
    try:
        records = runner.run()
    finally:
        if progress is not None:
            progress.close()

    rows = aggregate(records, skip_failed=True)
    emit(
        records,
        rows,
        config.output,
        metrics=runner.metrics_frame,
        sweep_axis=config.sweep.axis.value,
    )
    render_summary(rows, title=f"{config.domain.name} / {config.sweep.axis} sweep")
    errors = sum(1 for record in records if not record.ok)
    if errors:
        _log.warning("%d of %d trial records carry an error tag", errors, len(records))
        return 1
    return 0


def _cmd_aggregate(args: argparse.Namespace) -> int:
    rows = aggregate(load_trials(args.trials), skip_failed=True)
    for path in emit_summary(rows, args.out):
        print(path)
    render_summary(rows)
    return 0


def _cmd_warfarin_synth(args: argparse.Namespace) -> int:
    args.out.parent.mkdir(parents=True, exist_ok=True)
    warfarin_synthetic(args.n, args.seed).to_csv(args.out, index=False, lineterminator="\n")
    print(args.out)
    return 0


_COMMANDS: dict[str, _Command] = {
    "generate": _cmd_generate,
    "fit-reward": _cmd_fit_reward,
    "evaluate": _cmd_evaluate,
    "run": _cmd_run,
    "aggregate": _cmd_aggregate,
    "warfarin-synth": _cmd_warfarin_synth,
}


def main(argv: list[str] | None = None) -> None:
    """Load ``.env``, configure logging and tracing, then dispatch the subcommand."""
    repo_root = Path(__file__).resolve().parents[2]
    load_dotenv(dotenv_path=repo_root / ".env")
    args = parse_cli_args(repo_root, argv)
    configure_logging(args.log_level)
    otel_tracing.configure()

    try:
        code = _COMMANDS[args.command](args)
    except (KmisError, ValidationError, OSError, ValueError) as exc:
        raise SystemExit(f"kmis {args.command}: {exc}") from exc
    if code:
        raise SystemExit(code)
