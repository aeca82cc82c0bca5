"""Tabular experiment outputs.

``trials.csv`` has one :class:`TrialRecord` per row with the header
``trial,seed,sweep_value,estimator,kind,n,bandwidth,estimate,squared_error,true_value,error``;
missing values are empty fields. ``summary.csv`` and ``summary.json`` carry the
aggregate rows (flat and grouped by sweep value). ``metrics.csv`` is the learned
metric export for plotting. Floats are written in shortest round-trip form with
``\\n`` line endings, so reruns are byte-identical.

Dependencies: harness.runner, harness.aggregate
Wired in: cli.py → run / aggregate
"""

from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Final

import pandas as pd

from kmis.errors import SchemaError
from kmis.harness.aggregate import AggregateRow
from kmis.harness.runner import TRIAL_COLUMNS, TrialRecord

_log = logging.getLogger(__name__)

TRIALS_FILE: Final[str] = "trials.csv"
SUMMARY_CSV: Final[str] = "summary.csv"
SUMMARY_JSON: Final[str] = "summary.json"
METRICS_FILE: Final[str] = "metrics.csv"

_TEXT_COLUMNS: Final[dict[str, type]] = {"estimator": str, "kind": str, "error": str}


def trials_frame(records: Sequence[TrialRecord]) -> pd.DataFrame:
    rows = [record.model_dump(mode="json") for record in records]
    return pd.DataFrame(rows, columns=TRIAL_COLUMNS)


def summary_frame(rows: Sequence[AggregateRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [row.model_dump(mode="json") for row in rows], columns=list(AggregateRow.model_fields)
    )


def summary_document(rows: Sequence[AggregateRow], sweep_axis: str | None = None) -> dict[str, Any]:
    """Aggregate rows nested as ``groups[i].estimators[label]``."""
    groups: dict[float, dict[str, Any]] = {}
    for row in rows:
        fields = row.model_dump(mode="json", exclude={"sweep_value", "estimator"})
        group = groups.setdefault(
            row.sweep_value, {"sweep_value": row.sweep_value, "estimators": {}}
        )
        group["estimators"][row.estimator] = fields
    return {"sweep_axis": sweep_axis, "groups": list(groups.values())}


def _write_csv(frame: pd.DataFrame, path: Path) -> Path:
    try:
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as exc:
        raise OSError(f"Cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _ensure_dir(out_dir: Path) -> None:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"Cannot create {out_dir}: {exc.strerror or exc}") from exc


def emit_summary(
    rows: Sequence[AggregateRow], out_dir: Path, *, sweep_axis: str | None = None
) -> list[Path]:
    """Write ``summary.csv`` and ``summary.json`` into ``out_dir``."""
    _ensure_dir(out_dir)
    summary_csv = _write_csv(summary_frame(rows), out_dir / SUMMARY_CSV)
    summary_json = out_dir / SUMMARY_JSON
    try:
        summary_json.write_text(
            json.dumps(summary_document(rows, sweep_axis), indent=2) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise OSError(f"Cannot write {summary_json}: {exc.strerror or exc}") from exc
    return [summary_csv, summary_json]


def emit(
    records: Sequence[TrialRecord],
    rows: Sequence[AggregateRow],
    out_dir: Path,
    *,
    metrics: pd.DataFrame | None = None,
    sweep_axis: str | None = None,
) -> list[Path]:
    """Write the experiment outputs into ``out_dir`` and return the paths written.

    Raises:
        OSError: A file cannot be written; the message names it.
    """
    _ensure_dir(out_dir)

    written = [_write_csv(trials_frame(records), out_dir / TRIALS_FILE)]
    written.extend(emit_summary(rows, out_dir, sweep_axis=sweep_axis))
    if metrics is not None:
        written.append(_write_csv(metrics, out_dir / METRICS_FILE))
    for path in written:
        _log.info("Wrote %s", path)
    return written


def _optional(value: Any) -> Any:
    return None if pd.isna(value) else value


def load_trials(path: Path) -> list[TrialRecord]:
    """Read a ``trials.csv`` written by :func:`emit`.

    Raises:
        SchemaError: A documented column is missing.
    """
    frame = pd.read_csv(path, float_precision="round_trip", dtype=_TEXT_COLUMNS)
    for column in TRIAL_COLUMNS:
        if column not in frame.columns:
            raise SchemaError(column, str(path))
    records: list[TrialRecord] = []
    for raw in frame[TRIAL_COLUMNS].to_dict(orient="records"):
        records.append(TrialRecord.model_validate({k: _optional(v) for k, v in raw.items()}))
    return records
