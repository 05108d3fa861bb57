"""CSV and JSON result serialization."""

import csv
import io
import json
from datetime import datetime
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Tuple

import numpy as np
from jsonschema import validate

from src.model.metrics import TrajectoryRow
from src.model.schema_v0 import SUMMARY_SCHEMA
from src.model.summary import RunSummary, VariantSummary

TRAJECTORY_HEADER = ["variant", "replication", "k", "entity_id", "kind", "e", "n", "u"]
TIMING_HEADER = ["A", "T", "mean_st", "mean_apt"]


def format_float(value: float) -> str:
    """Nine significant digits, the same on every platform."""
    return f"{float(value):.9g}"


def _to_csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def trajectories_csv(blocks: Iterable[Tuple[str, int, Sequence[TrajectoryRow]]]) -> str:
    """Render (variant, replication, rows) blocks as trajectories.csv."""
    def rows():
        for variant, replication, trajectory in blocks:
            for k, entity_id, kind, e, n, u in trajectory:
                yield [variant, replication, k, entity_id, kind,
                       format_float(e), format_float(n), format_float(u)]
    return _to_csv(TRAJECTORY_HEADER, rows())


def metrics_csv(series: Mapping[str, np.ndarray]) -> str:
    """Render one m_k column per variant, in the mapping's order.

    Raises:
        ValueError: If the series differ in length
    """
    names = list(series)
    lengths = {len(series[name]) for name in names}
    if len(lengths) > 1:
        raise ValueError(f"m_k series differ in length: {sorted(lengths)}")
    n_steps = lengths.pop() if lengths else 0
    header = ["k"] + [f"m_k_{name}" for name in names]
    rows = ([k] + [format_float(series[name][k]) for name in names] for k in range(n_steps))
    return _to_csv(header, rows)


def timing_csv(rows: Iterable[Tuple[int, int, float, float]]) -> str:
    """Render (A, T, mean ST, mean APT) rows as timing.csv."""
    return _to_csv(TIMING_HEADER, ([a, t, format_float(st), format_float(apt)] for a, t, st, apt in rows))


class SummarySerializer:
    """Handles JSON serialization/deserialization and validation for run summaries."""

    def serialize(self, summary: RunSummary, validate: bool = False) -> str:
        """Serialize RunSummary to JSON string.

        Raises:
            ValidationError: If validate=True and summary is invalid
        """
        if validate:
            self.validate(summary)
        return json.dumps(summary.to_dict(), indent=2)

    def deserialize(self, json_str: str) -> RunSummary:
        """Deserialize JSON string to RunSummary object.

        Raises:
            ValidationError: If JSON doesn't match summary schema
            json.JSONDecodeError: If JSON is malformed
        """
        data = json.loads(json_str)
        validate(instance=data, schema=SUMMARY_SCHEMA)
        return RunSummary(
            version=data["version"],
            preset=data["preset"],
            base_seed=data["base_seed"],
            n_reps=data["n_reps"],
            generated_at=datetime.fromisoformat(data["generated_at"]),
            variants=[VariantSummary.from_dict(v) for v in data["variants"]],
            processing_status=data.get("processing_status"),
            analysis=data.get("analysis", {}),
        )

    def validate(self, summary: RunSummary) -> None:
        """Validate summary against schema.

        Raises:
            ValidationError: If summary doesn't match schema
        """
        validate(instance=summary.to_dict(), schema=SUMMARY_SCHEMA)


def write_atomic(path: Path, text: str) -> None:
    """Write a text file via a temp file and rename.

    Raises:
        OSError: If file cannot be written
    """
    path = Path(path)
    temp_path = path.with_suffix(path.suffix + ".tmp")
    try:
        with open(temp_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        temp_path.replace(path)
    except Exception:
        if temp_path.exists():
            temp_path.unlink()
        raise
