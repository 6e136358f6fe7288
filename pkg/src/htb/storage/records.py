"""
Persistence layer for HTB.

Handles file-based storage of experiment outputs: one CSV per run, one
aggregate CSV and one JSON manifest per output directory. Floats are written
with repr() so a file read back reproduces the values exactly and identical
runs produce identical bytes.
"""

import csv
import json
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from ..core.errors import OutputError
from ..core.models import RunRecord
from ..harness.aggregate import AggregateResult, AggregateRow

RUN_COLUMNS = ["t", "phase", "action_label", "reward", "cum_regret"]
AGGREGATE_COLUMNS = ["algorithm", "d", "t", "mean_regret", "std_regret", "n_runs"]
AGGREGATE_FILE = "aggregate.csv"
MANIFEST_FILE = "manifest.json"
_RUN_FILE = re.compile(r"^run_(?P<algorithm>[a-z_]+)_d(?P<d>\d+)_rep(?P<rep>\d+)\.csv$")


# ==================== PATH UTILITIES ====================


def run_file_name(algorithm: str, d: int, rep: int) -> str:
    return f"run_{algorithm}_d{d}_rep{rep}.csv"


def parse_run_file_name(name: str) -> Optional[Tuple[str, int, int]]:
    """(algorithm, d, rep) of a run file name, None for other files."""
    match = _RUN_FILE.match(name)
    if not match:
        return None
    return match["algorithm"], int(match["d"]), int(match["rep"])


def ensure_output_dir(path: Path) -> Path:
    """
    Create the directory and check that it accepts files.

    Raises:
        OutputError: If the directory cannot be created or written
    """
    path = Path(path)
    marker = path / ".htb-write-check"
    try:
        path.mkdir(parents=True, exist_ok=True)
        marker.write_text("", encoding="utf-8")
        marker.unlink()
    except OSError as e:
        raise OutputError(f"output directory {path} is not writable: {e}") from e
    return path


def _fmt(value: float) -> str:
    return repr(float(value))


# ==================== RUN FILES ====================


def write_run_csv(path: Path, record: RunRecord, stride: int) -> Path:
    """
    Write the checkpoint rows of one run.

    Raises:
        OutputError: If the file cannot be written
    """
    cumulative = record.cumulative_regret
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(RUN_COLUMNS)
            for t, _ in record.checkpoints(stride):
                i = t - 1
                writer.writerow(
                    [t, int(record.phase[i]), int(record.action_label[i]), _fmt(record.reward[i]), _fmt(cumulative[i])]
                )
    except OSError as e:
        raise OutputError(f"could not write run file {path}: {e}") from e
    return path


def read_run_checkpoints(path: Path) -> List[Tuple[int, float]]:
    """(t, cum_regret) pairs of a run file."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            return [(int(row["t"]), float(row["cum_regret"])) for row in csv.DictReader(f)]
    except OSError as e:
        raise OutputError(f"could not read run file {path}: {e}") from e


def list_run_files(directory: Path) -> List[Tuple[str, int, int, Path]]:
    """Run files of a directory as (algorithm, d, rep, path), sorted."""
    found = []
    for item in sorted(Path(directory).iterdir()):
        key = parse_run_file_name(item.name)
        if key is not None and item.is_file():
            found.append((*key, item))
    return found


# ==================== AGGREGATE AND MANIFEST ====================


def write_aggregate_csv(path: Path, aggregate: AggregateResult) -> Path:
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(AGGREGATE_COLUMNS)
            for row in aggregate.rows:
                writer.writerow(
                    [row.algorithm, row.d, row.t, _fmt(row.mean_regret), _fmt(row.std_regret), row.n_runs]
                )
    except OSError as e:
        raise OutputError(f"could not write aggregate file {path}: {e}") from e
    return path


def read_aggregate_csv(path: Path) -> AggregateResult:
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            rows = [
                AggregateRow(
                    algorithm=row["algorithm"],
                    d=int(row["d"]),
                    t=int(row["t"]),
                    mean_regret=float(row["mean_regret"]),
                    std_regret=float(row["std_regret"]),
                    n_runs=int(row["n_runs"]),
                )
                for row in csv.DictReader(f)
            ]
    except OSError as e:
        raise OutputError(f"could not read aggregate file {path}: {e}") from e
    return AggregateResult(rows=rows)


def write_manifest(path: Path, data: Dict[str, Any]) -> Path:
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2, sort_keys=True, default=str)
            f.write("\n")
    except OSError as e:
        raise OutputError(f"could not write manifest {path}: {e}") from e
    return path


def load_manifest(path: Path) -> Optional[Dict[str, Any]]:
    """Manifest contents, None when the file does not exist."""
    path = Path(path)
    if not path.exists():
        return None
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (json.JSONDecodeError, OSError) as e:
        raise OutputError(f"could not load manifest {path}: {e}") from e
