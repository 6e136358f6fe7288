"""
Plot-data emission: (x, mean, std) series per algorithm and dimension.

No plotting happens here; the files are meant for offline tools.
"""

import csv
import json
from pathlib import Path
from typing import Union

from ..core.enums import PlotFormat
from ..core.errors import OutputError
from .aggregate import AggregateResult, AggregateRow, final_by_dimension

PLOT_COLUMNS = ["series", "algorithm", "d", "x", "mean", "std", "n_runs"]
JSON_SCHEMA = "htb-plot-data/1"


def series_name(algorithm: str, d: int) -> str:
    return f"{algorithm}:d={d}"


def emit_plot_data(aggregate: AggregateResult, fmt: Union[PlotFormat, str], path: Path) -> Path:
    """
    Write the aggregate as plot series.

    CSV has one row per (series, checkpoint); an empty aggregate gives a
    header-only file. JSON lists the series with their columns plus the
    final regret against d per algorithm.

    Raises:
        OutputError: If the file cannot be written
    """
    fmt = PlotFormat(fmt)
    path = Path(path)
    try:
        if fmt == PlotFormat.CSV:
            with open(path, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(PLOT_COLUMNS)
                for row in aggregate.rows:
                    writer.writerow(
                        [
                            series_name(row.algorithm, row.d),
                            row.algorithm,
                            row.d,
                            row.t,
                            repr(row.mean_regret),
                            repr(row.std_regret),
                            row.n_runs,
                        ]
                    )
        else:
            payload = {
                "schema": JSON_SCHEMA,
                "x": "t",
                "series": [
                    {
                        "name": series_name(algorithm, d),
                        "algorithm": algorithm,
                        "d": d,
                        "x": [r.t for r in rows],
                        "mean": [r.mean_regret for r in rows],
                        "std": [r.std_regret for r in rows],
                        "n_runs": [r.n_runs for r in rows],
                    }
                    for algorithm in aggregate.algorithms
                    for d in aggregate.dims
                    if (rows := aggregate.series(algorithm, d))
                ],
                "final_by_d": {
                    algorithm: [{"d": d, "mean": m, "std": s} for d, m, s in points]
                    for algorithm, points in final_by_dimension(aggregate).items()
                },
            }
            with open(path, "w", encoding="utf-8") as f:
                json.dump(payload, f, indent=2)
                f.write("\n")
    except OSError as e:
        raise OutputError(f"could not write plot data {path}: {e}") from e
    return path


def read_plot_csv(path: Path) -> AggregateResult:
    """Aggregate back from a CSV written by emit_plot_data."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            rows = [
                AggregateRow(
                    algorithm=row["algorithm"],
                    d=int(row["d"]),
                    t=int(row["x"]),
                    mean_regret=float(row["mean"]),
                    std_regret=float(row["std"]),
                    n_runs=int(row["n_runs"]),
                )
                for row in csv.DictReader(f)
            ]
    except OSError as e:
        raise OutputError(f"could not read plot data {path}: {e}") from e
    return AggregateResult(rows=rows)
