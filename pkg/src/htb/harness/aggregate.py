"""
Aggregation of per-run regret checkpoints into mean/std curves.
"""

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..core.errors import DomainError

# (algorithm, d) -> list over repetitions of [(t, cumulative regret), ...]
RunSeries = Dict[Tuple[str, int], List[List[Tuple[int, float]]]]


class AggregateRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    algorithm: str
    d: int = Field(ge=1)
    t: int = Field(ge=1)
    mean_regret: float
    std_regret: float = Field(ge=0)
    n_runs: int = Field(ge=1)


class AggregateResult(BaseModel):
    """Rows sorted by (algorithm, d, t); std is the population std over runs."""

    model_config = ConfigDict(frozen=True)

    rows: List[AggregateRow] = Field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def algorithms(self) -> List[str]:
        return sorted({row.algorithm for row in self.rows})

    @property
    def dims(self) -> List[int]:
        return sorted({row.d for row in self.rows})

    def series(self, algorithm: str, d: int) -> List[AggregateRow]:
        return [row for row in self.rows if row.algorithm == algorithm and row.d == d]

    def final(self, algorithm: str, d: int) -> Optional[AggregateRow]:
        rows = self.series(algorithm, d)
        return rows[-1] if rows else None


def aggregate_series(runs: RunSeries) -> AggregateResult:
    """
    Mean and standard deviation at every checkpoint.

    Raises:
        DomainError: Runs of one (algorithm, d) cell disagree on their checkpoints
    """
    rows: List[AggregateRow] = []
    for (algorithm, d) in sorted(runs):
        cell = runs[(algorithm, d)]
        if not cell:
            continue
        times = [t for t, _ in cell[0]]
        for series in cell[1:]:
            if [t for t, _ in series] != times:
                raise DomainError(f"runs of {algorithm} at d={d} have different checkpoints")
        values = np.array([[v for _, v in series] for series in cell], dtype=np.float64)
        means = values.mean(axis=0)
        stds = values.std(axis=0)
        for k, t in enumerate(times):
            rows.append(
                AggregateRow(
                    algorithm=algorithm,
                    d=d,
                    t=t,
                    mean_regret=float(means[k]),
                    std_regret=float(stds[k]),
                    n_runs=len(cell),
                )
            )
    return AggregateResult(rows=rows)


def final_by_dimension(aggregate: AggregateResult) -> Dict[str, List[Tuple[int, float, float]]]:
    """Per algorithm, (d, mean, std) of the final checkpoint: regret versus d."""
    out: Dict[str, List[Tuple[int, float, float]]] = {}
    for algorithm in aggregate.algorithms:
        for d in aggregate.dims:
            row = aggregate.final(algorithm, d)
            if row is not None:
                out.setdefault(algorithm, []).append((d, row.mean_regret, row.std_regret))
    return out


def loglog_slope(times: Sequence[float], values: Sequence[float], t_min: float = 0.0) -> float:
    """Least-squares slope of log(value) against log(t) over t >= t_min."""
    t = np.asarray(times, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    keep = (t >= t_min) & (v > 0)
    if np.count_nonzero(keep) < 2:
        raise DomainError("need two positive points to fit a slope")
    return float(np.polyfit(np.log(t[keep]), np.log(v[keep]), 1)[0])


def collect(rows: Iterable[Tuple[str, int, int, List[Tuple[int, float]]]]) -> RunSeries:
    """Group (algorithm, d, rep, series) tuples into RunSeries ordered by rep."""
    grouped: Dict[Tuple[str, int], List[Tuple[int, List[Tuple[int, float]]]]] = {}
    for algorithm, d, rep, series in rows:
        grouped.setdefault((algorithm, d), []).append((rep, series))
    return {key: [s for _, s in sorted(items, key=lambda item: item[0])] for key, items in grouped.items()}
