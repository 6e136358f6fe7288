"""
Experiment runner.

Expands an ExperimentConfig into one task per (algorithm, d, repetition),
runs the tasks (in worker processes when jobs > 1), writes one CSV per run,
then aggregates after all tasks have finished and writes the aggregate and
the manifest. Output is a pure function of the configuration.
"""

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import List, NamedTuple, Tuple

from .. import __version__
from ..algorithms.baselines import run_truncated_ucb
from ..algorithms.medpe import run_medpe
from ..core.context import SeedContext
from ..core.enums import AlgorithmName
from ..core.models import RunRecord
from ..storage.records import (
    AGGREGATE_FILE,
    MANIFEST_FILE,
    ensure_output_dir,
    list_run_files,
    read_run_checkpoints,
    run_file_name,
    write_aggregate_csv,
    write_manifest,
    write_run_csv,
)
from .aggregate import AggregateResult, aggregate_series, collect
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

Checkpoints = List[Tuple[int, float]]


class RunTask(NamedTuple):
    algorithm: AlgorithmName
    d: int
    rep: int

    def seed_context(self, master_seed: int) -> SeedContext:
        return SeedContext(master_seed=master_seed, algorithm=self.algorithm.value, d=self.d, rep=self.rep)


class ExperimentOutcome(NamedTuple):
    aggregate: AggregateResult
    output_dir: Path
    run_files: List[Path]


# ==================== SINGLE RUNS ====================


def simulate(cfg: ExperimentConfig, algorithm: AlgorithmName, d: int, rep: int = 0) -> RunRecord:
    """One run of one algorithm on the configured environment at dimension d."""
    instance = cfg.environment.instance(d)
    context = RunTask(algorithm, d, rep).seed_context(cfg.master_seed)
    if algorithm == AlgorithmName.MEDPE:
        return run_medpe(instance, cfg.medpe_config(), context)
    return run_truncated_ucb(instance, cfg.ucb_config(), cfg.T, context)


def _execute(cfg: ExperimentConfig, task: RunTask) -> Tuple[RunTask, Checkpoints, Path]:
    record = simulate(cfg, task.algorithm, task.d, task.rep)
    path = write_run_csv(cfg.output_dir / run_file_name(task.algorithm.value, task.d, task.rep), record, cfg.checkpoint_stride)
    return task, record.checkpoints(cfg.checkpoint_stride), path


def expand_tasks(cfg: ExperimentConfig) -> List[RunTask]:
    return [RunTask(a, d, rep) for a in cfg.algorithms for d in cfg.dims for rep in range(cfg.repetitions)]


# ==================== EXPERIMENTS ====================


def run_experiment(cfg: ExperimentConfig) -> ExperimentOutcome:
    """
    Execute every repetition, persist the runs, aggregate and write the manifest.

    Raises:
        OutputError: The output directory is not writable (checked before any run)
    """
    out = ensure_output_dir(cfg.output_dir)
    tasks = expand_tasks(cfg)
    logger.info("experiment: %d runs, T=%d, dims=%s, jobs=%d", len(tasks), cfg.T, cfg.dims, cfg.jobs)

    results: List[Tuple[RunTask, Checkpoints, Path]] = []
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [pool.submit(_execute, cfg, task) for task in tasks]
            for done, future in enumerate(as_completed(futures), start=1):
                results.append(future.result())
                logger.info("finished %d/%d runs", done, len(tasks))
    else:
        for done, task in enumerate(tasks, start=1):
            results.append(_execute(cfg, task))
            logger.info("finished %d/%d runs", done, len(tasks))

    results.sort(key=lambda item: (item[0].algorithm.value, item[0].d, item[0].rep))
    aggregate = aggregate_series(collect((t.algorithm.value, t.d, t.rep, series) for t, series, _ in results))
    write_aggregate_csv(out / AGGREGATE_FILE, aggregate)

    manifest = {
        "library_version": __version__,
        "config": cfg.to_manifest(),
        "runs": [
            {**task.seed_context(cfg.master_seed).to_dict(), "file": path.name}
            for task, _, path in results
        ],
    }
    write_manifest(out / MANIFEST_FILE, manifest)
    return ExperimentOutcome(aggregate=aggregate, output_dir=out, run_files=[path for _, _, path in results])


def aggregate_directory(directory: Path) -> AggregateResult:
    """Rebuild the aggregate from the run files of a directory and rewrite it."""
    directory = Path(directory)
    runs = collect((a, d, rep, read_run_checkpoints(path)) for a, d, rep, path in list_run_files(directory))
    aggregate = aggregate_series(runs)
    write_aggregate_csv(directory / AGGREGATE_FILE, aggregate)
    return aggregate
