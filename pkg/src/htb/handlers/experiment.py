"""
Handlers for running bandit algorithms: single runs, full experiments and
re-aggregation of existing run files.
"""

import logging

from ..cli.commands import Invocation, register_command
from ..cli.results import CommandResult, create_success_result
from ..core.enums import PlotFormat
from ..harness.aggregate import final_by_dimension
from ..harness.config import default_output_dir
from ..harness.plots import emit_plot_data
from ..harness.runner import RunTask, aggregate_directory, run_experiment, simulate
from ..storage.records import ensure_output_dir, run_file_name, write_run_csv
from .utils import experiment_config, first_dim

logger = logging.getLogger(__name__)

EXPERIMENT_OPTIONS = {
    "algorithms",
    "dims",
    "T",
    "repetitions",
    "master_seed",
    "epsilon",
    "upsilon",
    "output_dir",
    "checkpoint_stride",
    "jobs",
    "preset",
    "action_set",
    "arm_count",
    "action_seed",
    "noise",
    "noise_alpha",
    "noise_sigma",
    "noise_df",
    "estimator",
    "budget_scale",
    "ucb_width_scale",
    "ucb_regularizer",
}


@register_command(
    command_id="simulate",
    description="Run one algorithm once and write its run file",
    options=EXPERIMENT_OPTIONS - {"repetitions", "jobs"},
    examples=[
        "htb simulate --algo medpe --d 10 --T 10000 --seed 7",
        "htb simulate --algo ucb --d 4 --T 2000 --noise student_t",
    ],
)
def simulate_handler(invocation: Invocation) -> CommandResult:
    """Single run of the first configured algorithm at the first configured d."""
    cfg = experiment_config(invocation)
    algorithm = cfg.algorithms[0]
    d = first_dim(cfg)
    out = ensure_output_dir(cfg.output_dir)
    record = simulate(cfg, algorithm, d)
    path = write_run_csv(out / run_file_name(algorithm.value, d, 0), record, cfg.checkpoint_stride)
    return create_success_result(
        operation="simulated",
        subject=f"{algorithm.display_name} d={d}",
        attributes={
            "seed": RunTask(algorithm, d, 0).seed_context(cfg.master_seed).seed,
            "horizon": cfg.T,
            "final_regret": record.final_regret,
            "phases": len(record.phases),
            "run_file": str(path),
        },
    )


@register_command(
    command_id="experiment",
    description="Run every (algorithm, d, repetition) of a preset or config file",
    options=EXPERIMENT_OPTIONS,
    examples=[
        "htb experiment --preset appendix-d --jobs 8",
        "htb experiment --preset smoke --out /tmp/htb",
        "htb experiment --config study.cfg --reps 3",
    ],
)
def experiment_handler(invocation: Invocation) -> CommandResult:
    cfg = experiment_config(invocation)
    outcome = run_experiment(cfg)
    attributes = {
        "output_dir": str(outcome.output_dir),
        "runs": len(outcome.run_files),
    }
    for algorithm, points in final_by_dimension(outcome.aggregate).items():
        for d, mean, std in points:
            attributes[f"{algorithm} d={d}"] = f"{mean:.6g} +/- {std:.3g}"
    return create_success_result(
        operation="finished",
        subject=f"experiment {invocation.get('preset', 'custom')}",
        attributes=attributes,
    )


@register_command(
    command_id="aggregate",
    description="Rebuild the aggregate of a results directory and emit plot data",
    options={"output_dir", "format"},
    examples=["htb aggregate --out htb-results --format json"],
)
def aggregate_handler(invocation: Invocation) -> CommandResult:
    directory = invocation.get("output_dir") or default_output_dir()
    fmt = PlotFormat(invocation.get("format", PlotFormat.CSV.value))
    aggregate = aggregate_directory(directory)
    plot_path = emit_plot_data(aggregate, fmt, directory / f"plot_data.{fmt.value}")
    return create_success_result(
        operation="aggregated",
        subject=str(directory),
        attributes={
            "rows": len(aggregate),
            "algorithms": ", ".join(aggregate.algorithms) or "-",
            "dims": ", ".join(str(d) for d in aggregate.dims) or "-",
            "plot_data": str(plot_path),
        },
    )
