"""
Tests for the experiment harness: configuration, discretization, exponents,
aggregation, plot data and the runner.
"""

import json
import logging
import math

import numpy as np
import pytest

from htb.core.enums import AlgorithmName, PlotFormat, PresetName
from htb.core.errors import ConfigError, DomainError, OutputError
from htb.core.models import NoiseSpec
from htb.harness.aggregate import (
    AggregateResult,
    aggregate_series,
    collect,
    final_by_dimension,
    loglog_slope,
)
from htb.algorithms.medpe import phase_budget
from htb.harness.config import (
    PRESET_BUDGET_SCALE,
    EnvironmentSpec,
    ExperimentConfig,
    build_config,
    default_output_dir,
    preset_values,
)
from htb.harness.discretize import discretize_action_set, discretize_for_horizon, resolution_for_horizon
from htb.harness.exponents import exponent_sweep, theory_exponents
from htb.harness.plots import PLOT_COLUMNS, emit_plot_data, read_plot_csv
from htb.harness.runner import aggregate_directory, expand_tasks, run_experiment, simulate
from htb.storage.records import read_run_checkpoints


# ==================== CONFIGURATION ====================


def test_presets():
    appendix = preset_values(PresetName.APPENDIX_D)
    assert appendix["dims"] == [10, 20, 40]
    assert appendix["T"] == 100_000 and appendix["repetitions"] == 10
    cfg = build_config({**appendix, "T": 10_000})
    assert cfg.checkpoint_stride == 1000
    assert cfg.algorithms == [AlgorithmName.MEDPE, AlgorithmName.CRTM_STYLE_UCB]
    assert cfg.medpe_config().budget_scale == PRESET_BUDGET_SCALE
    assert cfg.to_manifest()["budget_scale"] == PRESET_BUDGET_SCALE


def test_preset_budget_scale_leaves_phase_one_early():
    cfg = build_config(preset_values(PresetName.APPENDIX_D)).medpe_config()
    for d in (10, 40):
        n = 2 * d
        m_value = d**0.5 + d**0.75
        tau_1 = phase_budget(cfg, 0.5, m_value, 1, n)
        through_phase_4 = sum(phase_budget(cfg, 2.0**-ell, m_value, ell, n) for ell in range(1, 5))
        assert tau_1 < cfg.T // 100
        assert through_phase_4 < cfg.T


def test_environment_spec_builds_the_signed_basis_instance():
    instance = EnvironmentSpec().instance(4)
    assert instance.action_set.size == 8
    np.testing.assert_allclose(instance.theta_star, np.full(4, 0.5))
    with pytest.raises(ValueError):
        EnvironmentSpec(action_set="hypercube_random")


def test_build_config_reports_bad_values():
    with pytest.raises(ConfigError, match="T"):
        build_config({"T": 0})
    with pytest.raises(ConfigError):
        build_config({"T": 100, "checkpoint_stride": 7})
    with pytest.raises(ConfigError):
        build_config({"dims": []})


def test_upsilon_defaults_to_the_noise_moment():
    cfg = build_config({"epsilon": 1.0, "noise": NoiseSpec.gaussian(2.0)})
    assert cfg.moment().upsilon == pytest.approx(4.0)
    infinite = build_config({"epsilon": 1.0})
    with pytest.raises(ConfigError, match="upsilon"):
        infinite.moment()
    assert build_config({"epsilon": 1.0, "upsilon": 3.0}).moment().upsilon == 3.0


def test_output_dir_from_environment(monkeypatch, tmp_path):
    assert str(default_output_dir()) == "htb-results"
    monkeypatch.setenv("HTB_OUT", str(tmp_path))
    assert default_output_dir() == tmp_path
    assert build_config({}).output_dir == tmp_path


# ==================== DISCRETIZATION ====================


def test_discretize_interval_and_circle():
    np.testing.assert_allclose(discretize_action_set("interval", 3).vectors[:, 0], [0.0, 0.5, 1.0])
    circle = discretize_action_set("circle", 4)
    np.testing.assert_allclose(circle.vectors, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-12)


def test_discretize_hypercube_and_sphere():
    assert discretize_action_set("hypercube", 3, d=2).size == 9
    sphere = discretize_action_set("sphere", 3, d=3)
    assert sphere.size == 26
    np.testing.assert_allclose(np.linalg.norm(sphere.vectors, axis=1), 1.0)


def test_discretize_errors():
    with pytest.raises(DomainError):
        discretize_action_set("interval", 1)
    with pytest.raises(DomainError):
        discretize_action_set("hypercube", 4)


def test_resolution_for_horizon():
    assert resolution_for_horizon("interval", 100) == 101
    assert resolution_for_horizon("circle", 10) == math.ceil(20 * math.pi)
    assert discretize_for_horizon("interval", 9).size == 10


@pytest.mark.slow
def test_discretize_caps_large_grids(caplog):
    with caplog.at_level(logging.WARNING, logger="htb.harness.discretize"):
        arms = discretize_for_horizon("hypercube", 100_000, d=3)
    assert arms.size == 1_000_000
    assert "exceeds" in caplog.text


# ==================== EXPONENTS ====================


def test_finite_variance_exponents():
    row = theory_exponents(1.0, 10)
    assert row.upper.d_exp == pytest.approx(1.0)
    assert row.upper.T_exp == pytest.approx(0.5)
    assert row.lower.d_exp == pytest.approx(1.0)
    assert row.prior_upper.d_exp == 1.0


def test_heavy_tail_exponents_approach_linear_regret():
    row = theory_exponents(1e-9, 10)
    assert row.upper.T_exp == pytest.approx(1.0)
    assert row.lower.T_exp == pytest.approx(1.0)


def test_matern_exponents_match_at_finite_variance():
    row = theory_exponents(1.0, 1, nu=2.5)
    assert row.matern_upper_T == pytest.approx(3.5 / 6.0)
    assert row.matern_lower_T == pytest.approx(row.matern_upper_T)


def test_finite_arm_exponents():
    row = theory_exponents(0.5, 16, n=256)
    assert row.finite_upper.d_exp == 0.5
    assert row.finite_upper.log_exp == pytest.approx(1 / 3)
    assert row.finite_lower_value == pytest.approx(16 ** (1 / 3) * 2 ** (1 / 3))
    assert row.upper.evaluate(16, 1000) == pytest.approx(16 ** (2.5 / 3) * 1000 ** (2 / 3))


def test_exponent_errors_and_sweep():
    with pytest.raises(DomainError):
        theory_exponents(0.0, 3)
    with pytest.raises(DomainError):
        theory_exponents(0.5, 3, n=1)
    sweep = exponent_sweep([0.25, 0.5, 1.0], 4)
    assert [r.epsilon for r in sweep] == [0.25, 0.5, 1.0]
    assert sweep[0].upper.T_exp > sweep[-1].upper.T_exp


# ==================== AGGREGATION ====================


def _grid_aggregate(algorithms=("medpe", "crtm_style_ucb"), dims=(2, 4, 8)):
    rows = []
    for a in algorithms:
        for d in dims:
            for rep in range(2):
                rows.append((a, d, rep, [(10, 0.1 * d + rep / 3), (20, 0.2 * d + rep / 7)]))
    return aggregate_series(collect(rows))


def test_aggregate_mean_and_population_std():
    runs = collect([("medpe", 2, 1, [(5, 3.0)]), ("medpe", 2, 0, [(5, 1.0)])])
    result = aggregate_series(runs)
    row = result.rows[0]
    assert (row.mean_regret, row.std_regret, row.n_runs) == (2.0, 1.0, 2)


def test_aggregate_rejects_mismatched_checkpoints():
    with pytest.raises(DomainError):
        aggregate_series(collect([("medpe", 2, 0, [(5, 1.0)]), ("medpe", 2, 1, [(6, 1.0)])]))


def test_final_by_dimension():
    result = _grid_aggregate()
    finals = final_by_dimension(result)
    assert [d for d, _, _ in finals["medpe"]] == [2, 4, 8]
    assert finals["medpe"][0][1] == pytest.approx(0.4 + (1 / 7) / 2)


def test_loglog_slope():
    t = np.array([10.0, 100.0, 1000.0])
    assert loglog_slope(t, 3 * np.sqrt(t)) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        loglog_slope(t, np.zeros(3))


# ==================== PLOT DATA ====================


def test_empty_aggregate_gives_header_only(tmp_path):
    path = emit_plot_data(AggregateResult(), PlotFormat.CSV, tmp_path / "plot.csv")
    assert path.read_text(encoding="utf-8") == ",".join(PLOT_COLUMNS) + "\n"


def test_plot_csv_rows_and_round_trip(tmp_path):
    result = _grid_aggregate()
    path = emit_plot_data(result, "csv", tmp_path / "plot.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert sum(1 for line in lines[1:] if line.split(",")[3] == "20") == 6
    assert read_plot_csv(path) == result


def test_plot_json_is_self_describing(tmp_path):
    result = _grid_aggregate(algorithms=("medpe",), dims=(2,))
    path = emit_plot_data(result, "json", tmp_path / "plot.json")
    payload = json.loads(path.read_text(encoding="utf-8"))
    assert payload["schema"] == "htb-plot-data/1"
    assert payload["series"][0]["name"] == "medpe:d=2"
    assert payload["series"][0]["x"] == [10, 20]
    assert payload["final_by_d"]["medpe"][0]["d"] == 2


def test_plot_data_unwritable(tmp_path):
    with pytest.raises(OutputError):
        emit_plot_data(AggregateResult(), "csv", tmp_path / "missing" / "plot.csv")


# ==================== RUNNER ====================


def _small_config(out, **overrides):
    values = {
        "dims": [2],
        "T": 600,
        "repetitions": 2,
        "checkpoint_stride": 100,
        "epsilon": 0.5,
        "budget_scale": 1e-6,
        "output_dir": out,
    }
    values.update(overrides)
    return build_config(values)


def _snapshot(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_expand_tasks(tmp_path):
    tasks = expand_tasks(_small_config(tmp_path, dims=[2, 3]))
    assert len(tasks) == 2 * 2 * 2
    assert tasks[0].algorithm == AlgorithmName.MEDPE and tasks[0].rep == 0


def test_simulate_single_run(tmp_path):
    record = simulate(_small_config(tmp_path), AlgorithmName.MEDPE, 2, rep=1)
    assert len(record) == 600
    assert record.algorithm == "med-pe"


def test_run_experiment_files_and_determinism(tmp_path):
    cfg = _small_config(tmp_path / "out")
    outcome = run_experiment(cfg)
    files = _snapshot(outcome.output_dir)
    run_files = [name for name in files if name.startswith("run_")]
    assert len(run_files) == 4
    assert "aggregate.csv" in files and "manifest.json" in files

    run_experiment(cfg)
    assert _snapshot(outcome.output_dir) == files

    manifest = json.loads(files["manifest.json"])
    assert len(manifest["runs"]) == 4
    assert all("seed" in run and "file" in run for run in manifest["runs"])


def test_aggregate_matches_run_files(tmp_path):
    outcome = run_experiment(_small_config(tmp_path))
    for algorithm in ("medpe", "crtm_style_ucb"):
        finals = [read_run_checkpoints(tmp_path / f"run_{algorithm}_d2_rep{rep}.csv")[-1][1] for rep in range(2)]
        assert outcome.aggregate.final(algorithm, 2).mean_regret == pytest.approx(np.mean(finals))
        for series in (read_run_checkpoints(tmp_path / f"run_{algorithm}_d2_rep{rep}.csv") for rep in range(2)):
            values = [v for _, v in series]
            assert values == sorted(values)
    assert aggregate_directory(tmp_path) == outcome.aggregate


def test_single_arm_zero_noise_experiment(tmp_path):
    cfg = _small_config(
        tmp_path, dims=[1], T=200, repetitions=1, checkpoint_stride=50, action_set="simplex_basis", noise=NoiseSpec.zero()
    )
    outcome = run_experiment(cfg)
    assert [row.t for row in outcome.aggregate.series("medpe", 1)] == [50, 100, 150, 200]
    assert all(row.mean_regret == 0.0 for row in outcome.aggregate.rows)


def test_unwritable_output_fails_before_running(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x", encoding="utf-8")
    with pytest.raises(OutputError):
        run_experiment(_small_config(blocker / "out"))


@pytest.mark.slow
def test_parallel_runs_match_serial(tmp_path):
    serial = run_experiment(_small_config(tmp_path / "serial"))
    parallel = run_experiment(_small_config(tmp_path / "parallel", jobs=2))
    assert serial.aggregate == parallel.aggregate
    for path in serial.run_files:
        assert path.read_bytes() == (tmp_path / "parallel" / path.name).read_bytes()


# ==================== REGRET VERSUS DIMENSION ====================


@pytest.fixture(scope="module")
def appendix_outcome(tmp_path_factory):
    values = preset_values(PresetName.APPENDIX_D)
    values.update(output_dir=tmp_path_factory.mktemp("appendix"), jobs=4)
    return run_experiment(build_config(values))


@pytest.mark.slow
def test_medpe_is_no_worse_than_the_baseline_at_d40(appendix_outcome):
    aggregate = appendix_outcome.aggregate
    assert aggregate.final("medpe", 40).mean_regret <= aggregate.final("crtm_style_ucb", 40).mean_regret


@pytest.mark.slow
def test_regret_difference_is_nonincreasing_in_d(appendix_outcome):
    finals = final_by_dimension(appendix_outcome.aggregate)
    medpe = {d: mean for d, mean, _ in finals["medpe"]}
    ucb = {d: mean for d, mean, _ in finals["crtm_style_ucb"]}
    differences = [medpe[d] - ucb[d] for d in (10, 20, 40)]
    assert differences[1] <= differences[0]
    assert differences[2] <= differences[1]


@pytest.mark.slow
def test_medpe_regret_is_sublinear_at_d10(appendix_outcome):
    series = appendix_outcome.aggregate.series("medpe", 10)
    times = [row.t for row in series]
    means = [row.mean_regret for row in series]
    assert loglog_slope(times, means, t_min=10_000) < 0.95
    manifest = json.loads((appendix_outcome.output_dir / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["config"]["budget_scale"] == PRESET_BUDGET_SCALE
