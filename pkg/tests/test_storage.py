"""
Tests for run, aggregate and manifest files.
"""

import numpy as np
import pytest

from htb.core.errors import OutputError
from htb.core.models import RunRecord
from htb.harness.aggregate import AggregateResult, AggregateRow
from htb.storage.records import (
    RUN_COLUMNS,
    ensure_output_dir,
    list_run_files,
    load_manifest,
    parse_run_file_name,
    read_aggregate_csv,
    read_run_checkpoints,
    run_file_name,
    write_aggregate_csv,
    write_manifest,
    write_run_csv,
)


def _record():
    return RunRecord(
        seed=7,
        algorithm="med-pe",
        horizon=4,
        t=[1, 2, 3, 4],
        phase=[1, 1, 2, 2],
        action_label=[0, 1, 0, 0],
        reward=[0.5, -0.25, 1.0 / 3.0, 0.0],
        gap=[0.0, 0.1, 0.0, 0.2],
    )


def test_run_file_names():
    name = run_file_name("crtm_style_ucb", 40, 9)
    assert name == "run_crtm_style_ucb_d40_rep9.csv"
    assert parse_run_file_name(name) == ("crtm_style_ucb", 40, 9)
    assert parse_run_file_name("aggregate.csv") is None


def test_write_run_csv_checkpoints(tmp_path):
    path = write_run_csv(tmp_path / run_file_name("medpe", 2, 0), _record(), stride=3)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(RUN_COLUMNS)
    assert lines[1].split(",")[:3] == ["3", "2", "0"]
    assert [t for t, _ in read_run_checkpoints(path)] == [3, 4]
    assert read_run_checkpoints(path)[-1][1] == pytest.approx(0.1 + 0.2)
    assert float(lines[1].split(",")[3]) == 1.0 / 3.0


def test_list_run_files_skips_other_files(tmp_path):
    write_run_csv(tmp_path / run_file_name("medpe", 4, 1), _record(), stride=1)
    write_run_csv(tmp_path / run_file_name("medpe", 4, 0), _record(), stride=1)
    (tmp_path / "notes.txt").write_text("x", encoding="utf-8")
    found = list_run_files(tmp_path)
    assert [(a, d, rep) for a, d, rep, _ in found] == [("medpe", 4, 0), ("medpe", 4, 1)]


def test_aggregate_round_trip(tmp_path):
    aggregate = AggregateResult(
        rows=[AggregateRow(algorithm="medpe", d=2, t=10, mean_regret=0.1 + 0.2, std_regret=np.sqrt(2.0), n_runs=3)]
    )
    path = write_aggregate_csv(tmp_path / "aggregate.csv", aggregate)
    assert read_aggregate_csv(path) == aggregate


def test_manifest_round_trip(tmp_path):
    assert load_manifest(tmp_path / "manifest.json") is None
    path = write_manifest(tmp_path / "manifest.json", {"b": 1, "a": [1, 2], "path": tmp_path})
    text = path.read_text(encoding="utf-8")
    assert text.index('"a"') < text.index('"b"')
    assert load_manifest(path)["path"] == str(tmp_path)


def test_corrupt_manifest(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(OutputError):
        load_manifest(path)


def test_ensure_output_dir(tmp_path):
    created = ensure_output_dir(tmp_path / "a" / "b")
    assert created.is_dir()
    assert list(created.iterdir()) == []
    blocker = tmp_path / "file"
    blocker.write_text("x", encoding="utf-8")
    with pytest.raises(OutputError):
        ensure_output_dir(blocker / "sub")
