import pandas as pd
import pytest

from estimate.errors import GridError, ReplicateError
from simulate.grid_cells import ExperimentConfig, GridCell
from simulate.mc_harness import CSV_COLUMNS, TableRow, cell_key, run_cell, run_table


def _tiny_grid(**settings):
    grid = {
        "name": "tiny",
        "seed": 11,
        "replications": 3,
        "B": 25,
        "blocks": [
            {"n": [16], "d": [2], "family": ["clayton"], "tau_before": [0.5], "b": [0.5]},
            {"n": [16], "d": [2], "family": ["gumbel"], "tau_before": [0.2], "tau_after": [0.8], "t": [0.5],
             "b": [0.25], "statistics": ["S_nm", "S_n"]},
        ],
    }
    grid.update(settings)
    return grid


def test_table_row_percentages() -> None:
    cell = GridCell(n=200, d=2, family="clayton", tau_before=0.25, tau_after=0.25, b=0.5)
    row = TableRow(cell=cell, reps=200, B=1000, seed=5, rejections={"S_nm": 10})
    assert row.reject_pct("S_nm") == pytest.approx(5.0)
    assert row.se_pct("S_nm") == pytest.approx(1.5411, abs=1e-4)
    [csv] = row.csv_rows()
    assert list(csv) == CSV_COLUMNS
    assert csv["reject_pct"] == "5.00"
    assert csv["se_pct"] == "1.54"
    assert csv["tau_before"] == "0.25"
    assert csv["t"] == "1"
    assert tuple(csv[c] for c in CSV_COLUMNS[:9]) == cell_key(cell, "S_nm")


def test_level_one_rejects_every_replicate() -> None:
    cell = GridCell(n=40, d=2, family="clayton", tau_before=0.2, tau_after=0.9, b=0.5, t=0.5)
    cfg = ExperimentConfig(cell=cell, replications=4, alpha=1.0, B=60, statistics=("S_nm", "S_n"), master_seed=1)
    row = run_cell(cfg)
    assert row.reject_pct("S_nm") == 100.0
    assert row.reject_pct("S_n") == 100.0
    assert row.se_pct("S_nm") == 0.0


def test_cell_result_does_not_depend_on_threads() -> None:
    cell = GridCell(n=20, d=2, family="gumbel", tau_before=0.5, tau_after=0.5, b=0.25)
    cfg = ExperimentConfig(cell=cell, replications=6, B=30, master_seed=4)
    assert run_cell(cfg, threads=1).rejections == run_cell(cfg, threads=3).rejections


def test_failures_carry_the_replicate_index() -> None:
    cell = GridCell(n=20, d=2, family="clayton", tau_before=0.5, tau_after=0.5, b=0.5)
    cfg = ExperimentConfig(cell=cell, replications=2, B=10, multipliers="dependent", bandwidth=40)
    with pytest.raises(ReplicateError) as info:
        run_cell(cfg)
    assert info.value.replicate == 0


def test_run_table_writes_csv_and_text(tmp_path) -> None:
    out = tmp_path / "tiny.csv"
    table = run_table(_tiny_grid(), str(out))
    assert list(table.columns) == CSV_COLUMNS
    assert len(table) == 3
    assert table["stat"].tolist() == ["S_nm", "S_nm", "S_n"]
    assert pd.read_csv(out, dtype=str).shape == (3, len(CSV_COLUMNS))
    text = (tmp_path / "tiny.txt").read_text().splitlines()
    assert len(text) == 4
    assert "reject_pct" in text[0]


def test_rerun_and_thread_count_give_identical_files(tmp_path) -> None:
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    run_table(_tiny_grid(), str(first), threads=1)
    run_table(_tiny_grid(), str(second), threads=4)
    assert first.read_bytes() == second.read_bytes()


def test_resume_skips_finished_cells(tmp_path) -> None:
    full, resumed = tmp_path / "full.csv", tmp_path / "resumed.csv"
    run_table(_tiny_grid(), str(full))
    partial = _tiny_grid()
    partial["blocks"] = partial["blocks"][:1]
    run_table(partial, str(resumed))
    run_table(_tiny_grid(), str(resumed), resume=True)
    assert resumed.read_bytes() == full.read_bytes()


def test_empty_grid_gives_header_only_csv(tmp_path) -> None:
    out = tmp_path / "empty.csv"
    run_table({"name": "empty", "seed": 0, "blocks": []}, str(out))
    assert out.read_text().strip() == ",".join(CSV_COLUMNS)


def test_resume_from_foreign_csv_is_rejected(tmp_path) -> None:
    out = tmp_path / "other.csv"
    out.write_text("a,b\n1,2\n")
    with pytest.raises(GridError):
        run_table(_tiny_grid(), str(out), resume=True)
