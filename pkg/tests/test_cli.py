"""CLI verbs end to end through main(argv)."""

import pytest

from spinbath.cli import main
from spinbath.config import parse_config, read_series

RUN_YAML = """
preset: oscillation
dt: 0.05
seed: 31
model: {bath_spins: 2}
scheduler: {kind: one-leap, leap_steps: 2, leaps: 4}
propagator: {method: chebyshev, epsilon: 1.0e-8}
"""


@pytest.fixture
def run_config(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(RUN_YAML)
    return str(path)


class TestRun:
    def test_stdout_is_clean_csv(self, run_config, capsys):
        assert main(["run", "--config", run_config]) == 0
        out, err = capsys.readouterr()
        records = read_series(out, is_text=True)
        assert len(records) == 5
        assert "max norm drift" in err

    def test_out_file(self, run_config, tmp_path, capsys):
        dest = tmp_path / "series.csv"
        assert main(["run", "--config", run_config, "--out",
                     str(dest)]) == 0
        out, _ = capsys.readouterr()
        assert f"series -> {dest}" in out
        assert len(read_series(str(dest))) == 5

    def test_output_field_used(self, tmp_path, capsys):
        dest = tmp_path / "auto.csv"
        path = tmp_path / "cfg.yaml"
        path.write_text(RUN_YAML + f"output: {dest}\n")
        assert main(["run", "--config", str(path)]) == 0
        assert dest.exists()

    def test_seed_override_changes_series(self, run_config, capsys):
        main(["run", "--config", run_config])
        base = capsys.readouterr().out
        main(["run", "--config", run_config, "--seed-override", "99"])
        assert capsys.readouterr().out != base

    def test_threads_preserve_series(self, run_config, capsys):
        main(["run", "--config", run_config])
        base = capsys.readouterr().out
        main(["run", "--config", run_config, "--threads", "2"])
        assert capsys.readouterr().out == base

    def test_missing_config_exits_2(self, tmp_path, capsys):
        assert main(["run", "--config", str(tmp_path / "nope.yaml")]) == 2
        assert "config error" in capsys.readouterr().err

    def test_bad_yaml_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text(RUN_YAML.replace("dt: 0.05", "dt: fast"))
        assert main(["run", "--config", str(path)]) == 2
        assert "dt" in capsys.readouterr().err


class TestCompare:
    def test_table_and_out_dir(self, run_config, tmp_path, capsys):
        out_dir = tmp_path / "triple"
        assert main(["compare", "--config", run_config, "--out-dir",
                     str(out_dir)]) == 0
        out, _ = capsys.readouterr()
        assert "work ratio" in out
        for name in ("reference.csv", "candidate.csv", "baseline.csv",
                     "comparison.txt"):
            assert (out_dir / name).exists()
        ref = read_series(str(out_dir / "reference.csv"))
        cand = read_series(str(out_dir / "candidate.csv"))
        assert [r.time for r in ref] == [r.time for r in cand]


class TestPreset:
    def test_list(self, capsys):
        assert main(["preset", "--list"]) == 0
        out = capsys.readouterr().out
        assert "table1-test3" in out and "table3-test6" in out
        assert len(out.strip().splitlines()) == 8

    def test_bare_preset_lists_too(self, capsys):
        assert main(["preset"]) == 0
        assert "table2-test4" in capsys.readouterr().out

    def test_emit_config(self, capsys):
        assert main(["preset", "table1-test3", "--bath-spins", "4",
                     "--seed", "11"]) == 0
        cfg = parse_config(capsys.readouterr().out)
        assert cfg.preset == "oscillation"
        assert cfg.bath_spins == 4 and cfg.seed == 11
        assert cfg.scheduler.leaps == 800

    def test_emit_to_file_and_run(self, tmp_path, capsys):
        path = tmp_path / "scenario.yaml"
        assert main(["preset", "table3-test6", "--bath-spins", "2",
                     "--out", str(path)]) == 0
        capsys.readouterr()
        cfg = parse_config(path.read_text())
        assert cfg.preset == "pointer" and cfg.dt == 0.14

    def test_unknown_scenario_exits_2(self, capsys):
        assert main(["preset", "table9-test9"]) == 2
        assert "unknown scenario" in capsys.readouterr().err


class TestPlotData:
    def test_extract_columns(self, run_config, tmp_path, capsys):
        series = tmp_path / "series.csv"
        main(["run", "--config", run_config, "--out", str(series)])
        capsys.readouterr()
        assert main(["plot-data", str(series), "--columns",
                     "time,sz1,entropy_q"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "# time sz1 entropy_q"
        assert len(lines) == 6
        assert len(lines[1].split()) == 3

    def test_unknown_column_exits_2(self, run_config, tmp_path, capsys):
        series = tmp_path / "series.csv"
        main(["run", "--config", run_config, "--out", str(series)])
        capsys.readouterr()
        assert main(["plot-data", str(series), "--columns", "time,sq9"]) == 2
        assert "sq9" in capsys.readouterr().err
