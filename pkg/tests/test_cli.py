import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from wishartqbq import RngSeed
from wishartqbq.cli import CONVERGENCE_HEADER, SGD_HEADER, main
from wishartqbq.errors import ConfigError
from wishartqbq.experiments import (
    Experiment,
    ExperimentConfig,
    asgd_wins,
    build_sgd_setup,
    loglog_slope,
    moment_convergence,
    run_seeds,
    sgd_compare,
)
from wishartqbq.sgd import Method, SgdConfig, noise_metrics


def run_cli(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    rc = main([*argv, "--out", str(out)])
    return rc, out.read_text()


def parse(text):
    meta = [line for line in text.splitlines() if line.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(l for l in text.splitlines() if not l.startswith("#")))))
    return meta, rows[0], rows[1:]


class TestConfig:
    def test_empty_seeds(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(Experiment.MOMENT_CHECK, seeds=[])

    @pytest.mark.parametrize("grid", [(), (10, 10), (100, 10), (0, 10)])
    def test_bad_grid(self, grid):
        with pytest.raises(ConfigError):
            ExperimentConfig(Experiment.MOMENT_CONVERGENCE, sample_grid=grid)

    def test_sgd_needs_config(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(Experiment.SGD_COMPARE)


class TestMomentConvergence:
    def test_single_row(self, tmp_path):
        rc, text = run_cli(tmp_path, "moment-convergence", "--grid", "1", "--runs", "1")
        meta, header, rows = parse(text)
        assert rc == 0
        assert header == CONVERGENCE_HEADER
        assert len(rows) == 1 and rows[0][0] == "1"
        assert "# sampling=nested" in meta
        assert all(line.startswith("# ") and "=" in line for line in meta)

    def test_m1_order_one(self):
        rows = moment_convergence(ExperimentConfig(Experiment.MOMENT_CONVERGENCE, sample_grid=(1,)))
        assert 0.5 <= rows[0].mean_rel_err <= 8

    def test_monotone_over_invocations(self):
        monotone = 0
        for seed in range(10):
            rows = moment_convergence(ExperimentConfig(Experiment.MOMENT_CONVERGENCE, seeds=run_seeds(seed, 10)))
            errs = [r.mean_rel_err for r in rows]
            monotone += all(b < a for a, b in zip(errs, errs[1:]))
        assert monotone >= 9

    def test_rows_nonnegative(self, tmp_path):
        _, text = run_cli(tmp_path, "moment-convergence", "--grid", "1,10,100", "--runs", "3")
        _, _, rows = parse(text)
        assert [int(r[0]) for r in rows] == [1, 10, 100]
        assert all(float(r[1]) >= 0 and float(r[2]) >= 0 for r in rows)


class TestSgdCompare:
    def test_header_and_layout(self, tmp_path):
        rc, text = run_cli(tmp_path, "sgd-compare", "--iters", "2000", "--stride", "500", "--runs", "2")
        meta, header, rows = parse(text)
        assert rc == 0
        assert header == SGD_HEADER
        per_run = int(next(m for m in meta if m.startswith("# rows_per_run=")).split("=")[1])
        assert len(rows) == 2 * per_run
        assert {r[0] for r in rows} == {"sgd", "asgd"}
        assert rows[per_run // 2 - 1][1] == "2000"

    def test_zero_step_constant_gradient(self, tmp_path):
        _, text = run_cli(tmp_path, "sgd-compare", "--iters", "300", "--stride", "100", "--gamma", "0", "--runs", "1")
        _, _, rows = parse(text)
        for method in ("sgd", "asgd"):
            g = {r[2] for r in rows if r[0] == method}
            assert len(g) == 1

    def test_cov_dist_zero_at_optimum(self):
        model, _ = build_sgd_setup(10, 1.0, 5.0, RngSeed(1, 0).generator())
        assert noise_metrics(model, np.zeros(10), np.zeros(10), model.scale) == (0.0, 0.0)

    def test_csv_verdict_matches_runs(self, tmp_path):
        args = ["sgd-compare", "--iters", "3000", "--stride", "300", "--runs", "2", "--seed", "5"]
        _, text = run_cli(tmp_path, *args)
        meta, _, rows = parse(text)
        cfg = ExperimentConfig(Experiment.SGD_COMPARE, seeds=run_seeds(5, 2),
                               sgd=SgdConfig(max_iters=3000, record_stride=300))
        runs = sgd_compare(cfg)
        per_run = len(runs[0][Method.SGD].records)
        for i, run in enumerate(runs):
            block = rows[2 * per_run * i: 2 * per_run * (i + 1)]
            final = {r[0]: float(r[2]) for r in block if int(r[1]) == 3000}
            assert final["sgd"] == run[Method.SGD].records[-1].grad_norm
            assert final["asgd"] == run[Method.ASGD].records[-1].grad_norm
        assert len(asgd_wins(runs)) == 2


class TestMomentCheck:
    def test_random_pass(self, tmp_path):
        rc, text = run_cli(tmp_path, "moment-check", "--n", "10", "--k", "3", name="r.txt")
        assert rc == 0
        assert text.strip().endswith("PASS")

    def test_scalar_identity_reports_fifteen(self, tmp_path):
        rc, text = run_cli(tmp_path, "moment-check", "--n", "1", "--k", "3", "--runs", "1", "--identity", name="r.txt")
        assert rc == 0
        assert "algebraic=15 eigen=15 kronecker=15" in text

    def test_sweep(self, tmp_path):
        rc, text = run_cli(tmp_path, "moment-check", "--n", "8", "--k", "7", "--runs", "50", name="r.txt")
        assert rc == 0
        assert "50/50 PASS" in text


class TestErrors:
    def test_bad_grid_exit_code(self, capsys):
        assert main(["moment-convergence", "--grid", "10,1"]) != 0
        assert "error[config]" in capsys.readouterr().err

    def test_unwritable_path(self, capsys, tmp_path):
        assert main(["moment-check", "--out", str(tmp_path / "missing" / "x.txt")]) != 0
        assert "error[io]" in capsys.readouterr().err

    def test_bad_runs(self, capsys):
        assert main(["moment-check", "--runs", "0"]) != 0
        assert "error[config]" in capsys.readouterr().err

    def test_bad_gamma(self, capsys):
        assert main(["sgd-compare", "--gamma", "-1"]) != 0
        assert "error[config]" in capsys.readouterr().err

    def test_bad_cond(self, capsys):
        assert main(["sgd-compare", "--cond", "0.5", "--iters", "10", "--runs", "1"]) != 0
        assert "error[invalid-parameter]" in capsys.readouterr().err

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "wishartqbq", "moment-check", "--n", "1", "--runs", "1",
                               "--identity"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "PASS" in proc.stdout


def test_loglog_slope_exact():
    x = np.array([1.0, 10.0, 100.0])
    assert loglog_slope(x, 3 * x**-0.5) == pytest.approx(-0.5)
