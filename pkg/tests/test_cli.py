"""Command line interface: configs, commands, exit codes."""

import math
import subprocess
import sys

import numpy as np
import pytest

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

import sdf_stability as sd
from sdf_stability import cli

BENCH_TOML = """
[crra-cv]
beta = 0.998
gamma = 2.5
mu_c = 0.0015
mu_d = 0.0015
sigma_c = 0.0078
sigma_d = 0.035
rho = 0.979
sigma = 0.00034
varphi = 1.0
"""

TOY_SOLVE_TOML = """
[finite-crra]
beta = 0.5
gamma = 0.0
mu_c = 0.0
mu_d = 0.0
sigma_c = 0.0
sigma_d = 0.0
states = [0.0]
P = [[1.0]]
"""


def _write(tmp_path, text, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _lphi_line(out):
    for line in out.splitlines():
        if line.startswith("lphi: "):
            return float(line.split()[1])
    raise AssertionError(f"no lphi line in {out!r}")


class TestConfigParsing:
    @pytest.mark.parametrize("factory", [sd.crra_cv_benchmark, sd.habit_base,
                                         sd.ez_by_benchmark,
                                         sd.ez_ssy_benchmark])
    def test_format_round_trips(self, factory):
        model = factory()
        back = cli.model_from_config(tomllib.loads(cli.format_config(model)))
        assert back == model

    def test_finite_chain_round_trips(self, small_chain):
        model = sd.FiniteCrraParams(beta=0.985, gamma=2.0, mu_c=0.0015,
                                    mu_d=0.0015, sigma_c=0.0078,
                                    sigma_d=0.035, chain=small_chain)
        back = cli.model_from_config(tomllib.loads(cli.format_config(model)))
        np.testing.assert_array_equal(back.chain.states, small_chain.states)
        np.testing.assert_array_equal(back.chain.P, small_chain.P)
        assert back.beta == model.beta and back.gamma == model.gamma

    def test_unknown_table_rejected(self):
        with pytest.raises(cli.UsageError, match="mystery"):
            cli.model_from_config({"mystery": {}})

    def test_two_families_rejected(self):
        with pytest.raises(cli.UsageError):
            cli.model_from_config({"habit": {}, "crra-cv": {}})

    def test_unknown_key_listed_in_error(self):
        cfg = {"risk-neutral": {"beta": 0.9, "betta": 0.8}}
        with pytest.raises(cli.UsageError, match="betta"):
            cli.model_from_config(cfg)


class TestLphiCommand:
    def test_analytic_benchmark(self, tmp_path, capsys):
        cfg = _write(tmp_path, BENCH_TOML)
        code = cli.main(["lphi", "--config", cfg])
        out = capsys.readouterr().out
        assert code == 0
        assert "method: analytic" in out
        assert "family: crra-cv" in out
        assert "lphi: -0.00315448" in out
        assert "verdict: STABLE" in out

    def test_boundary_is_indeterminate(self, tmp_path, capsys):
        cfg = _write(tmp_path, "[risk-neutral]\nbeta = 1.0\n")
        code = cli.main(["lphi", "--config", cfg])
        assert code == 3
        assert "verdict: INDETERMINATE" in capsys.readouterr().out

    def test_unstable_exit_code(self, tmp_path, capsys):
        toml = BENCH_TOML.replace("sigma_d = 0.035", "sigma_d = 0.5")
        cfg = _write(tmp_path, toml)
        code = cli.main(["lphi", "--config", cfg])
        assert code == 2
        assert "verdict: UNSTABLE" in capsys.readouterr().out

    def test_spectral_tracks_analytic(self, tmp_path, capsys):
        cfg = _write(tmp_path, BENCH_TOML)
        code = cli.main(["lphi", "--config", cfg, "--method", "spectral",
                         "--states", "15"])
        assert code == 0
        got = _lphi_line(capsys.readouterr().out)
        assert got == pytest.approx(sd.lphi_analytic(sd.crra_cv_benchmark()),
                                    abs=1e-5)

    def test_mc_method_reports_spread_with_reps(self, tmp_path, capsys):
        cfg = _write(tmp_path, BENCH_TOML)
        code = cli.main(["lphi", "--config", cfg, "--method", "mc", "--n",
                         "50", "--m", "200", "--seed", "3", "--reps", "2"])
        out = capsys.readouterr().out
        assert code == 0
        assert "std_error: " in out

    def test_mc_threads_do_not_change_output(self, tmp_path, capsys):
        cfg = _write(tmp_path, BENCH_TOML)
        cli.main(["lphi", "--config", cfg, "--method", "mc", "--n", "40",
                  "--m", "300", "--seed", "9", "--threads", "1"])
        one = capsys.readouterr().out
        cli.main(["lphi", "--config", cfg, "--method", "mc", "--n", "40",
                  "--m", "300", "--seed", "9", "--threads", "4"])
        four = capsys.readouterr().out
        assert one == four

    def test_out_file_mirrors_stdout(self, tmp_path, capsys):
        cfg = _write(tmp_path, BENCH_TOML)
        out_path = tmp_path / "report.txt"
        cli.main(["lphi", "--config", cfg, "--out", str(out_path)])
        assert out_path.read_text() == capsys.readouterr().out

    def test_method_from_config_table(self, tmp_path, capsys):
        cfg = _write(tmp_path, BENCH_TOML
                     + "\n[method]\nname = \"spectral\"\nstates = 12\n")
        code = cli.main(["lphi", "--config", cfg])
        assert code == 0
        assert "method: spectral" in capsys.readouterr().out

    def test_flag_overrides_config(self, tmp_path, capsys):
        cfg = _write(tmp_path, BENCH_TOML
                     + "\n[method]\nname = \"spectral\"\n")
        cli.main(["lphi", "--config", cfg, "--method", "analytic"])
        assert "method: analytic" in capsys.readouterr().out

    def test_usage_errors_exit_one(self, tmp_path, capsys):
        bad_key = _write(tmp_path, BENCH_TOML + "\nfoo = 1.0\n", "bad.toml")
        assert cli.main(["lphi", "--config", bad_key]) == 1
        assert "foo" in capsys.readouterr().err
        assert cli.main(["lphi", "--config", str(tmp_path / "nope.toml")]) == 1
        capsys.readouterr()
        assert cli.main(["lphi"]) == 1  # no model table
        assert cli.main(["lphi", "--config", _write(tmp_path, BENCH_TOML),
                         "--n", "abc", "--method", "mc"]) == 1

    def test_parameter_errors_exit_one(self, tmp_path, capsys):
        cfg = _write(tmp_path, "[risk-neutral]\nbeta = 1.5\n")
        assert cli.main(["lphi", "--config", cfg]) == 1
        assert "beta" in capsys.readouterr().err


class TestSolveCommand:
    def test_toy_contract_price(self, tmp_path, capsys):
        cfg = _write(tmp_path, TOY_SOLVE_TOML)
        code = cli.main(["solve", "--config", cfg])
        captured = capsys.readouterr()
        assert code == 0
        lines = captured.out.strip().splitlines()
        assert lines[0] == "state,h_star"
        state, h = (float(v) for v in lines[1].split(","))
        assert state == 0.0
        # h = 0.5 h + 0.5 has solution 1
        assert h == pytest.approx(1.0, abs=1e-9)

    def test_out_writes_csv(self, tmp_path, capsys):
        cfg = _write(tmp_path, TOY_SOLVE_TOML)
        out_path = tmp_path / "h.csv"
        code = cli.main(["solve", "--config", cfg, "--out", str(out_path)])
        assert code == 0
        assert out_path.read_text().startswith("state,h_star")

    def test_unstable_exit_two(self, tmp_path, capsys):
        toml = TOY_SOLVE_TOML.replace("beta = 0.5", "beta = 0.99").replace(
            "states = [0.0]", "states = [0.5]")
        cfg = _write(tmp_path, toml)
        code = cli.main(["solve", "--config", cfg])
        err = capsys.readouterr().err
        assert code == 2
        assert "unstable" in err and "ln_r" in err


class TestSolveWcCommand:
    def test_solve_save_then_reuse(self, tmp_path, capsys):
        toml = (cli.format_config(sd.ez_by_benchmark())
                + "\n[method]\nsizes = [7, 5]\nspan = 3.0\ngh_nodes = 3\n")
        cfg = _write(tmp_path, toml)
        wc_path = tmp_path / "wc.npz"
        code = cli.main(["solve-wc", "--config", cfg, "--out", str(wc_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "dims: z,sigma" in out
        assert wc_path.exists()
        code = cli.main(["lphi", "--config", cfg, "--method", "mc", "--n",
                         "30", "--m", "64", "--seed", "1", "--wc",
                         str(wc_path)])
        assert code in (0, 2, 3)
        assert "lphi: " in capsys.readouterr().out

    def test_rejects_non_recursive_family(self, tmp_path, capsys):
        cfg = _write(tmp_path, BENCH_TOML)
        assert cli.main(["solve-wc", "--config", cfg]) == 1


class TestTable1Command:
    def test_tiny_grid_deterministic(self, tmp_path, capsys):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        for out in (out1, out2):
            code = cli.main(["table1", "--n", "20,30", "--m", "40,60",
                             "--reps", "2", "--seed", "5", "--out", str(out)])
            assert code == 0
        assert out1.read_text() == out2.read_text()
        rows = sd.read_table1_csv(out1)
        assert [(r[0], r[1]) for r in rows] == [(20, 40), (20, 60),
                                                (30, 40), (30, 60)]
        assert all(math.isfinite(r[2]) and r[3] > 0 for r in rows)


class TestDiscCurveCommand:
    def test_header_and_convergence(self, tmp_path, capsys):
        out_path = tmp_path / "curve.csv"
        code = cli.main(["disc-curve", "--states", "8", "--out",
                         str(out_path)])
        assert code == 0
        lines = out_path.read_text().strip().splitlines()
        assert lines[0] == "n_states,lphi,abs_error_vs_analytic"
        rows = [line.split(",") for line in lines[1:]]
        assert [int(r[0]) for r in rows] == list(range(2, 9))
        assert float(rows[-1][2]) < 1e-5

    def test_rejects_non_crra_model(self, tmp_path, capsys):
        cfg = _write(tmp_path, "[risk-neutral]\nbeta = 0.9\n")
        assert cli.main(["disc-curve", "--config", cfg]) == 1


class TestSweepCommand:
    def test_single_cell_matches_closed_form(self, tmp_path, capsys):
        toml = (cli.format_config(sd.habit_base())
                + "\n[sweep.param1]\nname = \"beta\"\nmin = 0.96\n"
                  "max = 0.96\ncount = 1\n"
                  "[sweep.param2]\nname = \"sigma\"\nmin = 0.15\n"
                  "max = 0.15\ncount = 1\n")
        cfg = _write(tmp_path, toml)
        out_path = tmp_path / "map.csv"
        code = cli.main(["sweep", "--config", cfg, "--out", str(out_path)])
        assert code == 0
        back = sd.read_sweep_csv(out_path)
        assert back["lphi"][0] == pytest.approx(
            sd.lphi_analytic(sd.habit_base()), abs=1e-15)

    def test_unknown_sweep_key_exits_one(self, tmp_path, capsys):
        toml = (cli.format_config(sd.habit_base())
                + "\n[sweep.param1]\nname = \"beta\"\nmin = 0.9\nmax = 0.95\n"
                  "count = 2\nstep = 0.1\n"
                  "[sweep.param2]\nname = \"sigma\"\nmin = 0.1\nmax = 0.2\n"
                  "count = 2\n")
        cfg = _write(tmp_path, toml)
        assert cli.main(["sweep", "--config", cfg]) == 1
        assert "step" in capsys.readouterr().err

    def test_needs_config(self, capsys):
        assert cli.main(["sweep"]) == 1


class TestConsoleScript:
    def test_entry_point_runs(self, tmp_path):
        cfg = _write(tmp_path, "[risk-neutral]\nbeta = 0.97\n")
        proc = subprocess.run([sys.executable, "-m", "sdf_stability.cli",
                               "lphi", "--config", cfg],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "verdict: STABLE" in proc.stdout
