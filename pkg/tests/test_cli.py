import csv
import json
import os
import subprocess
import sys

import pytest

from optlearn.cli import VOI_COLUMNS, main

RUN_ARGS = ["run", "--problem", "equal_prior", "--param", "n_arms=5", "--policy", "kg",
            "--policy", "ie:z_alpha=1.5", "--policy", "expl", "--budget", "12",
            "--replications", "4", "--seed", "3"]


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run_module(args, env_extra=None, cwd=None):
    env = dict(os.environ)
    env.update(env_extra or {})
    return subprocess.run([sys.executable, "-m", "optlearn", *args], capture_output=True,
                          text=True, env=env, cwd=cwd)


class TestRun:
    def test_outputs_and_schema(self, tmp_path, capsys):
        assert main(RUN_ARGS + ["--output-dir", str(tmp_path)]) == 0
        for name in ("results.csv", "summary.csv", "trajectory.csv", "meta.json"):
            assert (tmp_path / name).exists()
        rows = read_csv(tmp_path / "results.csv")
        assert {r["policy"] for r in rows} == {"kg", "ie(z=1.5)", "expl"}
        assert all(float(r["oc"]) >= 0 for r in rows)
        meta = json.loads((tmp_path / "meta.json").read_text())
        assert meta["seed"] == 3
        assert not list(tmp_path.glob("*.tmp*"))
        assert "mean_oc" in capsys.readouterr().out

    def test_same_seed_is_byte_identical_across_threads(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        r1 = run_module(RUN_ARGS + ["--output-dir", str(a)], {"OPTLEARN_THREADS": "1"})
        r2 = run_module(RUN_ARGS + ["--output-dir", str(b)], {"OPTLEARN_THREADS": "4"})
        assert r1.returncode == 0 and r2.returncode == 0, r1.stderr + r2.stderr
        for name in ("results.csv", "summary.csv", "trajectory.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "c.toml"
        cfg.write_text('[problem]\nname = "equal_prior"\nn_arms = 4\n\n[[policy]]\nkind = "kg"\n\n'
                       f'[run]\nbudget = 6\nreplications = 2\nseed = 1\noutput_dir = "{tmp_path / "o"}"\n')
        assert main(["run", "--config", str(cfg)]) == 0
        assert len(read_csv(tmp_path / "o" / "summary.csv")) == 1

    @pytest.mark.parametrize("args", [
        ["run", "--problem", "equal_prior", "--budget", "5"],
        ["run", "--problem", "equal_prior", "--policy", "kg", "--budget", "0"],
        ["run", "--problem", "equal_prior", "--policy", "bogus", "--budget", "5"],
        ["run", "--config", "/nonexistent/x.toml"],
        ["frobnicate"],
        ["run", "--budget", "abc"],
    ])
    def test_config_errors_exit_two(self, args, tmp_path):
        assert main(args + ["--output-dir", str(tmp_path)] if args[0] == "run" and "abc" not in args
                    else args) == 2


class TestOtherCommands:
    def test_bound_single(self, capsys):
        assert main(["bound", "--n", "1"]) == 0
        assert capsys.readouterr().out.strip() == "1.0"
        assert main(["bound", "--n", "0"]) == 2

    def test_bound_table(self, capsys):
        assert main(["bound", "--n-min", "1", "--n-max", "3"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "n,lp_bound,kg_guarantee_bound"
        assert float(lines[2].split(",")[1]) == pytest.approx(0.75)

    def test_voi_csv(self, tmp_path):
        out = tmp_path / "v.csv"
        assert main(["voi", "--points", "3", "--z1-max", "3", "--z2-max", "3", "--samples", "2000",
                     "--output", str(out)]) == 0
        rows = read_csv(out)
        assert tuple(rows[0].keys()) == VOI_COLUMNS
        assert len(rows) == 9
        for r in rows:
            assert abs(float(r["v_closed"]) - float(r["v_mc"])) <= 5 * float(r["mc_se"]) + 1e-12
            assert r["in_submodular_region"] == "True"

    def test_check_report(self, tmp_path, capsys):
        out = tmp_path / "c.json"
        assert main(["check", "--output", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["counterexample"]["increased"] is True
        assert report["counterexample"]["sweep_all_increased"] is True
        # unequal means: the closed-form table is not submodular
        assert report["submodularity"]["is_submodular"] is False
        assert json.loads(capsys.readouterr().out) == report

    def test_check_equal_means_submodular(self, capsys):
        assert main(["check", "--submodularity", "--theta1", "0", "--theta2", "0"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["submodularity"]["is_submodular"] is True
        assert "counterexample" not in report

    def test_check_bad_prior(self):
        assert main(["check", "--counterexample", "--theta1", "0", "--theta2", "1"]) == 2

    def test_tune(self, tmp_path, capsys):
        out = tmp_path / "t.csv"
        assert main(["tune", "--problem", "equal_prior", "--param", "n_arms=4", "--kind", "ie",
                     "--grid", "2,0.5", "--budget", "8", "--replications", "3",
                     "--output", str(out)]) == 0
        rows = read_csv(out)
        assert [float(r["z_alpha"]) for r in rows] == [0.5, 2.0]
        assert "best z_alpha" in capsys.readouterr().out
