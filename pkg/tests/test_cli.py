import json
import subprocess
import sys

import pytest

from onebit_crew import cli


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def test_design_stdout(tmp_path, capsys):
    cfg = write(tmp_path / "s.json", {"N": 6, "outer_cap": 3})
    assert cli.main(["design", "--config", cfg, "--algorithm", "crew_cyclic", "--seed", "7"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["algorithm"] == "crew_cyclic" and out["seed"] == 7 and out["scenario"]["N"] == 6


def test_design_out_dir_and_oracle_flag(tmp_path):
    cfg = write(tmp_path / "s.json", {"N": 5, "outer_cap": 2, "snapshots": 500})
    rc = cli.main(["design", "--config", cfg, "--oracle-mode", "false", "--out", str(tmp_path / "o")])
    assert rc == 0
    out = json.loads((tmp_path / "o" / "outcome.json").read_text())
    assert out["scenario"]["oracle_mode"] is False


def test_estimate_cov(tmp_path, capsys):
    cfg = write(tmp_path / "c.json", {"covariance": {"real": [[2, 1], [1, 3]], "imag": [[0, 0.5], [-0.5, 0]]},
                                      "snapshots": 20000})
    assert cli.main(["estimate-cov", "--config", cfg, "--seed", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["max_abs_error"] < 0.05
    assert out["estimate"]["real"][0][0] == 1.0


def test_sweep_exit_codes(tmp_path, monkeypatch):
    cfg = write(tmp_path / "w.json", {"scenario": {"outer_cap": 2}, "Ns": [4, 5], "trials": 1,
                                      "algorithms": ["can_mmf"], "name": "x"})
    assert cli.main(["sweep", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "plotdata_x.csv").exists()

    from onebit_crew import bench
    real = bench.design

    def flaky(alg, sc):
        if sc.N == 5:
            raise RuntimeError("boom")
        return real(alg, sc)

    monkeypatch.setattr(bench, "design", flaky)
    assert cli.main(["sweep", "--config", cfg, "--out", str(tmp_path / "p")]) == 2
    monkeypatch.setattr(bench, "design", lambda a, s: (_ for _ in ()).throw(RuntimeError("x")))
    assert cli.main(["sweep", "--config", cfg, "--out", str(tmp_path / "q")]) == 1


@pytest.mark.parametrize("argv", [
    ["sweep"],
    ["design", "--config", "/nonexistent/file.json"],
    ["estimate-cov"],
    ["sweep", "--config", "CFG", "--jobs", "0"],
])
def test_hard_errors(tmp_path, argv, capsys):
    cfg = write(tmp_path / "w.json", {"Ns": [4], "trials": 1})
    argv = [cfg if a == "CFG" else a for a in argv]
    assert cli.main(argv) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_key_is_hard_error(tmp_path):
    cfg = write(tmp_path / "s.json", {"N": 4, "tolerance": 1})
    assert cli.main(["design", "--config", cfg]) == 1


def test_bad_flag_values():
    with pytest.raises(SystemExit):
        cli.main(["design", "--oracle-mode", "maybe"])
    with pytest.raises(SystemExit):
        cli.main(["design", "--seed", "-1"])


def test_selftest_module_entry():
    r = subprocess.run([sys.executable, "-m", "onebit_crew", "selftest"], capture_output=True, text=True)
    assert r.returncode == 0, r.stdout + r.stderr
    assert "FAIL" not in r.stdout and r.stdout.count("PASS") >= 9
