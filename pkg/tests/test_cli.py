import subprocess
import sys

import pytest

from renewal_lab.cli import main
from renewal_lab.harness import csvio


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_system_b(capsys):
    code, out, _ = run_cli(capsys, "solve", "--env", "systemB", "--q", 0.7)
    assert code == 0
    assert out.splitlines()[0] == "theta_star=1.13188434"
    assert "t_star=1.30384048" in out


def test_solve_system_a(capsys):
    code, out, _ = run_cli(capsys, "solve", "--env", "systemA", "--p", 0.25)
    assert code == 0
    assert out.splitlines()[0] == "theta_star=2.5"
    code, out, _ = run_cli(capsys, "solve", "--env", "systemA", "--p", 0.75)
    assert out.splitlines()[0] == "theta_star=1.71428571"


@pytest.mark.parametrize("argv", [
    ["solve", "--env", "systemA", "--p", "0.25", "--bogus"],
    ["solve", "--env", "systemD", "--p", "0.25"],
    ["solve", "--env", "systemA"],
    ["solve", "--env", "systemA", "--p", "1.5"],
    ["solve", "--env", "systemC", "--p", "0.3"],
    ["solve", "--env", "systemA", "--p", "0.25", "--theta-min", "1"],
    ["run", "--env", "systemA", "--p", "0.7", "--frames", "10"],
    ["run", "--env", "systemA", "--p", "0.7", "--frames", "10", "--seed", "1", "--policies", "oracle"],
    ["run", "--env", "systemA", "--p", "0.7", "--frames", "0", "--seed", "1"],
    ["run", "--env", "systemA", "--p", "0.7", "--frames", "10", "--seed", "1", "--checkpoints", "20"],
    ["probe", "--deltas", "0.7", "--frames", "10", "--seed", "1"],
    [],
])
def test_usage_errors_exit_2(capsys, argv, tmp_path):
    code, _, err = run_cli(capsys, *argv, *(["--out", tmp_path] if argv[:1] in (["run"], ["probe"]) else []))
    assert code == 2
    assert err


def test_runtime_error_exits_1(capsys):
    code, _, err = run_cli(capsys, "solve", "--env", "systemA", "--p", 0.25, "--theta-min", 2.6, "--theta-max", 3)
    assert code == 1
    assert "sign change" in err


def test_run_is_byte_identical(capsys, tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code, _, _ = run_cli(capsys, "run", "--env", "systemA", "--p", 0.7, "--frames", 10, "--paths", 1,
                             "--seed", 1, "--out", out)
        assert code == 0
        outs.append(out)
    files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*.csv"))
    assert {str(f) for f in files} >= {"trajectories/proposed/path_0000.csv", "summary_proposed.csv",
                                      "sums_proposed.csv", "final.csv", "bounds.csv", "paths_proposed.csv"}
    for f in files:
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
    traj = (outs[0] / "trajectories/proposed/path_0000.csv").read_bytes()
    assert traj.startswith(b"frame,theta,t,r,cum_ratio\n")
    assert b"\r" not in traj
    assert len(traj.splitlines()) == 11
    rows = csvio.read_rows(outs[0] / "bounds.csv")
    assert list(rows[0]) == ["checkpoint", "bound_name", "empirical", "bound", "slack"]


def test_compare_rate_probe(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "compare", "--env", "systemC", "--p", 0.6, "--frames", 50, "--paths", 20,
                           "--seed", 3, "--theta-min", 0, "--theta-max", 50, "--out", tmp_path / "c")
    assert code == 0
    assert "rejection_rate=" in out and "greedy:" in out
    final = csvio.read_rows(tmp_path / "c" / "final.csv")
    assert [r["policy"] for r in final] == ["proposed", "greedy"]

    code, out, _ = run_cli(capsys, "rate", "--env", "systemB", "--q", 0.7, "--frames", 512, "--paths", 20,
                           "--seed", 3, "--theta-min", 1, "--theta-max", 2, "--out", tmp_path / "r")
    assert code == 0
    assert csvio.read_rows(tmp_path / "r" / "rate.csv")[0]["metric"] == "mse"

    code, out, _ = run_cli(capsys, "probe", "--deltas", "0.2,0.01", "--frames", 8, "--paths", 10, "--seed", 3,
                           "--out", tmp_path / "p")
    assert code == 0
    rows = csvio.read_rows(tmp_path / "p" / "probe.csv")
    assert sorted({float(r["p"]) for r in rows}) == pytest.approx([0.3, 0.49, 0.51, 0.7])


def test_console_module_entry():
    res = subprocess.run([sys.executable, "-m", "renewal_lab", "solve", "--env", "systemA", "--p", "0.25"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("theta_star=2.5\n")


def test_all_checkpoints(capsys, tmp_path):
    code, _, _ = run_cli(capsys, "compare", "--env", "systemA", "--p", 0.3, "--frames", 7, "--paths", 4,
                         "--seed", 2, "--checkpoints", "all", "--out", tmp_path)
    assert code == 0
    rows = csvio.read_rows(tmp_path / "summary_proposed.csv")
    assert [int(r["checkpoint"]) for r in rows] == list(range(1, 8))
