import subprocess
import sys

import pytest

from fracgreen.cli import EXIT_DIVERGED, EXIT_FAIL, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_conjugate(capsys):
    code, out, _ = run(capsys, "eval", "--family", "conjugate2", "--alpha", "1", "--n", "3")
    lines = out.splitlines()
    assert code == EXIT_OK and lines[0] == "t,s,G" and len(lines) == 10
    assert "0.5,0.5,0.25" in lines


def test_eval_lidstone(capsys):
    _, out, _ = run(capsys, "eval", "--family", "lidstone4", "--alpha", "1", "--beta", "1", "--n", "3")
    row = [ln for ln in out.splitlines() if ln.startswith("0.5,0.5,")][0]
    assert float(row.split(",")[2]) == pytest.approx(0.0208333333333333)


def test_eval_warns_below_threshold(capsys):
    code, _, err = run(capsys, "eval", "--family", "rightfocal3", "--tau", "0.3",
                       "--alpha", "0.9", "--beta", "0.1", "--n", "3")
    assert code == EXIT_OK and "below the positivity threshold 0.348678" in err


def test_solve_linear_rows(capsys):
    code, out, _ = run(capsys, "solve", "--family", "conjugate2", "--h", "one", "--n", "5")
    lines = out.splitlines()
    assert code == EXIT_OK and lines[0] == "t,x"
    assert float(lines[3].split(",")[1]) == pytest.approx(0.125, abs=1e-15)
    assert lines[-1].startswith("#") and "residual=" in lines[-1] and "pass" in lines[-1]


def test_solve_threepoint_reduction(capsys):
    _, out, _ = run(capsys, "solve", "--family", "threepoint", "--alpha", "1", "--beta", "1",
                    "--delta3p", "0", "--eta3p", "0.5", "--h", "one", "--n", "5")
    assert float(out.splitlines()[3].split(",")[1]) == pytest.approx(0.125, abs=1e-15)


def test_solve_poly_forcing(capsys):
    code, out, _ = run(capsys, "solve", "--family", "cantilever4", "--alpha", "0.5", "--beta", "0.5",
                       "--gamma", "0.5", "--delta", "0.5", "--h", "poly:1", "--n", "5")
    rows = dict(ln.split(",") for ln in out.splitlines()[1:-1])
    assert code == EXIT_OK and float(rows["0.25"]) == pytest.approx(17 / 24, abs=1e-12)


def test_solve_divergence(capsys):
    code, _, err = run(capsys, "solve", "--family", "conjugate2", "--nonlinear",
                       "--lambda", "1000", "--f", "onepluxsq", "--n", "33")
    assert code == EXIT_DIVERGED and "diverged" in err


def test_solve_nonlinear_converges(capsys):
    code, out, _ = run(capsys, "solve", "--family", "lidstone4", "--alpha", "0.7", "--nonlinear",
                       "--lambda", "2", "--f", "onepluxsq", "--n", "65", "--picard-tol", "1e-6")
    assert code == EXIT_OK and "converged=True" in out.splitlines()[-1]


def test_verify_commands(capsys):
    code, out, _ = run(capsys, "verify", "--family", "lidstone4", "--alpha", "0.5", "--beta", "0.5")
    assert code == EXIT_OK and all("\tpass\t" in ln for ln in out.splitlines())
    code, out, _ = run(capsys, "verify", "--family", "rightfocal3", "--tau", "0.4")
    assert code == EXIT_FAIL
    assert any(ln.startswith("positivity") and "\tfail\t" in ln for ln in out.splitlines())
    code, _, _ = run(capsys, "verify", "--family", "conjugate2", "--alpha", "1", "--beta", "1")
    assert code == EXIT_OK


@pytest.mark.parametrize("fault", ["sign-flip", "perturb"])
def test_verify_faults(capsys, fault):
    code, _, _ = run(capsys, "verify", "--family", "cantilever4", "--alpha", "0.6", "--fault", fault)
    assert code == EXIT_FAIL


def test_scan_threshold(capsys):
    code, out, _ = run(capsys, "scan", "--family", "rightfocal3", "--tau", "0.5", "--param", "tau",
                       "--start", "0.3", "--stop", "0.7", "--steps", "5")
    assert code == EXIT_FAIL
    rows = [ln.split(",") for ln in out.splitlines()[1:]]
    status = {(float(r[0]), r[1].split("[")[0]): r[2] for r in rows}
    assert status[(0.3, "positivity")] == "fail" and status[(0.7, "positivity")] == "pass"


def test_sl2_flags(capsys):
    code, _, err = run(capsys, "eval", "--family", "sl2", "--n", "3")
    assert code == EXIT_USAGE and "gamma-bc" in err
    code, out, _ = run(capsys, "verify", "--family", "sl2", "--alpha", "0.6", "--beta", "0.8",
                       "--gamma-bc", "1", "--delta-bc", "0.5", "--eta-bc", "1", "--zeta-bc", "0.2")
    assert code == EXIT_OK, out


@pytest.mark.parametrize("argv", [
    ["eval", "--family", "bogus"],
    ["eval", "--family", "conjugate2", "--alpha", "0"],
    ["eval", "--family", "conjugate2", "--n", "2"],
    ["eval", "--family", "rightfocal3"],
    ["solve", "--family", "conjugate2", "--h", "sin"],
    ["solve", "--family", "threepoint", "--delta3p", "0.5"],
    ["verify", "--family", "conjugate2", "--tol", "0"],
    ["frobnicate"],
    [],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == EXIT_USAGE


def test_csv_deterministic_and_out_file(capsys, tmp_path):
    args = ["eval", "--family", "cantilever4", "--alpha", "0.3", "--beta", "0.7", "--n", "4"]
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second
    path = tmp_path / "g.csv"
    code, out, _ = run(capsys, *args, "--out", str(path))
    assert code == EXIT_OK and out == "" and path.read_text() == first


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fracgreen", "eval", "--family", "rightfocal2",
                           "--n", "3"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("t,s,G")
