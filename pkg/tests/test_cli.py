import csv
import json

import numpy as np
import pytest

from onedft.cli import main, read_config_file
from onedft.errors import ConfigError


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_solve_oscillator(tmp_path, capsys):
    assert run(tmp_path, "solve", "--system", "oscillator", "--omega", "1") == 0
    lam = float(capsys.readouterr().out.strip())
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["lambda"] == pytest.approx(0.5, abs=1e-4)
    assert lam == pytest.approx(report["lambda"], rel=1e-8)
    assert report["converged"] is True
    assert report["kinetic"] + report["potential_energy"] == pytest.approx(report["lambda"], rel=1e-6)
    d = rows(tmp_path / "density.csv")
    assert list(d[0]) == ["x", "rho", "sqrt_rho", "y"]
    assert len(d) == 4001


def test_solve_box_minimize(tmp_path, capsys):
    assert run(tmp_path, "solve", "--system", "box", "--L", "1", "--solver", "minimize") == 0
    assert float(capsys.readouterr().out) == pytest.approx(np.pi**2 / 2, rel=1e-5)
    d = rows(tmp_path / "density.csv")
    assert d[0]["y"] == "nan"  # the wall node has no slope


def test_solve_delta(tmp_path, capsys):
    assert run(tmp_path, "solve", "--system", "delta", "--g", "1") == 0
    assert float(capsys.readouterr().out) == pytest.approx(-0.5, rel=1e-2)


def test_solve_eigensolve(tmp_path, capsys):
    assert run(tmp_path, "solve", "--system", "oscillator", "--solver", "eigensolve") == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.5, abs=1e-5)


def test_lambda_echo_has_nine_digits(tmp_path, capsys):
    run(tmp_path, "solve", "--system", "delta", "--solver", "eigensolve")
    out = capsys.readouterr().out.strip()
    assert len(out.lstrip("-0.").replace(".", "")) <= 9
    assert out == f"{json.loads((tmp_path / 'report.json').read_text())['lambda']:.9g}"


def test_family_oscillator(tmp_path):
    assert run(tmp_path, "family", "--system", "oscillator", "--n", "1,2,4") == 0
    r = rows(tmp_path / "family_report.csv")
    assert [x["n"] for x in r] == ["1", "2", "4"]
    assert all(x["pass"] == "true" for x in r)
    assert [float(x["E_num"]) for x in r] == pytest.approx([1.0, 2.0, 4.0], rel=1e-4)
    for n in (1, 2, 4):
        assert (tmp_path / f"potential_n{n}.csv").exists()


def test_family_box_n2(tmp_path):
    assert run(tmp_path, "family", "--system", "box", "--n", "2") == 0
    (r,) = rows(tmp_path / "family_report.csv")
    assert float(r["E_num"]) == pytest.approx(2 * np.pi**2, rel=5e-3)
    v = rows(tmp_path / "potential_n2.csv")
    assert v[0]["V_n"] == "inf"


def test_family_delta_n1(tmp_path):
    assert run(tmp_path, "family", "--system", "delta", "--n", "1") == 0
    (r,) = rows(tmp_path / "family_report.csv")
    assert float(r["E_num"]) == pytest.approx(-1.0, rel=1e-2)


def test_family_verification_failure_exit(tmp_path):
    assert run(tmp_path, "family", "--system", "oscillator", "--grid-points", "41", "--n", "8") == 4


def test_table1_default(tmp_path):
    assert run(tmp_path, "table1") == 0
    r = rows(tmp_path / "table1_check.csv")
    assert len(r) == 12
    assert sum(x["quantity"] == "E0" for x in r) == 3
    assert all(x["pass"] == "true" for x in r)
    assert all(float(x["rel_err"]) < 1e-6 for x in r if x["quantity"] != "E0")


def test_table1_unit_independence(tmp_path):
    run(tmp_path / "a", "table1")
    assert run(tmp_path / "b", "table1", "--hbar", "2", "--mass", "3") == 0
    a, b = rows(tmp_path / "a" / "table1_check.csv"), rows(tmp_path / "b" / "table1_check.csv")
    assert [x["pass"] for x in a] == [x["pass"] for x in b]
    for x, y in zip(a, b):
        assert float(x["rel_err"]) == pytest.approx(float(y["rel_err"]), rel=0.05, abs=1e-9)


def test_table1_coarse_grid_second_order(tmp_path):
    run(tmp_path / "a", "table1", "--grid-points", "251")
    run(tmp_path / "b", "table1", "--grid-points", "501")
    a = {x["system"]: float(x["rel_err"]) for x in rows(tmp_path / "a" / "table1_check.csv") if x["quantity"] == "E0"}
    b = {x["system"]: float(x["rel_err"]) for x in rows(tmp_path / "b" / "table1_check.csv") if x["quantity"] == "E0"}
    for name in a:
        assert 3.5 <= a[name] / b[name] <= 4.5, name


def test_table1_deterministic(tmp_path):
    for d in ("a", "b"):
        assert run(tmp_path / d, "table1", "--seed", "7") == 0
    assert (tmp_path / "a" / "table1_check.csv").read_bytes() == (tmp_path / "b" / "table1_check.csv").read_bytes()


def test_no_convergence_exit(tmp_path):
    assert run(tmp_path, "solve", "--system", "oscillator", "--max-iter", "2") == 3
    assert json.loads((tmp_path / "report.json").read_text())["converged"] is False


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# oscillator run\nsystem = oscillator\nomega = 2\nsolver = minimize\n")
    assert run(tmp_path, "solve", "--config", str(cfg)) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0, abs=1e-4)
    assert run(tmp_path, "solve", "--config", str(cfg), "--omega", "3") == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.5, abs=1e-4)


@pytest.mark.parametrize(
    "text", ["colour = blue\n", "omega 2\n", "omega = fast\n", "command = solve\n"]
)
def test_config_file_rejects_bad_lines(tmp_path, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    with pytest.raises(ConfigError):
        read_config_file(cfg)
    assert run(tmp_path, "solve", "--config", str(cfg)) == 2


@pytest.mark.parametrize(
    "args",
    [
        ["solve", "--system", "bogus"],
        ["solve", "--system", "file"],
        ["solve", "--omega", "-1"],
        ["solve", "--xmin", "1"],
        ["solve", "--system", "box", "--xmin", "-0.2", "--xmax", "0.2"],
        ["family", "--n", "0,1"],
        ["solve", "--alpha", "2"],
    ],
)
def test_config_errors_exit_2(tmp_path, args):
    # argparse rejects some of these itself, also with status 2
    try:
        code = run(tmp_path, *args)
    except SystemExit as e:
        code = e.code
    assert code == 2


def test_tabulated_potential(tmp_path, capsys):
    x = np.linspace(-12, 12, 4801)
    table = tmp_path / "harm.csv"
    np.savetxt(table, np.c_[x, x**2 / 2], delimiter=",", header="x,V", comments="")
    args = ["solve", "--system", "file", "--potential-file", str(table), "--xmin", "-10", "--xmax", "10", "--grid-points", "2001"]
    assert run(tmp_path, *args) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.5, abs=1e-4)


def test_tabulated_potential_too_short(tmp_path):
    table = tmp_path / "short.csv"
    np.savetxt(table, np.c_[np.linspace(-1, 1, 11), np.zeros(11)], delimiter=",")
    assert run(tmp_path, "solve", "--system", "file", "--potential-file", str(table), "--xmin", "-2", "--xmax", "2") == 2


def test_tabulated_family_uses_solved_reference(tmp_path):
    x = np.linspace(-10, 10, 2001)
    table = tmp_path / "harm.csv"
    np.savetxt(table, np.c_[x, x**2 / 2], delimiter=",")
    assert run(tmp_path, "family", "--system", "file", "--potential-file", str(table), "--n", "2") == 0
    (r,) = rows(tmp_path / "family_report.csv")
    assert float(r["E_expected"]) == pytest.approx(2.0, rel=1e-4)
