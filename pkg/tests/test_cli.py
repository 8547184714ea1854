import json
import subprocess
import sys

import pytest

from charwave.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_symmetry_find_system1(capsys):
    code, out, _ = run(capsys, "symmetry", "find", "--system", "system1", "--deg-xt", "1", "--deg-uv", "1")
    assert code == 0
    assert "nullspace dimension 5" in out


def test_symmetry_find_json(capsys):
    code, out, _ = run(capsys, "symmetry", "find", "--system", "system1", "--deg-xt", "0", "--deg-uv", "0",
                       "--json", "-")
    data = json.loads(out)
    assert code == 0 and data["dimension"] == 3
    assert set(data["generators"]) == {"Dx", "Dt", "Dv"}


def test_symmetry_find_gas_contains_listed(capsys):
    code, out, _ = run(capsys, "symmetry", "find", "--system", "gas-reduced", "--deg-xt", "2", "--deg-uv", "2",
                       "--json", "-")
    assert code == 0 and json.loads(out)["dimension"] >= 10


def test_symmetry_verify_exit_codes(capsys):
    assert run(capsys, "symmetry", "verify", "--system", "system1", "--builtin", "system1:w1..w5")[0] == 0
    assert run(capsys, "symmetry", "verify", "--system", "system1", "--generator", "Du")[0] == 1
    code, _, err = run(capsys, "symmetry", "verify", "--system", "system1")
    assert code == 0 and "warning" in err


def test_symmetry_factorize(capsys, monkeypatch):
    monkeypatch.delenv("CHARWAVE_SEED", raising=False)
    code, out, _ = run(capsys, "symmetry", "factorize", "--system", "gas-full", "--group", "G7", "--eta", "0.3",
                       "--json", "-")
    data = json.loads(out)
    assert code == 0 and data["seed"] == 42 and data["checks"][0]["pass"]
    monkeypatch.setenv("CHARWAVE_SEED", "7")
    code, out, _ = run(capsys, "symmetry", "factorize", "--system", "gas-full", "--group", "G7", "--eta", "0.3",
                       "--json", "-")
    assert json.loads(out)["seed"] == 7
    monkeypatch.setenv("CHARWAVE_SEED", "seven")
    assert run(capsys, "symmetry", "factorize", "--system", "gas-full")[0] == 2


def test_factorize_is_deterministic(capsys):
    args = ["symmetry", "factorize", "--system", "system1", "--json", "-"]
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_riemann_singular(capsys, tmp_path):
    csv = tmp_path / "fan.csv"
    code, out, _ = run(capsys, "riemann", "--system", "system1", "--left", "1,0", "--right", "-4,0",
                       "--csv", str(csv))
    data = json.loads(out)
    assert code == 0
    assert data["singular"]["c"] == pytest.approx(-3)
    assert max(data["singular"]["residuals"].values()) < 1e-12
    assert csv.read_text().splitlines()[0] == "xi,u,v"


def test_riemann_gas_cases(capsys):
    code, out, _ = run(capsys, "riemann", "--system", "gas-full", "--left", "1,0", "--right", "1,1")
    assert code == 0 and json.loads(out)["classification"] == "vacuum"
    code, out, _ = run(capsys, "riemann", "--system", "gas-full", "--left", "1,1", "--right", "2,1")
    assert json.loads(out)["rh_residuals"] == [0.0]


def test_usage_errors(capsys):
    assert run(capsys, "riemann", "--system", "gas-full", "--left", "-1,2", "--right", "2,1")[0] == 2
    assert run(capsys, "riemann", "--system", "nope", "--left", "1,2", "--right", "2,1")[0] == 2
    assert run(capsys, "symmetry", "find", "--system", "system1", "--deg-xt", "-1")[0] == 2
    assert run(capsys, "associate", "--system", "system1", "--left", "1,0", "--right", "-4,0",
               "--eps", "0.05,0.1")[0] == 2
    assert run(capsys)[0] == 2


def test_associate_off_shock(capsys, tmp_path):
    csv, svg = tmp_path / "r.csv", tmp_path / "r.svg"
    code, out, _ = run(capsys, "associate", "--system", "system1", "--left", "1,0", "--right", "-4,0",
                       "--family", "off-shock", "--eps", "0.2,0.1", "--csv", str(csv), "--svg", str(svg))
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "pass"
    assert max(max(v) for v in data["sup_residual"].values()) < 1e-10
    assert svg.read_text().startswith("<svg")
    assert len(csv.read_text().splitlines()) == 5


def test_associate_short_sweep_deterministic(capsys):
    args = ["associate", "--system", "gas-full", "--left", "1,2", "--right", "2,1", "--group", "G7",
            "--eta", "0.2", "--eps", "0.1,0.05,0.025"]
    code, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert code == 0 and first == second
    assert json.loads(first)["group"] == "G7"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "charwave", "symmetry", "verify", "--system", "system1",
                           "--builtin", "system1:w1..w5"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.count("PASS") == 5
