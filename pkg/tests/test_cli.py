import csv
import io
import json
import subprocess
import sys

import pytest

from gfbm_pricing.cli import run

MODEL = ["--a", "1", "--b", "0", "--hurst", "0.5", "--s0", "100", "--strike", "100",
         "--rate", "0.05", "--sigma", "0.2", "--maturity", "1"]
GENERAL = ["--a", "1", "--b", "0.5", "--hurst", "0.7", "--s0", "100", "--strike", "100",
           "--rate", "0.05", "--sigma", "0.2", "--maturity", "1"]


def call(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def as_argv(params):
    argv = []
    for key, value in params.items():
        if key == "model":
            continue
        argv += ["--" + key.replace("_", "-"), str(value)]
    return argv


def test_price_bs_json():
    code, out, _ = call(["price-bs", *MODEL])
    assert code == 0
    doc = json.loads(out)
    assert round(doc["price"], 4) == 10.4506
    assert doc["provenance"] == "closed-form"
    assert doc["process"] == "StandardBm"
    assert {"model", "params", "price", "provenance", "runtime_ms"} <= set(doc)
    assert doc["params"]["strike"] == 100.0


def test_deep_itm():
    argv = list(MODEL)
    argv[argv.index("--strike") + 1] = "0.0001"
    code, out, _ = call(["price-bs", *argv])
    assert code == 0
    assert json.loads(out)["price"] == pytest.approx(100.0, abs=1e-3)


def test_csv_output_either_position():
    for argv in (["--format", "csv", "price-bs", *MODEL], ["price-bs", *MODEL, "--format", "csv"]):
        code, out, _ = call(argv)
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 1
        assert float(rows[0]["price"]) == pytest.approx(10.45058357, abs=1e-8)


def test_price_cev_closed_form_and_mc():
    code, out, _ = call(["price-cev", *GENERAL, "--alpha", "1.5"])
    assert code == 0
    exact = json.loads(out)
    assert exact["provenance"] == "closed-form"
    code, out, _ = call(["price-cev", *GENERAL, "--alpha", "1.5", "--method", "mc",
                         "--paths", "20000", "--steps", "64", "--seed", "4"])
    assert code == 0
    mc = json.loads(out)
    assert mc["provenance"] == "monte-carlo"
    assert abs(mc["price"] - exact["price"]) <= 4 * mc["std_error"]


@pytest.mark.parametrize("argv", [
    ["price-bs", "--a", "1"],
    ["price-bs", *MODEL[:-2]],
    ["price-bs", *MODEL, "--hurst", "1.5"],
    ["price-bs", *MODEL[:1], "abc", *MODEL[2:]],
    ["price-cev", *MODEL, "--alpha", "2"],
    ["density", *MODEL, "--s-min", "5", "--s-max", "5"],
    ["density", *MODEL, "--s-min", "1", "--s-max", "200", "--points", "1"],
    ["simulate", *MODEL, "--paths", "0"],
    ["no-such-command"],
])
def test_usage_errors(argv):
    code, out, err = call(argv)
    assert code == 1
    assert out == ""
    assert len(err.strip().splitlines()) == 1


def test_validate_reductions():
    code, out, _ = call(["validate", "--suite", "reductions"])
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"]
    for row in doc["checks"]:
        assert row["pass"] and row["value"] <= 1e-12


def test_validate_all_csv():
    code, out, _ = call(["--format", "csv", "validate", "--suite", "all"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["suite"] for r in rows} == {"reductions", "phi", "limit", "qlimit"}


def test_density_bs_mass():
    code, out, _ = call(["density", "--model", "bs", *GENERAL, "--s-min", "1", "--s-max", "400",
                         "--points", "801"])
    assert code == 0
    doc = json.loads(out)
    assert doc["mass"] == pytest.approx(1.0, abs=1e-6)
    assert len(doc["rows"]) == 801


def test_density_cev_csv_mass_row():
    code, out, _ = call(["--format", "csv", "density", "--model", "cev", "--alpha", "0.5", *GENERAL,
                         "--s-min", "1", "--s-max", "400", "--points", "50"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "s,density"
    tail = lines[-1].split(",")
    assert tail[0] == "mass" and float(tail[1]) <= 1.0


def test_simulate_dump(tmp_path):
    dump = tmp_path / "paths.csv"
    code, out, _ = call(["simulate", "--model", "bs", *GENERAL, "--paths", "500", "--seed", "3",
                         "--dump", str(dump)])
    assert code == 0
    doc = json.loads(out)
    assert doc["provenance"] == "monte-carlo" and doc["std_error"] > 0
    assert len(dump.read_text().splitlines()) == 501


@pytest.mark.parametrize("argv", [
    ["price-bs", *GENERAL],
    ["price-cev", *GENERAL, "--alpha", "2.5", "--method", "mc", "--paths", "3000", "--steps", "64",
     "--seed", "11"],
    ["simulate", "--model", "bs", *GENERAL, "--paths", "2000", "--seed", "5"],
])
def test_round_trip(argv):
    code, out, _ = call(argv)
    first = json.loads(out)
    command = argv[0]
    code2, out2, _ = call([command, *as_argv(first["params"]),
                           *(["--model", first["params"]["model"]] if command == "simulate" else [])])
    assert code == code2 == 0
    second = json.loads(out2)
    first.pop("runtime_ms")
    second.pop("runtime_ms")
    assert first == second


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gfbm_pricing", "price-bs", *MODEL],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert round(json.loads(proc.stdout)["price"], 4) == 10.4506
    proc = subprocess.run([sys.executable, "-m", "gfbm_pricing", "price-bs"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 1
