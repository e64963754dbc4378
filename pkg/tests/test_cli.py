import csv
import json
import math

import numpy as np
import pytest

from qbeh.cli import main
from qbeh.linalg import read_matrix_market, write_matrix_market
from qbeh.systems import save_system, scalar_system

from conftest import small_stable_system

REPORT_KEYS = {"command", "inputs", "timings_ms", "results", "errors"}


def run(tmp_path, *argv, name="report.json"):
    rpath = tmp_path / name
    code = main([*map(str, argv), "--report", str(rpath)])
    report = json.loads(rpath.read_text())
    assert set(report) == REPORT_KEYS
    return code, report


@pytest.fixture
def stable_dir(tmp_path):
    s = small_stable_system(np.random.default_rng(7), 5)
    return save_system(s, tmp_path / "stable")


def test_build_writes_system(tmp_path):
    code, rep = run(tmp_path, "build", "--nodes", 3, "--diode-coeff", 1, "--out", tmp_path / "sys")
    assert code == 0 and rep["results"]["n_state"] == 6
    assert (tmp_path / "sys" / "manifest.json").exists()


def test_build_then_solve_circuit_converges(tmp_path):
    main(["build", "--nodes", "3", "--diode-coeff", "1", "--out", str(tmp_path / "sys")])
    code, rep = run(tmp_path, "solve", "--system", tmp_path / "sys")
    assert code == 0, rep["errors"]
    assert rep["results"]["converged"] and rep["results"]["final_residual"] <= 1e-10


def test_solve_stable_system(tmp_path, stable_dir):
    code, rep = run(tmp_path, "solve", "--system", stable_dir, "--solution-out", tmp_path / "x.mtx")
    assert code == 0
    res = rep["results"]
    assert res["converged"] and res["final_residual"] <= 1e-10
    assert len(res["residual_history"]) == res["iterations"]
    assert res["frechet_rho"] < 1
    np.testing.assert_array_equal(read_matrix_market(tmp_path / "x.mtx"), np.array(res["solution"]))


def test_solve_unstable_reports_abscissa(tmp_path):
    save_system(scalar_system(0.5), tmp_path / "bad")
    code, rep = run(tmp_path, "solve", "--system", tmp_path / "bad")
    assert code == 2
    err = rep["errors"][0]
    assert err["type"] == "StabilityError" and err["abscissa"] == pytest.approx(0.5)


def test_solve_theorem_mode(tmp_path):
    save_system(scalar_system(-2.0), tmp_path / "s")
    write_matrix_market(tmp_path / "x0.mtx", [[1.0]])
    write_matrix_market(tmp_path / "z.mtx", [[0.0]])
    code, rep = run(tmp_path, "solve", "--system", tmp_path / "s", "--x0", tmp_path / "x0.mtx",
                    "--z", tmp_path / "z.mtx", "--tol", 1e-13)
    assert code == 0
    assert all(rep["results"]["monotone_decreasing_psd"])
    assert rep["results"]["solution"][0][0] == pytest.approx(2 - math.sqrt(3), abs=1e-12)


def test_solve_precondition_violation_is_numerical_failure(tmp_path):
    save_system(scalar_system(-2.0), tmp_path / "s")
    write_matrix_market(tmp_path / "x0.mtx", [[0.1]])
    write_matrix_market(tmp_path / "z.mtx", [[0.0]])
    code, rep = run(tmp_path, "solve", "--system", tmp_path / "s", "--x0", tmp_path / "x0.mtx",
                    "--z", tmp_path / "z.mtx")
    assert code == 2 and rep["errors"][0]["inequality"] == "Q(X0) <= 0"


def test_series_then_verify_bridge(tmp_path, stable_dir):
    code, rep = run(tmp_path, "series", "--system", stable_dir, "--order", 40,
                    "--solution-out", tmp_path / "xs.mtx", name="series.json")
    assert code == 0 and not rep["results"]["diverging"]
    code, rep = run(tmp_path, "verify", "--system", stable_dir, "--solution", tmp_path / "xs.mtx")
    assert code == 0
    res = rep["results"]
    assert res["bridge_max_rel_diff"] <= 1e-12
    assert abs(res["qbeh_residual"] - res["kron_residual"]) <= 1e-12
    assert res["qbeh_residual"] <= 1e-10
    assert 0 < res["frechet_rho"] < 1


def test_simulate_lifted_and_original(tmp_path):
    code, _ = run(tmp_path, "simulate", "--nodes", 3, "--diode-coeff", 0.5, "--input", "step:0.05",
                  "--t-end", 1, "--step", 0.01, "--out", tmp_path / "lift.csv")
    assert code == 0
    code, _ = run(tmp_path, "simulate", "--nodes", 3, "--diode-coeff", 0.5, "--model", "original",
                  "--input", "step:0.05", "--t-end", 1, "--step", 0.01, "--out", tmp_path / "orig.csv")
    assert code == 0
    lift = np.loadtxt(tmp_path / "lift.csv", delimiter=",", skiprows=1)
    orig = np.loadtxt(tmp_path / "orig.csv", delimiter=",", skiprows=1)
    assert lift.shape == (101, 7)
    assert np.max(np.abs(lift - orig)) <= 1e-9
    header = next(csv.reader(open(tmp_path / "lift.csv")))
    assert header == ["t", "x1", "x2", "x3", "x4", "x5", "x6"]


def test_simulate_usage_error(tmp_path):
    code, rep = run(tmp_path, "simulate", "--input", "bogus", "--out", tmp_path / "o.csv")
    assert code == 1 and rep["errors"]


def test_scaling(tmp_path):
    save_system(scalar_system(-1.0), tmp_path / "s")
    code, rep = run(tmp_path, "scaling", "--system", tmp_path / "s", "--amplitudes", "0.1,0.05,0.025")
    assert code == 0 and 1.9 <= rep["results"]["loglog_slope"] <= 2.1


def test_bench(tmp_path):
    code, rep = run(tmp_path, "bench", "--sizes", "4,8,16,100000", "--repeats", 2,
                    "--table", tmp_path / "b.csv")
    assert code == 0
    res = rep["results"]
    assert res["skipped_sizes"] == [100000]
    assert [r["n"] for r in res["rows"]] == [4, 8, 16]
    assert res["thresholds_met"] or res["justification"]
    assert len((tmp_path / "b.csv").read_text().splitlines()) == 4


def test_missing_system_is_usage_error(tmp_path):
    code, rep = run(tmp_path, "series", "--system", tmp_path / "nope")
    assert code == 1 and rep["errors"][0]["type"] == "FormatError"


def test_bad_arguments_exit_1():
    assert main(["solve"]) == 1
    assert main(["frobnicate"]) == 1


def test_results_reproducible(tmp_path, stable_dir):
    _, a = run(tmp_path, "solve", "--system", stable_dir, name="a.json")
    _, b = run(tmp_path, "solve", "--system", stable_dir, name="b.json")
    assert a["results"] == b["results"]
