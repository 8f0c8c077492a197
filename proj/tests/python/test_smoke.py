"""Smoke tests for the python bindings: load a scenario, run both solvers on
tiny instances, and round-trip a solution through JSON."""

import json
import math
import os
import subprocess

import pytest

import uavplan

SCENARIOS = os.environ.get("UAVPLAN_SCENARIOS", "scenarios")


def tiny_config():
    return uavplan.load_scenario_file(os.path.join(SCENARIOS, "tiny_1x1.json"))


def test_load_scenario_constants():
    cfg = tiny_config()
    assert cfg.num_sns == 1 and cfg.num_aps == 1
    assert cfg.slot_count_N == 2
    assert cfg.beta0 == pytest.approx(1e-6)
    assert cfg.noise_power == pytest.approx(1e-14)


def test_load_scenario_rejects_bad_text():
    with pytest.raises(ValueError):
        uavplan.load_scenario("{not json")


def test_rician_sampler_and_sandwich():
    samples = uavplan.sample_rician_power(10 ** 0.3, seed=5, count=4000)
    assert abs(sum(samples) / len(samples) - 1.0) < 0.05
    x = [s * 1e-11 for s in samples]
    y = [1e-14] * len(samples)
    rep = uavplan.theorem1_sandwich(x, y)
    assert rep.lower <= rep.approx <= rep.upper + 1e-12
    assert rep.lower - 3 * rep.empirical_stderr <= rep.empirical
    assert rep.empirical <= rep.upper + 3 * rep.empirical_stderr


def test_poa_solve_tiny():
    cfg = tiny_config()
    traj = uavplan.init_circular(cfg).trajectory
    sol = uavplan.poa_solve(cfg, traj)
    assert sol.diagnostics.certified
    assert sol.objective_value > 0
    assert uavplan.validate_solution(cfg, sol, 1e-6) == []

    # The recovered plan reproduces its own objective through the evaluator.
    rates = uavplan.evaluate_objective(cfg, sol.trajectory, sol.schedule, sol.power)
    assert rates.objective == pytest.approx(sol.objective_value, rel=1e-9)


def test_bcd_solve_tiny_dominates_only_power():
    cfg = tiny_config()
    full = uavplan.bcd_solve(cfg)
    only_power = uavplan.run_benchmark_scheme(cfg, "only_power")
    assert full.diagnostics.converged
    assert full.objective_value >= only_power.objective_value - 1e-4
    assert uavplan.validate_solution(cfg, full) == []


def test_solution_json_roundtrip():
    cfg = tiny_config()
    sol = uavplan.run_benchmark_scheme(cfg, "only_power")
    text = uavplan.solution_to_json(sol)
    back = uavplan.solution_from_json(text)
    assert uavplan.solution_to_json(back) == text
    assert back.objective_value == sol.objective_value
    csv = uavplan.slot_table_csv(cfg, sol)
    assert csv.splitlines()[0].startswith("n,t,q_bx")


@pytest.mark.skipif("UAVPLAN_BIN" not in os.environ,
                    reason="CLI path not provided")
def test_cli_check_reports_speed_violation(tmp_path):
    cfg_path = os.path.join(SCENARIOS, "tiny_1x1.json")
    cfg = uavplan.load_scenario_file(cfg_path)
    sol = uavplan.run_benchmark_scheme(cfg, "only_power")
    doc = json.loads(uavplan.solution_to_json(sol))
    doc["trajectory"]["q_b"][1][0] += 40 * cfg.v_xy_max * cfg.slot_delta
    bad = tmp_path / "bad_solution.json"
    bad.write_text(json.dumps(doc))

    proc = subprocess.run(
        [os.environ["UAVPLAN_BIN"], "check", "--scenario", cfg_path,
         "--solution", str(bad)],
        capture_output=True, text=True)
    assert proc.returncode == 2
    assert "speed_xy_bs" in proc.stdout
