// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails.  Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "test_support.hpp"
#include "uavplan/channel.hpp"
#include "uavplan/poa.hpp"
#include "uavplan/rates.hpp"
#include "uavplan/sca.hpp"

using namespace uavplan;
using namespace uavplan::testing;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", number,
              name.c_str(), detail.c_str());
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, args...);
  return buf;
}

// ---------------------------------------------------------------------------

void criterion1_sandwich() {
  const auto start = Clock::now();
  const double k_linear = std::pow(10.0, 0.3);  // 3 dB
  const double noise = 1e-14;
  std::vector<double> x = sample_rician_power(k_linear, 20260810, 10000);
  for (double& v : x) v *= 1e3 * noise;
  const std::vector<double> y(x.size(), noise);
  const SandwichReport r = theorem1_sandwich(x, y);
  const double elapsed = seconds_since(start);

  const bool order_ok = r.lower <= r.approx + 1e-12 && r.approx <= r.upper + 1e-12;
  const bool empirical_ok =
      r.empirical >= r.lower - 3.0 * r.empirical_stderr &&
      r.empirical <= r.upper + 3.0 * r.empirical_stderr;
  report(1, "expected-rate sandwich at K = 3 dB, 1e4 samples",
         order_ok && empirical_ok && elapsed < 1.0,
         fmt("lower=%.4f approx=%.4f upper=%.4f empirical=%.4f se=%.4f t=%.2fs",
             r.lower, r.approx, r.upper, r.empirical, r.empirical_stderr, elapsed));
}

// Brute-force power grid for a 1x1 slot, including the silent choices.
double grid_slot_optimum(const ScenarioConfig& cfg, const ExpectedGains& gains,
                         int n_idx, int steps) {
  double best = 0.0;
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; j <= steps; ++j) {
      const double ps = cfg.p_max_sn * i / steps;
      const double pu = cfg.p_max_uav * j / steps;
      const double up = std::log2(
          1.0 + gains.h[0][n_idx] * ps / (gains.f[n_idx] * pu + cfg.noise_power));
      const double down = std::log2(
          1.0 + gains.g[0][n_idx] * pu /
                    (gains.h_g2g[0][0] * ps + cfg.noise_power));
      best = std::max(best, cfg.weight_beta1 * up + cfg.weight_beta2 * down);
    }
  return best;
}

void criterion2_poa_grid() {
  const auto start = Clock::now();
  bool ok = true;
  std::string detail;
  for (const int slots : {1, 2}) {
    ScenarioConfig cfg = hover_config(0.5 * slots, slots);
    cfg.weight_beta1 = cfg.weight_beta2 = 1.0;
    cfg.uav_bs = {{500.0, 560.0}, {500.0, 560.0}, 200.0, 200.0};
    cfg.uav_ap = {{500.0, 440.0}, {500.0, 440.0}, 150.0, 150.0};
    const Trajectory traj = hover_trajectory(cfg);
    const ExpectedGains gains = expected_gains(cfg, traj);

    const Solution sol = poa_solve(cfg, traj, {});
    double grid = 0.0, fine = 0.0;
    for (int n = 0; n < slots; ++n) {
      grid += grid_slot_optimum(cfg, gains, n, 100);
      fine += grid_slot_optimum(cfg, gains, n, 1000);
    }
    const double grid_error = std::max(3.0 * std::abs(fine - grid), 1e-3);
    const double tol = sol.diagnostics.gap + grid_error;
    ok = ok && sol.diagnostics.certified && std::abs(sol.objective_value - grid) <= tol;
    detail += fmt("N=%d poa=%.4f grid=%.4f gap=%.4f ", slots, sol.objective_value,
                  grid, sol.diagnostics.gap);
  }
  const double elapsed = seconds_since(start);
  report(2, "POA matches the 101x101-per-slot power grid", ok && elapsed < 30.0,
         detail + fmt("t=%.1fs", elapsed));
}

void criterion3_single_active() {
  const auto start = Clock::now();
  std::mt19937_64 rng(424242);
  std::uniform_int_distribution<int> pick(1, 3);
  int violations = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const ScenarioConfig cfg =
        random_small_config(pick(rng), pick(rng), pick(rng), rng);
    try {
      const Solution sol = poa_solve(cfg, hover_trajectory(cfg), {});
      for (int n = 0; n < cfg.num_slots(); ++n) {
        int active_sn = 0, active_ap = 0;
        for (int k = 0; k < cfg.num_sns(); ++k)
          active_sn += sol.schedule.y[k][n] > 0.5;
        for (int l = 0; l < cfg.num_aps(); ++l)
          active_ap += sol.schedule.x[l][n] > 0.5;
        if (active_sn > 1 || active_ap > 1) ++violations;
      }
    } catch (const RecoveryError&) {
      ++violations;  // two transmitters above threshold on one side
    }
  }
  report(3, "penalty keeps at most one transmitter per side (20 instances)",
         violations == 0, fmt("violations=%d t=%.1fs", violations,
                              seconds_since(start)));
}

void criterion4_poa_vs_sca() {
  ScenarioConfig cfg = load_scenario_file(scenario_path("multi_sn_ap_desk.json"));
  cfg.sn_positions.resize(2);
  cfg.ap_positions.resize(2);
  cfg.period_T = 4.0;
  cfg.slot_count_N = 8;
  cfg.slot_delta = 0.5;
  cfg.validate();
  const Trajectory traj = init_circular(cfg).trajectory;

  const auto poa_start = Clock::now();
  const Solution global = poa_solve(cfg, traj, {});
  const double poa_time = seconds_since(poa_start);

  const auto sca_start = Clock::now();
  const Solution local = solve_comm_design(cfg, traj, {});
  const double sca_time = seconds_since(sca_start);

  const double rel = (global.objective_value - local.objective_value) /
                     std::max(global.objective_value, 1e-12);
  const bool within_5pct = rel <= 0.05;
  const bool not_above_gap = local.objective_value <=
                             global.objective_value + global.diagnostics.gap + 1e-9;
  report(4, "SCA communication design within 5% of POA (K=L=2, N=8)",
         within_5pct && not_above_gap && sca_time < 5.0 && poa_time < 600.0,
         fmt("poa=%.4f (gap %.4f, %.2fs) sca=%.4f (%.2fs) rel=%.4f",
             global.objective_value, global.diagnostics.gap, poa_time,
             local.objective_value, sca_time, rel));
}

struct DeskRuns {
  ScenarioConfig cfg;
  std::vector<Solution> solutions;  // one per scheme, all_schemes() order
};

DeskRuns run_schemes(const std::string& file) {
  DeskRuns runs{load_scenario_file(scenario_path(file)), {}};
  for (Scheme s : all_schemes())
    runs.solutions.push_back(run_benchmark_scheme(runs.cfg, s, {}));
  return runs;
}

void criterion5_convergence(const DeskRuns& va, const DeskRuns& vb) {
  bool ok = true;
  std::string detail;
  for (const auto* runs : {&va, &vb}) {
    const Solution& full = runs->solutions[0];  // 3d_traj_power
    double prev = 0.0;
    bool monotone = true;
    for (const auto& row : full.diagnostics.bcd_trace) {
      if (row.objective < prev - 1e-6) monotone = false;
      prev = row.objective;
    }
    ok = ok && monotone && full.diagnostics.converged &&
         full.diagnostics.iterations <= 25;
    detail += fmt("iters=%d monotone=%d converged=%d | ",
                  full.diagnostics.iterations, monotone ? 1 : 0,
                  full.diagnostics.converged ? 1 : 0);
  }
  report(5, "BCD monotone and convergent within 25 outer iterations", ok, detail);
}

void criterion6_dominance(const DeskRuns& va, const DeskRuns& vb) {
  bool ok = true;
  std::string detail;
  for (const auto* runs : {&va, &vb}) {
    const double full = runs->solutions[0].objective_value;
    for (std::size_t i = 1; i < runs->solutions.size(); ++i)
      ok = ok && full >= runs->solutions[i].objective_value - 1e-4;
    detail += fmt("full=%.2f vs", full);
    for (std::size_t i = 1; i < runs->solutions.size(); ++i)
      detail += fmt(" %.2f", runs->solutions[i].objective_value);
    detail += " | ";
  }
  report(6, "3d_traj_power dominates every benchmark scheme", ok, detail);
}

void criterion7_feasibility(const DeskRuns& va, const DeskRuns& vb) {
  int violations = 0;
  for (const auto* runs : {&va, &vb})
    for (const Solution& sol : runs->solutions)
      violations += static_cast<int>(validate_solution(runs->cfg, sol, 1e-6).size());

  // POA solutions are held to the same standard.
  ScenarioConfig cfg = hover_config(1.0, 2);
  cfg.sn_positions.push_back({430.0, 540.0});
  const Solution poa = poa_solve(cfg, hover_trajectory(cfg), {});
  violations += static_cast<int>(validate_solution(cfg, poa, 1e-6).size());

  report(7, "every returned solution passes validation at 1e-6",
         violations == 0, fmt("violations=%d", violations));
}

void criterion8_surrogates() {
  std::mt19937_64 rng(97531);
  int tight_failures = 0, bound_failures = 0;

  const auto check_instance = [&](const ScenarioConfig& cfg, const Trajectory& base) {
    const ExpectedGains gains = expected_gains(cfg, base);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    const auto random_sched = [&] {
      Schedule s = Schedule::zeros(cfg.num_aps(), cfg.num_sns(), cfg.num_slots());
      for (int n = 0; n < cfg.num_slots(); ++n) {
        double sum = 0.0;
        for (int k = 0; k < cfg.num_sns(); ++k) sum += (s.y[k][n] = u01(rng));
        for (int k = 0; k < cfg.num_sns(); ++k)
          s.y[k][n] /= std::max(1.0, sum + 1e-9);
        sum = 0.0;
        for (int l = 0; l < cfg.num_aps(); ++l) sum += (s.x[l][n] = u01(rng));
        for (int l = 0; l < cfg.num_aps(); ++l)
          s.x[l][n] /= std::max(1.0, sum + 1e-9);
      }
      return s;
    };
    const auto random_pow = [&] {
      PowerAllocation p = PowerAllocation::zeros(cfg.num_sns(), cfg.num_slots());
      for (double& v : p.p_u) v = u01(rng) * cfg.p_max_uav;
      for (auto& row : p.p_s)
        for (double& v : row) v = u01(rng) * cfg.p_max_sn;
      return p;
    };

    const Schedule sched_ref = random_sched();
    const PowerAllocation power_ref = random_pow();
    const double rel_tol = 1e-9;

    // Scheduling surrogate: tight at the reference, global lower bound.
    const SchedulingSurrogate ss =
        make_scheduling_surrogate(cfg, gains, power_ref, sched_ref);
    for (int l = 0; l < cfg.num_aps(); ++l)
      for (int n = 1; n <= cfg.num_slots(); ++n) {
        const double truth = downlink_rate(cfg, gains, power_ref, sched_ref, l, n);
        if (std::abs(ss.value(l, n - 1, sched_ref.y) - truth) >
            rel_tol * std::max(1.0, std::abs(truth)))
          ++tight_failures;
      }
    for (int trial = 0; trial < 100; ++trial) {
      const Schedule probe = random_sched();
      for (int l = 0; l < cfg.num_aps(); ++l)
        for (int n = 1; n <= cfg.num_slots(); ++n)
          if (ss.value(l, n - 1, probe.y) >
              downlink_rate(cfg, gains, power_ref, probe, l, n) + 1e-9)
            ++bound_failures;
    }

    // Power surrogate.
    const PowerLinearization pl =
        make_power_linearization(cfg, gains, sched_ref, power_ref);
    const double power_truth =
        evaluate_objective_with_gains(cfg, gains, sched_ref, power_ref).objective;
    if (std::abs(pl.surrogate_objective(cfg, gains, sched_ref, power_ref) -
                 power_truth) > rel_tol * std::max(1.0, std::abs(power_truth)))
      ++tight_failures;
    for (int trial = 0; trial < 100; ++trial) {
      const PowerAllocation probe = random_pow();
      const double surrogate = pl.surrogate_objective(cfg, gains, sched_ref, probe);
      const double truth =
          evaluate_objective_with_gains(cfg, gains, sched_ref, probe).objective;
      if (surrogate > truth + 1e-9) ++bound_failures;
    }

    // Trajectory surrogate.
    const TrajectoryLinearization tl =
        make_trajectory_linearization(cfg, sched_ref, power_ref, base);
    const double traj_truth =
        evaluate_objective(cfg, base, sched_ref, power_ref).objective;
    if (std::abs(tl.surrogate_objective(cfg, sched_ref, power_ref, base) -
                 traj_truth) > rel_tol * std::max(1.0, std::abs(traj_truth)))
      ++tight_failures;
    std::uniform_real_distribution<double> wiggle(-20.0, 20.0);
    for (int trial = 0; trial < 100; ++trial) {
      Trajectory probe = base;
      for (int n = 1; n < cfg.num_slots(); ++n) {
        probe.q_u[n] += Eigen::Vector2d(wiggle(rng), wiggle(rng));
        probe.q_b[n] += Eigen::Vector2d(wiggle(rng), wiggle(rng));
        probe.h_u[n] = std::clamp(probe.h_u[n] + wiggle(rng), cfg.h_min, cfg.h_max);
        probe.h_b[n] = std::clamp(probe.h_b[n] + wiggle(rng), cfg.h_min, cfg.h_max);
      }
      bool in_domain = true;
      for (int n = 1; n <= cfg.num_slots() && in_domain; ++n)
        in_domain = tl.psi_upsilon(probe, n) > 0.0;
      if (!in_domain) continue;
      const double surrogate = tl.surrogate_objective(cfg, sched_ref, power_ref, probe);
      const double truth = evaluate_objective(cfg, probe, sched_ref, power_ref).objective;
      if (surrogate > truth + 1e-9) ++bound_failures;
    }
  };

  for (int i = 0; i < 2; ++i) {
    const ScenarioConfig cfg = random_small_config(2, 2, 4, rng);
    check_instance(cfg, hover_trajectory(cfg));
  }
  const ScenarioConfig desk = single_config(10.0, 20);
  ScenarioConfig reachable = desk;
  reachable.uav_bs.q_final = reachable.uav_bs.q_init;
  reachable.uav_ap.q_final = reachable.uav_ap.q_init;
  check_instance(reachable, hover_trajectory(reachable));

  report(8, "surrogates tight at expansion and one-sided bounds",
         tight_failures == 0 && bound_failures == 0,
         fmt("tightness_failures=%d bound_failures=%d", tight_failures,
             bound_failures));
}

}  // namespace

int main() {
  const auto start = Clock::now();
  criterion1_sandwich();
  criterion2_poa_grid();
  criterion3_single_active();
  criterion4_poa_vs_sca();

  const DeskRuns va = run_schemes("single_sn_ap_desk.json");
  const DeskRuns vb = run_schemes("multi_sn_ap_desk.json");
  criterion5_convergence(va, vb);
  criterion6_dominance(va, vb);
  criterion7_feasibility(va, vb);
  criterion8_surrogates();

  std::printf("%d criterion(s) failed; total runtime %.1fs\n", failures,
              seconds_since(start));
  return failures == 0 ? 0 : 1;
}
