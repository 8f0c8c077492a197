#include "uavplan/poa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uavplan/kernel.hpp"

namespace uavplan {

namespace {

constexpr double kInvLn2 = 1.4426950408889634073599246810019;

// One monotonic-optimization sub-problem over a subset of slots.  Variables
// and vertex entries cover only those slots; the layout mirrors the full
// problem (chi block first, chi-bar block second, k/l major and slot minor).
struct SlotBlock {
  const ScenarioConfig& cfg;
  const ExpectedGains& gains;
  std::vector<int> slots;  // 1-based slot ids

  int num_sns() const { return cfg.num_sns(); }
  int num_aps() const { return cfg.num_aps(); }
  int span() const { return static_cast<int>(slots.size()); }
  int dim() const { return (num_sns() + num_aps()) * span(); }

  int chi_index(int k, int j) const { return k * span() + j; }
  int chibar_index(int l, int j) const {
    return num_sns() * span() + l * span() + j;
  }
  // Power variable layout matches the vertex layout.
  int var_s(int k, int j) const { return chi_index(k, j); }
  int var_u(int l, int j) const { return chibar_index(l, j); }

  double gain_h(int k, int j) const { return gains.h[k][slots[j] - 1]; }
  double gain_g(int l, int j) const { return gains.g[l][slots[j] - 1]; }
  double gain_f(int j) const { return gains.f[slots[j] - 1]; }

  double objective(const SinrVertex& v) const {
    double total = 0.0;
    for (int k = 0; k < num_sns(); ++k)
      for (int j = 0; j < span(); ++j)
        total += cfg.weight_beta1 * std::log1p(v[chi_index(k, j)]) * kInvLn2;
    for (int l = 0; l < num_aps(); ++l)
      for (int j = 0; j < span(); ++j)
        total += cfg.weight_beta2 * std::log1p(v[chibar_index(l, j)]) * kInvLn2;
    return total;
  }

  SinrVertex initial_vertex() const {
    SinrVertex v(dim());
    for (int k = 0; k < num_sns(); ++k)
      for (int j = 0; j < span(); ++j)
        v[chi_index(k, j)] = gain_h(k, j) * cfg.p_max_sn / cfg.noise_power;
    for (int l = 0; l < num_aps(); ++l)
      for (int j = 0; j < span(); ++j)
        v[chibar_index(l, j)] = gain_g(l, j) * cfg.p_max_uav / cfg.noise_power;
    return v;
  }

  // Achievability of the scaled SINR targets lambda * v: the fractional
  // constraints cleared to linear rows over powers normalized by p_max.
  FeasibilityResult targets_achievable(const SinrVertex& v, double lambda) const {
    const int n = dim();
    std::vector<LinearRow> rows;
    rows.reserve(n);
    for (int j = 0; j < span(); ++j) {
      for (int k = 0; k < num_sns(); ++k) {
        const double target = lambda * v[chi_index(k, j)];
        if (target <= 0.0) continue;  // zero SINR needs no power
        LinearRow row;
        row.coeffs = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < num_sns(); ++i)
          if (i != k)
            row.coeffs[var_s(i, j)] = target * cfg.penalty_M * cfg.p_max_sn;
        for (int l = 0; l < num_aps(); ++l)
          row.coeffs[var_u(l, j)] = target * gain_f(j) * cfg.p_max_uav;
        row.coeffs[var_s(k, j)] = -gain_h(k, j) * cfg.p_max_sn;
        row.rhs = -target * cfg.noise_power;
        rows.push_back(std::move(row));
      }
      for (int l = 0; l < num_aps(); ++l) {
        const double target = lambda * v[chibar_index(l, j)];
        if (target <= 0.0) continue;
        LinearRow row;
        row.coeffs = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < num_aps(); ++i)
          if (i != l)
            row.coeffs[var_u(i, j)] = target * cfg.penalty_M * cfg.p_max_uav;
        for (int k = 0; k < num_sns(); ++k)
          row.coeffs[var_s(k, j)] =
              target * gains.h_g2g[k][l] * cfg.p_max_sn;
        row.coeffs[var_u(l, j)] = -gain_g(l, j) * cfg.p_max_uav;
        row.rhs = -target * cfg.noise_power;
        rows.push_back(std::move(row));
      }
    }
    auto prob = LinearFeasibilityProblem::create(
        Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n), std::move(rows));
    return check_linear_feasibility(prob);
  }

  // Witness powers (normalized) unpacked into watt-valued tilde powers over
  // the subset slots; entries for other slots are left untouched.
  void unpack_witness(const Eigen::VectorXd& scaled, PenalizedPower& out) const {
    for (int j = 0; j < span(); ++j) {
      const int n = slots[j] - 1;
      for (int k = 0; k < num_sns(); ++k)
        out.p_s[k][n] = scaled[var_s(k, j)] * cfg.p_max_sn;
      for (int l = 0; l < num_aps(); ++l)
        out.p_u[l][n] = scaled[var_u(l, j)] * cfg.p_max_uav;
    }
  }

  // Penalized objective restricted to the subset slots.
  double penalized_objective(const PenalizedPower& tilde) const {
    double total = 0.0;
    const double M = cfg.penalty_M;
    for (int j = 0; j < span(); ++j) {
      const int n = slots[j] - 1;
      double sum_ps = 0.0, sum_pu = 0.0;
      for (int k = 0; k < num_sns(); ++k) sum_ps += tilde.p_s[k][n];
      for (int l = 0; l < num_aps(); ++l) sum_pu += tilde.p_u[l][n];
      for (int k = 0; k < num_sns(); ++k) {
        const double denom = M * (sum_ps - tilde.p_s[k][n]) +
                             gains.f[n] * sum_pu + cfg.noise_power;
        total += cfg.weight_beta1 *
                 std::log1p(std::max(0.0, gains.h[k][n] * tilde.p_s[k][n] / denom)) *
                 kInvLn2;
      }
      for (int l = 0; l < num_aps(); ++l) {
        double g2g = 0.0;
        for (int k = 0; k < num_sns(); ++k)
          g2g += gains.h_g2g[k][l] * tilde.p_s[k][n];
        const double denom = M * (sum_pu - tilde.p_u[l][n]) + g2g + cfg.noise_power;
        total += cfg.weight_beta2 *
                 std::log1p(std::max(0.0, gains.g[l][n] * tilde.p_u[l][n] / denom)) *
                 kInvLn2;
      }
    }
    return total;
  }
};

struct BlockProjection {
  double lambda = 0.0;
  Eigen::VectorXd scaled_witness;  // normalized powers
};

// Algorithm-2 bisection on the ray through v.  lambda = 0 is always
// achievable with zero power, so lambda_min always carries a witness.
BlockProjection project(const SlotBlock& block, const SinrVertex& v, double eps) {
  BlockProjection result;
  result.scaled_witness = Eigen::VectorXd::Zero(block.dim());

  FeasibilityResult full = block.targets_achievable(v, 1.0);
  if (full.feasible) {  // vertex already inside the normal set
    result.lambda = 1.0;
    result.scaled_witness = std::move(full.witness);
    return result;
  }

  double lo = 0.0, hi = 1.0;
  while (hi - lo > eps) {
    const double mid = 0.5 * (lo + hi);
    FeasibilityResult r = block.targets_achievable(v, mid);
    if (r.feasible) {
      lo = mid;
      result.scaled_witness = std::move(r.witness);
    } else {
      hi = mid;
    }
  }
  result.lambda = lo;
  return result;
}

struct BlockOutcome {
  PenalizedPower best_power;
  double lower = 0.0;   // best achieved penalized objective
  double upper = 0.0;   // incumbent vertex objective at termination
  bool certified = false;
  long iterations = 0;
};

BlockOutcome run_polyblock(const SlotBlock& block, const PoaOptions& opts,
                           std::vector<TraceRow>& trace) {
  const int dim = block.dim();
  const int trace_slot = block.span() == 1 ? block.slots.front() : 0;

  std::vector<SinrVertex> vertices{block.initial_vertex()};
  std::vector<double> values{block.objective(vertices[0])};

  BlockOutcome out;
  out.best_power =
      PenalizedPower::zeros(block.num_sns(), block.num_aps(), block.cfg.num_slots());
  out.lower = 0.0;  // zero power is always achievable

  const auto drop_vertex = [&](std::size_t idx) {
    vertices[idx] = std::move(vertices.back());
    values[idx] = values.back();
    vertices.pop_back();
    values.pop_back();
  };

  for (long iter = 1; iter <= opts.max_iters; ++iter) {
    if (vertices.empty()) {  // every box was pruned: the incumbent is optimal
      out.upper = out.lower;
      out.certified = true;
      out.iterations = iter - 1;
      return out;
    }
    std::size_t inc = 0;
    for (std::size_t i = 1; i < vertices.size(); ++i)
      if (values[i] > values[inc]) inc = i;

    const SinrVertex v = vertices[inc];
    const double upper = values[inc];
    out.upper = upper;
    out.iterations = iter;

    if (upper <= out.lower + 1e-12) {  // no box can beat the best point found
      out.certified = true;
      trace.push_back({trace_slot, static_cast<int>(iter), vertices.size(),
                       upper, out.lower, 1.0});
      return out;
    }

    BlockProjection proj = project(block, v, opts.bisect_eps);

    PenalizedPower candidate = out.best_power;
    block.unpack_witness(proj.scaled_witness, candidate);
    const double candidate_value = block.penalized_objective(candidate);
    if (candidate_value > out.lower) {
      out.lower = candidate_value;
      out.best_power = std::move(candidate);
      if (opts.prune_by_bound)
        for (std::size_t i = vertices.size(); i-- > 0;)
          if (values[i] <= out.lower + 1e-12 && i != inc) {
            if (inc == vertices.size() - 1) inc = i;  // keep incumbent tracked
            drop_vertex(i);
          }
    }

    trace.push_back({trace_slot, static_cast<int>(iter), vertices.size(), upper,
                     out.lower, proj.lambda});

    // The projection is radial, so the per-component relative movement of
    // the incumbent equals 1 - lambda for every component.
    if (proj.lambda >= 1.0 - opts.eps) {
      out.certified = true;
      return out;
    }

    drop_vertex(inc);
    for (int i = 0; i < dim; ++i) {
      if (v[i] <= 0.0) continue;  // child would duplicate its parent
      SinrVertex child = v;
      child[i] = proj.lambda * v[i];
      const double child_value = block.objective(child);
      if (opts.prune_by_bound && child_value <= out.lower + 1e-12) continue;
      if (opts.prune_dominated) {
        bool dominated = false;
        for (const SinrVertex& w : vertices)
          if ((child.array() <= w.array()).all()) {
            dominated = true;
            break;
          }
        if (dominated) continue;
      }
      vertices.push_back(std::move(child));
      values.push_back(child_value);
    }
  }

  out.certified = false;  // iteration cap; best-so-far is still feasible
  return out;
}

}  // namespace

SinrVertex initial_vertex(const ScenarioConfig& cfg, const ExpectedGains& gains) {
  std::vector<int> all(cfg.num_slots());
  std::iota(all.begin(), all.end(), 1);
  return SlotBlock{cfg, gains, std::move(all)}.initial_vertex();
}

ProjectionResult project_to_boundary(const ScenarioConfig& cfg,
                                     const ExpectedGains& gains,
                                     const SinrVertex& v, double eps) {
  if (eps <= 0.0) throw PoaError("projection tolerance must be positive");
  std::vector<int> all(cfg.num_slots());
  std::iota(all.begin(), all.end(), 1);
  SlotBlock block{cfg, gains, std::move(all)};
  if (v.size() != block.dim())
    throw DimensionError("SINR vertex has wrong length");
  if ((v.array() < 0.0).any())
    throw PoaError("SINR vertex entries must be nonnegative");

  BlockProjection proj = project(block, v, eps);
  ProjectionResult result;
  result.lambda = proj.lambda;
  result.point = proj.lambda * v;
  result.power =
      PenalizedPower::zeros(cfg.num_sns(), cfg.num_aps(), cfg.num_slots());
  block.unpack_witness(proj.scaled_witness, result.power);
  return result;
}

std::pair<Schedule, PowerAllocation> recover_schedule(const ScenarioConfig& cfg,
                                                      const PenalizedPower& tilde,
                                                      double threshold_scale) {
  const int K = cfg.num_sns();
  const int L = cfg.num_aps();
  const int N = cfg.num_slots();
  const double thr_s = threshold_scale * cfg.p_max_sn;
  const double thr_u = threshold_scale * cfg.p_max_uav;

  Schedule sched = Schedule::zeros(L, K, N, ScheduleMode::binary);
  PowerAllocation power = PowerAllocation::zeros(K, N);

  for (int n = 0; n < N; ++n) {
    int active_k = -1;
    for (int k = 0; k < K; ++k) {
      if (tilde.p_s[k][n] > thr_s) {
        if (active_k >= 0)
          throw RecoveryError(
              "two SNs active in slot " + std::to_string(n + 1) + " (powers " +
                  std::to_string(tilde.p_s[active_k][n]) + " W and " +
                  std::to_string(tilde.p_s[k][n]) +
                  " W); increase penalty_M or the activity threshold",
              n + 1);
        active_k = k;
      }
    }
    if (active_k >= 0) {
      sched.y[active_k][n] = 1.0;
      power.p_s[active_k][n] = tilde.p_s[active_k][n];
    }

    int active_l = -1;
    for (int l = 0; l < L; ++l) {
      if (tilde.p_u[l][n] > thr_u) {
        if (active_l >= 0)
          throw RecoveryError(
              "two APs active in slot " + std::to_string(n + 1) + " (powers " +
                  std::to_string(tilde.p_u[active_l][n]) + " W and " +
                  std::to_string(tilde.p_u[l][n]) +
                  " W); increase penalty_M or the activity threshold",
              n + 1);
        active_l = l;
      }
    }
    if (active_l >= 0) {
      sched.x[active_l][n] = 1.0;
      power.p_u[n] = tilde.p_u[active_l][n];
    }
  }
  return {std::move(sched), std::move(power)};
}

Solution poa_solve(const ScenarioConfig& cfg, const Trajectory& traj,
                   const PoaOptions& opts) {
  cfg.validate();
  if (auto violations = validate_trajectory(cfg, traj, 1e-6); !violations.empty())
    throw PoaError("poa_solve requires a feasible fixed trajectory; first "
                   "violation: " +
                   violations.front().constraint + " at slot " +
                   std::to_string(violations.front().slot));

  const int K = cfg.num_sns();
  const int L = cfg.num_aps();
  const int N = cfg.num_slots();
  const int block_dim = (K + L) * (opts.decompose_slots ? 1 : N);
  if (block_dim > opts.dim_guard)
    throw PoaError("SINR space dimension " + std::to_string(block_dim) +
                   " exceeds the guard (" + std::to_string(opts.dim_guard) +
                   "); raise dim_guard to override");

  const ExpectedGains gains = expected_gains(cfg, traj);

  PenalizedPower best = PenalizedPower::zeros(K, L, N);
  SolverDiagnostics diag;
  diag.solver_id = opts.decompose_slots ? "poa-slotwise" : "poa-joint";
  diag.certified = true;
  double lower_total = 0.0, upper_total = 0.0;

  std::vector<std::vector<int>> groups;
  if (opts.decompose_slots) {
    for (int n = 1; n <= N; ++n) groups.push_back({n});
  } else {
    std::vector<int> all(N);
    std::iota(all.begin(), all.end(), 1);
    groups.push_back(std::move(all));
  }

  for (auto& group : groups) {
    SlotBlock block{cfg, gains, std::move(group)};
    BlockOutcome outcome = run_polyblock(block, opts, diag.poa_trace);
    for (int j = 0; j < block.span(); ++j) {
      const int n = block.slots[j] - 1;
      for (int k = 0; k < K; ++k) best.p_s[k][n] = outcome.best_power.p_s[k][n];
      for (int l = 0; l < L; ++l) best.p_u[l][n] = outcome.best_power.p_u[l][n];
    }
    lower_total += outcome.lower;
    upper_total += outcome.upper;
    diag.iterations += static_cast<int>(outcome.iterations);
    diag.certified = diag.certified && outcome.certified;
  }

  auto [schedule, power] = recover_schedule(cfg, best, opts.activity_threshold_scale);

  Solution sol;
  sol.trajectory = traj;
  sol.schedule = std::move(schedule);
  sol.power = std::move(power);
  sol.rates = evaluate_objective_with_gains(cfg, gains, sol.schedule, sol.power);
  sol.objective_value = sol.rates.objective;
  diag.gap = std::max(0.0, upper_total - lower_total);
  diag.converged = diag.certified;
  sol.diagnostics = std::move(diag);
  return sol;
}

}  // namespace uavplan
