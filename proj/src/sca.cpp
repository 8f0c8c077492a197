#include "uavplan/sca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "uavplan/channel.hpp"

namespace uavplan {

namespace {

constexpr double kInvLn2 = 1.4426950408889634073599246810019;
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kUpsilonFloor = 1e-3;  // m^2, keeps the slack log-term finite

double log2_of(double v) { return std::log(v) * kInvLn2; }
double lerp(double a, double b, double t) { return a + (b - a) * t; }

Eigen::Vector2d lerp2(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double t) {
  return a + (b - a) * t;
}

double max_step(const std::vector<Eigen::Vector2d>& path) {
  double m = 0.0;
  for (std::size_t n = 1; n < path.size(); ++n)
    m = std::max(m, (path[n] - path[n - 1]).norm());
  return m;
}

Schedule uniform_schedule(const ScenarioConfig& cfg) {
  Schedule s = Schedule::zeros(cfg.num_aps(), cfg.num_sns(), cfg.num_slots());
  for (auto& row : s.x) std::fill(row.begin(), row.end(), 1.0 / cfg.num_aps());
  for (auto& row : s.y) std::fill(row.begin(), row.end(), 1.0 / cfg.num_sns());
  return s;
}

PowerAllocation max_power(const ScenarioConfig& cfg) {
  PowerAllocation p = PowerAllocation::zeros(cfg.num_sns(), cfg.num_slots());
  std::fill(p.p_u.begin(), p.p_u.end(), cfg.p_max_uav);
  for (auto& row : p.p_s) std::fill(row.begin(), row.end(), cfg.p_max_sn);
  return p;
}

// Static ground-to-ground gain of the SN k -> AP l link.
double g2g_gain(const ScenarioConfig& cfg, int k, int l) {
  const double d_sq = (cfg.sn_positions[k] - cfg.ap_positions[l]).squaredNorm();
  return cfg.beta0 / std::pow(d_sq, cfg.alpha_g2g / 2.0);
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
  if (name == "3d_traj_power") return Scheme::traj3d_power;
  if (name == "2d_traj_power") return Scheme::traj2d_power;
  if (name == "3d_traj_no_power") return Scheme::traj3d_no_power;
  if (name == "2d_traj_no_power") return Scheme::traj2d_no_power;
  if (name == "only_power") return Scheme::only_power;
  throw ScaError("unknown scheme: " + name +
                 " (expected 3d_traj_power, 2d_traj_power, 3d_traj_no_power, "
                 "2d_traj_no_power or only_power)");
}

std::string scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::traj3d_power: return "3d_traj_power";
    case Scheme::traj2d_power: return "2d_traj_power";
    case Scheme::traj3d_no_power: return "3d_traj_no_power";
    case Scheme::traj2d_no_power: return "2d_traj_no_power";
    case Scheme::only_power: return "only_power";
  }
  throw ScaError("invalid scheme value");
}

const std::vector<Scheme>& all_schemes() {
  static const std::vector<Scheme> schemes = {
      Scheme::traj3d_power, Scheme::traj2d_power, Scheme::traj3d_no_power,
      Scheme::traj2d_no_power, Scheme::only_power};
  return schemes;
}

Trajectory straight_line_trajectory(const ScenarioConfig& cfg) {
  const int N = cfg.num_slots();
  Trajectory t;
  t.q_u.resize(N + 1);
  t.q_b.resize(N + 1);
  t.h_u.resize(N + 1);
  t.h_b.resize(N + 1);
  for (int n = 0; n <= N; ++n) {
    const double s = static_cast<double>(n) / N;
    t.q_u[n] = lerp2(cfg.uav_ap.q_init, cfg.uav_ap.q_final, s);
    t.q_b[n] = lerp2(cfg.uav_bs.q_init, cfg.uav_bs.q_final, s);
    t.h_u[n] = lerp(cfg.uav_ap.h_init, cfg.uav_ap.h_final, s);
    t.h_b[n] = lerp(cfg.uav_bs.h_init, cfg.uav_bs.h_final, s);
  }
  return t;
}

namespace {

// Circle of radius r_c around `center`, blended onto the configured
// endpoints over a window of B slots.  A full 2-pi sweep moves at the speed
// limit already, so when the endpoints sit off the circle the angular sweep
// is reduced until a blend window with feasible per-step speed exists; the
// straight line is the last resort.
std::vector<Eigen::Vector2d> blended_circle(const Eigen::Vector2d& center,
                                            double radius,
                                            const Eigen::Vector2d& q_init,
                                            const Eigen::Vector2d& q_final,
                                            int N, double step_limit) {
  const Eigen::Vector2d offset = q_init - center;
  const double theta0 = offset.norm() > 0.0 ? std::atan2(offset.y(), offset.x()) : 0.0;

  std::vector<Eigen::Vector2d> line(N + 1);
  for (int n = 0; n <= N; ++n)
    line[n] = lerp2(q_init, q_final, static_cast<double>(n) / N);

  for (const double sweep : {1.0, 0.85, 0.7, 0.55, 0.4, 0.25, 0.1}) {
    std::vector<Eigen::Vector2d> circle(N + 1);
    for (int n = 0; n <= N; ++n) {
      const double theta = theta0 + sweep * kTwoPi * n / N;
      circle[n] =
          center + radius * Eigen::Vector2d(std::cos(theta), std::sin(theta));
    }
    for (int window = 1; window <= N / 2; window *= 2) {
      std::vector<Eigen::Vector2d> path(N + 1);
      for (int n = 0; n <= N; ++n) {
        const int to_end = std::min(n, N - n);
        const double w = to_end >= window
                             ? 0.0
                             : static_cast<double>(window - to_end) / window;
        path[n] = w * line[n] + (1.0 - w) * circle[n];
      }
      if (max_step(path) <= step_limit * (1.0 - 1e-9)) return path;
    }
  }
  return line;
}

}  // namespace

InitialPlan init_circular(const ScenarioConfig& cfg) {
  const int N = cfg.num_slots();
  const double radius = cfg.v_xy_max * cfg.period_T / kTwoPi;
  const double step_limit = cfg.v_xy_max * cfg.slot_delta;

  const auto centroid = [](const std::vector<Eigen::Vector2d>& pts) {
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (const auto& p : pts) c += p;
    return Eigen::Vector2d(c / static_cast<double>(pts.size()));
  };

  InitialPlan plan;
  plan.trajectory.q_b = blended_circle(centroid(cfg.sn_positions), radius,
                                       cfg.uav_bs.q_init, cfg.uav_bs.q_final, N,
                                       step_limit);
  plan.trajectory.q_u = blended_circle(centroid(cfg.ap_positions), radius,
                                       cfg.uav_ap.q_init, cfg.uav_ap.q_final, N,
                                       step_limit);
  plan.trajectory.h_b.resize(N + 1);
  plan.trajectory.h_u.resize(N + 1);
  for (int n = 0; n <= N; ++n) {
    const double s = static_cast<double>(n) / N;
    plan.trajectory.h_b[n] = lerp(cfg.uav_bs.h_init, cfg.uav_bs.h_final, s);
    plan.trajectory.h_u[n] = lerp(cfg.uav_ap.h_init, cfg.uav_ap.h_final, s);
  }

  // Collision repair: if the initial pair flies closer than d_min anywhere,
  // push the altitude profiles apart symmetrically, ramp-limited so the
  // vertical speed and boundary conditions stay intact.
  Trajectory& traj = plan.trajectory;
  double needed_split = 0.0;
  const double target_sq = cfg.d_min * cfg.d_min * 1.05;
  for (int n = 0; n <= N; ++n) {
    const double dxy_sq = (traj.q_u[n] - traj.q_b[n]).squaredNorm();
    if (dxy_sq >= target_sq) continue;
    const double need_dz = std::sqrt(target_sq - dxy_sq);
    const double have_dz = std::abs(traj.h_b[n] - traj.h_u[n]);
    needed_split = std::max(needed_split, need_dz - have_dz);
  }
  if (needed_split > 0.0) {
    const auto slope_budget = [&](const std::vector<double>& h) {
      double used = 0.0;
      for (int n = 1; n <= N; ++n) used = std::max(used, std::abs(h[n] - h[n - 1]));
      return std::max(0.0, cfg.v_z_max * cfg.slot_delta - used) * 0.95;
    };
    const double budget_b = slope_budget(traj.h_b);
    const double budget_u = slope_budget(traj.h_u);
    const double dir = traj.h_b[N / 2] >= traj.h_u[N / 2] ? 1.0 : -1.0;
    for (int n = 1; n < N; ++n) {
      const double ramp = static_cast<double>(std::min(n, N - n));
      const double s_b = std::min(needed_split / 2.0, budget_b * ramp);
      const double s_u = std::min(needed_split / 2.0, budget_u * ramp);
      traj.h_b[n] = std::clamp(traj.h_b[n] + dir * s_b, cfg.h_min, cfg.h_max);
      traj.h_u[n] = std::clamp(traj.h_u[n] - dir * s_u, cfg.h_min, cfg.h_max);
    }
  }

  if (auto violations = validate_trajectory(cfg, traj, 1e-6); !violations.empty())
    throw ScaError("init_circular: no feasible initialization (" +
                   violations.front().constraint + " at slot " +
                   std::to_string(violations.front().slot) + ")");

  plan.schedule = uniform_schedule(cfg);
  plan.power = max_power(cfg);
  return plan;
}

// ---------------------------------------------------------------------------
// Scheduling surrogate and block

SchedulingSurrogate make_scheduling_surrogate(const ScenarioConfig& cfg,
                                              const ExpectedGains& gains,
                                              const PowerAllocation& power,
                                              const Schedule& sched_ref) {
  const int K = cfg.num_sns();
  const int L = cfg.num_aps();
  const int N = cfg.num_slots();

  SchedulingSurrogate s;
  s.base.assign(L, std::vector<double>(N, 0.0));
  s.slope.assign(L, std::vector<std::vector<double>>(N, std::vector<double>(K, 0.0)));
  s.y_ref = sched_ref.y;

  for (int l = 0; l < L; ++l)
    for (int n = 0; n < N; ++n) {
      double interf = cfg.noise_power;
      for (int k = 0; k < K; ++k)
        interf += gains.h_g2g[k][l] * sched_ref.y[k][n] * power.p_s[k][n];
      const double signal = gains.g[l][n] * power.p_u[n];
      s.base[l][n] = log2_of(1.0 + signal / interf);
      for (int k = 0; k < K; ++k)
        s.slope[l][n][k] = signal * gains.h_g2g[k][l] * power.p_s[k][n] * kInvLn2 /
                           (interf * (interf + signal));
    }
  return s;
}

double SchedulingSurrogate::value(int l, int n_idx,
                                  const std::vector<std::vector<double>>& y) const {
  double v = base[l][n_idx];
  for (std::size_t k = 0; k < slope[l][n_idx].size(); ++k)
    v -= slope[l][n_idx][k] * (y[k][n_idx] - y_ref[k][n_idx]);
  return v;
}

namespace {

// max sum(c .* w) subject to w in [0,1] and per-slot row sums <= 1, solved
// through the kernel and then snapped to the exact vertex optimum (the
// polytope is integral, so the per-slot argmax is optimal).
std::vector<std::vector<double>> solve_assignment_lp(
    const std::vector<std::vector<double>>& coeff, double tol) {
  const int rows = static_cast<int>(coeff.size());
  const int N = static_cast<int>(coeff[0].size());
  const int n_vars = rows * N;
  const auto var = [N](int r, int n) { return r * N + n; };

  SmoothConvexProgram prog;
  prog.num_vars = n_vars;
  prog.lower = Eigen::VectorXd::Zero(n_vars);
  prog.upper = Eigen::VectorXd::Ones(n_vars);
  Eigen::VectorXd c(n_vars);
  for (int r = 0; r < rows; ++r)
    for (int n = 0; n < N; ++n) c[var(r, n)] = coeff[r][n];
  prog.objective = [c](const Eigen::VectorXd& z) { return c.dot(z); };
  prog.gradient = [c](const Eigen::VectorXd&, Eigen::VectorXd& g) { g = c; };
  for (int n = 0; n < N; ++n) {
    LinearConstraint row;
    for (int r = 0; r < rows; ++r) row.terms.emplace_back(var(r, n), 1.0);
    row.rhs = 1.0;
    prog.linear.push_back(std::move(row));
  }

  const Eigen::VectorXd start =
      Eigen::VectorXd::Constant(n_vars, 0.5 / std::max(1, rows));
  MaximizeResult res = maximize_concave(prog, start, {.tol = tol});

  // Vertex crossover: per slot, put the whole weight on the best row.
  std::vector<std::vector<double>> w(rows, std::vector<double>(N, 0.0));
  for (int n = 0; n < N; ++n) {
    int best = 0;
    for (int r = 1; r < rows; ++r)
      if (coeff[r][n] > coeff[best][n]) best = r;
    if (coeff[best][n] >= 0.0) w[best][n] = 1.0;
  }
  double vertex_value = 0.0;
  for (int r = 0; r < rows; ++r)
    for (int n = 0; n < N; ++n) vertex_value += coeff[r][n] * w[r][n];
  if (vertex_value >= res.value) return w;
  for (int r = 0; r < rows; ++r)
    for (int n = 0; n < N; ++n) w[r][n] = res.point[var(r, n)];
  return w;
}

}  // namespace

Schedule solve_scheduling_block(const ScenarioConfig& cfg, const ExpectedGains& gains,
                                const PowerAllocation& power, const Schedule& sched_r,
                                const BcdOptions& opts) {
  const int K = cfg.num_sns();
  const int L = cfg.num_aps();
  const int N = cfg.num_slots();

  Schedule current = sched_r;
  for (int pass = 0; pass < std::max(1, opts.inner_iters); ++pass) {
    const SchedulingSurrogate surr =
        make_scheduling_surrogate(cfg, gains, power, current);

    // Uplink weights with the downlink loss linearized around the current
    // point; the downlink activation x is held fixed for this step.
    std::vector<std::vector<double>> coeff_y(K, std::vector<double>(N, 0.0));
    for (int k = 0; k < K; ++k)
      for (int n = 1; n <= N; ++n) {
        double c = cfg.weight_beta1 * uplink_rate(cfg, gains, power, k, n);
        for (int l = 0; l < L; ++l)
          c -= cfg.weight_beta2 * current.x[l][n - 1] * surr.slope[l][n - 1][k];
        coeff_y[k][n - 1] = c;
      }
    Schedule next = current;
    next.y = solve_assignment_lp(coeff_y, opts.solver_tol);

    // Downlink activation against the updated interference pattern; the
    // objective is exactly linear in x.
    std::vector<std::vector<double>> coeff_x(L, std::vector<double>(N, 0.0));
    for (int l = 0; l < L; ++l)
      for (int n = 1; n <= N; ++n)
        coeff_x[l][n - 1] =
            cfg.weight_beta2 * downlink_rate(cfg, gains, power, next, l, n);
    next.x = solve_assignment_lp(coeff_x, opts.solver_tol);
    current = std::move(next);
  }

  const double before =
      evaluate_objective_with_gains(cfg, gains, sched_r, power).objective;
  const double after =
      evaluate_objective_with_gains(cfg, gains, current, power).objective;
  return after > before ? current : sched_r;
}

// ---------------------------------------------------------------------------
// Power surrogate and block

PowerLinearization make_power_linearization(const ScenarioConfig& cfg,
                                            const ExpectedGains& gains,
                                            const Schedule& sched,
                                            const PowerAllocation& power_ref) {
  const int K = cfg.num_sns();
  const int L = cfg.num_aps();
  const int N = cfg.num_slots();

  PowerLinearization lin;
  lin.ref = power_ref;
  lin.uplink_log_ref.resize(N);
  lin.uplink_slope.resize(N);
  lin.downlink_log_ref.assign(L, std::vector<double>(N, 0.0));
  lin.downlink_slope.assign(
      L, std::vector<std::vector<double>>(N, std::vector<double>(K, 0.0)));

  for (int n = 0; n < N; ++n) {
    const double arg = gains.f[n] * power_ref.p_u[n] + cfg.noise_power;
    lin.uplink_log_ref[n] = log2_of(arg);
    lin.uplink_slope[n] = gains.f[n] * kInvLn2 / arg;
    for (int l = 0; l < L; ++l) {
      double interf = cfg.noise_power;
      for (int k = 0; k < K; ++k)
        interf += gains.h_g2g[k][l] * sched.y[k][n] * power_ref.p_s[k][n];
      lin.downlink_log_ref[l][n] = log2_of(interf);
      for (int k = 0; k < K; ++k)
        lin.downlink_slope[l][n][k] =
            gains.h_g2g[k][l] * sched.y[k][n] * kInvLn2 / interf;
    }
  }
  return lin;
}

double PowerLinearization::surrogate_objective(const ScenarioConfig& cfg,
                                               const ExpectedGains& gains,
                                               const Schedule& sched,
                                               const PowerAllocation& power) const {
  const int K = cfg.num_sns();
  const int L = cfg.num_aps();
  const int N = cfg.num_slots();

  double total = 0.0;
  for (int n = 0; n < N; ++n) {
    for (int k = 0; k < K; ++k) {
      const double weight = cfg.weight_beta1 * sched.y[k][n];
      if (weight == 0.0) continue;
      const double concave = log2_of(gains.h[k][n] * power.p_s[k][n] +
                                     gains.f[n] * power.p_u[n] + cfg.noise_power);
      const double linearized = uplink_log_ref[n] +
                                uplink_slope[n] * (power.p_u[n] - ref.p_u[n]);
      total += weight * (concave - linearized);
    }
    for (int l = 0; l < L; ++l) {
      const double weight = cfg.weight_beta2 * sched.x[l][n];
      if (weight == 0.0) continue;
      double interf = cfg.noise_power;
      double linearized = downlink_log_ref[l][n];
      for (int k = 0; k < K; ++k) {
        interf += gains.h_g2g[k][l] * sched.y[k][n] * power.p_s[k][n];
        linearized += downlink_slope[l][n][k] * (power.p_s[k][n] - ref.p_s[k][n]);
      }
      const double concave = log2_of(gains.g[l][n] * power.p_u[n] + interf);
      total += weight * (concave - linearized);
    }
  }
  return total;
}

PowerAllocation solve_power_block(const ScenarioConfig& cfg, const ExpectedGains& gains,
                                  const Schedule& sched, const PowerAllocation& power_r,
                                  const BcdOptions& opts) {
  const int K = cfg.num_sns();
  const int L = cfg.num_aps();
  const int N = cfg.num_slots();
  const auto var_u = [](int n) { return n; };
  const auto var_s = [N](int k, int n) { return N + k * N + n; };

  PowerAllocation current = power_r;
  for (int pass = 0; pass < std::max(1, opts.inner_iters); ++pass) {
    const PowerLinearization lin = make_power_linearization(cfg, gains, sched, current);

    const auto unpack = [&](const Eigen::VectorXd& z) {
      PowerAllocation p = PowerAllocation::zeros(K, N);
      for (int n = 0; n < N; ++n) p.p_u[n] = z[var_u(n)] * cfg.p_max_uav;
      for (int k = 0; k < K; ++k)
        for (int n = 0; n < N; ++n) p.p_s[k][n] = z[var_s(k, n)] * cfg.p_max_sn;
      return p;
    };

    SmoothConvexProgram prog;
    prog.num_vars = N + K * N;
    prog.lower = Eigen::VectorXd::Zero(prog.num_vars);
    prog.upper = Eigen::VectorXd::Ones(prog.num_vars);
    prog.objective = [&, lin](const Eigen::VectorXd& z) {
      return lin.surrogate_objective(cfg, gains, sched, unpack(z));
    };
    prog.gradient = [&, lin](const Eigen::VectorXd& z, Eigen::VectorXd& grad) {
      grad.setZero(z.size());
      const PowerAllocation p = unpack(z);
      for (int n = 0; n < N; ++n) {
        for (int k = 0; k < K; ++k) {
          const double weight = cfg.weight_beta1 * sched.y[k][n];
          if (weight == 0.0) continue;
          const double arg = gains.h[k][n] * p.p_s[k][n] +
                             gains.f[n] * p.p_u[n] + cfg.noise_power;
          grad[var_s(k, n)] += weight * gains.h[k][n] * kInvLn2 / arg * cfg.p_max_sn;
          grad[var_u(n)] += weight *
                            (gains.f[n] * kInvLn2 / arg - lin.uplink_slope[n]) *
                            cfg.p_max_uav;
        }
        for (int l = 0; l < L; ++l) {
          const double weight = cfg.weight_beta2 * sched.x[l][n];
          if (weight == 0.0) continue;
          double interf = cfg.noise_power;
          for (int k = 0; k < K; ++k)
            interf += gains.h_g2g[k][l] * sched.y[k][n] * p.p_s[k][n];
          const double arg = gains.g[l][n] * p.p_u[n] + interf;
          grad[var_u(n)] += weight * gains.g[l][n] * kInvLn2 / arg * cfg.p_max_uav;
          for (int k = 0; k < K; ++k)
            grad[var_s(k, n)] += weight *
                                 (gains.h_g2g[k][l] * sched.y[k][n] * kInvLn2 / arg -
                                  lin.downlink_slope[l][n][k]) *
                                 cfg.p_max_sn;
        }
      }
    };

    Eigen::VectorXd start(prog.num_vars);
    for (int n = 0; n < N; ++n)
      start[var_u(n)] = std::clamp(current.p_u[n] / cfg.p_max_uav, 1e-7, 1.0 - 1e-7);
    for (int k = 0; k < K; ++k)
      for (int n = 0; n < N; ++n)
        start[var_s(k, n)] =
            std::clamp(current.p_s[k][n] / cfg.p_max_sn, 1e-7, 1.0 - 1e-7);

    const MaximizeResult res = maximize_concave(prog, start, {.tol = opts.solver_tol});
    current = unpack(res.point);
  }

  // Powers of unscheduled transmitters are free; zero them for tidy output.
  for (int k = 0; k < K; ++k)
    for (int n = 0; n < N; ++n)
      if (sched.y[k][n] == 0.0) current.p_s[k][n] = 0.0;

  const double before =
      evaluate_objective_with_gains(cfg, gains, sched, power_r).objective;
  const double after =
      evaluate_objective_with_gains(cfg, gains, sched, current).objective;
  return after > before ? current : power_r;
}

// ---------------------------------------------------------------------------
// Trajectory linearization and block

TrajectoryLinearization make_trajectory_linearization(const ScenarioConfig& cfg,
                                                      const Schedule& sched,
                                                      const PowerAllocation& power,
                                                      const Trajectory& traj_ref) {
  const int K = cfg.num_sns();
  const int L = cfg.num_aps();
  const int N = cfg.num_slots();

  TrajectoryLinearization lin;
  lin.ref = traj_ref;
  lin.sep_sq_ref.resize(N + 1);
  for (int n = 0; n <= N; ++n) lin.sep_sq_ref[n] = traj_ref.separation_sq(n);

  lin.dist_b_ref.assign(K, std::vector<double>(N, 0.0));
  lin.dist_u_ref.assign(L, std::vector<double>(N, 0.0));
  lin.uplink_log_ref.assign(K, std::vector<double>(N, 0.0));
  lin.omega1.assign(K, std::vector<double>(N, 0.0));
  lin.omega2.assign(K, std::vector<double>(N, 0.0));
  lin.s1.assign(L, std::vector<double>(N, 0.0));
  lin.s2.assign(L, std::vector<double>(N, 0.0));
  lin.downlink_log_ref.assign(L, std::vector<double>(N, 0.0));

  for (int n = 1; n <= N; ++n) {
    const double sep = lin.sep_sq_ref[n];
    for (int k = 0; k < K; ++k) {
      const double dist_b = (traj_ref.q_b[n] - cfg.sn_positions[k]).squaredNorm() +
                            traj_ref.h_b[n] * traj_ref.h_b[n];
      lin.dist_b_ref[k][n - 1] = dist_b;
      const double term_u = cfg.beta0 * power.p_u[n - 1] / sep;
      const double term_b = cfg.beta0 * power.p_s[k][n - 1] / dist_b;
      const double arg = term_u + term_b + cfg.noise_power;
      lin.uplink_log_ref[k][n - 1] = log2_of(arg);
      lin.omega1[k][n - 1] = term_u / sep * kInvLn2 / arg;
      lin.omega2[k][n - 1] = term_b / dist_b * kInvLn2 / arg;
    }
    for (int l = 0; l < L; ++l) {
      const double dist_u = (traj_ref.q_u[n] - cfg.ap_positions[l]).squaredNorm() +
                            traj_ref.h_u[n] * traj_ref.h_u[n];
      lin.dist_u_ref[l][n - 1] = dist_u;
      double interf = cfg.noise_power;
      for (int k = 0; k < K; ++k)
        interf += g2g_gain(cfg, k, l) * sched.y[k][n - 1] * power.p_s[k][n - 1];
      const double s1 = power.p_u[n - 1] * cfg.beta0 / interf;
      lin.s1[l][n - 1] = s1;
      lin.s2[l][n - 1] = s1 * kInvLn2 / (dist_u * (dist_u + s1));
      lin.downlink_log_ref[l][n - 1] = log2_of(1.0 + s1 / dist_u);
    }
  }
  return lin;
}

double TrajectoryLinearization::psi_upsilon(const Trajectory& traj, int n) const {
  const Eigen::Vector3d a = ref.pos_u(n) - ref.pos_b(n);
  return sep_sq_ref[n] + 2.0 * a.dot(traj.pos_u(n) - ref.pos_u(n)) -
         2.0 * a.dot(traj.pos_b(n) - ref.pos_b(n));
}

double TrajectoryLinearization::surrogate_objective(const ScenarioConfig& cfg,
                                                    const Schedule& sched,
                                                    const PowerAllocation& power,
                                                    const Trajectory& traj) const {
  const int K = cfg.num_sns();
  const int L = cfg.num_aps();
  const int N = cfg.num_slots();

  double total = 0.0;
  for (int n = 1; n <= N; ++n) {
    const double upsilon = psi_upsilon(traj, n);
    if (upsilon <= 0.0)
      throw ScaError("trajectory surrogate evaluated where the linearized "
                     "separation is nonpositive");
    const double sep = traj.separation_sq(n);
    for (int k = 0; k < K; ++k) {
      const double weight = cfg.weight_beta1 * sched.y[k][n - 1];
      if (weight == 0.0) continue;
      const double dist_b = (traj.q_b[n] - cfg.sn_positions[k]).squaredNorm() +
                            traj.h_b[n] * traj.h_b[n];
      const double taylor = uplink_log_ref[k][n - 1] -
                            omega1[k][n - 1] * (sep - sep_sq_ref[n]) -
                            omega2[k][n - 1] * (dist_b - dist_b_ref[k][n - 1]);
      const double interf =
          log2_of(cfg.beta0 * power.p_u[n - 1] / upsilon + cfg.noise_power);
      total += weight * (taylor - interf);
    }
    for (int l = 0; l < L; ++l) {
      const double weight = cfg.weight_beta2 * sched.x[l][n - 1];
      if (weight == 0.0) continue;
      const double dist_u = (traj.q_u[n] - cfg.ap_positions[l]).squaredNorm() +
                            traj.h_u[n] * traj.h_u[n];
      total += weight * (downlink_log_ref[l][n - 1] -
                         s2[l][n - 1] * (dist_u - dist_u_ref[l][n - 1]));
    }
  }
  return total;
}

namespace {

// Variable layout of the trajectory subproblem: 7 entries per free slot
// n = 1..N-1, positions scaled by h_max and the separation slack by h_max^2.
struct TrajectoryVars {
  const ScenarioConfig& cfg;
  double scale;

  int count(int N) const { return 7 * (N - 1); }
  int qux(int n) const { return 7 * (n - 1) + 0; }
  int quy(int n) const { return 7 * (n - 1) + 1; }
  int hu(int n) const { return 7 * (n - 1) + 2; }
  int qbx(int n) const { return 7 * (n - 1) + 3; }
  int qby(int n) const { return 7 * (n - 1) + 4; }
  int hb(int n) const { return 7 * (n - 1) + 5; }
  int ups(int n) const { return 7 * (n - 1) + 6; }

  Trajectory unpack(const Eigen::VectorXd& z, const Trajectory& ref) const {
    Trajectory t = ref;
    const int N = ref.num_slots();
    for (int n = 1; n < N; ++n) {
      t.q_u[n] = {z[qux(n)] * scale, z[quy(n)] * scale};
      t.h_u[n] = z[hu(n)] * scale;
      t.q_b[n] = {z[qbx(n)] * scale, z[qby(n)] * scale};
      t.h_b[n] = z[hb(n)] * scale;
    }
    return t;
  }
};

}  // namespace

Trajectory solve_trajectory_block(const ScenarioConfig& cfg, const Schedule& sched,
                                  const PowerAllocation& power, const Trajectory& traj_r,
                                  bool optimize_altitude, const BcdOptions& opts) {
  const int K = cfg.num_sns();
  const int L = cfg.num_aps();
  const int N = cfg.num_slots();
  if (N <= 1) return traj_r;  // boundary conditions pin everything

  Trajectory best = traj_r;
  double best_value = evaluate_objective(cfg, traj_r, sched, power).objective;

  Trajectory ref = traj_r;
  for (int pass = 0; pass < std::max(1, opts.inner_iters); ++pass) {
    const TrajectoryLinearization lin =
        make_trajectory_linearization(cfg, sched, power, ref);
    const double scale = cfg.h_max;
    const double scale_sq = scale * scale;
    const TrajectoryVars vars{cfg, scale};

    SmoothConvexProgram prog;
    prog.num_vars = vars.count(N);
    constexpr double kUnbounded = std::numeric_limits<double>::infinity();
    prog.lower = Eigen::VectorXd::Constant(prog.num_vars, -kUnbounded);
    prog.upper = Eigen::VectorXd::Constant(prog.num_vars, kUnbounded);
    for (int n = 1; n < N; ++n) {
      if (optimize_altitude) {
        prog.lower[vars.hu(n)] = prog.lower[vars.hb(n)] = cfg.h_min / scale;
        prog.upper[vars.hu(n)] = prog.upper[vars.hb(n)] = cfg.h_max / scale;
      } else {
        prog.lower[vars.hu(n)] = prog.upper[vars.hu(n)] = ref.h_u[n] / scale;
        prog.lower[vars.hb(n)] = prog.upper[vars.hb(n)] = ref.h_b[n] / scale;
      }
      prog.lower[vars.ups(n)] = kUpsilonFloor / scale_sq;
    }

    // Vertical speed rows; fixed endpoint altitudes fold into the rhs.
    const double vz_step = cfg.v_z_max * cfg.slot_delta / scale;
    const auto add_alt_rows = [&](auto var_of, const std::vector<double>& h_ref) {
      for (int n = 1; n <= N; ++n) {
        for (const double sign : {1.0, -1.0}) {
          LinearConstraint row;
          double rhs = vz_step;
          if (n <= N - 1)
            row.terms.emplace_back(var_of(n), sign);
          else
            rhs -= sign * h_ref[n] / scale;
          if (n - 1 >= 1)
            row.terms.emplace_back(var_of(n - 1), -sign);
          else
            rhs += sign * h_ref[n - 1] / scale;
          if (row.terms.empty()) continue;
          row.rhs = rhs;
          prog.linear.push_back(std::move(row));
        }
      }
    };
    if (optimize_altitude) {
      add_alt_rows([&](int n) { return vars.hu(n); }, ref.h_u);
      add_alt_rows([&](int n) { return vars.hb(n); }, ref.h_b);
    }

    // Slack and collision rows built on the linearized squared separation
    //   psi(n) = sep_ref + a . (w_u - w_u_ref) - a . (w_b - w_b_ref),
    // with a = 2 (w_u_ref - w_b_ref); everything in scaled units.
    for (int n = 1; n < N; ++n) {
      const Eigen::Vector3d a = 2.0 * (ref.pos_u(n) - ref.pos_b(n));
      const double psi_const =
          (lin.sep_sq_ref[n] - a.dot(ref.pos_u(n)) + a.dot(ref.pos_b(n))) / scale_sq;
      const std::pair<int, double> psi_terms[6] = {
          {vars.qux(n), a.x() / scale}, {vars.quy(n), a.y() / scale},
          {vars.hu(n), a.z() / scale},  {vars.qbx(n), -a.x() / scale},
          {vars.qby(n), -a.y() / scale}, {vars.hb(n), -a.z() / scale}};

      LinearConstraint slack_row;  // ups - psi <= 0
      slack_row.terms.emplace_back(vars.ups(n), 1.0);
      for (const auto& [idx, c] : psi_terms) slack_row.terms.emplace_back(idx, -c);
      slack_row.rhs = psi_const;
      prog.linear.push_back(std::move(slack_row));

      LinearConstraint collision_row;  // -psi <= -d_min^2
      for (const auto& [idx, c] : psi_terms)
        collision_row.terms.emplace_back(idx, -c);
      collision_row.rhs = psi_const - cfg.d_min * cfg.d_min / scale_sq;
      prog.linear.push_back(std::move(collision_row));
    }

    // Horizontal speed discs.
    const double step_sq = std::pow(cfg.v_xy_max * cfg.slot_delta / scale, 2);
    const auto add_speed = [&](auto vx, auto vy, const std::vector<Eigen::Vector2d>& q_ref) {
      for (int n = 1; n <= N; ++n) {
        QuadraticConstraint qc;
        qc.bound = step_sq;
        for (int axis = 0; axis < 2; ++axis) {
          LinForm form;
          if (n <= N - 1)
            form.terms.emplace_back(axis == 0 ? vx(n) : vy(n), 1.0);
          else
            form.offset += q_ref[n][axis] / scale;
          if (n - 1 >= 1)
            form.terms.emplace_back(axis == 0 ? vx(n - 1) : vy(n - 1), -1.0);
          else
            form.offset -= q_ref[n - 1][axis] / scale;
          qc.forms.push_back(std::move(form));
        }
        prog.quadratic.push_back(std::move(qc));
      }
    };
    add_speed([&](int n) { return vars.qux(n); }, [&](int n) { return vars.quy(n); },
              ref.q_u);
    add_speed([&](int n) { return vars.qbx(n); }, [&](int n) { return vars.qby(n); },
              ref.q_b);

    prog.objective = [&, lin](const Eigen::VectorXd& z) {
      const Trajectory t = vars.unpack(z, lin.ref);
      double total = 0.0;
      for (int n = 1; n < N; ++n) {
        const double upsilon = z[vars.ups(n)] * scale_sq;
        const double sep = t.separation_sq(n);
        for (int k = 0; k < K; ++k) {
          const double weight = cfg.weight_beta1 * sched.y[k][n - 1];
          if (weight == 0.0) continue;
          const double dist_b = (t.q_b[n] - cfg.sn_positions[k]).squaredNorm() +
                                t.h_b[n] * t.h_b[n];
          const double taylor = lin.uplink_log_ref[k][n - 1] -
                                lin.omega1[k][n - 1] * (sep - lin.sep_sq_ref[n]) -
                                lin.omega2[k][n - 1] * (dist_b - lin.dist_b_ref[k][n - 1]);
          const double interf =
              log2_of(cfg.beta0 * power.p_u[n - 1] / upsilon + cfg.noise_power);
          total += weight * (taylor - interf);
        }
        for (int l = 0; l < L; ++l) {
          const double weight = cfg.weight_beta2 * sched.x[l][n - 1];
          if (weight == 0.0) continue;
          const double dist_u = (t.q_u[n] - cfg.ap_positions[l]).squaredNorm() +
                                t.h_u[n] * t.h_u[n];
          total += weight * (lin.downlink_log_ref[l][n - 1] -
                             lin.s2[l][n - 1] * (dist_u - lin.dist_u_ref[l][n - 1]));
        }
      }
      return total;
    };

    prog.gradient = [&, lin](const Eigen::VectorXd& z, Eigen::VectorXd& grad) {
      grad.setZero(z.size());
      const Trajectory t = vars.unpack(z, lin.ref);
      for (int n = 1; n < N; ++n) {
        const double upsilon = z[vars.ups(n)] * scale_sq;
        const Eigen::Vector3d sep_vec = t.pos_u(n) - t.pos_b(n);
        for (int k = 0; k < K; ++k) {
          const double weight = cfg.weight_beta1 * sched.y[k][n - 1];
          if (weight == 0.0) continue;
          const double om1 = lin.omega1[k][n - 1];
          const double om2 = lin.omega2[k][n - 1];
          // d/dw of -omega1 * |w_u - w_b|^2
          grad[vars.qux(n)] += weight * -om1 * 2.0 * sep_vec.x() * scale;
          grad[vars.quy(n)] += weight * -om1 * 2.0 * sep_vec.y() * scale;
          grad[vars.hu(n)] += weight * -om1 * 2.0 * sep_vec.z() * scale;
          grad[vars.qbx(n)] += weight * om1 * 2.0 * sep_vec.x() * scale;
          grad[vars.qby(n)] += weight * om1 * 2.0 * sep_vec.y() * scale;
          grad[vars.hb(n)] += weight * om1 * 2.0 * sep_vec.z() * scale;
          // d/dw of -omega2 * (|q_b - w_bk|^2 + H_b^2)
          const Eigen::Vector2d db = t.q_b[n] - cfg.sn_positions[k];
          grad[vars.qbx(n)] += weight * -om2 * 2.0 * db.x() * scale;
          grad[vars.qby(n)] += weight * -om2 * 2.0 * db.y() * scale;
          grad[vars.hb(n)] += weight * -om2 * 2.0 * t.h_b[n] * scale;
          // d/d ups of -log2(beta0 p_u / ups + noise)
          const double num = cfg.beta0 * power.p_u[n - 1];
          grad[vars.ups(n)] += weight * kInvLn2 * num /
                               (upsilon * (num + cfg.noise_power * upsilon)) *
                               scale_sq;
        }
        for (int l = 0; l < L; ++l) {
          const double weight = cfg.weight_beta2 * sched.x[l][n - 1];
          if (weight == 0.0) continue;
          const double s2 = lin.s2[l][n - 1];
          const Eigen::Vector2d du = t.q_u[n] - cfg.ap_positions[l];
          grad[vars.qux(n)] += weight * -s2 * 2.0 * du.x() * scale;
          grad[vars.quy(n)] += weight * -s2 * 2.0 * du.y() * scale;
          grad[vars.hu(n)] += weight * -s2 * 2.0 * t.h_u[n] * scale;
        }
      }
    };

    // Start at the reference, nudged strictly inside the altitude boxes and
    // with the slack just below its linearized bound; if a constraint is
    // active at the reference, blend a little toward the straight-line path.
    const Trajectory line = straight_line_trajectory(cfg);
    MaximizeResult res;
    bool solved = false;
    for (const double blend : {0.0, 1e-6, 1e-4, 1e-2, 5e-2}) {
      Trajectory start_traj = ref;
      for (int n = 1; n < N; ++n) {
        start_traj.q_u[n] = lerp2(ref.q_u[n], line.q_u[n], blend);
        start_traj.q_b[n] = lerp2(ref.q_b[n], line.q_b[n], blend);
        start_traj.h_u[n] = lerp(ref.h_u[n], line.h_u[n], blend);
        start_traj.h_b[n] = lerp(ref.h_b[n], line.h_b[n], blend);
        if (optimize_altitude) {
          const double margin = 1e-6 * (cfg.h_max - cfg.h_min);
          start_traj.h_u[n] =
              std::clamp(start_traj.h_u[n], cfg.h_min + margin, cfg.h_max - margin);
          start_traj.h_b[n] =
              std::clamp(start_traj.h_b[n], cfg.h_min + margin, cfg.h_max - margin);
        }
      }
      Eigen::VectorXd start(prog.num_vars);
      for (int n = 1; n < N; ++n) {
        start[vars.qux(n)] = start_traj.q_u[n].x() / scale;
        start[vars.quy(n)] = start_traj.q_u[n].y() / scale;
        start[vars.hu(n)] = start_traj.h_u[n] / scale;
        start[vars.qbx(n)] = start_traj.q_b[n].x() / scale;
        start[vars.qby(n)] = start_traj.q_b[n].y() / scale;
        start[vars.hb(n)] = start_traj.h_b[n] / scale;
        const double psi = lin.psi_upsilon(start_traj, n);
        start[vars.ups(n)] = std::max(psi * (1.0 - 1e-7) / scale_sq,
                                      prog.lower[vars.ups(n)] * (1.0 + 1e-9));
      }
      try {
        res = maximize_concave(prog, start, {.tol = opts.solver_tol});
        solved = true;
        break;
      } catch (const InfeasibleStartError&) {
        continue;  // step toward the straight line and retry
      }
    }
    if (!solved) return best;  // empty interior (e.g. exactly-tight
                               // reachability): the block cannot move

    const Trajectory candidate = vars.unpack(res.point, ref);
    const double value = evaluate_objective(cfg, candidate, sched, power).objective;
    if (value > best_value) {
      best_value = value;
      best = candidate;
    }
    ref = candidate;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Rounding and the BCD driver

Schedule round_schedule(const Schedule& relaxed) {
  Schedule out = relaxed;
  out.mode = ScheduleMode::binary;
  const auto round_side = [](std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return;
    const int N = static_cast<int>(rows[0].size());
    for (int n = 0; n < N; ++n) {
      int best = 0;
      for (int r = 1; r < static_cast<int>(rows.size()); ++r)
        if (rows[r][n] > rows[best][n]) best = r;
      const bool keep = rows[best][n] >= 0.1;
      for (int r = 0; r < static_cast<int>(rows.size()); ++r)
        rows[r][n] = (keep && r == best) ? 1.0 : 0.0;
    }
  };
  round_side(out.x);
  round_side(out.y);
  return out;
}

namespace {

struct DriveSpec {
  bool optimize_trajectory = true;
  bool optimize_altitude = true;
  bool optimize_power = true;
  std::optional<Trajectory> fixed_trajectory;
  std::string solver_id;
};

double max_residual(const ScenarioConfig& cfg, const Trajectory& traj,
                    const Schedule& sched, const PowerAllocation& power) {
  Solution probe;
  probe.trajectory = traj;
  probe.schedule = sched;
  probe.power = power;
  double worst = 0.0;
  for (const auto& v : validate_solution(cfg, probe, 0.0))
    worst = std::max(worst, v.magnitude);
  return worst;
}

Solution drive_bcd(const ScenarioConfig& cfg, const BcdOptions& opts,
                   const DriveSpec& spec) {
  cfg.validate();

  Trajectory traj;
  Schedule sched;
  PowerAllocation power;
  if (spec.fixed_trajectory) {
    traj = *spec.fixed_trajectory;
    if (auto violations = validate_trajectory(cfg, traj, 1e-6); !violations.empty())
      throw ScaError("fixed trajectory infeasible: " +
                     violations.front().constraint + " at slot " +
                     std::to_string(violations.front().slot));
    sched = uniform_schedule(cfg);
    power = max_power(cfg);
  } else {
    InitialPlan plan = init_circular(cfg);
    traj = std::move(plan.trajectory);
    sched = std::move(plan.schedule);
    power = std::move(plan.power);
  }

  ExpectedGains gains = expected_gains(cfg, traj);
  double objective = evaluate_objective_with_gains(cfg, gains, sched, power).objective;

  SolverDiagnostics diag;
  diag.solver_id = spec.solver_id;
  diag.converged = false;

  int outer = 0;
  for (outer = 1; outer <= opts.max_outer; ++outer) {
    const double previous = objective;

    sched = solve_scheduling_block(cfg, gains, power, sched, opts);
    const double after_sched =
        evaluate_objective_with_gains(cfg, gains, sched, power).objective;

    double after_traj = after_sched;
    if (spec.optimize_trajectory) {
      traj = solve_trajectory_block(cfg, sched, power, traj,
                                    spec.optimize_altitude, opts);
      gains = expected_gains(cfg, traj);
      after_traj = evaluate_objective_with_gains(cfg, gains, sched, power).objective;
    }

    double after_power = after_traj;
    if (spec.optimize_power) {
      power = solve_power_block(cfg, gains, sched, power, opts);
      after_power = evaluate_objective_with_gains(cfg, gains, sched, power).objective;
    }

    objective = after_power;
    diag.bcd_trace.push_back({outer, objective, after_sched - previous,
                              after_traj - after_sched, after_power - after_traj,
                              max_residual(cfg, traj, sched, power)});

    if (objective < previous - 1e-6)
      throw ScaError("BCD objective decreased by more than the tolerance: " +
                     std::to_string(previous) + " -> " + std::to_string(objective));
    if (objective - previous < opts.eps * std::max(previous, 1e-12)) {
      diag.converged = true;
      break;
    }
  }
  diag.iterations = std::min(outer, opts.max_outer);
  diag.relaxed_objective = objective;

  // Integer recovery: round the schedule, then re-optimize the power against
  // the fixed binary schedule.
  Schedule binary = round_schedule(sched);
  if (spec.optimize_power)
    power = solve_power_block(cfg, gains, binary, power, opts);

  Solution sol;
  sol.trajectory = std::move(traj);
  sol.schedule = std::move(binary);
  sol.power = std::move(power);
  sol.rates = evaluate_objective_with_gains(cfg, gains, sol.schedule, sol.power);
  sol.objective_value = sol.rates.objective;
  sol.diagnostics = std::move(diag);

  if (auto violations = validate_solution(cfg, sol, 1e-6); !violations.empty())
    throw ScaError("internal error: solver produced an infeasible solution (" +
                   violations.front().constraint + " at slot " +
                   std::to_string(violations.front().slot) + ")");
  return sol;
}

}  // namespace

Solution bcd_solve(const ScenarioConfig& cfg, const BcdOptions& opts) {
  DriveSpec spec;
  spec.solver_id = "bcd/" + scheme_name(Scheme::traj3d_power);
  return drive_bcd(cfg, opts, spec);
}

Solution solve_comm_design(const ScenarioConfig& cfg, const Trajectory& traj,
                           const BcdOptions& opts) {
  DriveSpec spec;
  spec.optimize_trajectory = false;
  spec.fixed_trajectory = traj;
  spec.solver_id = "bcd/comm_design";
  return drive_bcd(cfg, opts, spec);
}

Solution run_benchmark_scheme(const ScenarioConfig& cfg, Scheme scheme,
                              const BcdOptions& opts) {
  DriveSpec spec;
  spec.solver_id = "bcd/" + scheme_name(scheme);
  switch (scheme) {
    case Scheme::traj3d_power:
      break;
    case Scheme::traj2d_power:
      spec.optimize_altitude = false;
      break;
    case Scheme::traj3d_no_power:
      spec.optimize_power = false;
      break;
    case Scheme::traj2d_no_power:
      spec.optimize_altitude = false;
      spec.optimize_power = false;
      break;
    case Scheme::only_power:
      spec.optimize_trajectory = false;
      spec.fixed_trajectory = straight_line_trajectory(cfg);
      break;
  }
  return drive_bcd(cfg, opts, spec);
}

}  // namespace uavplan
