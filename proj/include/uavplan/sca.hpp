// Joint 3D trajectory and communication design: block coordinate descent
// over the scheduling, trajectory and power subproblems, each solved through
// a first-order concave surrogate that is tight at the expansion point, plus
// circular initialization, benchmark restrictions and integer rounding.

#pragma once

#include <optional>

#include "uavplan/kernel.hpp"
#include "uavplan/rates.hpp"
#include "uavplan/scenario.hpp"

namespace uavplan {

class ScaError : public std::runtime_error {
 public:
  explicit ScaError(const std::string& what) : std::runtime_error(what) {}
};

struct BcdOptions {
  double eps = 1e-2;        // stop when the fractional objective gain drops below
  int max_outer = 50;
  int inner_iters = 1;      // surrogate passes per block per outer iteration
  double solver_tol = 1e-6;
};

enum class Scheme {
  traj3d_power,    // full joint design
  traj2d_power,    // altitudes frozen
  traj3d_no_power, // powers pinned at maximum
  traj2d_no_power,
  only_power,      // straight-line trajectory, communication design only
};

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme scheme);
const std::vector<Scheme>& all_schemes();

struct InitialPlan {
  Trajectory trajectory;
  Schedule schedule;
  PowerAllocation power;
};

/// Constant-speed circles of radius v_xy T / (2 pi) around each UAV's node
/// centroid, blended near the endpoints onto the configured boundary points,
/// uniform relaxed schedule, full power.  Altitudes follow the endpoint
/// profile and are split apart symmetrically if the pair starts closer than
/// d_min.
InitialPlan init_circular(const ScenarioConfig& cfg);

/// Straight line from the initial to the final location at constant speed.
Trajectory straight_line_trajectory(const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// Surrogates.  Exposed so the property suite can check tightness at the
// expansion point and the global bound direction independently of the
// solvers.

/// Downlink rate lower bound, linear in the uplink schedule y.
struct SchedulingSurrogate {
  std::vector<std::vector<double>> base;                 // L x N: rate at y_ref
  std::vector<std::vector<std::vector<double>>> slope;   // L x N x K
  std::vector<std::vector<double>> y_ref;                // K x N

  double value(int l, int n_idx, const std::vector<std::vector<double>>& y) const;
};

SchedulingSurrogate make_scheduling_surrogate(const ScenarioConfig& cfg,
                                              const ExpectedGains& gains,
                                              const PowerAllocation& power,
                                              const Schedule& sched_ref);

/// First-order model of the trajectory subproblem at a reference trajectory:
/// Taylor coefficients of both rate terms in the squared distances plus the
/// linearized squared UAV separation used for the slack and collision rows.
struct TrajectoryLinearization {
  Trajectory ref;
  std::vector<double> sep_sq_ref;            // index n = 0..N
  std::vector<std::vector<double>> dist_b_ref;  // K x N: |q_b - w_bk|^2 + H_b^2
  std::vector<std::vector<double>> dist_u_ref;  // L x N: |q_u - w_ul|^2 + H_u^2
  std::vector<std::vector<double>> uplink_log_ref;  // K x N: hat-R at ref
  std::vector<std::vector<double>> omega1, omega2;  // K x N
  std::vector<std::vector<double>> s1, s2;          // L x N
  std::vector<std::vector<double>> downlink_log_ref;  // L x N: R_l^u at ref

  /// Linearized squared separation at slot n (exact at the reference).
  double psi_upsilon(const Trajectory& traj, int n) const;

  /// Surrogate objective with the slack at its admissible optimum
  /// psi_upsilon; requires psi_upsilon > 0 at every slot of `traj`.
  double surrogate_objective(const ScenarioConfig& cfg, const Schedule& sched,
                             const PowerAllocation& power,
                             const Trajectory& traj) const;
};

TrajectoryLinearization make_trajectory_linearization(const ScenarioConfig& cfg,
                                                      const Schedule& sched,
                                                      const PowerAllocation& power,
                                                      const Trajectory& traj_ref);

/// DC upper bounds of the interference terms of both rate expressions,
/// linear in the powers.
struct PowerLinearization {
  PowerAllocation ref;
  std::vector<double> uplink_log_ref;     // N: log2(f p_u^r + sigma^2)
  std::vector<double> uplink_slope;       // N
  std::vector<std::vector<double>> downlink_log_ref;  // L x N
  std::vector<std::vector<std::vector<double>>> downlink_slope;  // L x N x K

  double surrogate_objective(const ScenarioConfig& cfg, const ExpectedGains& gains,
                             const Schedule& sched,
                             const PowerAllocation& power) const;
};

PowerLinearization make_power_linearization(const ScenarioConfig& cfg,
                                            const ExpectedGains& gains,
                                            const Schedule& sched,
                                            const PowerAllocation& power_ref);

// ---------------------------------------------------------------------------
// Blocks.  Each returns a point whose true objective is no worse than the
// reference (the reference itself is returned on a tie).

Schedule solve_scheduling_block(const ScenarioConfig& cfg, const ExpectedGains& gains,
                                const PowerAllocation& power, const Schedule& sched_r,
                                const BcdOptions& opts = {});

Trajectory solve_trajectory_block(const ScenarioConfig& cfg, const Schedule& sched,
                                  const PowerAllocation& power, const Trajectory& traj_r,
                                  bool optimize_altitude = true,
                                  const BcdOptions& opts = {});

PowerAllocation solve_power_block(const ScenarioConfig& cfg, const ExpectedGains& gains,
                                  const Schedule& sched, const PowerAllocation& power_r,
                                  const BcdOptions& opts = {});

/// Argmax rounding with an activity threshold of 0.1: slots whose largest
/// relaxed weight falls below it are left idle.
Schedule round_schedule(const Schedule& relaxed);

/// Full joint design (Algorithm 3 ordering: scheduling, trajectory, power),
/// then rounding and one final power pass against the binary schedule.
Solution bcd_solve(const ScenarioConfig& cfg, const BcdOptions& opts = {});

/// Communication design on a fixed trajectory (scheduling and power blocks
/// only); used for the POA comparison.
Solution solve_comm_design(const ScenarioConfig& cfg, const Trajectory& traj,
                           const BcdOptions& opts = {});

Solution run_benchmark_scheme(const ScenarioConfig& cfg, Scheme scheme,
                              const BcdOptions& opts = {});

}  // namespace uavplan
