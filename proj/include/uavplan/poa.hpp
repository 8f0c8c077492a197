// Globally optimal communication design for fixed trajectories: penalty
// reformulation, canonical monotonic form over the SINR region, polyblock
// outer approximation with bisection projection, and recovery of the binary
// schedule and transmit powers.

#pragma once

#include <Eigen/Core>

#include "uavplan/rates.hpp"
#include "uavplan/scenario.hpp"

namespace uavplan {

class PoaError : public std::runtime_error {
 public:
  explicit PoaError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a converged penalized solution still has two transmitters
/// above the activity threshold on one side of one slot, which signals an
/// insufficient penalty factor or threshold.
class RecoveryError : public PoaError {
 public:
  RecoveryError(const std::string& what, int slot) : PoaError(what), slot(slot) {}
  int slot;
};

struct PoaOptions {
  double eps = 1e-2;          // relative vertex-movement stopping tolerance
  double bisect_eps = 1e-2;   // lambda interval width for the projection
  long max_iters = 500000;    // per sub-problem iteration cap
  int dim_guard = 16;         // refuse SINR spaces larger than this
  bool prune_dominated = true;
  bool prune_by_bound = true;
  // The penalized feasible region and the objective are separable across
  // slots, so the search may run per slot without losing global optimality.
  bool decompose_slots = true;
  double activity_threshold_scale = 1e-6;  // times p_max, see recover_schedule
};

/// SINR vertex layout: chi_k[n] entries (k major, slots minor) followed by
/// chi_bar_l[n] entries, length (K + L) * N.
using SinrVertex = Eigen::VectorXd;

struct ProjectionResult {
  double lambda = 0.0;
  SinrVertex point;       // lambda * v
  PenalizedPower power;   // feasibility witness achieving the point's SINRs
};

/// First polyblock vertex: per-link SINR upper bounds at full power and
/// interference-free noise.
SinrVertex initial_vertex(const ScenarioConfig& cfg, const ExpectedGains& gains);

/// Bisection along the ray through v for the last scalar lambda whose scaled
/// SINR targets are achievable; the achieving powers come from the linear
/// feasibility oracle.
ProjectionResult project_to_boundary(const ScenarioConfig& cfg,
                                     const ExpectedGains& gains,
                                     const SinrVertex& v, double eps);

/// Turns converged penalized powers into a binary schedule plus per-slot
/// powers.  At most one transmitter per side per slot may exceed
/// threshold_scale * p_max; otherwise a RecoveryError is thrown.
std::pair<Schedule, PowerAllocation> recover_schedule(
    const ScenarioConfig& cfg, const PenalizedPower& tilde,
    double threshold_scale = 1e-6);

/// Polyblock outer approximation over the fixed trajectory.  The returned
/// solution carries the recovered binary schedule and powers; diagnostics
/// record the certified optimality gap and the per-iteration trace.
Solution poa_solve(const ScenarioConfig& cfg, const Trajectory& traj,
                   const PoaOptions& opts = {});

}  // namespace uavplan
