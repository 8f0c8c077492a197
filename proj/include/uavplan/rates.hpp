// Expected per-slot rates, the weighted throughput objective, and the
// penalized objective used by the fixed-trajectory global solver.

#pragma once

#include "uavplan/channel.hpp"
#include "uavplan/scenario.hpp"

namespace uavplan {

/// Per-transmitter powers of the penalized communication-design problem:
/// tilde_p_s[k][n] = y_k[n] p_k^s[n] and tilde_p_u[l][n] = x_l[n] p^u[n].
struct PenalizedPower {
  std::vector<std::vector<double>> p_s;  // K x N
  std::vector<std::vector<double>> p_u;  // L x N

  static PenalizedPower zeros(int num_sns, int num_aps, int num_slots);
};

/// Expected uplink rate of SN k at slot n (1-based), bits/s/Hz.
double uplink_rate(const ScenarioConfig& cfg, const ExpectedGains& gains,
                   const PowerAllocation& power, int k, int n);

/// Expected downlink rate of AP l at slot n (1-based); the schedule supplies
/// the (possibly fractional) interference weights of the SNs.
double downlink_rate(const ScenarioConfig& cfg, const ExpectedGains& gains,
                     const PowerAllocation& power, const Schedule& sched,
                     int l, int n);

/// Full rate table and weighted objective for a candidate plan.
RateBreakdown evaluate_objective(const ScenarioConfig& cfg, const Trajectory& traj,
                                 const Schedule& sched, const PowerAllocation& power);

/// Same, reusing gains already computed for the trajectory.
RateBreakdown evaluate_objective_with_gains(const ScenarioConfig& cfg,
                                            const ExpectedGains& gains,
                                            const Schedule& sched,
                                            const PowerAllocation& power);

/// Objective of the penalty reformulation: every transmitter pair on the
/// same side interferes through the penalty factor M, which drives all but
/// one power per side per slot to zero at the optimum.
double evaluate_penalized_objective(const ScenarioConfig& cfg,
                                    const ExpectedGains& gains,
                                    const PenalizedPower& tilde);

}  // namespace uavplan
