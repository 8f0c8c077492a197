// Static problem data and the solution data model shared by every solver.
//
// Conventions used throughout the library:
//   * positions are indexed over slots 0..N, slot 0 being the initial point;
//   * rates, schedules and powers are indexed over slots 1..N and stored in
//     zero-based arrays of length N (array index n-1 holds slot n);
//   * all powers and gains are stored in linear units (watts, dimensionless
//     power gain).  Loader helpers convert dB / dBm inputs once at the edge.

#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavplan {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class DimensionError : public std::runtime_error {
 public:
  explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

/// Start/end of one UAV's flight: horizontal positions and altitudes.
struct UavEndpoints {
  Eigen::Vector2d q_init{0.0, 0.0};
  Eigen::Vector2d q_final{0.0, 0.0};
  double h_init = 0.0;
  double h_final = 0.0;
};

struct ScenarioConfig {
  std::vector<Eigen::Vector2d> sn_positions;  // w_bk, served by the UAV-BS
  std::vector<Eigen::Vector2d> ap_positions;  // w_ul, served by the UAV-AP

  UavEndpoints uav_bs;
  UavEndpoints uav_ap;

  double period_T = 0.0;   // seconds
  int slot_count_N = 0;    // number of slots
  double slot_delta = 0.0; // T / N

  double v_xy_max = 0.0;   // m/s horizontal
  double v_z_max = 0.0;    // m/s vertical
  double h_min = 0.0;      // m
  double h_max = 0.0;      // m
  double d_min = 0.0;      // m, minimum 3D separation of the two UAVs

  double p_max_uav = 0.0;  // W
  double p_max_sn = 0.0;   // W

  double beta0 = 0.0;      // linear power gain at 1 m
  double kappa_a = 2.0;    // UAV-to-ground path-loss exponent
  double kappa_s = 2.0;    // ground-to-UAV path-loss exponent
  double kappa_u = 2.0;    // UAV-to-UAV path-loss exponent
  double alpha_g2g = 3.0;  // ground-to-ground path-loss exponent

  double rician_Ka = 0.0;  // linear Rician factors
  double rician_Ks = 0.0;
  double rician_Ku = 0.0;

  double noise_power = 0.0;   // W
  double weight_beta1 = 1.0;  // uplink weight
  double weight_beta2 = 1.0;  // downlink weight
  double penalty_M = 1e5;
  double bandwidth_B = 1e6;   // Hz, reporting only

  int num_sns() const { return static_cast<int>(sn_positions.size()); }
  int num_aps() const { return static_cast<int>(ap_positions.size()); }
  int num_slots() const { return slot_count_N; }

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

/// Per-slot 3D positions of both UAVs over slots 0..N.
struct Trajectory {
  std::vector<Eigen::Vector2d> q_u;  // UAV-AP horizontal, size N+1
  std::vector<double> h_u;           // UAV-AP altitude, size N+1
  std::vector<Eigen::Vector2d> q_b;  // UAV-BS horizontal, size N+1
  std::vector<double> h_b;           // UAV-BS altitude, size N+1

  Eigen::Vector3d pos_u(int slot) const {
    return {q_u[slot].x(), q_u[slot].y(), h_u[slot]};
  }
  Eigen::Vector3d pos_b(int slot) const {
    return {q_b[slot].x(), q_b[slot].y(), h_b[slot]};
  }
  /// Squared 3D separation of the two UAVs at a slot.
  double separation_sq(int slot) const {
    return (pos_u(slot) - pos_b(slot)).squaredNorm();
  }
  int num_slots() const { return static_cast<int>(q_u.size()) - 1; }
};

enum class ScheduleMode { relaxed, binary };

/// Scheduling weights x_l[n] (downlink) and y_k[n] (uplink), slots 1..N.
struct Schedule {
  std::vector<std::vector<double>> x;  // L x N
  std::vector<std::vector<double>> y;  // K x N
  ScheduleMode mode = ScheduleMode::relaxed;

  static Schedule zeros(int num_aps, int num_sns, int num_slots,
                        ScheduleMode mode = ScheduleMode::relaxed);
};

struct PowerAllocation {
  std::vector<double> p_u;             // UAV-AP power, size N (slot n at n-1)
  std::vector<std::vector<double>> p_s;  // SN powers, K x N

  static PowerAllocation zeros(int num_sns, int num_slots);
};

struct TraceRow {
  int slot = 0;        // 0: whole problem; >0: per-slot sub-solve
  int iteration = 0;
  std::size_t vertex_count = 0;
  double upper_bound = 0.0;
  double lower_bound = 0.0;
  double lambda = 0.0;
};

struct BcdTraceRow {
  int iteration = 0;
  double objective = 0.0;
  double delta_schedule = 0.0;
  double delta_trajectory = 0.0;
  double delta_power = 0.0;
  double max_residual = 0.0;
};

struct SolverDiagnostics {
  std::string solver_id;
  int iterations = 0;
  bool converged = true;
  bool certified = false;      // POA only: optimality gap certified
  double gap = 0.0;            // upper bound - best feasible value (POA)
  double relaxed_objective = 0.0;  // SCA only: objective before rounding
  std::vector<TraceRow> poa_trace;
  std::vector<BcdTraceRow> bcd_trace;
};

struct RateBreakdown {
  std::vector<std::vector<double>> r_s;  // K x N uplink expected rates
  std::vector<std::vector<double>> r_u;  // L x N downlink expected rates
  double uplink_weighted = 0.0;
  double downlink_weighted = 0.0;
  double objective = 0.0;
};

struct Solution {
  Trajectory trajectory;
  Schedule schedule;
  PowerAllocation power;
  double objective_value = 0.0;
  RateBreakdown rates;
  SolverDiagnostics diagnostics;
};

struct ConstraintViolation {
  std::string constraint;  // e.g. "speed_xy_bs", "collision"
  int slot = 0;
  double magnitude = 0.0;  // how far past the limit, in native units
};

/// Parses and validates a scenario from its JSON text form.
ScenarioConfig load_scenario(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);

/// Checks a solution against every constraint of the joint problem.
/// Returns one entry per violated (constraint, slot) pair; empty means
/// feasible within `tol` (absolute, in each constraint's native units).
std::vector<ConstraintViolation> validate_solution(const ScenarioConfig& cfg,
                                                   const Solution& sol,
                                                   double tol);

/// Same checks applied to a bare trajectory.
std::vector<ConstraintViolation> validate_trajectory(const ScenarioConfig& cfg,
                                                     const Trajectory& traj,
                                                     double tol);

}  // namespace uavplan
