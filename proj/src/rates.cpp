#include "uavplan/rates.hpp"

#include <cmath>

namespace uavplan {

namespace {

constexpr double kInvLn2 = 1.4426950408889634073599246810019;

// log2(1 + s) with the SINR clamped against negative floating underflow.
double log2_1p(double sinr) { return std::log1p(std::max(sinr, 0.0)) * kInvLn2; }

}  // namespace

PenalizedPower PenalizedPower::zeros(int num_sns, int num_aps, int num_slots) {
  PenalizedPower t;
  t.p_s.assign(num_sns, std::vector<double>(num_slots, 0.0));
  t.p_u.assign(num_aps, std::vector<double>(num_slots, 0.0));
  return t;
}

double uplink_rate(const ScenarioConfig& cfg, const ExpectedGains& gains,
                   const PowerAllocation& power, int k, int n) {
  const int i = n - 1;
  const double signal = gains.h[k][i] * power.p_s[k][i];
  const double denom = gains.f[i] * power.p_u[i] + cfg.noise_power;
  return log2_1p(signal / denom);
}

double downlink_rate(const ScenarioConfig& cfg, const ExpectedGains& gains,
                     const PowerAllocation& power, const Schedule& sched,
                     int l, int n) {
  const int i = n - 1;
  double interference = 0.0;
  for (int k = 0; k < cfg.num_sns(); ++k)
    interference += gains.h_g2g[k][l] * sched.y[k][i] * power.p_s[k][i];
  const double signal = gains.g[l][i] * power.p_u[i];
  return log2_1p(signal / (interference + cfg.noise_power));
}

RateBreakdown evaluate_objective_with_gains(const ScenarioConfig& cfg,
                                            const ExpectedGains& gains,
                                            const Schedule& sched,
                                            const PowerAllocation& power) {
  const int K = cfg.num_sns();
  const int L = cfg.num_aps();
  const int N = cfg.num_slots();

  RateBreakdown out;
  out.r_s.assign(K, std::vector<double>(N, 0.0));
  out.r_u.assign(L, std::vector<double>(N, 0.0));

  for (int n = 1; n <= N; ++n) {
    for (int k = 0; k < K; ++k) {
      const double r = uplink_rate(cfg, gains, power, k, n);
      out.r_s[k][n - 1] = r;
      out.uplink_weighted += sched.y[k][n - 1] * r;
    }
    for (int l = 0; l < L; ++l) {
      const double r = downlink_rate(cfg, gains, power, sched, l, n);
      out.r_u[l][n - 1] = r;
      out.downlink_weighted += sched.x[l][n - 1] * r;
    }
  }
  out.uplink_weighted *= cfg.weight_beta1;
  out.downlink_weighted *= cfg.weight_beta2;
  out.objective = out.uplink_weighted + out.downlink_weighted;
  return out;
}

RateBreakdown evaluate_objective(const ScenarioConfig& cfg, const Trajectory& traj,
                                 const Schedule& sched, const PowerAllocation& power) {
  return evaluate_objective_with_gains(cfg, expected_gains(cfg, traj), sched, power);
}

double evaluate_penalized_objective(const ScenarioConfig& cfg,
                                    const ExpectedGains& gains,
                                    const PenalizedPower& tilde) {
  const int K = cfg.num_sns();
  const int L = cfg.num_aps();
  const int N = cfg.num_slots();
  const double M = cfg.penalty_M;

  double total = 0.0;
  for (int n = 0; n < N; ++n) {
    double sum_ps = 0.0, sum_pu = 0.0;
    for (int k = 0; k < K; ++k) sum_ps += tilde.p_s[k][n];
    for (int l = 0; l < L; ++l) sum_pu += tilde.p_u[l][n];

    for (int k = 0; k < K; ++k) {
      const double denom = M * (sum_ps - tilde.p_s[k][n]) +
                           gains.f[n] * sum_pu + cfg.noise_power;
      total += cfg.weight_beta1 * log2_1p(gains.h[k][n] * tilde.p_s[k][n] / denom);
    }
    for (int l = 0; l < L; ++l) {
      double g2g = 0.0;
      for (int k = 0; k < K; ++k) g2g += gains.h_g2g[k][l] * tilde.p_s[k][n];
      const double denom = M * (sum_pu - tilde.p_u[l][n]) + g2g + cfg.noise_power;
      total += cfg.weight_beta2 * log2_1p(gains.g[l][n] * tilde.p_u[l][n] / denom);
    }
  }
  return total;
}

}  // namespace uavplan
