#include "uavplan/channel.hpp"

#include <cmath>
#include <random>

namespace uavplan {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double path_gain(double beta0, double dist_sq, double exponent) {
  // beta0 / d^kappa expressed through the squared distance.
  return beta0 / std::pow(dist_sq, exponent / 2.0);
}

}  // namespace

ExpectedGains expected_gains(const ScenarioConfig& cfg, const Trajectory& traj) {
  const int K = cfg.num_sns();
  const int L = cfg.num_aps();
  const int N = cfg.num_slots();

  ExpectedGains gains;
  gains.h.assign(K, std::vector<double>(N, 0.0));
  gains.g.assign(L, std::vector<double>(N, 0.0));
  gains.f.assign(N, 0.0);
  gains.h_g2g.assign(K, std::vector<double>(L, 0.0));

  for (int n = 1; n <= N; ++n) {
    for (int k = 0; k < K; ++k) {
      const double d_sq = (traj.q_b[n] - cfg.sn_positions[k]).squaredNorm() +
                          traj.h_b[n] * traj.h_b[n];
      gains.h[k][n - 1] = path_gain(cfg.beta0, d_sq, cfg.kappa_s);
    }
    for (int l = 0; l < L; ++l) {
      const double d_sq = (traj.q_u[n] - cfg.ap_positions[l]).squaredNorm() +
                          traj.h_u[n] * traj.h_u[n];
      gains.g[l][n - 1] = path_gain(cfg.beta0, d_sq, cfg.kappa_a);
    }
    const double d_uu_sq = traj.separation_sq(n);
    if (d_uu_sq <= 0.0)
      throw ConfigError("coincident UAVs at slot " + std::to_string(n) +
                        ": UAV-to-UAV gain undefined");
    gains.f[n - 1] = path_gain(cfg.beta0, d_uu_sq, cfg.kappa_u);
  }

  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) {
      const double d_sq = (cfg.sn_positions[k] - cfg.ap_positions[l]).squaredNorm();
      if (d_sq <= 0.0)
        throw ConfigError("SN " + std::to_string(k + 1) + " and AP " +
                          std::to_string(l + 1) +
                          " are coincident: ground-to-ground gain undefined");
      gains.h_g2g[k][l] = path_gain(cfg.beta0, d_sq, cfg.alpha_g2g);
    }
  return gains;
}

std::vector<double> sample_rician_power(double k_factor, std::uint64_t seed,
                                        int count) {
  if (k_factor < 0.0) throw ConfigError("Rician K-factor must be nonnegative");
  if (count < 1) throw ConfigError("sample count must be >= 1");

  std::mt19937_64 rng(seed);
  const auto uniform01 = [&rng]() {
    // 53-bit mantissa in [0, 1); avoids distribution objects whose streams
    // differ between standard libraries.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };

  const double los_amp = std::sqrt(k_factor / (k_factor + 1.0));
  const double scatter_amp = std::sqrt(1.0 / (k_factor + 1.0));

  std::vector<double> out(static_cast<std::size_t>(count));
  for (double& sample : out) {
    const double theta = kTwoPi * uniform01();
    // Box-Muller pair for the CN(0,1) scatter component (variance 1/2 per axis).
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double mag = std::sqrt(-std::log(u1));  // = sqrt(2 * (1/2) * -ln u1)
    const double re = los_amp * std::cos(theta) + scatter_amp * mag * std::cos(kTwoPi * u2);
    const double im = los_amp * std::sin(theta) + scatter_amp * mag * std::sin(kTwoPi * u2);
    sample = re * re + im * im;
  }
  return out;
}

SandwichReport theorem1_sandwich(std::span<const double> x,
                                 std::span<const double> y) {
  if (x.empty() || y.empty() || x.size() != y.size())
    throw ConfigError("sandwich requires two equal-length non-empty sample lists");

  const double n = static_cast<double>(x.size());
  double mean_x = 0.0, mean_y = 0.0, mean_ratio = 0.0, mean_inv_ratio = 0.0;
  double mean_log = 0.0, mean_log_sq = 0.0;
  bool x_has_zero = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) throw ConfigError("sandwich: x samples must be nonnegative");
    if (y[i] <= 0.0) throw ConfigError("sandwich: y samples must be positive");
    if (x[i] == 0.0) x_has_zero = true;
    mean_x += x[i];
    mean_y += y[i];
    mean_ratio += x[i] / y[i];
    if (x[i] > 0.0) mean_inv_ratio += y[i] / x[i];
    const double lg = std::log2(1.0 + x[i] / y[i]);
    mean_log += lg;
    mean_log_sq += lg * lg;
  }
  mean_x /= n;
  mean_y /= n;
  mean_ratio /= n;
  mean_inv_ratio /= n;
  mean_log /= n;
  mean_log_sq /= n;

  SandwichReport r;
  // A zero x sample sends the harmonic-mean ratio to infinity; the lower
  // bound collapses to 0 (the X = 0 special case).
  r.lower = x_has_zero ? 0.0 : std::log2(1.0 + 1.0 / mean_inv_ratio);
  r.approx = std::log2(1.0 + mean_x / mean_y);
  r.upper = std::log2(1.0 + mean_ratio);
  r.empirical = mean_log;
  const double var = std::max(0.0, mean_log_sq - mean_log * mean_log);
  r.empirical_stderr = std::sqrt(var / n);
  return r;
}

}  // namespace uavplan
