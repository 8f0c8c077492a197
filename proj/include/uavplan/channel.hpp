// Expected (large-scale) channel gains for every link of the two-UAV
// network, plus the Rician fading sampler and the log-ratio sandwich used
// to validate the expected-rate approximation.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uavplan/scenario.hpp"

namespace uavplan {

/// Expected channel power gains for slots 1..N (array index n-1).
struct ExpectedGains {
  std::vector<std::vector<double>> h;      // K x N, SN k -> UAV-BS
  std::vector<std::vector<double>> g;      // L x N, UAV-AP -> AP l
  std::vector<double> f;                   // N, UAV-AP -> UAV-BS
  std::vector<std::vector<double>> h_g2g;  // K x L, SN k -> AP l large-scale
};

/// Deterministic expected gains from the large-scale path-loss models.
/// Throws ConfigError on a coincident SN/AP pair or coincident UAVs.
ExpectedGains expected_gains(const ScenarioConfig& cfg, const Trajectory& traj);

/// Squared-magnitude samples of a unit-mean Rician fading coefficient with
/// the given linear K-factor.  Deterministic for a fixed seed; the generator
/// is mt19937_64 with an explicit Box-Muller transform so that sequences are
/// reproducible across standard libraries.
std::vector<double> sample_rician_power(double k_factor, std::uint64_t seed,
                                        int count);

struct SandwichReport {
  double lower = 0.0;      // log2(1 + 1/mean(y/x))
  double approx = 0.0;     // log2(1 + mean(x)/mean(y))
  double upper = 0.0;      // log2(1 + mean(x/y))
  double empirical = 0.0;  // mean(log2(1 + x/y))
  double empirical_stderr = 0.0;
};

/// Jensen sandwich around the expected-log-SINR approximation.  x entries
/// may be zero (the lower bound is then reported as 0); y entries must be
/// strictly positive.
SandwichReport theorem1_sandwich(std::span<const double> x,
                                 std::span<const double> y);

}  // namespace uavplan
