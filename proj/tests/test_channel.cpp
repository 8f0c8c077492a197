#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "test_support.hpp"
#include "uavplan/channel.hpp"

using namespace uavplan;
using namespace uavplan::testing;

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

}  // namespace

TEST_CASE("expected gains follow the inverse power-law forms") {
  ScenarioConfig cfg = hover_config(1.0, 2);
  cfg.uav_bs.q_init = cfg.uav_bs.q_final = cfg.sn_positions[0];
  cfg.uav_bs.h_init = cfg.uav_bs.h_final = 100.0;
  const Trajectory traj = hover_trajectory(cfg);
  const ExpectedGains gains = expected_gains(cfg, traj);

  SUBCASE("UAV-BS directly above the SN at 100 m gives beta0 / 1e4") {
    CHECK(gains.h[0][0] == doctest::Approx(1e-10).epsilon(1e-12));
  }
  SUBCASE("ground-to-ground gain at 100 m with alpha = 3") {
    CHECK(gains.h_g2g[0][0] == doctest::Approx(1e-12).epsilon(1e-12));
  }
  SUBCASE("doubling the UAV separation divides f by four (kappa_u = 2)") {
    ScenarioConfig far = cfg;
    const Eigen::Vector3d d = {traj.pos_u(1).x() - traj.pos_b(1).x(),
                               traj.pos_u(1).y() - traj.pos_b(1).y(),
                               traj.pos_u(1).z() - traj.pos_b(1).z()};
    Trajectory doubled = traj;
    for (int n = 0; n <= cfg.num_slots(); ++n) {
      doubled.q_u[n].x() = traj.q_b[n].x() + 2.0 * d.x();
      doubled.q_u[n].y() = traj.q_b[n].y() + 2.0 * d.y();
      doubled.h_u[n] = traj.h_b[n] + 2.0 * d.z();
    }
    const ExpectedGains g2 = expected_gains(cfg, doubled);
    CHECK(g2.f[0] == doctest::Approx(gains.f[0] / 4.0).epsilon(1e-12));
  }
  SUBCASE("all gains are positive and finite") {
    for (const auto& row : gains.h)
      for (double v : row) CHECK(v > 0.0);
    for (double v : gains.f) CHECK(std::isfinite(v));
  }
}

TEST_CASE("gain errors: coincident nodes") {
  ScenarioConfig cfg = hover_config(1.0, 2);
  SUBCASE("coincident SN and AP") {
    cfg.ap_positions[0] = cfg.sn_positions[0];
    CHECK_THROWS_AS(expected_gains(cfg, hover_trajectory(cfg)), ConfigError);
  }
  SUBCASE("coincident UAVs") {
    cfg.uav_ap = cfg.uav_bs;
    Trajectory traj = hover_trajectory(cfg);
    CHECK_THROWS_AS(expected_gains(cfg, traj), ConfigError);
  }
}

TEST_CASE("gains are translation invariant and scale with beta0") {
  ScenarioConfig cfg = hover_config(2.0, 4);
  const Trajectory traj = hover_trajectory(cfg);
  const ExpectedGains base = expected_gains(cfg, traj);

  ScenarioConfig shifted = cfg;
  const Eigen::Vector2d offset(123.0, -77.0);
  shifted.sn_positions[0] += offset;
  shifted.ap_positions[0] += offset;
  shifted.uav_bs.q_init += offset;
  shifted.uav_bs.q_final += offset;
  shifted.uav_ap.q_init += offset;
  shifted.uav_ap.q_final += offset;
  const ExpectedGains moved = expected_gains(shifted, hover_trajectory(shifted));
  CHECK(moved.h[0][0] == doctest::Approx(base.h[0][0]).epsilon(1e-12));
  CHECK(moved.g[0][1] == doctest::Approx(base.g[0][1]).epsilon(1e-12));
  CHECK(moved.f[2] == doctest::Approx(base.f[2]).epsilon(1e-12));
  CHECK(moved.h_g2g[0][0] == doctest::Approx(base.h_g2g[0][0]).epsilon(1e-12));

  ScenarioConfig doubled = cfg;
  doubled.beta0 *= 2.0;
  const ExpectedGains scaled = expected_gains(doubled, traj);
  CHECK(scaled.h[0][0] == doctest::Approx(2.0 * base.h[0][0]).epsilon(1e-12));
  CHECK(scaled.h_g2g[0][0] == doctest::Approx(2.0 * base.h_g2g[0][0]).epsilon(1e-12));
}

TEST_CASE("Rician power sampler") {
  SUBCASE("huge K-factor collapses to the deterministic LoS limit") {
    for (double v : sample_rician_power(1e12, 7, 200))
      CHECK(v == doctest::Approx(1.0).epsilon(1e-5));
  }
  SUBCASE("K = 0 is unit-mean exponential (Rayleigh power)") {
    const auto samples = sample_rician_power(0.0, 11, 10000);
    // Exponential has unit variance; 3 sigma of the mean estimate.
    CHECK(std::abs(mean_of(samples) - 1.0) < 3.0 / std::sqrt(10000.0));
  }
  SUBCASE("3 dB factor keeps the unit mean") {
    const auto samples = sample_rician_power(std::pow(10.0, 0.3), 42, 10000);
    const double mean = mean_of(samples);
    CHECK(mean > 0.97);
    CHECK(mean < 1.03);
  }
  SUBCASE("fixed seed reproduces the stream") {
    CHECK(sample_rician_power(2.0, 99, 50) == sample_rician_power(2.0, 99, 50));
    CHECK(sample_rician_power(2.0, 99, 50) != sample_rician_power(2.0, 100, 50));
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(sample_rician_power(-1.0, 1, 10), ConfigError);
    CHECK_THROWS_AS(sample_rician_power(1.0, 1, 0), ConfigError);
  }
}

TEST_CASE("log-ratio sandwich") {
  SUBCASE("degenerate distributions collapse the Jensen gaps") {
    const std::vector<double> x(32, 2.0), y(32, 1.0);
    const SandwichReport r = theorem1_sandwich(x, y);
    const double expected = std::log2(3.0);
    CHECK(r.lower == doctest::Approx(expected));
    CHECK(r.approx == doctest::Approx(expected));
    CHECK(r.upper == doctest::Approx(expected));
    CHECK(r.empirical == doctest::Approx(expected));
  }
  SUBCASE("all-zero X reports zero everywhere") {
    const std::vector<double> x(16, 0.0), y(16, 0.5);
    const SandwichReport r = theorem1_sandwich(x, y);
    CHECK(r.lower == 0.0);
    CHECK(r.approx == 0.0);
    CHECK(r.upper == 0.0);
    CHECK(r.empirical == 0.0);
  }
  SUBCASE("Rician signal over constant noise matches the Monte-Carlo oracle") {
    const double noise = 1e-14;
    std::vector<double> x = sample_rician_power(std::pow(10.0, 0.3), 2024, 10000);
    for (double& v : x) v *= 1e3 * noise;
    const std::vector<double> y(x.size(), noise);
    const SandwichReport r = theorem1_sandwich(x, y);
    // approx = log2(1 + 1e3 * sample_mean), sample mean near 1.
    CHECK(r.approx == doctest::Approx(std::log2(1001.0)).epsilon(0.01));
    // Frozen from an independent 2e5-sample Monte-Carlo run: the Jensen gap
    // of log2(1 + 1000 X) at this K-factor is -0.508.
    CHECK(r.empirical - r.approx == doctest::Approx(-0.508).epsilon(0.15));
    // With constant y the sandwich holds deterministically (AM-HM / Jensen
    // on the samples themselves); allow accumulation-order noise only.
    CHECK(r.lower <= r.approx + 1e-12);
    CHECK(r.approx <= r.upper + 1e-12);
    CHECK(r.lower <= r.empirical + 1e-12);
    CHECK(r.empirical <= r.upper + 1e-12);
  }
  SUBCASE("input validation") {
    const std::vector<double> x = {1.0}, none = {};
    CHECK_THROWS_AS(theorem1_sandwich(x, none), ConfigError);
    const std::vector<double> bad_y = {0.0};
    CHECK_THROWS_AS(theorem1_sandwich(x, bad_y), ConfigError);
  }
}
