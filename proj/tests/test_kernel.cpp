#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "uavplan/kernel.hpp"

using namespace uavplan;

namespace {

LinearRow make_row(std::initializer_list<double> coeffs, double rhs, RowSense sense) {
  LinearRow row;
  row.coeffs = Eigen::VectorXd(static_cast<int>(coeffs.size()));
  int i = 0;
  for (double c : coeffs) row.coeffs[i++] = c;
  row.rhs = rhs;
  row.sense = sense;
  return row;
}

// P5-style single-slot rows: SINR targets against penalty-coupled powers.
// Variables: p_s[0..K-1] then p_u[0..L-1], in watts.
struct P5Slot {
  std::vector<double> h, g, alpha, alpha_bar;      // per SN / AP
  std::vector<std::vector<double>> g2g;            // K x L
  double f = 0.0, noise = 1e-14, M = 1e5;
  double p_max_s = 0.1, p_max_u = 0.1;

  int K() const { return static_cast<int>(h.size()); }
  int L() const { return static_cast<int>(g.size()); }

  LinearFeasibilityProblem problem(double lambda) const {
    const int n = K() + L();
    std::vector<LinearRow> rows;
    for (int k = 0; k < K(); ++k) {
      const double t = lambda * alpha[k];
      if (t <= 0.0) continue;
      LinearRow row;
      row.coeffs = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < K(); ++i)
        if (i != k) row.coeffs[i] = t * M;
      for (int l = 0; l < L(); ++l) row.coeffs[K() + l] = t * f;
      row.coeffs[k] = -h[k];
      row.rhs = -t * noise;
      rows.push_back(std::move(row));
    }
    for (int l = 0; l < L(); ++l) {
      const double t = lambda * alpha_bar[l];
      if (t <= 0.0) continue;
      LinearRow row;
      row.coeffs = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < L(); ++i)
        if (i != l) row.coeffs[K() + i] = t * M;
      for (int k = 0; k < K(); ++k) row.coeffs[k] = t * g2g[k][l];
      row.coeffs[K() + l] = -g[l];
      row.rhs = -t * noise;
      rows.push_back(std::move(row));
    }
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(n), up(n);
    for (int k = 0; k < K(); ++k) up[k] = p_max_s;
    for (int l = 0; l < L(); ++l) up[K() + l] = p_max_u;
    return LinearFeasibilityProblem::create(lo, up, std::move(rows));
  }

  // Independent oracle: the targets are achievable iff the componentwise
  // minimal fixed point of the affine interference map exists within the
  // boxes (standard interference-function argument).  Components with zero
  // targets are optimally silent and drop out.
  bool oracle_feasible(double lambda) const {
    std::vector<int> act_s, act_u;
    for (int k = 0; k < K(); ++k)
      if (lambda * alpha[k] > 0.0) act_s.push_back(k);
    for (int l = 0; l < L(); ++l)
      if (lambda * alpha_bar[l] > 0.0) act_u.push_back(l);
    const int n = static_cast<int>(act_s.size() + act_u.size());
    if (n == 0) return true;

    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd c(n);
    for (int a = 0; a < static_cast<int>(act_s.size()); ++a) {
      const int k = act_s[a];
      const double t = lambda * alpha[k];
      for (int b = 0; b < static_cast<int>(act_s.size()); ++b)
        if (b != a) B(a, b) = t * M / h[k];
      for (int b = 0; b < static_cast<int>(act_u.size()); ++b)
        B(a, static_cast<int>(act_s.size()) + b) = t * f / h[k];
      c[a] = t * noise / h[k];
    }
    for (int a = 0; a < static_cast<int>(act_u.size()); ++a) {
      const int l = act_u[a];
      const int row = static_cast<int>(act_s.size()) + a;
      const double t = lambda * alpha_bar[l];
      for (int b = 0; b < static_cast<int>(act_s.size()); ++b)
        B(row, b) = t * g2g[act_s[b]][l] / g[l];
      for (int b = 0; b < static_cast<int>(act_u.size()); ++b)
        if (b != a) B(row, static_cast<int>(act_s.size()) + b) = t * M / g[l];
      c[row] = t * noise / g[l];
    }

    // Feasible iff rho(B) < 1 and the fixed point respects the boxes.
    const Eigen::VectorXcd eigs = B.eigenvalues();
    double rho = 0.0;
    for (int i = 0; i < n; ++i) rho = std::max(rho, std::abs(eigs[i]));
    if (rho >= 1.0 - 1e-12) return false;
    const Eigen::VectorXd p_star =
        (Eigen::MatrixXd::Identity(n, n) - B).lu().solve(c);
    for (int a = 0; a < static_cast<int>(act_s.size()); ++a)
      if (p_star[a] > p_max_s * (1.0 + 1e-9)) return false;
    for (int a = 0; a < static_cast<int>(act_u.size()); ++a)
      if (p_star[static_cast<int>(act_s.size()) + a] > p_max_u * (1.0 + 1e-9))
        return false;
    return true;
  }
};

}  // namespace

TEST_CASE("linear feasibility basics") {
  SUBCASE("box [0, 0.1] with p >= 0.05 is feasible") {
    auto prob = LinearFeasibilityProblem::create(
        Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 0.1),
        {make_row({1.0}, 0.05, RowSense::ge)});
    const auto result = check_linear_feasibility(prob);
    REQUIRE(result.feasible);
    CHECK(result.witness[0] >= 0.05 - 1e-9);
    CHECK(result.witness[0] <= 0.1 + 1e-9);
  }
  SUBCASE("p >= 0.2 against box [0, 0.1] is infeasible") {
    auto prob = LinearFeasibilityProblem::create(
        Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 0.1),
        {make_row({1.0}, 0.2, RowSense::ge)});
    CHECK_FALSE(check_linear_feasibility(prob).feasible);
  }
  SUBCASE("equality rows work") {
    auto prob = LinearFeasibilityProblem::create(
        Eigen::VectorXd::Constant(2, -1.0), Eigen::VectorXd::Constant(2, 1.0),
        {make_row({1.0, 1.0}, 0.5, RowSense::eq),
         make_row({1.0, -1.0}, 0.1, RowSense::le)});
    const auto result = check_linear_feasibility(prob);
    REQUIRE(result.feasible);
    CHECK(result.witness.sum() == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("degenerate construction is rejected") {
    Eigen::VectorXd lo = Eigen::VectorXd::Ones(1), up = Eigen::VectorXd::Zero(1);
    CHECK_THROWS_AS(LinearFeasibilityProblem::create(lo, up, {}), KernelError);
    Eigen::VectorXd inf_up = Eigen::VectorXd::Constant(
        1, std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(
        LinearFeasibilityProblem::create(Eigen::VectorXd::Zero(1), inf_up, {}),
        KernelError);
  }
}

TEST_CASE("P5 instance at the interference-free SINR cap") {
  // lambda * chi = h p_max / sigma^2 is achievable only with the SN at full
  // power and a silent UAV-AP (brute-force grid oracle at 1e-4 W).
  P5Slot slot;
  slot.h = {1e-10};
  slot.g = {1e-10};
  slot.alpha = {1e-10 * 0.1 / 1e-14};
  slot.alpha_bar = {0.0};
  slot.g2g = {{1e-12}};
  slot.f = 1e-12;

  double best_margin = -1e30;
  double best_ps = 0.0, best_pu = 0.0;
  for (int i = 0; i <= 1000; ++i)
    for (int j = 0; j <= 1000; ++j) {
      const double ps = i * 1e-4, pu = j * 1e-4;
      const double margin =
          slot.h[0] * ps - slot.alpha[0] * (slot.f * pu + slot.noise);
      if (margin > best_margin) {
        best_margin = margin;
        best_ps = ps;
        best_pu = pu;
      }
    }
  CHECK(best_margin == doctest::Approx(0.0).epsilon(1e-9));  // exactly attainable
  CHECK(best_ps == doctest::Approx(0.1));
  CHECK(best_pu == doctest::Approx(0.0));

  const auto result = check_linear_feasibility(slot.problem(1.0));
  REQUIRE(result.feasible);
  CHECK(result.witness[0] == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(result.witness[1] <= 1e-6);
  // Any lambda above 1 must fail.
  CHECK_FALSE(check_linear_feasibility(slot.problem(1.0 + 1e-6)).feasible);
}

TEST_CASE("P5 family matches the interference fixed-point oracle") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> log_gain(-11.0, -9.0);
  std::uniform_real_distribution<double> log_weak(-14.0, -11.0);
  std::uniform_real_distribution<double> target(0.0, 2000.0);
  std::uniform_int_distribution<int> dim(1, 3);

  int feasible_count = 0;
  for (int trial = 0; trial < 200; ++trial) {
    P5Slot slot;
    const int K = dim(rng), L = dim(rng);
    for (int k = 0; k < K; ++k) {
      slot.h.push_back(std::pow(10.0, log_gain(rng)));
      slot.alpha.push_back(trial % 4 == 0 ? 0.0 : target(rng));
    }
    for (int l = 0; l < L; ++l) {
      slot.g.push_back(std::pow(10.0, log_gain(rng)));
      slot.alpha_bar.push_back(trial % 5 == 0 ? 0.0 : target(rng));
    }
    slot.f = std::pow(10.0, log_weak(rng));
    slot.g2g.assign(K, std::vector<double>(L));
    for (int k = 0; k < K; ++k)
      for (int l = 0; l < L; ++l) slot.g2g[k][l] = std::pow(10.0, log_weak(rng));

    for (double lambda : {1e-4, 1e-2, 0.5, 1.0}) {
      const auto result = check_linear_feasibility(slot.problem(lambda));
      const bool expected = slot.oracle_feasible(lambda);
      CAPTURE(trial);
      CAPTURE(lambda);
      CHECK(result.feasible == expected);
      if (result.feasible) {
        ++feasible_count;
        // Witness respects every row of the original system.
        for (int k = 0; k < K; ++k) {
          double interf = slot.noise;
          for (int i = 0; i < K; ++i)
            if (i != k) interf += slot.M * result.witness[i];
          for (int l = 0; l < L; ++l) interf += slot.f * result.witness[K + l];
          CHECK(slot.h[k] * result.witness[k] >=
                lambda * slot.alpha[k] * interf - 1e-9 * interf);
        }
      }
    }
  }
  CHECK(feasible_count > 20);  // the family is not vacuously infeasible
}

TEST_CASE("feasibility is monotone in lambda for the P5 family") {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> log_gain(-11.0, -9.0);
  std::uniform_real_distribution<double> target(0.0, 1500.0);
  for (int trial = 0; trial < 40; ++trial) {
    P5Slot slot;
    slot.h = {std::pow(10.0, log_gain(rng)), std::pow(10.0, log_gain(rng))};
    slot.g = {std::pow(10.0, log_gain(rng))};
    slot.alpha = {target(rng), target(rng)};
    slot.alpha_bar = {target(rng)};
    slot.g2g = {{1e-13}, {2e-13}};
    slot.f = 1e-12;

    bool seen_infeasible = false;
    for (double lambda = 1.0 / 128.0; lambda <= 1.0; lambda += 1.0 / 128.0) {
      const bool ok = check_linear_feasibility(slot.problem(lambda)).feasible;
      if (!ok) seen_infeasible = true;
      if (seen_infeasible) CHECK_FALSE(ok);
    }
  }
}

TEST_CASE("maximize_concave") {
  SUBCASE("interior quadratic optimum") {
    SmoothConvexProgram prog;
    prog.num_vars = 1;
    prog.lower = Eigen::VectorXd::Zero(1);
    prog.upper = Eigen::VectorXd::Constant(1, 10.0);
    prog.objective = [](const Eigen::VectorXd& z) {
      return -(z[0] - 3.0) * (z[0] - 3.0);
    };
    prog.gradient = [](const Eigen::VectorXd& z, Eigen::VectorXd& g) {
      g.resize(1);
      g[0] = -2.0 * (z[0] - 3.0);
    };
    const auto res = maximize_concave(prog, Eigen::VectorXd::Constant(1, 1.0));
    CHECK(res.point[0] == doctest::Approx(3.0).epsilon(1e-4));
    CHECK(res.value == doctest::Approx(0.0).epsilon(1e-6));
  }

  SUBCASE("monotone objective activates the upper bound") {
    SmoothConvexProgram prog;
    prog.num_vars = 1;
    prog.lower = Eigen::VectorXd::Zero(1);
    prog.upper = Eigen::VectorXd::Constant(1, 0.1);
    prog.objective = [](const Eigen::VectorXd& z) { return std::log2(1.0 + z[0]); };
    prog.gradient = [](const Eigen::VectorXd& z, Eigen::VectorXd& g) {
      g.resize(1);
      g[0] = 1.0 / ((1.0 + z[0]) * std::log(2.0));
    };
    const auto res = maximize_concave(prog, Eigen::VectorXd::Constant(1, 0.05));
    CHECK(res.point[0] == doctest::Approx(0.1).epsilon(1e-4));
    CHECK(res.value == doctest::Approx(std::log2(1.1)).epsilon(1e-5));
  }

  SUBCASE("quadratic constraint and ascent property") {
    // maximize x + y inside the unit disc intersected with x <= 0.5.
    SmoothConvexProgram prog;
    prog.num_vars = 2;
    prog.lower = Eigen::VectorXd::Constant(2, -5.0);
    prog.upper = Eigen::VectorXd::Constant(2, 5.0);
    prog.objective = [](const Eigen::VectorXd& z) { return z[0] + z[1]; };
    prog.gradient = [](const Eigen::VectorXd&, Eigen::VectorXd& g) {
      g = Eigen::VectorXd::Ones(2);
    };
    QuadraticConstraint disc;
    disc.forms = {LinForm{{{0, 1.0}}, 0.0}, LinForm{{{1, 1.0}}, 0.0}};
    disc.bound = 1.0;
    prog.quadratic.push_back(disc);
    prog.linear.push_back({{{0, 1.0}}, 0.5});

    const Eigen::VectorXd start = Eigen::VectorXd::Zero(2);
    const auto res = maximize_concave(prog, start);
    // Optimum: x = 0.5, y = sqrt(0.75).
    CHECK(res.point[0] == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(res.point[1] == doctest::Approx(std::sqrt(0.75)).epsilon(1e-3));
    CHECK(res.value >= prog.objective(start) - 1e-6);
    // Returned point feasible.
    CHECK(res.point.squaredNorm() <= 1.0 + 1e-8);
    CHECK(res.point[0] <= 0.5 + 1e-8);
  }

  SUBCASE("infeasible start is signalled") {
    SmoothConvexProgram prog;
    prog.num_vars = 1;
    prog.lower = Eigen::VectorXd::Zero(1);
    prog.upper = Eigen::VectorXd::Ones(1);
    prog.objective = [](const Eigen::VectorXd& z) { return z[0]; };
    prog.gradient = [](const Eigen::VectorXd&, Eigen::VectorXd& g) {
      g = Eigen::VectorXd::Ones(1);
    };
    CHECK_THROWS_AS(maximize_concave(prog, Eigen::VectorXd::Constant(1, 1.0)),
                    InfeasibleStartError);
    CHECK_THROWS_AS(maximize_concave(prog, Eigen::VectorXd::Constant(1, -0.2)),
                    InfeasibleStartError);
  }

  SUBCASE("pinned variables are honored") {
    SmoothConvexProgram prog;
    prog.num_vars = 2;
    prog.lower = Eigen::VectorXd::Zero(2);
    prog.upper = Eigen::VectorXd::Ones(2);
    prog.lower[1] = prog.upper[1] = 0.25;
    prog.objective = [](const Eigen::VectorXd& z) { return z[0] + 4.0 * z[1]; };
    prog.gradient = [](const Eigen::VectorXd&, Eigen::VectorXd& g) {
      g.resize(2);
      g << 1.0, 4.0;
    };
    Eigen::VectorXd start(2);
    start << 0.5, 0.25;
    const auto res = maximize_concave(prog, start);
    CHECK(res.point[1] == doctest::Approx(0.25));
    CHECK(res.point[0] == doctest::Approx(1.0).epsilon(1e-4));
  }
}
