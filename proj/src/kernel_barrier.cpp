#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "uavplan/kernel.hpp"

namespace uavplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BarrierWorkspace {
  const SmoothConvexProgram& prog;
  std::vector<int> free_vars;
  int num_constraints = 0;

  explicit BarrierWorkspace(const SmoothConvexProgram& p) : prog(p) {
    for (int j = 0; j < p.num_vars; ++j)
      if (p.lower[j] < p.upper[j]) free_vars.push_back(j);
    for (int j : free_vars) {
      if (std::isfinite(prog.lower[j])) ++num_constraints;
      if (std::isfinite(prog.upper[j])) ++num_constraints;
    }
    num_constraints += static_cast<int>(p.linear.size());
    num_constraints += static_cast<int>(p.quadratic.size());
  }

  double linear_slack(const LinearConstraint& row, const Eigen::VectorXd& x) const {
    double s = row.rhs;
    for (const auto& [idx, c] : row.terms) s -= c * x[idx];
    return s;
  }

  double quadratic_slack(const QuadraticConstraint& q, const Eigen::VectorXd& x) const {
    double s = q.bound;
    for (const LinForm& form : q.forms) {
      const double v = form.eval(x);
      s -= v * v;
    }
    return s;
  }

  // Smallest slack over all constraints; <= 0 means not strictly interior.
  double min_slack(const Eigen::VectorXd& x) const {
    double m = kInf;
    for (int j : free_vars) {
      if (std::isfinite(prog.lower[j])) m = std::min(m, x[j] - prog.lower[j]);
      if (std::isfinite(prog.upper[j])) m = std::min(m, prog.upper[j] - x[j]);
    }
    for (const LinearConstraint& row : prog.linear)
      m = std::min(m, linear_slack(row, x));
    for (const QuadraticConstraint& q : prog.quadratic)
      m = std::min(m, quadratic_slack(q, x));
    return m;
  }

  // -f(x) - mu * sum log(slack); +inf outside the interior.
  double barrier_value(const Eigen::VectorXd& x, double mu) const {
    double log_sum = 0.0;
    for (int j : free_vars) {
      if (std::isfinite(prog.lower[j])) {
        const double s = x[j] - prog.lower[j];
        if (s <= 0.0) return kInf;
        log_sum += std::log(s);
      }
      if (std::isfinite(prog.upper[j])) {
        const double s = prog.upper[j] - x[j];
        if (s <= 0.0) return kInf;
        log_sum += std::log(s);
      }
    }
    for (const LinearConstraint& row : prog.linear) {
      const double s = linear_slack(row, x);
      if (s <= 0.0) return kInf;
      log_sum += std::log(s);
    }
    for (const QuadraticConstraint& q : prog.quadratic) {
      const double s = quadratic_slack(q, x);
      if (s <= 0.0) return kInf;
      log_sum += std::log(s);
    }
    return -prog.objective(x) - mu * log_sum;
  }

  // Gradient of the barrier value over the free variables (full-length
  // vector with zeros at pinned entries).
  void barrier_gradient(const Eigen::VectorXd& x, double mu,
                        Eigen::VectorXd& grad) const {
    prog.gradient(x, grad);
    grad = -grad;
    for (int j : free_vars) {
      if (std::isfinite(prog.lower[j])) grad[j] -= mu / (x[j] - prog.lower[j]);
      if (std::isfinite(prog.upper[j])) grad[j] += mu / (prog.upper[j] - x[j]);
    }
    for (const LinearConstraint& row : prog.linear) {
      double s = row.rhs;
      for (const auto& [idx, c] : row.terms) s -= c * x[idx];
      const double w = mu / s;
      for (const auto& [idx, c] : row.terms) grad[idx] += w * c;
    }
    for (const QuadraticConstraint& q : prog.quadratic) {
      const double s = quadratic_slack(q, x);
      const double w = mu / s;
      for (const LinForm& form : q.forms) {
        const double v = form.eval(x);
        for (const auto& [idx, c] : form.terms) grad[idx] += w * 2.0 * v * c;
      }
    }
    for (int j = 0; j < prog.num_vars; ++j)
      if (!(prog.lower[j] < prog.upper[j])) grad[j] = 0.0;
  }
};

// Largest step along d that keeps the box slacks positive (cheap upper
// bound for the line search; the remaining constraints are handled by the
// +inf barrier value).
double box_step_limit(const BarrierWorkspace& ws, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& d) {
  double limit = kInf;
  for (int j : ws.free_vars) {
    if (d[j] > 0.0 && std::isfinite(ws.prog.upper[j]))
      limit = std::min(limit, (ws.prog.upper[j] - x[j]) / d[j]);
    else if (d[j] < 0.0 && std::isfinite(ws.prog.lower[j]))
      limit = std::min(limit, (ws.prog.lower[j] - x[j]) / d[j]);
  }
  return limit;
}

}  // namespace

MaximizeResult maximize_concave(const SmoothConvexProgram& prog,
                                const Eigen::VectorXd& start,
                                const MaximizeOptions& opts) {
  if (start.size() != prog.num_vars)
    throw KernelError("start point has wrong dimension");
  BarrierWorkspace ws(prog);

  Eigen::VectorXd x = start;
  for (int j = 0; j < prog.num_vars; ++j)
    if (!(prog.lower[j] < prog.upper[j])) x[j] = prog.lower[j];  // pinned

  if (ws.min_slack(x) <= 0.0)
    throw InfeasibleStartError("maximize_concave: start is not strictly feasible");

  const double f_start = prog.objective(x);
  const int m = std::max(1, ws.num_constraints);
  double mu = std::max(1e-3, 0.01 * std::abs(f_start));
  const double mu_final = std::max(opts.tol / (4.0 * m), 1e-14);

  MaximizeResult result;
  result.point = x;
  result.value = f_start;

  Eigen::VectorXd grad(prog.num_vars), grad_new(prog.num_vars);
  bool final_stage_converged = true;
  int total_inner = 0;

  for (int stage = 0; stage < opts.max_stages; ++stage) {
    const bool last_stage = mu <= mu_final || ws.num_constraints == 0;
    const double g_tol = std::max(0.1 * mu, 1e-12);

    // L-BFGS on the barrier-augmented objective at this mu.
    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    double phi = ws.barrier_value(x, mu);
    ws.barrier_gradient(x, mu, grad);

    bool stage_converged = false;
    for (int it = 0; it < opts.max_inner; ++it, ++total_inner) {
      if (grad.norm() <= g_tol) {
        stage_converged = true;
        break;
      }
      // Two-loop recursion.
      Eigen::VectorXd d = -grad;
      std::vector<double> alpha(s_hist.size());
      for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
        alpha[i] = rho_hist[i] * s_hist[i].dot(d);
        d -= alpha[i] * y_hist[i];
      }
      if (!s_hist.empty()) {
        const double gamma = s_hist.back().dot(y_hist.back()) /
                             y_hist.back().squaredNorm();
        d *= gamma;
      }
      for (std::size_t i = 0; i < s_hist.size(); ++i) {
        const double beta = rho_hist[i] * y_hist[i].dot(d);
        d += (alpha[i] - beta) * s_hist[i];
      }
      double descent = grad.dot(d);
      if (descent >= 0.0) {  // fall back to steepest descent
        d = -grad;
        descent = grad.dot(d);
      }

      double step = std::min(1.0, 0.995 * box_step_limit(ws, x, d));
      if (!(step > 0.0)) break;
      double phi_new = kInf;
      Eigen::VectorXd x_new;
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        x_new = x + step * d;
        phi_new = ws.barrier_value(x_new, mu);
        if (phi_new < phi + 1e-4 * step * descent) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;

      ws.barrier_gradient(x_new, mu, grad_new);
      const Eigen::VectorXd s_vec = x_new - x;
      const Eigen::VectorXd y_vec = grad_new - grad;
      const double sy = s_vec.dot(y_vec);
      if (sy > 1e-12 * s_vec.norm() * y_vec.norm()) {
        s_hist.push_back(s_vec);
        y_hist.push_back(y_vec);
        rho_hist.push_back(1.0 / sy);
        if (static_cast<int>(s_hist.size()) > opts.lbfgs_memory) {
          s_hist.pop_front();
          y_hist.pop_front();
          rho_hist.pop_front();
        }
      }
      x = std::move(x_new);
      phi = phi_new;
      grad = grad_new;
    }

    result.grad_norm = grad.norm();
    ++result.stages;
    if (last_stage) {
      final_stage_converged = stage_converged;
      break;
    }
    mu = std::max(mu * 0.2, mu_final);
  }

  result.inner_iterations = total_inner;
  const double f_final = prog.objective(x);
  if (f_final >= result.value) {
    result.point = std::move(x);
    result.value = f_final;
  }
  result.converged = final_stage_converged;
  return result;
}

}  // namespace uavplan
