// Generic optimization primitives used by both solvers: an exact linear
// feasibility oracle (dense phase-1 simplex) and a concave maximizer over
// box / linear / convex-quadratic constraint sets (log-barrier path
// following with an L-BFGS inner loop).
//
// Callers are expected to pre-scale variables to O(1); rows are
// additionally equilibrated internally.

#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace uavplan {

class KernelError : public std::runtime_error {
 public:
  explicit KernelError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown by maximize_concave when the supplied start violates a constraint;
/// the caller is expected to repair its initialization and retry.
class InfeasibleStartError : public KernelError {
 public:
  explicit InfeasibleStartError(const std::string& what) : KernelError(what) {}
};

enum class RowSense { le, ge, eq };

struct LinearRow {
  Eigen::VectorXd coeffs;
  double rhs = 0.0;
  RowSense sense = RowSense::le;
};

struct LinearFeasibilityProblem {
  int num_vars = 0;
  Eigen::VectorXd lower;  // finite
  Eigen::VectorXd upper;  // finite, >= lower
  std::vector<LinearRow> rows;

  /// Validates shapes, finiteness and bound ordering; throws KernelError.
  static LinearFeasibilityProblem create(Eigen::VectorXd lower,
                                         Eigen::VectorXd upper,
                                         std::vector<LinearRow> rows);
};

struct FeasibilityResult {
  bool feasible = false;
  Eigen::VectorXd witness;  // defined only when feasible
};

/// Phase-1 simplex feasibility check.  When feasible, the witness satisfies
/// every row and box bound to 1e-9 absolute (after row equilibration).
FeasibilityResult check_linear_feasibility(const LinearFeasibilityProblem& prob);

/// Sparse affine form: sum of coeff * z[index] plus a constant offset.
struct LinForm {
  std::vector<std::pair<int, double>> terms;
  double offset = 0.0;

  double eval(const Eigen::VectorXd& z) const {
    double v = offset;
    for (const auto& [idx, c] : terms) v += c * z[idx];
    return v;
  }
};

/// a . z <= rhs with sparse coefficients.
struct LinearConstraint {
  std::vector<std::pair<int, double>> terms;
  double rhs = 0.0;
};

/// sum_i form_i(z)^2 <= bound  (i.e. ||A z + b||^2 <= c).
struct QuadraticConstraint {
  std::vector<LinForm> forms;
  double bound = 0.0;
};

struct SmoothConvexProgram {
  int num_vars = 0;
  Eigen::VectorXd lower;  // -inf allowed
  Eigen::VectorXd upper;  // +inf allowed; lower == upper pins a variable
  std::function<double(const Eigen::VectorXd&)> objective;  // concave
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> gradient;
  std::vector<LinearConstraint> linear;
  std::vector<QuadraticConstraint> quadratic;
};

struct MaximizeOptions {
  double tol = 1e-6;        // target objective accuracy, scaled units
  int max_inner = 400;      // L-BFGS iterations per barrier stage
  int max_stages = 80;
  int lbfgs_memory = 8;
};

struct MaximizeResult {
  Eigen::VectorXd point;
  double value = 0.0;
  bool converged = true;   // false when an iteration cap was hit
  int stages = 0;
  int inner_iterations = 0;
  double grad_norm = 0.0;  // barrier-gradient norm at the last iterate
};

/// Maximizes a smooth concave objective over the program's constraint set.
/// Requires a strictly feasible start (throws InfeasibleStartError
/// otherwise).  The returned point is always feasible and its value is
/// never below objective(start) - tol.
MaximizeResult maximize_concave(const SmoothConvexProgram& prog,
                                const Eigen::VectorXd& start,
                                const MaximizeOptions& opts = {});

}  // namespace uavplan
