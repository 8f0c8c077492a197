#include <cmath>
#include <limits>

#include "uavplan/kernel.hpp"

namespace uavplan {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-9;

// Dense phase-1 simplex on the standard form
//   A z <= b, z >= 0
// obtained by shifting variables to their lower bounds and turning upper
// bounds into rows.  Artificial variables cover rows with negative rhs;
// Bland's rule guarantees termination under degeneracy.
class PhaseOneSimplex {
 public:
  PhaseOneSimplex(const Eigen::MatrixXd& a, const Eigen::VectorXd& b)
      : num_rows_(static_cast<int>(a.rows())), num_z_(static_cast<int>(a.cols())) {
    num_cols_ = num_z_ + num_rows_;  // z + slacks; artificials appended below
    std::vector<int> artificial_rows;
    for (int i = 0; i < num_rows_; ++i)
      if (b[i] < 0.0) artificial_rows.push_back(i);
    const int num_art = static_cast<int>(artificial_rows.size());

    tableau_.setZero(num_rows_, num_cols_ + num_art + 1);
    basis_.assign(num_rows_, -1);

    for (int i = 0; i < num_rows_; ++i) {
      const double sign = b[i] < 0.0 ? -1.0 : 1.0;  // keep rhs nonnegative
      tableau_.row(i).head(num_z_) = sign * a.row(i);
      tableau_(i, num_z_ + i) = sign;  // slack column
      tableau_(i, num_cols_ + num_art) = sign * b[i];
      basis_[i] = num_z_ + i;  // slack basic when rhs >= 0
    }
    for (int j = 0; j < num_art; ++j) {
      const int i = artificial_rows[j];
      tableau_(i, num_cols_ + j) = 1.0;
      basis_[i] = num_cols_ + j;
    }
    num_cols_ += num_art;
  }

  // Returns the phase-1 optimum (sum of artificials); 0 means feasible.
  double solve() {
    const int rhs_col = num_cols_;
    // Reduced costs of min(sum of artificials): start from c and cancel the
    // basic artificial rows.
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(num_cols_ + 1);
    for (int i = 0; i < num_rows_; ++i)
      if (is_artificial(basis_[i])) cost -= tableau_.row(i);
    for (int j = 0; j < num_cols_; ++j)
      if (is_artificial(j)) cost[j] += 1.0;

    const long max_pivots = 2000L + 50L * static_cast<long>(num_cols_) * num_rows_;
    for (long pivots = 0; pivots < max_pivots; ++pivots) {
      int enter = -1;  // Bland: smallest improving index
      for (int j = 0; j < num_cols_; ++j)
        if (cost[j] < -kPivotTol && !is_artificial_retired(j)) {
          enter = j;
          break;
        }
      if (enter < 0) return -cost[rhs_col];

      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < num_rows_; ++i) {
        const double coeff = tableau_(i, enter);
        if (coeff > kPivotTol) {
          const double ratio = tableau_(i, rhs_col) / coeff;
          if (ratio < best_ratio - 1e-15 ||
              (ratio < best_ratio + 1e-15 &&
               (leave < 0 || basis_[i] < basis_[leave])))
            best_ratio = ratio, leave = i;
        }
      }
      if (leave < 0) return -cost[rhs_col];  // cannot happen: bounded objective

      pivot(leave, enter, cost);
    }
    return -cost[rhs_col];  // pivot cap; report best value found
  }

  Eigen::VectorXd extract_z() const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(num_z_);
    for (int i = 0; i < num_rows_; ++i)
      if (basis_[i] < num_z_) z[basis_[i]] = std::max(0.0, tableau_(i, num_cols_));
    return z;
  }

 private:
  bool is_artificial(int col) const { return col >= first_artificial_col(); }
  int first_artificial_col() const { return num_z_ + num_rows_; }
  // Once an artificial leaves the basis it must not re-enter.
  bool is_artificial_retired(int col) const {
    if (!is_artificial(col)) return false;
    for (int i = 0; i < num_rows_; ++i)
      if (basis_[i] == col) return false;
    return true;
  }

  void pivot(int row, int col, Eigen::VectorXd& cost) {
    tableau_.row(row) /= tableau_(row, col);
    for (int i = 0; i < num_rows_; ++i) {
      if (i == row) continue;
      const double factor = tableau_(i, col);
      if (factor != 0.0) tableau_.row(i) -= factor * tableau_.row(row);
    }
    cost -= cost[col] * tableau_.row(row);
    basis_[row] = col;
  }

  int num_rows_;
  int num_z_;
  int num_cols_;
  Eigen::MatrixXd tableau_;  // rows x (cols + rhs)
  std::vector<int> basis_;
};

}  // namespace

LinearFeasibilityProblem LinearFeasibilityProblem::create(
    Eigen::VectorXd lower, Eigen::VectorXd upper, std::vector<LinearRow> rows) {
  const int n = static_cast<int>(lower.size());
  if (upper.size() != n) throw KernelError("bound vectors differ in length");
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]))
      throw KernelError("feasibility boxes must be finite");
    if (lower[j] > upper[j])
      throw KernelError("lower bound exceeds upper bound at variable " +
                        std::to_string(j));
  }
  for (const LinearRow& row : rows) {
    if (row.coeffs.size() != n) throw KernelError("row length mismatch");
    if (!row.coeffs.allFinite() || !std::isfinite(row.rhs))
      throw KernelError("rows must have finite coefficients");
  }
  LinearFeasibilityProblem p;
  p.num_vars = n;
  p.lower = std::move(lower);
  p.upper = std::move(upper);
  p.rows = std::move(rows);
  return p;
}

namespace {

// Bound-propagation presolve.  Each pass recomputes row activities from the
// original coefficients, so the huge dynamic ranges of penalty-coupled rows
// (coefficients spanning ~1e18) are handled without tableau roundoff: a row
// whose minimum activity already exceeds its rhs proves infeasibility, and
// implied bounds pin variables whose feasible range is far below the
// absolute solver tolerance.
enum class PresolveVerdict { open, infeasible };

PresolveVerdict propagate_bounds(const LinearFeasibilityProblem& prob,
                                 Eigen::VectorXd& lo, Eigen::VectorXd& up) {
  const int n = prob.num_vars;
  // One <=-row per inequality direction.
  std::vector<std::pair<Eigen::VectorXd, double>> rows;
  for (const LinearRow& row : prob.rows) {
    if (row.sense != RowSense::ge) rows.emplace_back(row.coeffs, row.rhs);
    if (row.sense != RowSense::le) rows.emplace_back(-row.coeffs, -row.rhs);
  }

  for (int pass = 0; pass < 60; ++pass) {
    bool changed = false;
    for (const auto& [a, b] : rows) {
      double min_activity = 0.0;
      double range = std::abs(b);
      for (int j = 0; j < n; ++j) {
        min_activity += a[j] > 0.0 ? a[j] * lo[j] : a[j] * up[j];
        range += std::abs(a[j]) * std::max(std::abs(lo[j]), std::abs(up[j]));
      }
      const double slack = 1e-12 * range + 1e-300;
      if (min_activity > b + slack) return PresolveVerdict::infeasible;

      for (int j = 0; j < n; ++j) {
        if (a[j] == 0.0) continue;
        const double others =
            min_activity - (a[j] > 0.0 ? a[j] * lo[j] : a[j] * up[j]);
        const double bound = (b - others) / a[j];
        if (a[j] > 0.0) {
          if (bound < lo[j] - slack / std::abs(a[j]))
            return PresolveVerdict::infeasible;
          const double new_up = std::max(bound, lo[j]);
          if (new_up < up[j] - 1e-9 * (up[j] - lo[j] + std::abs(up[j]))) {
            up[j] = new_up;
            changed = true;
          }
        } else {
          if (bound > up[j] + slack / std::abs(a[j]))
            return PresolveVerdict::infeasible;
          const double new_lo = std::min(bound, up[j]);
          if (new_lo > lo[j] + 1e-9 * (up[j] - lo[j] + std::abs(lo[j]))) {
            lo[j] = new_lo;
            changed = true;
          }
        }
      }
    }
    if (!changed) break;
  }
  return PresolveVerdict::open;
}

}  // namespace

FeasibilityResult check_linear_feasibility(const LinearFeasibilityProblem& prob) {
  const int n = prob.num_vars;

  Eigen::VectorXd tightened_lo = prob.lower;
  Eigen::VectorXd tightened_up = prob.upper;
  if (propagate_bounds(prob, tightened_lo, tightened_up) ==
      PresolveVerdict::infeasible)
    return {false, {}};

  // Normalize rows to <= sense over shifted variables z = x - lower, then
  // append the upper bounds as rows.  Each row is equilibrated by its
  // largest coefficient magnitude.
  std::vector<Eigen::VectorXd> coeff_rows;
  std::vector<double> rhs_vals;
  bool trivially_infeasible = false;
  const auto push_le = [&](Eigen::VectorXd c, double rhs) {
    const double scale = c.cwiseAbs().maxCoeff();
    if (scale <= 0.0) {
      // All-zero row: "0 <= rhs" is vacuous or impossible.
      if (rhs < -kFeasTol) trivially_infeasible = true;
      return;
    }
    coeff_rows.push_back(c / scale);
    rhs_vals.push_back(rhs / scale);
  };

  for (const LinearRow& row : prob.rows) {
    const double shift = row.coeffs.dot(tightened_lo);
    switch (row.sense) {
      case RowSense::le:
        push_le(row.coeffs, row.rhs - shift);
        break;
      case RowSense::ge:
        push_le(-row.coeffs, -(row.rhs - shift));
        break;
      case RowSense::eq:
        push_le(row.coeffs, row.rhs - shift);
        push_le(-row.coeffs, -(row.rhs - shift));
        break;
    }
  }
  if (trivially_infeasible) return {false, {}};
  for (int j = 0; j < n; ++j) {
    const double width = tightened_up[j] - tightened_lo[j];
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    c[j] = 1.0;
    push_le(std::move(c), width);
  }

  const int m = static_cast<int>(coeff_rows.size());
  Eigen::MatrixXd a(m, n);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    a.row(i) = coeff_rows[i];
    b[i] = rhs_vals[i];
  }

  PhaseOneSimplex simplex(a, b);
  const double infeasibility = simplex.solve();
  if (infeasibility > kFeasTol) return {false, {}};

  Eigen::VectorXd x = simplex.extract_z() + tightened_lo;
  x = x.cwiseMax(tightened_lo).cwiseMin(tightened_up);

  // Confirm the witness against the original rows; equilibration keeps this
  // check meaningful at 1e-9.
  for (const LinearRow& row : prob.rows) {
    const double scale = std::max(1.0, row.coeffs.cwiseAbs().maxCoeff());
    const double lhs = row.coeffs.dot(x);
    const double resid = (lhs - row.rhs) / scale;
    const bool ok = (row.sense == RowSense::le && resid <= kFeasTol) ||
                    (row.sense == RowSense::ge && resid >= -kFeasTol) ||
                    (row.sense == RowSense::eq && std::abs(resid) <= kFeasTol);
    if (!ok) return {false, {}};
  }
  return {true, std::move(x)};
}

}  // namespace uavplan
