// Dense revised simplex for LPs with general variable bounds and range
// rows:  minimize c'x  s.t.  row_lo <= A x <= row_hi,  col_lo <= x <= col_hi.
//
// Rows get an internal slack (A x - s = 0, s in [row_lo, row_hi]) so the
// working system is an equality system over n + m bounded variables.
// Phase 1 minimizes the total bound infeasibility of the basic variables
// (composite method); phase 2 optimizes the true cost. Pricing is Dantzig
// with a Bland's-rule fallback after 5*(m+n) iterations.
//
// The basis (and basis inverse) persists across solve() calls, so
// re-solves after bound, right-hand-side, or cost changes start from the
// previous optimal basis and typically finish in a few pivots.

#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace stlmpc {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

class SimplexLp {
 public:
  using SparseCol = std::vector<std::pair<int, double>>;  // (row, coeff)

  // cols: one sparse column per structural variable.
  void set_structure(int num_rows, std::vector<SparseCol> cols);

  struct Result {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    long iterations = 0;
  };

  // Arrays: col_* sized n, row_* sized m, cost sized n (minimization).
  Result solve(const Eigen::VectorXd& col_lo, const Eigen::VectorXd& col_hi,
               const Eigen::VectorXd& row_lo, const Eigen::VectorXd& row_hi,
               const Eigen::VectorXd& cost);

  // Structural variable values after an Optimal solve.
  Eigen::VectorXd values() const;

  void reset_basis();

  int num_rows() const { return m_; }
  int num_cols() const { return n_; }

 private:
  enum class VStat : unsigned char { Basic, AtLower, AtUpper, FreeNB };

  double col_coeff(int var, int row) const;
  double lower(int var) const;
  double upper(int var) const;
  double cost_of(int var) const;
  Eigen::VectorXd multiply_col(int var) const;  // Binv * column(var)
  void factorize();
  void compute_basic_values();
  double infeasibility() const;

  int m_ = 0, n_ = 0;
  std::vector<SparseCol> cols_;

  Eigen::VectorXd col_lo_, col_hi_, row_lo_, row_hi_, cost_;

  std::vector<VStat> vstat_;
  std::vector<int> basic_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xval_;  // length n + m (structural then slack)
  bool basis_ready_ = false;
  long pivots_since_factorize_ = 0;
};

}  // namespace stlmpc
