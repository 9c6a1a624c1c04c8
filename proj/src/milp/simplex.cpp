#include "stlmpc/milp/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stlmpc {

namespace {
constexpr double kInfty = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-7;   // bound feasibility
constexpr double kDualTol = 1e-7;   // reduced-cost threshold
constexpr double kPivotTol = 1e-8;  // smallest acceptable ratio-test entry
constexpr long kFactorizeEvery = 64;
}  // namespace

void SimplexLp::set_structure(int num_rows, std::vector<SparseCol> cols) {
  m_ = num_rows;
  n_ = static_cast<int>(cols.size());
  cols_ = std::move(cols);
  for (const auto& col : cols_)
    for (const auto& [row, a] : col) {
      if (row < 0 || row >= m_)
        throw std::invalid_argument("SimplexLp: row index out of range");
      if (!std::isfinite(a))
        throw std::invalid_argument("SimplexLp: non-finite coefficient");
    }
  basis_ready_ = false;
}

double SimplexLp::lower(int var) const {
  return var < n_ ? col_lo_[var] : row_lo_[var - n_];
}
double SimplexLp::upper(int var) const {
  return var < n_ ? col_hi_[var] : row_hi_[var - n_];
}
double SimplexLp::cost_of(int var) const {
  return var < n_ ? cost_[var] : 0.0;
}

Eigen::VectorXd SimplexLp::multiply_col(int var) const {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m_);
  if (var < n_) {
    for (const auto& [row, a] : cols_[static_cast<std::size_t>(var)])
      w.noalias() += a * binv_.col(row);
  } else {
    w.noalias() -= binv_.col(var - n_);  // slack column is -e_i
  }
  return w;
}

void SimplexLp::reset_basis() {
  if (col_lo_.size() != n_) {  // no solve yet: nothing to rebuild
    basis_ready_ = false;
    return;
  }
  vstat_.assign(static_cast<std::size_t>(n_ + m_), VStat::FreeNB);
  basic_.resize(static_cast<std::size_t>(m_));
  xval_ = Eigen::VectorXd::Zero(n_ + m_);
  for (int j = 0; j < n_; ++j) {
    if (col_lo_[j] > -kInfty) {
      vstat_[static_cast<std::size_t>(j)] = VStat::AtLower;
      xval_[j] = col_lo_[j];
    } else if (col_hi_[j] < kInfty) {
      vstat_[static_cast<std::size_t>(j)] = VStat::AtUpper;
      xval_[j] = col_hi_[j];
    } else {
      vstat_[static_cast<std::size_t>(j)] = VStat::FreeNB;
      xval_[j] = 0.0;
    }
  }
  for (int i = 0; i < m_; ++i) {
    basic_[static_cast<std::size_t>(i)] = n_ + i;
    vstat_[static_cast<std::size_t>(n_ + i)] = VStat::Basic;
  }
  factorize();
  basis_ready_ = true;
}

void SimplexLp::factorize() {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
  for (int i = 0; i < m_; ++i) {
    int v = basic_[static_cast<std::size_t>(i)];
    if (v < n_) {
      for (const auto& [row, a] : cols_[static_cast<std::size_t>(v)])
        B(row, i) = a;
    } else {
      B(v - n_, i) = -1.0;
    }
  }
  if (m_ == 0) {
    binv_.resize(0, 0);
    pivots_since_factorize_ = 0;
    return;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  binv_ = lu.inverse();
  pivots_since_factorize_ = 0;
  if (!binv_.allFinite())
    throw std::runtime_error("SimplexLp: singular basis");
}

void SimplexLp::compute_basic_values() {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(m_);
  for (int j = 0; j < n_ + m_; ++j) {
    if (vstat_[static_cast<std::size_t>(j)] == VStat::Basic) continue;
    double x = xval_[j];
    if (x == 0.0) continue;
    if (j < n_) {
      for (const auto& [row, a] : cols_[static_cast<std::size_t>(j)])
        r[row] -= a * x;
    } else {
      r[j - n_] += x;
    }
  }
  Eigen::VectorXd xb = binv_ * r;
  for (int i = 0; i < m_; ++i) xval_[basic_[static_cast<std::size_t>(i)]] = xb[i];
}

double SimplexLp::infeasibility() const {
  double s = 0.0;
  for (int i = 0; i < m_; ++i) {
    int v = basic_[static_cast<std::size_t>(i)];
    double x = xval_[v];
    s += std::max(0.0, lower(v) - x);
    s += std::max(0.0, x - upper(v));
  }
  return s;
}

SimplexLp::Result SimplexLp::solve(const Eigen::VectorXd& col_lo,
                                   const Eigen::VectorXd& col_hi,
                                   const Eigen::VectorXd& row_lo,
                                   const Eigen::VectorXd& row_hi,
                                   const Eigen::VectorXd& cost) {
  if (col_lo.size() != n_ || col_hi.size() != n_ || row_lo.size() != m_ ||
      row_hi.size() != m_ || cost.size() != n_)
    throw std::invalid_argument("SimplexLp::solve: array size mismatch");
  col_lo_ = col_lo;
  col_hi_ = col_hi;
  row_lo_ = row_lo;
  row_hi_ = row_hi;
  cost_ = cost;

  for (int attempt = 0; attempt < 2; ++attempt) {
    if (!basis_ready_) {
      reset_basis();
    } else {
      // Re-snap nonbasic variables to the (possibly changed) bounds.
      for (int j = 0; j < n_ + m_; ++j) {
        auto& st = vstat_[static_cast<std::size_t>(j)];
        if (st == VStat::Basic) continue;
        double lo = lower(j), hi = upper(j);
        if (st == VStat::AtLower && lo <= -kInfty)
          st = hi < kInfty ? VStat::AtUpper : VStat::FreeNB;
        if (st == VStat::AtUpper && hi >= kInfty)
          st = lo > -kInfty ? VStat::AtLower : VStat::FreeNB;
        xval_[j] = st == VStat::AtLower ? lo : st == VStat::AtUpper ? hi : 0.0;
      }
    }
    compute_basic_values();

    Result res = Result{};
    const long bland_after = 5L * (m_ + n_);
    const long hard_limit = 40L * (m_ + n_) + 5000;
    bool failed = false;

    for (long iter = 0;; ++iter) {
      if (iter > hard_limit) {
        res.status = LpStatus::IterLimit;
        res.iterations = iter;
        failed = true;
        break;
      }
      // Phase classification and pricing vector.
      bool phase1 = false;
      Eigen::VectorXd cb = Eigen::VectorXd::Zero(m_);
      for (int i = 0; i < m_; ++i) {
        int v = basic_[static_cast<std::size_t>(i)];
        double x = xval_[v];
        if (x < lower(v) - kFeasTol) {
          cb[i] = -1.0;
          phase1 = true;
        } else if (x > upper(v) + kFeasTol) {
          cb[i] = 1.0;
          phase1 = true;
        }
      }
      if (!phase1) {
        for (int i = 0; i < m_; ++i)
          cb[i] = cost_of(basic_[static_cast<std::size_t>(i)]);
      }
      Eigen::VectorXd y = binv_.transpose() * cb;

      const bool bland = iter >= bland_after;
      int enter = -1;
      int enter_dir = 0;
      double best_score = kDualTol;
      for (int j = 0; j < n_ + m_; ++j) {
        VStat st = vstat_[static_cast<std::size_t>(j)];
        if (st == VStat::Basic) continue;
        double lo = lower(j), hi = upper(j);
        if (hi - lo <= 0.0) continue;  // fixed
        double d = phase1 ? 0.0 : cost_of(j);
        if (j < n_) {
          for (const auto& [row, a] : cols_[static_cast<std::size_t>(j)])
            d -= a * y[row];
        } else {
          d += y[j - n_];
        }
        int dir = 0;
        if ((st == VStat::AtLower || st == VStat::FreeNB) && d < -kDualTol)
          dir = +1;
        else if ((st == VStat::AtUpper || st == VStat::FreeNB) && d > kDualTol)
          dir = -1;
        if (dir == 0) continue;
        if (bland) {
          enter = j;
          enter_dir = dir;
          break;
        }
        if (std::abs(d) > best_score) {
          best_score = std::abs(d);
          enter = j;
          enter_dir = dir;
        }
      }

      if (enter < 0) {
        if (phase1 && infeasibility() > 1e-6) {
          res.status = LpStatus::Infeasible;
        } else {
          res.status = LpStatus::Optimal;
          double obj = 0.0;
          for (int j = 0; j < n_; ++j) obj += cost_[j] * xval_[j];
          res.objective = obj;
        }
        res.iterations = iter;
        break;
      }

      Eigen::VectorXd w = multiply_col(enter);
      const double sigma = static_cast<double>(enter_dir);

      // Ratio test. blocking < 0 means the entering variable hits its own
      // opposite bound (bound flip).
      double t_best = kInfty;
      if (enter_dir > 0 && upper(enter) < kInfty)
        t_best = upper(enter) - xval_[enter];
      else if (enter_dir < 0 && lower(enter) > -kInfty)
        t_best = xval_[enter] - lower(enter);
      int blocking = -1;
      double block_target = 0.0;
      for (int i = 0; i < m_; ++i) {
        double delta = -sigma * w[i];
        if (std::abs(delta) <= kPivotTol) continue;
        int v = basic_[static_cast<std::size_t>(i)];
        double x = xval_[v];
        double lo = lower(v), hi = upper(v);
        double target;
        if (delta > 0.0) {
          // moving further above an already-violated upper bound has
          // constant infeasibility slope and never blocks
          if (x > hi + kFeasTol) continue;
          target = (x < lo - kFeasTol) ? lo : hi;
          if (target >= kInfty) continue;
        } else {
          if (x < lo - kFeasTol) continue;
          target = (x > hi + kFeasTol) ? hi : lo;
          if (target <= -kInfty) continue;
        }
        double t = (target - x) / delta;
        if (t < 0.0) t = 0.0;
        if (t < t_best - 1e-12 ||
            (t < t_best + 1e-12 && blocking >= 0 &&
             v < basic_[static_cast<std::size_t>(blocking)])) {
          t_best = t;
          blocking = i;
          block_target = target;
        }
      }

      if (t_best >= kInfty) {
        if (phase1) {
          // numerically stuck; trigger a cold restart
          res.status = LpStatus::IterLimit;
          res.iterations = iter;
          failed = true;
        } else {
          res.status = LpStatus::Unbounded;
          res.iterations = iter;
        }
        break;
      }

      // Apply the step.
      for (int i = 0; i < m_; ++i)
        xval_[basic_[static_cast<std::size_t>(i)]] -= t_best * sigma * w[i];
      xval_[enter] += sigma * t_best;

      if (blocking < 0) {
        // Bound flip, no basis change.
        auto& st = vstat_[static_cast<std::size_t>(enter)];
        st = (enter_dir > 0) ? VStat::AtUpper : VStat::AtLower;
        xval_[enter] = (enter_dir > 0) ? upper(enter) : lower(enter);
        continue;
      }

      int leave = basic_[static_cast<std::size_t>(blocking)];
      xval_[leave] = block_target;
      vstat_[static_cast<std::size_t>(leave)] =
          (block_target == lower(leave)) ? VStat::AtLower : VStat::AtUpper;
      basic_[static_cast<std::size_t>(blocking)] = enter;
      vstat_[static_cast<std::size_t>(enter)] = VStat::Basic;

      // Update the basis inverse (pivot on row `blocking`).
      double piv = w[blocking];
      if (std::abs(piv) < kPivotTol) {
        res.status = LpStatus::IterLimit;
        res.iterations = iter;
        failed = true;
        break;
      }
      Eigen::RowVectorXd row_b = binv_.row(blocking) / piv;
      Eigen::VectorXd wm = w;
      wm[blocking] = 0.0;
      binv_.noalias() -= wm * row_b;
      binv_.row(blocking) = row_b;

      if (++pivots_since_factorize_ >= kFactorizeEvery) {
        factorize();
        compute_basic_values();
      }
    }

    if (!failed) return res;
    basis_ready_ = false;  // cold restart once
    if (attempt == 1) return res;
  }
  return {LpStatus::IterLimit, 0.0, 0};
}

Eigen::VectorXd SimplexLp::values() const { return xval_.head(n_); }

}  // namespace stlmpc
