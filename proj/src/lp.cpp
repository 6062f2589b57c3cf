#include "stablerank/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace stablerank::lp {
namespace {

constexpr double kEps = 1e-11;

class Tableau {
 public:
  Tableau(Eigen::MatrixXd rows, Eigen::VectorXd rhs, std::vector<Eigen::Index> basis)
      : t_(rows.rows(), rows.cols() + 1), basis_(std::move(basis)) {
    t_.leftCols(rows.cols()) = rows;
    t_.col(rows.cols()) = rhs;
  }

  Eigen::Index rows() const { return t_.rows(); }
  Eigen::Index cols() const { return t_.cols() - 1; }
  double rhs(Eigen::Index r) const { return t_(r, cols()); }
  double at(Eigen::Index r, Eigen::Index c) const { return t_(r, c); }
  const std::vector<Eigen::Index>& basis() const { return basis_; }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i != r && t_(i, c) != 0.0) t_.row(i) -= t_(i, c) * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  void drop_row(Eigen::Index r) {
    Eigen::MatrixXd next(t_.rows() - 1, t_.cols());
    next << t_.topRows(r), t_.bottomRows(t_.rows() - r - 1);
    t_ = std::move(next);
    basis_.erase(basis_.begin() + r);
  }

  /// Runs simplex iterations for `cost` over columns [0, allowed).
  Status optimize(const Eigen::VectorXd& cost, Eigen::Index allowed) {
    for (int iter = 0; iter < 50000; ++iter) {
      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        double reduced = cost(j);
        for (Eigen::Index i = 0; i < rows(); ++i) {
          reduced -= cost(basis_[static_cast<std::size_t>(i)]) * t_(i, j);
        }
        if (reduced > 1e-10) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return Status::optimal;

      Eigen::Index leaving = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows(); ++i) {
        double a = t_(i, entering);
        if (a <= kEps) continue;
        double ratio = rhs(i) / a;
        if (ratio < best - 1e-12 ||
            (ratio <= best + 1e-12 && leaving >= 0 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leaving)])) {
          best = ratio;
          leaving = i;
        }
      }
      if (leaving < 0) return Status::unbounded;
      pivot(leaving, entering);
    }
    return Status::optimal;
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

Solution maximize(const Problem& p) {
  const Eigen::Index n = p.c.size();
  const Eigen::Index m_le = p.A_le.rows();
  const Eigen::Index m_eq = p.A_eq.rows();
  const Eigen::Index m = m_le + m_eq;

  // Column layout: [x | slack/surplus (one per <= row) | artificial].
  std::vector<bool> needs_artificial(static_cast<std::size_t>(m), false);
  Eigen::Index n_art = 0;
  for (Eigen::Index i = 0; i < m_le; ++i) {
    if (p.b_le(i) < 0) {
      needs_artificial[static_cast<std::size_t>(i)] = true;
      ++n_art;
    }
  }
  n_art += m_eq;
  const Eigen::Index total = n + m_le + n_art;

  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(m, total);
  Eigen::VectorXd rhs(m);
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  Eigen::Index art = n + m_le;
  for (Eigen::Index i = 0; i < m_le; ++i) {
    double sign = p.b_le(i) < 0 ? -1.0 : 1.0;
    rows.row(i).head(n) = sign * p.A_le.row(i);
    rows(i, n + i) = sign;
    rhs(i) = sign * p.b_le(i);
    if (needs_artificial[static_cast<std::size_t>(i)]) {
      rows(i, art) = 1.0;
      basis[static_cast<std::size_t>(i)] = art++;
    } else {
      basis[static_cast<std::size_t>(i)] = n + i;
    }
  }
  for (Eigen::Index e = 0; e < m_eq; ++e) {
    Eigen::Index i = m_le + e;
    double sign = p.b_eq(e) < 0 ? -1.0 : 1.0;
    rows.row(i).head(n) = sign * p.A_eq.row(e);
    rhs(i) = sign * p.b_eq(e);
    rows(i, art) = 1.0;
    basis[static_cast<std::size_t>(i)] = art++;
  }

  Tableau tab(std::move(rows), std::move(rhs), std::move(basis));
  const Eigen::Index first_art = n + m_le;

  if (n_art > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total);
    phase1.tail(n_art).setConstant(-1.0);
    tab.optimize(phase1, total);
    double infeasibility = 0.0;
    for (Eigen::Index i = 0; i < tab.rows(); ++i) {
      if (tab.basis()[static_cast<std::size_t>(i)] >= first_art) infeasibility += tab.rhs(i);
    }
    if (infeasibility > 1e-9) return {Status::infeasible, {}, 0.0};

    // Drive remaining (zero-valued) artificials out of the basis.
    for (Eigen::Index i = 0; i < tab.rows();) {
      if (tab.basis()[static_cast<std::size_t>(i)] < first_art) {
        ++i;
        continue;
      }
      Eigen::Index col = -1;
      for (Eigen::Index j = 0; j < first_art; ++j) {
        if (std::abs(tab.at(i, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col < 0) {
        tab.drop_row(i);
      } else {
        tab.pivot(i, col);
        ++i;
      }
    }
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(total);
  phase2.head(n) = p.c;
  Status status = tab.optimize(phase2, first_art);
  if (status == Status::unbounded) return {Status::unbounded, {}, 0.0};

  Solution sol;
  sol.status = Status::optimal;
  sol.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < tab.rows(); ++i) {
    Eigen::Index b = tab.basis()[static_cast<std::size_t>(i)];
    if (b < n) sol.x(b) = tab.rhs(i);
  }
  sol.objective = p.c.dot(sol.x);
  return sol;
}

}  // namespace stablerank::lp
