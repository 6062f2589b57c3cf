#pragma once

#include <Eigen/Core>

namespace stablerank::lp {

enum class Status { optimal, infeasible, unbounded };

/// maximize c.x  s.t.  A_le x <= b_le,  A_eq x = b_eq,  x >= 0.
/// Either block may have zero rows.
struct Problem {
  Eigen::MatrixXd A_le;
  Eigen::VectorXd b_le;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd c;
};

struct Solution {
  Status status = Status::infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
};

/// Dense two-phase tableau simplex with Bland's rule. Intended for the small
/// systems produced by region feasibility tests (tens of rows).
Solution maximize(const Problem& problem);

}  // namespace stablerank::lp
