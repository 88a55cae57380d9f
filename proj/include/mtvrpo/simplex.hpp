#pragma once

#include "mtvrpo/common.hpp"

namespace mtvrpo {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  Eigen::VectorXd duals;  // y = c_B' B^{-1}, one entry per row
  double objective = 0.0;
};

// min c'x  s.t.  A x = b, x >= 0. Dense two-phase primal simplex with a
// Bland fallback against cycling; returns a vertex solution and exact duals.
LpResult solve_lp_standard(Eigen::MatrixXd A, Eigen::VectorXd b, const Eigen::VectorXd& c);

}  // namespace mtvrpo
