#pragma once

#include <vector>

#include "mtvrpo/simplex.hpp"
#include "mtvrpo/tour.hpp"

namespace mtvrpo {

struct Duals {
  double agent = 0.0;            // lambda_0 <= 0, dual of the agent-count row
  Eigen::VectorXd coverage;      // lambda_i >= 0, indexed 1..n_tar (entry 0 unused)
};

struct RmpSolution {
  bool feasible = false;
  std::vector<double> theta;     // aligned with the column list
  double objective = kInf;
  Duals duals;
  bool integral = false;
};

// Tour membership row: alpha[i] = 1 iff the tour visits target i.
std::vector<std::uint8_t> tour_alpha(const Tour& tour, const std::vector<int>& node_target,
                                     int n_tar);

// Restricted master problem over the given columns: select tours minimizing
// the sum of bound costs subject to <= n_agt tours and >= 1 coverage per
// target, with theta relaxed to >= 0. Costs are tour.lb when
// use_lower_bounds, else tour.ub.
RmpSolution solve_rmp(const std::vector<const Tour*>& columns,
                      const std::vector<int>& node_target, int n_tar, int n_agt,
                      bool use_lower_bounds = true);

// Indices of columns with theta == 1; throws NotIntegral on fractional input.
std::vector<int> extract_tours(const std::vector<double>& theta);

}  // namespace mtvrpo
