#include "mtvrpo/master.hpp"

#include <cmath>

namespace mtvrpo {

namespace {
constexpr double kIntegralityTol = 1e-6;
}

std::vector<std::uint8_t> tour_alpha(const Tour& tour, const std::vector<int>& node_target,
                                     int n_tar) {
  std::vector<std::uint8_t> alpha(n_tar + 1, 0);
  for (int node : tour.nodes) {
    const int t = node_target[node];
    if (t > 0) alpha[t] = 1;
  }
  return alpha;
}

RmpSolution solve_rmp(const std::vector<const Tour*>& columns,
                      const std::vector<int>& node_target, int n_tar, int n_agt,
                      bool use_lower_bounds) {
  RmpSolution out;
  const int k = static_cast<int>(columns.size());
  if (k == 0) return out;
  const int m = 1 + n_tar;
  // Columns: theta_1..theta_k, agent slack, coverage surpluses.
  const int n = k + 1 + n_tar;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd b(m), c = Eigen::VectorXd::Zero(n);
  b[0] = n_agt;
  A(0, k) = 1.0;  // slack: sum theta + s = n_agt
  for (int i = 1; i <= n_tar; ++i) {
    b[i] = 1.0;
    A(i, k + i) = -1.0;  // surplus: coverage - r = 1
  }
  for (int j = 0; j < k; ++j) {
    A(0, j) = 1.0;
    const auto alpha = tour_alpha(*columns[j], node_target, n_tar);
    for (int i = 1; i <= n_tar; ++i) A(i, j) = alpha[i];
    c[j] = use_lower_bounds ? columns[j]->lb : columns[j]->ub;
  }
  const LpResult lp = solve_lp_standard(A, b, c);
  if (lp.status != LpStatus::Optimal) return out;
  out.feasible = true;
  out.objective = lp.objective;
  out.theta.assign(k, 0.0);
  out.integral = true;
  for (int j = 0; j < k; ++j) {
    out.theta[j] = lp.x[j];
    if (std::abs(lp.x[j] - std::round(lp.x[j])) > kIntegralityTol) out.integral = false;
  }
  out.duals.agent = lp.duals[0];
  out.duals.coverage = lp.duals;  // entry 0 is the agent dual, unused as coverage
  return out;
}

std::vector<int> extract_tours(const std::vector<double>& theta) {
  std::vector<int> picked;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (theta[j] >= 1.0 - kIntegralityTol) {
      picked.push_back(static_cast<int>(j));
    } else if (theta[j] > kIntegralityTol) {
      throw NotIntegral("extract_tours: fractional theta");
    }
  }
  return picked;
}

}  // namespace mtvrpo
