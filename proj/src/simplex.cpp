#include "mtvrpo/simplex.hpp"

#include <algorithm>
#include <vector>

namespace mtvrpo {

namespace {

constexpr double kPivTol = 1e-9;
constexpr double kCostTol = 1e-9;

// Primal simplex on min c'x, [A | I_art] with basis given by `basis`
// (indices into the extended column set). Artificial columns are barred from
// entering. Returns false on unboundedness.
bool run_simplex(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                 std::vector<int>& basis, int n_real, Eigen::VectorXd& x,
                 Eigen::VectorXd& duals, double& obj) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Eigen::MatrixXd B(m, m);
  int degenerate_streak = 0;
  for (long iter = 0;; ++iter) {
    for (int i = 0; i < m; ++i) B.col(i) = A.col(basis[i]);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    const Eigen::VectorXd xb = lu.solve(b);
    Eigen::VectorXd cb(m);
    for (int i = 0; i < m; ++i) cb[i] = c[basis[i]];
    const Eigen::VectorXd y = lu.transpose().solve(cb);

    const bool bland = degenerate_streak > 2 * (m + n);
    int entering = -1;
    double best = -kCostTol;
    for (int j = 0; j < n; ++j) {
      if (j >= n_real) continue;  // artificials never re-enter
      const double rc = c[j] - y.dot(A.col(j));
      if (bland) {
        if (rc < -kCostTol &&
            std::find(basis.begin(), basis.end(), j) == basis.end()) {
          entering = j;
          break;
        }
      } else if (rc < best &&
                 std::find(basis.begin(), basis.end(), j) == basis.end()) {
        best = rc;
        entering = j;
      }
    }
    if (entering < 0) {
      x = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < m; ++i) x[basis[i]] = xb[i];
      duals = y;
      obj = cb.dot(xb);
      return true;
    }
    const Eigen::VectorXd d = lu.solve(A.col(entering));
    int leave = -1;
    double ratio = kInf;
    for (int i = 0; i < m; ++i) {
      if (d[i] > kPivTol) {
        const double r = std::max(xb[i], 0.0) / d[i];
        if (r < ratio - 1e-12 || (r < ratio + 1e-12 && (leave < 0 || basis[i] < basis[leave]))) {
          ratio = r;
          leave = i;
        }
      }
    }
    if (leave < 0) return false;  // unbounded
    degenerate_streak = ratio < 1e-10 ? degenerate_streak + 1 : 0;
    basis[leave] = entering;
  }
}

}  // namespace

LpResult solve_lp_standard(Eigen::MatrixXd A, Eigen::VectorXd b, const Eigen::VectorXd& c) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  LpResult out;
  // Flip rows to b >= 0, remember signs for the dual transform back.
  Eigen::VectorXd row_sign = Eigen::VectorXd::Ones(m);
  for (int i = 0; i < m; ++i)
    if (b[i] < 0) {
      A.row(i) *= -1;
      b[i] *= -1;
      row_sign[i] = -1;
    }

  // Phase 1: artificial basis.
  Eigen::MatrixXd A1(m, n + m);
  A1.leftCols(n) = A;
  A1.rightCols(m) = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n + m);
  c1.tail(m).setOnes();
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;
  Eigen::VectorXd x1, y1;
  double obj1 = 0;
  {
    // Phase 1 allows artificials in the candidate set only via the initial
    // basis; entering columns are the real ones.
    if (!run_simplex(A1, b, c1, basis, n, x1, y1, obj1)) {
      out.status = LpStatus::Infeasible;  // phase 1 cannot be unbounded
      return out;
    }
  }
  if (obj1 > 1e-7) {
    out.status = LpStatus::Infeasible;
    return out;
  }
  // Drive any lingering artificials out of the basis where possible.
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    Eigen::MatrixXd B(m, m);
    for (int k = 0; k < m; ++k) B.col(k) = A1.col(basis[k]);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    int replacement = -1;
    for (int j = 0; j < n && replacement < 0; ++j) {
      if (std::find(basis.begin(), basis.end(), j) != basis.end()) continue;
      const Eigen::VectorXd d = lu.solve(A1.col(j));
      if (std::abs(d[i]) > 1e-7) replacement = j;
    }
    if (replacement >= 0) basis[i] = replacement;
    // Otherwise the row is redundant; the artificial stays basic at zero.
  }

  Eigen::VectorXd c2 = Eigen::VectorXd::Zero(n + m);
  c2.head(n) = c;
  Eigen::VectorXd x2, y2;
  double obj2 = 0;
  if (!run_simplex(A1, b, c2, basis, n, x2, y2, obj2)) {
    out.status = LpStatus::Unbounded;
    return out;
  }
  out.status = LpStatus::Optimal;
  out.x = x2.head(n);
  out.objective = obj2;
  out.duals = (y2.array() * row_sign.array()).matrix();
  return out;
}

}  // namespace mtvrpo
