#pragma once

#include <vector>

#include "mtvrpo/common.hpp"

namespace mtvrpo {

// Rows of G: `nonneg` one-dimensional nonnegative rows first, then one block
// per second-order cone with the listed dimensions.
struct ConeSpec {
  int nonneg = 0;
  std::vector<int> soc;

  int total() const {
    int m = nonneg;
    for (int q : soc) m += q;
    return m;
  }
};

// min c'x  s.t.  A x = b,  h - G x in K.
struct ConicProblem {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  ConeSpec cones;
};

enum class ConicStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIterations };

struct ConicSettings {
  double feastol = 1e-7;
  double abstol = 1e-8;
  double reltol = 1e-8;
  int max_iters = 100;
};

struct ConicResult {
  ConicStatus status = ConicStatus::MaxIterations;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  double gap = kInf;
  double pres = kInf;
  double dres = kInf;
};

// Homogeneous self-dual interior-point method with Nesterov-Todd scaling and
// a Mehrotra predictor-corrector step.
ConicResult solve_conic(const ConicProblem& prob, const ConicSettings& settings = {});

}  // namespace mtvrpo
