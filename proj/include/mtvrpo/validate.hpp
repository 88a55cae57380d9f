#pragma once

#include <string>
#include <vector>

#include "mtvrpo/instance.hpp"
#include "mtvrpo/solver.hpp"

namespace mtvrpo {

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> issues;

  void fail(std::string msg) {
    ok = false;
    issues.push_back(std::move(msg));
  }
};

// Independent solution checker working straight off the map grid: coverage,
// capacity, agent count, collision at 1e-2 m sampling, speed limit, claim
// window membership and interception accuracy.
ValidationReport validate_solution(const Instance& inst, const Solution& sol);

}  // namespace mtvrpo
