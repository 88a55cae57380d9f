#pragma once

#include <vector>

#include "mtvrpo/common.hpp"

namespace mtvrpo {

struct TrajKnot {
  Vec2 pos = Vec2::Zero();
  double t = 0.0;
};

struct Claim {
  int target = 0;
  double time = 0.0;
};

struct Trajectory {
  std::vector<TrajKnot> knots;
  std::vector<Claim> claims;

  double length() const {
    double len = 0.0;
    for (std::size_t i = 1; i < knots.size(); ++i)
      len += (knots[i].pos - knots[i - 1].pos).norm();
    return len;
  }
};

// Depot-to-depot sequence of target-window nodes. nodes.front() and
// nodes.back() are the depot node 0; Len counts both depot endpoints.
struct Tour {
  std::vector<int> nodes;
  double lb = 0.0;       // lower bound on the executing cost
  double ub = kInf;      // upper bound
  double exact = -1.0;   // set when evaluated
  bool evaluated = false;
  Trajectory traj;

  int len() const { return static_cast<int>(nodes.size()); }
  bool operator==(const Tour& o) const { return nodes == o.nodes; }
};

}  // namespace mtvrpo
