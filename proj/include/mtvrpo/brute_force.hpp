#pragma once

#include "mtvrpo/solver.hpp"

namespace mtvrpo {

struct BruteForceOptions {
  int n_seg_tar = 6;
  long enumeration_cap = 1000000;  // feasible window sequences
  long max_pops = 1000000;
  int threads = 0;
};

// Exhaustive reference solver: enumerates window choices, capacity-feasible
// target groupings and orderings, filters by the interception-time chain,
// prices surviving tours with the exact tour-cost search, and assembles the
// cheapest covering partition. Intended for a handful of targets.
Solution brute_force_solve(const Instance& inst, const BruteForceOptions& opt = {});

}  // namespace mtvrpo
