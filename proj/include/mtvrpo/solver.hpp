#pragma once

#include <cstdint>
#include <vector>

#include "mtvrpo/gcs.hpp"
#include "mtvrpo/instance.hpp"
#include "mtvrpo/pricing.hpp"
#include "mtvrpo/tour.hpp"

namespace mtvrpo {

enum class SolveMode { Lazy, NonLazy, NoAffineHeuristic };
enum class SolveStatus { Optimal, Infeasible, Timeout };

struct SolverConfig {
  SolveMode mode = SolveMode::Lazy;
  int n_seg_tar = 6;
  double time_limit = 600.0;  // seconds
  int threads = 0;            // 0: MTVRPO_THREADS env or hardware
  std::uint64_t seed = 0;     // feasible-seed retry randomization
  long max_pops = 1000000;    // per tour-cost search
  int pricing_batch = 50;
};

struct SolveStats {
  long nodes_expanded = 0;
  long tours_evaluated = 0;
  long pricing_rounds = 0;
  long gcs_queries = 0;
  double wall_time_s = 0.0;
};

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<Tour> tours;  // evaluated, with trajectories
  double total_cost = kInf;
  SolveStats stats;
};

Solution solve(const Instance& inst, const SolverConfig& config = {});

// Conventional branching: pick the edge with flow closest to 0.5, forbid it
// in one child and force it in the other. Exposed for tests.
std::pair<EdgeSet, EdgeSet> generate_successors(const EdgeSet& B,
                                                const std::vector<double>& theta,
                                                const std::vector<const Tour*>& columns,
                                                const TWGraph& tw);

}  // namespace mtvrpo
