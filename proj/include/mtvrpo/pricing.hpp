#pragma once

#include <functional>
#include <set>
#include <vector>

#include "mtvrpo/instance.hpp"
#include "mtvrpo/kinematics.hpp"
#include "mtvrpo/master.hpp"
#include "mtvrpo/segments.hpp"
#include "mtvrpo/tour.hpp"

namespace mtvrpo {

// Disallowed target-window-graph edges (branch-and-bound node contents).
using EdgeSet = std::set<std::pair<int, int>>;

// Reduced cost of a tour under the current duals, using the cost lower bound.
double reduced_cost_lb(const Tour& tour, const Duals& duals,
                       const std::vector<int>& node_target);

struct PricingOptions {
  int max_tours = 50;
  int n_threads = 1;
  bool use_dominance = true;
  double negativity_threshold = -1e-4;
  // Non-lazy evaluation hook: pins a freshly completed, undominated tour's
  // bounds to its exact cost. Returns +inf for unexecutable tours.
  std::function<double(const Tour&)> pin_exact;
};

struct PricingResult {
  std::vector<Tour> tours;            // most negative reduced cost first
  std::vector<double> reduced_costs;  // aligned with tours
  long labels_created = 0;
  long labels_expanded = 0;
};

// Labeling search over the target-window graph for negative-reduced-cost
// tours, with two-sided cost dominance over segment bounds.
class Pricer {
 public:
  Pricer(const Instance& inst, const TWGraph& tw, const SegmentData& sd,
         const Kinematics& kin);

  // `exclude_keys`: tours never to emit (already in the master with exact or
  // matching bounds, or known unexecutable).
  PricingResult price(const Duals& duals, const EdgeSet& disallowed,
                      const std::set<std::vector<int>>& exclude_keys,
                      const PricingOptions& opt = {}) const;

 private:
  const Instance& inst_;
  const TWGraph& tw_;
  const SegmentData& sd_;
  const Kinematics& kin_;
};

}  // namespace mtvrpo
