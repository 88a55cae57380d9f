#pragma once

#include <optional>
#include <vector>

#include "mtvrpo/conic.hpp"
#include "mtvrpo/segments.hpp"
#include "mtvrpo/tour.hpp"

namespace mtvrpo {

enum class TourCostMode {
  AffineHeuristic,       // obstacle-unaware leg to the next window + affine tail bound
  SequentialCompletion,  // obstacle-unaware legs through every remaining window
};

struct GcsOptions {
  TourCostMode mode = TourCostMode::AffineHeuristic;
  long max_pops = 1000000;
  ConicSettings conic;
};

struct GcsStats {
  long pops = 0;
  long relaxations = 0;
  double max_pop_regression = 0.0;  // largest drop in the popped f sequence
};

struct TourCost {
  double cost = kInf;
  Trajectory traj;
  GcsStats stats;
};

// Space-time GCS for one tour: every free-space region node plus one
// window node per tour position (the depot appears as a start copy at
// position 0 and a goal copy at position Len-1).
struct TourGcs {
  const Tour* tour = nullptr;
  int n_regions = 0;
  int len = 0;
  std::vector<std::vector<int>> adj;  // region ids, then position nodes

  int position_node(int p) const { return n_regions + p; }
  bool is_region(int gcs_node) const { return gcs_node < n_regions; }
  int position_of(int gcs_node) const { return gcs_node - n_regions; }
  int n_nodes() const { return n_regions + len; }
};

struct Relaxation {
  double f = kInf;
  std::vector<TrajKnot> knots;  // one per set transition
};

class TourEvaluator {
 public:
  TourEvaluator(const Instance& inst, const VisibilityGraph& vg, const TWGraph& tw,
                const SegmentData& sd, const Kinematics& kin);

  TourGcs build_gcs(const Tour& tour) const;

  // Convex relaxation for a prefix path (sequence of GCS node ids starting at
  // the depot start node). `visited` is the count of leading tour positions
  // already visited by the path. nullopt = infeasible program.
  std::optional<Relaxation> solve_path_relaxation(const TourGcs& gcs,
                                                  const std::vector<int>& path, int visited,
                                                  const AffineHeuristic& heur,
                                                  const std::vector<double>& tmax,
                                                  const GcsOptions& opt) const;

  // Exact tour cost and an executing trajectory via best-first search.
  // Throws TourInfeasible when no trajectory executes the tour and
  // ResourceExhausted past opt.max_pops.
  TourCost evaluate(const Tour& tour, const GcsOptions& opt = {}) const;

  const std::vector<ConvexRegion>& regions() const { return regions_; }
  const TWGraph& tw() const { return tw_; }

 private:
  const Instance& inst_;
  const VisibilityGraph& vg_;
  const TWGraph& tw_;
  const SegmentData& sd_;
  const Kinematics& kin_;
  std::vector<ConvexRegion> regions_;
  // Shared adjacency, assembled once per instance.
  std::vector<std::uint8_t> region_region_;  // R x R
  std::vector<std::uint8_t> node_region_;    // tw-node x R
  std::vector<std::uint8_t> node_node_;      // tw-node x tw-node, space-time
};

}  // namespace mtvrpo
