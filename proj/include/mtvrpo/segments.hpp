#pragma once

#include <vector>

#include "mtvrpo/geometry.hpp"
#include "mtvrpo/instance.hpp"
#include "mtvrpo/kinematics.hpp"
#include "mtvrpo/tour.hpp"

namespace mtvrpo {

// Time slice of a target window. The depot window gets the single segment
// [0, inf) of length zero.
struct Segment {
  int id = -1;     // global segment id; 0 is the depot segment
  int node = 0;    // owning tw-node
  int index = 0;   // k within the node
  double t_lo = 0.0;
  double t_hi = kInf;
  Vec2 start = Vec2::Zero();  // position at t_lo
  Vec2 vel = Vec2::Zero();

  double length() const { return std::isfinite(t_hi) ? vel.norm() * (t_hi - t_lo) : 0.0; }
  Vec2 end_point() const { return std::isfinite(t_hi) ? Vec2(start + (t_hi - t_lo) * vel) : start; }
};

// Largest-remainder apportionment of `total` slots over the given weights,
// at least one slot each. Throws ConfigError when total < weights.size().
std::vector<int> apportion(const std::vector<double>& weights, int total);

// Segment allocation plus precomputed pairwise spatial distances between
// segments (set-to-set) and segment starts (point-to-point).
class SegmentData {
 public:
  SegmentData(const Instance& inst, const TWGraph& tw, const VisibilityGraph& vg,
              int n_seg_tar, int n_threads = 1);

  int n_seg_tar() const { return n_seg_tar_; }
  int n_segments() const { return static_cast<int>(all_.size()); }
  const Segment& seg(int sid) const { return all_[sid]; }
  const std::vector<int>& segments_of(int node) const { return per_node_[node]; }
  int n_seg(int node) const { return static_cast<int>(per_node_[node].size()); }

  // Spatial pieces (no time gate).
  double seg_spatial(int a, int b) const { return seg_dist_(a, b); }
  double start_spatial(int a, int b) const { return start_dist_(a, b); }

  // c_seg: set-to-set lower bound with the relaxed timing gate.
  double c_seg(int a, int b) const;
  // c_start: start-to-start cost; the depot sink is deadline-exempt.
  double c_start(int a, int b) const;

 private:
  const Instance& inst_;
  int n_seg_tar_;
  std::vector<Segment> all_;
  std::vector<std::vector<int>> per_node_;
  Eigen::MatrixXd seg_dist_;
  Eigen::MatrixXd start_dist_;
};

// Eq-style forward recursion over the segment graph of a tour. Returns the
// tour cost lower bound; +inf when no feasible segment chain exists.
// `g_at_last` short-circuits with caller-provided g-values for the last
// non-depot window (a pricing byproduct).
double tour_lower_bound(const Tour& tour, const SegmentData& sd,
                        const std::vector<double>* g_at_last = nullptr);

// Same over segment starts; upper-bounds the tour cost.
double tour_upper_bound(const Tour& tour, const SegmentData& sd,
                        const std::vector<double>* g_at_last = nullptr);

// Backward cost-to-finish per segment, per tour position 1..Len-2.
// h_seg[p][k] matches sd.segments_of(tour.nodes[p])[k].
std::vector<std::vector<double>> compute_h_seg(const Tour& tour, const SegmentData& sd);

// h_n(t) = slope[n] t + intercept[n], admissible against h_seg at every
// segment boundary time by construction of the max-overestimation shift.
struct AffineHeuristic {
  std::vector<double> slope;
  std::vector<double> intercept;

  double eval(int position, double t) const {
    return slope[position] * t + intercept[position];
  }
};

AffineHeuristic fit_affine_heuristic(const Tour& tour, const SegmentData& sd,
                                     const std::vector<std::vector<double>>& h_seg);

// Latest interception times per tour position (index into tour.nodes);
// back() is +inf. Throws TourInfeasible when the chain breaks.
std::vector<double> compute_tmax(const Tour& tour, const TWGraph& tw, const Kinematics& kin);

}  // namespace mtvrpo
