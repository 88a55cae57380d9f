#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtvrpo/common.hpp"
#include "mtvrpo/geometry.hpp"

namespace mtvrpo {

// One constant-velocity piece of a target trajectory. The trajectory is only
// defined (and only matters) inside [t_lo, t_hi].
struct Window {
  double t_lo = 0.0;
  double t_hi = 0.0;
  Vec2 start = Vec2::Zero();  // position at t_lo
  Vec2 vel = Vec2::Zero();

  double duration() const { return t_hi - t_lo; }
  double speed() const { return vel.norm(); }
  Vec2 pos_at(double t) const { return start + (t - t_lo) * vel; }
  Vec2 end_point() const { return pos_at(t_hi); }
};

struct Target {
  double demand = 1.0;
  std::vector<Window> windows;
};

struct Instance {
  ObstacleMap map;
  Vec2 depot = Vec2::Zero();
  double v_max = 4.0;
  double d_max = 1.0;
  int n_agt = 1;
  std::vector<Target> targets;  // target ids are 1-based; targets[i-1]

  int n_tar() const { return static_cast<int>(targets.size()); }
  const Target& target(int i) const { return targets[i - 1]; }
};

// Throws ValidationError naming the first violated invariant.
void validate_instance(const Instance& inst);

// Node of the target-window graph. Node 0 is the depot's fictitious window
// (stationary target 0 at the depot, window [0, inf)).
struct TwNode {
  int id = -1;
  int target = 0;
  int window = 0;
  double t_lo = 0.0;
  double t_hi = kInf;
  Vec2 start = Vec2::Zero();
  Vec2 vel = Vec2::Zero();

  Vec2 pos_at(double t) const { return start + (t - t_lo) * vel; }
  bool is_depot() const { return target == 0; }
};

class Kinematics;

struct TWGraph {
  std::vector<TwNode> nodes;      // nodes[0] is the depot window
  std::vector<int> first_node;    // first node id of target i (index 1..n_tar)
  Eigen::MatrixXd lfdt;           // -inf = infeasible edge; NaN = no edge (same target)

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int node_of(int target, int window) const {
    return target == 0 ? 0 : first_node[target] + window;
  }
  bool has_edge(int u, int v) const {
    return u != v && nodes[u].target != nodes[v].target;
  }
};

TWGraph build_tw_graph(const Instance& inst, const Kinematics& kin, int n_threads = 1);

// Random instance in the style of the experiment setup: square grid map,
// two windows per target, demand 1, target speed uniform in [0.5, 1] m/s.
// d_max <= 0 selects the default ceil(n_tar / n_agt).
Instance generate_instance(std::uint64_t seed, int n_tar, int resolution, double d_max,
                           int n_agt, double cell_size = 1.0, double v_max = 4.0);

}  // namespace mtvrpo
