#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "mtvrpo/common.hpp"

namespace mtvrpo {

// Square-grid obstacle map. Row 0 is the row with minimal y; cell (ix, iy)
// spans [ix, ix+1) x [iy, iy+1) in cell units, scaled by cell_size meters.
struct ObstacleMap {
  int width_cells = 0;
  int height_cells = 0;
  double cell_size = 1.0;
  std::vector<std::uint8_t> blocked;  // row-major

  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && ix < width_cells && iy >= 0 && iy < height_cells;
  }
  bool cell_blocked(int ix, int iy) const {
    return blocked[static_cast<std::size_t>(iy) * width_cells + ix] != 0;
  }
  void set_blocked(int ix, int iy, bool v) {
    blocked[static_cast<std::size_t>(iy) * width_cells + ix] = v ? 1 : 0;
  }
  double width_m() const { return width_cells * cell_size; }
  double height_m() const { return height_cells * cell_size; }
  int free_cell_count() const;
};

// Map file format: "resolution <W> <H> <cell_size>" then H rows of W chars,
// '.' free and '@' blocked, first row at minimal y.
ObstacleMap load_map(const std::string& text);
std::string save_map(const ObstacleMap& map);

// Axis-aligned rectangle of free space, in meters.
struct ConvexRegion {
  int id = -1;
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Zero();

  std::vector<Vec2> polygon() const;  // CCW corners
  bool contains(const Vec2& p, double tol = kGeomTol) const {
    return p.x() >= lo.x() - tol && p.x() <= hi.x() + tol && p.y() >= lo.y() - tol &&
           p.y() <= hi.y() + tol;
  }
  bool intersects(const ConvexRegion& o, double tol = kGeomTol) const {
    return lo.x() <= o.hi.x() + tol && o.lo.x() <= hi.x() + tol && lo.y() <= o.hi.y() + tol &&
           o.lo.y() <= hi.y() + tol;
  }
};

// Greedy maximal-rectangle cover of the free cells. Rectangles may overlap;
// their union is exactly the free space.
std::vector<ConvexRegion> decompose_free_space(const ObstacleMap& map);

// Free space is closed: touching obstacle boundaries is allowed, going
// strictly inside a blocked cell (or off the map) is not.
bool point_in_free_space(const ObstacleMap& map, const Vec2& p);
bool segment_free(const ObstacleMap& map, const Vec2& a, const Vec2& b);

// Shortest collision-free paths among the blocked cells of a grid map.
// Immutable after construction; all queries are safe to run concurrently.
class VisibilityGraph {
 public:
  explicit VisibilityGraph(ObstacleMap map);

  const ObstacleMap& map() const { return map_; }

  bool point_in_free_space(const Vec2& p) const { return mtvrpo::point_in_free_space(map_, p); }
  bool segment_free(const Vec2& a, const Vec2& b) const {
    return mtvrpo::segment_free(map_, a, b);
  }

  // Per-source overlay: distances from a fixed point to every obstacle corner
  // through the graph, reusable for many sink queries.
  class Field {
   public:
    double distance_to(const Vec2& q) const;
    std::vector<Vec2> path_to(const Vec2& q) const;
    const Vec2& source() const { return p_; }

   private:
    friend class VisibilityGraph;
    const VisibilityGraph* vg_ = nullptr;
    Vec2 p_ = Vec2::Zero();
    std::vector<double> dist_;      // shortest p -> corner distance
    std::vector<int> first_;        // first corner on that path
  };

  // Cached by quantized source coordinate (1e-9 m).
  std::shared_ptr<const Field> field(const Vec2& p) const;

  double spatial_distance(const Vec2& p, const Vec2& q) const;
  std::vector<Vec2> spatial_path(const Vec2& p, const Vec2& q) const;

  // Exact min over (a in A, b in B) of collision-free path length between the
  // closed segments A = [a0,a1] and B = [b0,b1].
  double segment_set_distance(const Vec2& a0, const Vec2& a1, const Vec2& b0,
                              const Vec2& b1) const;

  const std::vector<Vec2>& corners() const { return corners_; }

 private:
  void build_corners();
  void build_all_pairs();
  std::vector<Vec2> corner_chain(int from, int to) const;  // inclusive ends
  double segment_to_corner(const Vec2& a0, const Vec2& a1, int corner, Vec2* best_pt) const;

  ObstacleMap map_;
  std::vector<Vec2> corners_;
  std::vector<std::uint8_t> vis_;            // corner-pair visibility, packed V*V
  Eigen::MatrixXd dist_;                     // all-pairs corner distances
  Eigen::MatrixXi next_;                     // next hop on shortest corner path
  mutable std::mutex cache_mu_;
  mutable std::unordered_map<std::uint64_t, std::shared_ptr<const Field>> field_cache_;
};

}  // namespace mtvrpo
