#include "mtvrpo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mtvrpo {

namespace {

constexpr double kCornerInflate = 1e-9;

// Closest point on segment [a, b] to p.
Vec2 closest_on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 ab = b - a;
  const double den = ab.squaredNorm();
  if (den < 1e-30) return a;
  const double t = std::clamp((p - a).dot(ab) / den, 0.0, 1.0);
  return a + t * ab;
}

// Closest pair of points between segments [p1,q1] and [p2,q2].
std::pair<Vec2, Vec2> closest_between_segments(const Vec2& p1, const Vec2& q1, const Vec2& p2,
                                               const Vec2& q2) {
  const Vec2 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a < 1e-30 && e < 1e-30) {
    return {p1, p2};
  }
  if (a < 1e-30) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e < 1e-30) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double den = a * e - b * b;
      s = den > 1e-30 ? std::clamp((b * f - c * e) / den, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return {p1 + s * d1, p2 + t * d2};
}

}  // namespace

int ObstacleMap::free_cell_count() const {
  int n = 0;
  for (std::uint8_t b : blocked) n += (b == 0);
  return n;
}

ObstacleMap load_map(const std::string& text) {
  std::istringstream in(text);
  std::string tag;
  ObstacleMap map;
  if (!(in >> tag) || tag != "resolution") throw ParseError("map: expected 'resolution' header");
  if (!(in >> map.width_cells >> map.height_cells >> map.cell_size))
    throw ParseError("map: malformed header");
  if (map.width_cells <= 0 || map.height_cells <= 0 || map.cell_size <= 0)
    throw ParseError("map: non-positive dimensions");
  map.blocked.assign(static_cast<std::size_t>(map.width_cells) * map.height_cells, 0);
  std::string line;
  std::getline(in, line);  // rest of header line
  for (int iy = 0; iy < map.height_cells; ++iy) {
    if (!std::getline(in, line)) throw ParseError("map: missing row " + std::to_string(iy));
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (static_cast<int>(line.size()) != map.width_cells)
      throw ParseError("map: row " + std::to_string(iy) + " has wrong width");
    for (int ix = 0; ix < map.width_cells; ++ix) {
      if (line[ix] == '@') {
        map.set_blocked(ix, iy, true);
      } else if (line[ix] != '.') {
        throw ParseError(std::string("map: bad cell character '") + line[ix] + "'");
      }
    }
  }
  if (map.free_cell_count() == 0) throw InvalidMap("map has no free cells");
  return map;
}

std::string save_map(const ObstacleMap& map) {
  std::ostringstream out;
  out << "resolution " << map.width_cells << " " << map.height_cells << " " << map.cell_size
      << "\n";
  for (int iy = 0; iy < map.height_cells; ++iy) {
    for (int ix = 0; ix < map.width_cells; ++ix) out << (map.cell_blocked(ix, iy) ? '@' : '.');
    out << "\n";
  }
  return out.str();
}

std::vector<Vec2> ConvexRegion::polygon() const {
  return {lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())};
}

std::vector<ConvexRegion> decompose_free_space(const ObstacleMap& map) {
  const int W = map.width_cells, H = map.height_cells;
  std::vector<std::uint8_t> uncovered(static_cast<std::size_t>(W) * H, 0);
  int remaining = 0;
  for (int iy = 0; iy < H; ++iy)
    for (int ix = 0; ix < W; ++ix)
      if (!map.cell_blocked(ix, iy)) {
        uncovered[static_cast<std::size_t>(iy) * W + ix] = 1;
        ++remaining;
      }

  // Greedy partition: repeatedly carve the largest rectangle of still
  // uncovered free cells. Regions end up interior-disjoint, which keeps the
  // region graph sparse; closed rectangles still intersect along shared
  // boundaries, so coverage and adjacency semantics are unchanged.
  std::vector<ConvexRegion> regions;
  std::vector<int> heights(W, 0);
  while (remaining > 0) {
    int best_area = 0, bc = -1, br = -1, bw = 0, bh = 0;
    std::fill(heights.begin(), heights.end(), 0);
    std::vector<std::pair<int, int>> stack;  // (column, height)
    for (int iy = 0; iy < H; ++iy) {
      for (int ix = 0; ix < W; ++ix)
        heights[ix] = uncovered[static_cast<std::size_t>(iy) * W + ix] ? heights[ix] + 1 : 0;
      stack.clear();
      auto consider = [&](int col, int width, int height) {
        const int area = width * height;
        if (area > best_area) {
          best_area = area;
          bc = col;
          br = iy - height + 1;
          bw = width;
          bh = height;
        }
      };
      for (int ix = 0; ix <= W; ++ix) {
        const int h = ix < W ? heights[ix] : 0;
        int start = ix;
        while (!stack.empty() && stack.back().second >= h) {
          consider(stack.back().first, ix - stack.back().first, stack.back().second);
          start = stack.back().first;
          stack.pop_back();
        }
        if (h > 0 && (stack.empty() || stack.back().second < h)) stack.emplace_back(start, h);
      }
    }

    ConvexRegion region;
    region.id = static_cast<int>(regions.size());
    region.lo = Vec2(bc * map.cell_size, br * map.cell_size);
    region.hi = Vec2((bc + bw) * map.cell_size, (br + bh) * map.cell_size);
    regions.push_back(region);
    for (int iy = br; iy < br + bh; ++iy)
      for (int ix = bc; ix < bc + bw; ++ix) {
        std::uint8_t& u = uncovered[static_cast<std::size_t>(iy) * W + ix];
        remaining -= u;
        u = 0;
      }
  }
  return regions;
}

VisibilityGraph::VisibilityGraph(ObstacleMap map) : map_(std::move(map)) {
  build_corners();
  build_all_pairs();
}

bool point_in_free_space(const ObstacleMap& map, const Vec2& p) {
  const double cs = map.cell_size;
  if (p.x() < -kGeomTol || p.x() > map.width_m() + kGeomTol || p.y() < -kGeomTol ||
      p.y() > map.height_m() + kGeomTol)
    return false;
  const int x0 = std::clamp(static_cast<int>(std::floor((p.x() - kGeomTol) / cs)), 0,
                            map.width_cells - 1);
  const int x1 = std::clamp(static_cast<int>(std::floor((p.x() + kGeomTol) / cs)), 0,
                            map.width_cells - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor((p.y() - kGeomTol) / cs)), 0,
                            map.height_cells - 1);
  const int y1 = std::clamp(static_cast<int>(std::floor((p.y() + kGeomTol) / cs)), 0,
                            map.height_cells - 1);
  for (int iy = y0; iy <= y1; ++iy)
    for (int ix = x0; ix <= x1; ++ix)
      if (!map.cell_blocked(ix, iy)) return true;
  return false;
}

bool segment_free(const ObstacleMap& map, const Vec2& a, const Vec2& b) {
  if (!point_in_free_space(map, a) || !point_in_free_space(map, b)) return false;
  const Vec2 d = b - a;
  const double len = d.norm();
  if (len < 2 * kGeomTol) return true;
  const double cs = map.cell_size;

  // Lattice-crossing parameters split the segment into per-cell pieces; each
  // piece deeper than the tolerance must lie in closed free space.
  thread_local std::vector<double> ts;
  ts.clear();
  ts.push_back(0.0);
  ts.push_back(1.0);
  for (int axis = 0; axis < 2; ++axis) {
    if (std::abs(d[axis]) < 1e-15) continue;
    const double lo = std::min(a[axis], b[axis]), hi = std::max(a[axis], b[axis]);
    const int m0 = static_cast<int>(std::ceil(lo / cs));
    const int m1 = static_cast<int>(std::floor(hi / cs));
    for (int m = m0; m <= m1; ++m) {
      const double t = (m * cs - a[axis]) / d[axis];
      if (t > 0.0 && t < 1.0) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double t0 = ts[i], t1 = ts[i + 1];
    if ((t1 - t0) * len <= 2 * kGeomTol) continue;
    const Vec2 mid = a + 0.5 * (t0 + t1) * d;
    if (!point_in_free_space(map, mid)) return false;
  }
  return true;
}

void VisibilityGraph::build_corners() {
  const int W = map_.width_cells, H = map_.height_cells;
  const double cs = map_.cell_size;
  auto blocked_at = [&](int ix, int iy) {
    return !map_.in_bounds(ix, iy) || map_.cell_blocked(ix, iy);
  };
  // Lattice corner point (cx, cy); quadrant cell for diag q is
  // (cx - (qx<0), cy - (qy<0)).
  for (int cy = 0; cy <= H; ++cy) {
    for (int cx = 0; cx <= W; ++cx) {
      const bool ne = blocked_at(cx, cy), nw = blocked_at(cx - 1, cy),
                 se = blocked_at(cx, cy - 1), sw = blocked_at(cx - 1, cy - 1);
      if (!(ne || nw || se || sw)) continue;
      const Vec2 base(cx * cs, cy * cs);
      const int qx[4] = {1, -1, 1, -1};
      const int qy[4] = {1, 1, -1, -1};
      const bool quad[4] = {ne, nw, se, sw};
      auto cell = [&](int dx, int dy) {
        for (int k = 0; k < 4; ++k)
          if (qx[k] == dx && qy[k] == dy) return quad[k];
        return true;
      };
      for (int k = 0; k < 4; ++k) {
        if (quad[k]) continue;  // vertex must sit in a free quadrant
        const int dx = qx[k], dy = qy[k];
        const bool convex_corner =
            cell(-dx, -dy) && !cell(dx, -dy) && !cell(-dx, dy);
        const bool pinch = cell(dx, -dy) && cell(-dx, dy);
        if (!convex_corner && !pinch) continue;
        const Vec2 v = base + kCornerInflate * Vec2(dx, dy);
        if (!point_in_free_space(v)) continue;
        corners_.push_back(v);
      }
    }
  }
}

void VisibilityGraph::build_all_pairs() {
  const int V = static_cast<int>(corners_.size());
  vis_.assign(static_cast<std::size_t>(V) * V, 0);
  dist_.setConstant(V, V, kInf);
  next_.setConstant(V, V, -1);
  for (int i = 0; i < V; ++i) {
    dist_(i, i) = 0.0;
    next_(i, i) = i;
    for (int j = i + 1; j < V; ++j) {
      if (segment_free(corners_[i], corners_[j])) {
        const double d = (corners_[i] - corners_[j]).norm();
        vis_[static_cast<std::size_t>(i) * V + j] = 1;
        vis_[static_cast<std::size_t>(j) * V + i] = 1;
        dist_(i, j) = dist_(j, i) = d;
        next_(i, j) = j;
        next_(j, i) = i;
      }
    }
  }
  for (int k = 0; k < V; ++k)
    for (int i = 0; i < V; ++i) {
      const double dik = dist_(i, k);
      if (dik == kInf) continue;
      for (int j = 0; j < V; ++j) {
        const double alt = dik + dist_(k, j);
        if (alt < dist_(i, j)) {
          dist_(i, j) = alt;
          next_(i, j) = next_(i, k);
        }
      }
    }
}

std::vector<Vec2> VisibilityGraph::corner_chain(int from, int to) const {
  std::vector<Vec2> chain;
  int cur = from;
  chain.push_back(corners_[cur]);
  while (cur != to) {
    cur = next_(cur, to);
    chain.push_back(corners_[cur]);
  }
  return chain;
}

std::shared_ptr<const VisibilityGraph::Field> VisibilityGraph::field(const Vec2& p) const {
  const std::int64_t qx = llround(p.x() * 1e9), qy = llround(p.y() * 1e9);
  const std::uint64_t key =
      static_cast<std::uint64_t>(qx) * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint64_t>(qy);
  {
    std::lock_guard<std::mutex> lock(cache_mu_);
    auto it = field_cache_.find(key);
    if (it != field_cache_.end() && (it->second->p_ - p).norm() < 2e-9) return it->second;
  }
  if (!point_in_free_space(p))
    throw PointInObstacle("field source strictly inside an obstacle");

  auto f = std::make_shared<Field>();
  f->vg_ = this;
  f->p_ = p;
  const int V = static_cast<int>(corners_.size());
  f->dist_.assign(V, kInf);
  f->first_.assign(V, -1);
  std::vector<double> direct(V, kInf);
  for (int v = 0; v < V; ++v)
    if (segment_free(p, corners_[v])) direct[v] = (p - corners_[v]).norm();
  for (int v = 0; v < V; ++v) {
    double best = direct[v];
    int first = v;
    for (int u = 0; u < V; ++u) {
      if (direct[u] == kInf) continue;
      const double alt = direct[u] + dist_(u, v);
      if (alt < best) {
        best = alt;
        first = u;
      }
    }
    f->dist_[v] = best;
    f->first_[v] = best == kInf ? -1 : first;
  }
  {
    std::lock_guard<std::mutex> lock(cache_mu_);
    field_cache_[key] = f;
  }
  return f;
}

double VisibilityGraph::Field::distance_to(const Vec2& q) const {
  if (!vg_->point_in_free_space(q))
    throw PointInObstacle("query point strictly inside an obstacle");
  if (vg_->segment_free(p_, q)) return (p_ - q).norm();
  const int V = static_cast<int>(vg_->corners_.size());
  double best = kInf;
  for (int v = 0; v < V; ++v) {
    if (dist_[v] == kInf) continue;
    const double lb = dist_[v] + (vg_->corners_[v] - q).norm();
    if (lb >= best) continue;
    if (vg_->segment_free(q, vg_->corners_[v])) best = lb;
  }
  return best;
}

std::vector<Vec2> VisibilityGraph::Field::path_to(const Vec2& q) const {
  if (!vg_->point_in_free_space(q))
    throw PointInObstacle("query point strictly inside an obstacle");
  if (vg_->segment_free(p_, q)) return {p_, q};
  const int V = static_cast<int>(vg_->corners_.size());
  double best = kInf;
  int bv = -1;
  for (int v = 0; v < V; ++v) {
    if (dist_[v] == kInf) continue;
    const double lb = dist_[v] + (vg_->corners_[v] - q).norm();
    if (lb >= best) continue;
    if (vg_->segment_free(q, vg_->corners_[v])) {
      best = lb;
      bv = v;
    }
  }
  if (bv < 0) throw Unreachable("no collision-free path between query points");
  std::vector<Vec2> path;
  path.push_back(p_);
  auto chain = vg_->corner_chain(first_[bv], bv);
  path.insert(path.end(), chain.begin(), chain.end());
  path.push_back(q);
  return path;
}

double VisibilityGraph::spatial_distance(const Vec2& p, const Vec2& q) const {
  return field(p)->distance_to(q);
}

std::vector<Vec2> VisibilityGraph::spatial_path(const Vec2& p, const Vec2& q) const {
  if ((p - q).norm() < kGeomTol) {
    if (!point_in_free_space(p)) throw PointInObstacle("query point strictly inside an obstacle");
    return {p};
  }
  return field(p)->path_to(q);
}

double VisibilityGraph::segment_to_corner(const Vec2& a0, const Vec2& a1, int corner,
                                          Vec2* best_pt) const {
  const Vec2& v = corners_[corner];
  const Vec2 cand[3] = {closest_on_segment(a0, a1, v), a0, a1};
  double best = kInf;
  for (const Vec2& c : cand) {
    const double d = (c - v).norm();
    if (d >= best) continue;
    if (segment_free(c, v)) {
      best = d;
      if (best_pt) *best_pt = c;
    }
  }
  return best;
}

double VisibilityGraph::segment_set_distance(const Vec2& a0, const Vec2& a1, const Vec2& b0,
                                             const Vec2& b1) const {
  auto [pa, pb] = closest_between_segments(a0, a1, b0, b1);
  const double direct = (pa - pb).norm();
  if (direct < kGeomTol) return 0.0;
  if (segment_free(pa, pb)) return direct;  // unconstrained minimum is attainable

  double best = kInf;
  // Direct connections pinned at segment endpoints.
  for (const Vec2& e : {a0, a1}) {
    const Vec2 f = closest_on_segment(b0, b1, e);
    const double d = (e - f).norm();
    if (d < best && segment_free(e, f)) best = d;
  }
  for (const Vec2& e : {b0, b1}) {
    const Vec2 f = closest_on_segment(a0, a1, e);
    const double d = (e - f).norm();
    if (d < best && segment_free(e, f)) best = d;
  }
  // Paths bending at obstacle corners.
  const int V = static_cast<int>(corners_.size());
  std::vector<double> da(V), db(V);
  for (int v = 0; v < V; ++v) {
    da[v] = segment_to_corner(a0, a1, v, nullptr);
    db[v] = segment_to_corner(b0, b1, v, nullptr);
  }
  for (int u = 0; u < V; ++u) {
    if (da[u] == kInf) continue;
    for (int v = 0; v < V; ++v) {
      const double alt = da[u] + dist_(u, v) + db[v];
      if (alt < best) best = alt;
    }
  }
  return best;
}

}  // namespace mtvrpo
