#include "mtvrpo/instance.hpp"

#include <cmath>

#include "mtvrpo/kinematics.hpp"
#include "mtvrpo/rng.hpp"
#include "mtvrpo/thread_pool.hpp"

namespace mtvrpo {

void validate_instance(const Instance& inst) {
  if (inst.map.width_cells <= 0 || inst.map.height_cells <= 0)
    throw ValidationError("empty map");
  if (inst.map.free_cell_count() == 0) throw ValidationError("map has no free cells");
  if (inst.n_agt < 1) throw ValidationError("n_agt must be positive");
  if (inst.v_max <= 0) throw ValidationError("v_max must be positive");
  if (inst.d_max <= 0) throw ValidationError("d_max must be positive");
  if (!point_in_free_space(inst.map, inst.depot))
    throw ValidationError("depot not in free space");
  for (int i = 1; i <= inst.n_tar(); ++i) {
    const Target& tar = inst.target(i);
    const std::string who = "target " + std::to_string(i);
    if (tar.demand < 0) throw ValidationError(who + ": negative demand");
    if (tar.windows.empty()) throw ValidationError(who + ": no windows");
    for (std::size_t j = 0; j < tar.windows.size(); ++j) {
      const Window& w = tar.windows[j];
      if (!(w.t_lo < w.t_hi)) throw ValidationError(who + ": window t_lo >= t_hi");
      if (w.t_lo < 0) throw ValidationError(who + ": window starts before time 0");
      if (j > 0 && w.t_lo < tar.windows[j - 1].t_hi - 1e-12)
        throw ValidationError(who + ": windows overlap or are unsorted");
      if (w.speed() > inst.v_max + 1e-12)
        throw ValidationError("window speed exceeds v_max");
      if (!point_in_free_space(inst.map, w.start) ||
          !point_in_free_space(inst.map, w.end_point()))
        throw ValidationError(who + ": window endpoint not in free space");
      if (!segment_free(inst.map, w.start, w.end_point()))
        throw ValidationError(who + ": window trajectory crosses an obstacle");
    }
  }
}

TWGraph build_tw_graph(const Instance& inst, const Kinematics& kin, int n_threads) {
  TWGraph g;
  TwNode depot;
  depot.id = 0;
  depot.target = 0;
  depot.window = 0;
  depot.t_lo = 0.0;
  depot.t_hi = kInf;
  depot.start = inst.depot;
  g.nodes.push_back(depot);
  g.first_node.assign(inst.n_tar() + 1, 0);
  for (int i = 1; i <= inst.n_tar(); ++i) {
    g.first_node[i] = static_cast<int>(g.nodes.size());
    const Target& tar = inst.target(i);
    for (std::size_t j = 0; j < tar.windows.size(); ++j) {
      TwNode node;
      node.id = static_cast<int>(g.nodes.size());
      node.target = i;
      node.window = static_cast<int>(j);
      node.t_lo = tar.windows[j].t_lo;
      node.t_hi = tar.windows[j].t_hi;
      node.start = tar.windows[j].start;
      node.vel = tar.windows[j].vel;
      g.nodes.push_back(node);
    }
  }
  const int n = g.n_nodes();
  g.lfdt.setConstant(n, n, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (g.has_edge(u, v)) edges.emplace_back(u, v);
  parallel_for(static_cast<int>(edges.size()), n_threads, [&](int k) {
    const auto [u, v] = edges[k];
    auto t = kin.lfdt(g.nodes[u], g.nodes[v], g.nodes[v].t_hi);
    g.lfdt(u, v) = t ? *t : -kInf;
  });
  return g;
}

namespace {

// Window times are scaled by the map-crossing time so instances stay
// comparable across resolutions.
struct GenScales {
  double t_cross;
  double win_lo, win_hi;      // duration range
  double start_lo, start_hi;  // first-window start range
};

bool window_ok(const Instance& inst, const VisibilityGraph& vg, const Window& w) {
  if (!point_in_free_space(inst.map, w.start) ||
      !point_in_free_space(inst.map, w.end_point()))
    return false;
  if (!segment_free(inst.map, w.start, w.end_point())) return false;
  // Depot must reach the window start by its end time, and the interception
  // margin at the window end must close (monotone margin, so the end time is
  // the easiest moment to intercept).
  auto depot_field = vg.field(inst.depot);
  if (depot_field->distance_to(w.start) > inst.v_max * w.t_hi) return false;
  if (depot_field->distance_to(w.end_point()) > inst.v_max * w.t_hi) return false;
  return true;
}

Window sample_window(Rng& rng, const Instance& inst, double t_lo, double duration) {
  constexpr double kTwoPi = 6.283185307179586;
  Window w;
  w.t_lo = t_lo;
  w.t_hi = t_lo + duration;
  const double speed = rng.uniform(0.5, 1.0);
  const double angle = rng.uniform(0.0, kTwoPi);
  w.vel = speed * Vec2(std::cos(angle), std::sin(angle));
  w.start = Vec2(rng.uniform(0.0, inst.map.width_m()), rng.uniform(0.0, inst.map.height_m()));
  return w;
}

}  // namespace

Instance generate_instance(std::uint64_t seed, int n_tar, int resolution, double d_max,
                           int n_agt, double cell_size, double v_max) {
  if (n_tar < 1 || resolution < 2 || n_agt < 1 || cell_size <= 0 || v_max <= 0)
    throw ConfigError("generate_instance: parameters must be positive");
  Rng rng(seed);
  Instance inst;
  inst.v_max = v_max;
  inst.n_agt = n_agt;
  inst.d_max = d_max > 0 ? d_max : std::ceil(static_cast<double>(n_tar) / n_agt);

  inst.map.width_cells = resolution;
  inst.map.height_cells = resolution;
  inst.map.cell_size = cell_size;
  inst.map.blocked.assign(static_cast<std::size_t>(resolution) * resolution, 0);
  const int n_blocked_target = static_cast<int>(std::round(0.12 * resolution * resolution));
  int blocked = 0;
  while (blocked < n_blocked_target) {
    const int ix = rng.below_int(resolution);
    const int iy = rng.below_int(resolution);
    const int size = rng.uniform() < 0.5 ? 1 : 2;
    for (int dy = 0; dy < size; ++dy)
      for (int dx = 0; dx < size; ++dx) {
        if (!inst.map.in_bounds(ix + dx, iy + dy)) continue;
        if (inst.map.cell_blocked(ix + dx, iy + dy)) continue;
        inst.map.set_blocked(ix + dx, iy + dy, true);
        ++blocked;
      }
  }
  // Depot at the center of a uniformly chosen free cell.
  const int n_free = inst.map.free_cell_count();
  int pick = rng.below_int(n_free);
  for (int iy = 0; iy < resolution && pick >= 0; ++iy)
    for (int ix = 0; ix < resolution && pick >= 0; ++ix)
      if (!inst.map.cell_blocked(ix, iy)) {
        if (pick == 0) inst.depot = Vec2((ix + 0.5) * cell_size, (iy + 0.5) * cell_size);
        --pick;
      }

  VisibilityGraph vg(inst.map);
  GenScales s;
  s.t_cross = resolution * cell_size / v_max;
  s.win_lo = 0.8 * s.t_cross;
  s.win_hi = 1.6 * s.t_cross;
  s.start_lo = 0.5 * s.t_cross;
  s.start_hi = 2.0 * s.t_cross;

  for (int i = 0; i < n_tar; ++i) {
    Target tar;
    tar.demand = 1.0;
    bool done = false;
    for (int attempt = 0; attempt < 1000 && !done; ++attempt) {
      tar.windows.clear();
      const double dur1 = rng.uniform(s.win_lo, s.win_hi);
      const double t_lo1 = rng.uniform(s.start_lo, s.start_hi);
      Window w1 = sample_window(rng, inst, t_lo1, dur1);
      if (!window_ok(inst, vg, w1)) continue;
      const double gap = rng.uniform(0.1, 0.5) * dur1;
      const double dur2 = rng.uniform(s.win_lo, s.win_hi);
      Window w2 = sample_window(rng, inst, w1.t_hi + gap, dur2);
      if (!window_ok(inst, vg, w2)) continue;
      tar.windows = {w1, w2};
      done = true;
    }
    if (!done)
      throw GenerationFailed("generate_instance: no feasible window placement for target " +
                             std::to_string(i + 1));
    inst.targets.push_back(tar);
  }
  validate_instance(inst);
  return inst;
}

}  // namespace mtvrpo
