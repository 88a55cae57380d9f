#include "mtvrpo/gcs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <queue>
#include <string>

namespace mtvrpo {

namespace {

bool segment_intersects_rect(const Vec2& a, const Vec2& b, const ConvexRegion& r, double tol) {
  double t0 = 0.0, t1 = 1.0;
  const Vec2 d = b - a;
  for (int axis = 0; axis < 2; ++axis) {
    if (std::abs(d[axis]) < 1e-15) {
      if (a[axis] < r.lo[axis] - tol || a[axis] > r.hi[axis] + tol) return false;
    } else {
      double u0 = (r.lo[axis] - tol - a[axis]) / d[axis];
      double u1 = (r.hi[axis] + tol - a[axis]) / d[axis];
      if (u0 > u1) std::swap(u0, u1);
      t0 = std::max(t0, u0);
      t1 = std::min(t1, u1);
      if (t0 > t1) return false;
    }
  }
  return true;
}

// Space-time intersection of two window nodes (each a segment, or a vertical
// depot ray {p} x [0, inf)).
bool nodes_intersect(const TwNode& u, const TwNode& v, double tol) {
  const double lo = std::max(u.t_lo, v.t_lo);
  const double hi = std::min(u.t_hi, v.t_hi);
  if (lo > hi + tol) return false;
  const Vec2 cu = u.start - u.vel * u.t_lo;
  const Vec2 cv = v.start - v.vel * v.t_lo;
  const Vec2 dvel = u.vel - v.vel;
  const Vec2 rhs = cv - cu;
  if (dvel.norm() < 1e-12) return rhs.norm() <= tol;
  const double t = dvel.dot(rhs) / dvel.squaredNorm();
  if ((dvel * t - rhs).norm() > tol) return false;
  if (t < lo - tol) return false;
  return !std::isfinite(hi) || t <= hi + tol;
}

// Linear row in "h - G x in cone" (or A x = b) form.
struct LinRow {
  std::vector<std::pair<int, double>> g;  // coefficient of x in G (or A)
  double h = 0.0;                         // h (or b)
};

struct ProgramBuilder {
  int n_vars = 0;
  std::vector<LinRow> eqs;
  std::vector<LinRow> ineqs;             // nonneg rows
  std::vector<std::array<LinRow, 3>> socs;
  Eigen::VectorXd c;

  void fix(int var, double value) {
    eqs.push_back({{{var, 1.0}}, value});
  }
  void lower(int var, double bound) {  // x >= bound
    ineqs.push_back({{{var, -1.0}}, -bound});
  }
  void upper(int var, double bound) {  // x <= bound
    ineqs.push_back({{{var, 1.0}}, bound});
  }

  ConicProblem assemble() const {
    ConicProblem p;
    p.c = c;
    p.A.setZero(static_cast<int>(eqs.size()), n_vars);
    p.b.resize(static_cast<int>(eqs.size()));
    for (std::size_t r = 0; r < eqs.size(); ++r) {
      for (auto [v, coef] : eqs[r].g) p.A(static_cast<int>(r), v) += coef;
      p.b[static_cast<int>(r)] = eqs[r].h;
    }
    const int m = static_cast<int>(ineqs.size() + 3 * socs.size());
    p.G.setZero(m, n_vars);
    p.h.resize(m);
    int row = 0;
    for (const LinRow& lr : ineqs) {
      for (auto [v, coef] : lr.g) p.G(row, v) += coef;
      p.h[row] = lr.h;
      ++row;
    }
    for (const auto& block : socs)
      for (const LinRow& lr : block) {
        for (auto [v, coef] : lr.g) p.G(row, v) += coef;
        p.h[row] = lr.h;
        ++row;
      }
    p.cones.nonneg = static_cast<int>(ineqs.size());
    p.cones.soc.assign(socs.size(), 3);
    return p;
  }
};

}  // namespace

TourEvaluator::TourEvaluator(const Instance& inst, const VisibilityGraph& vg, const TWGraph& tw,
                             const SegmentData& sd, const Kinematics& kin)
    : inst_(inst), vg_(vg), tw_(tw), sd_(sd), kin_(kin) {
  regions_ = decompose_free_space(inst.map);
  const int R = static_cast<int>(regions_.size());
  const int N = tw_.n_nodes();
  region_region_.assign(static_cast<std::size_t>(R) * R, 0);
  for (int a = 0; a < R; ++a)
    for (int b = 0; b < R; ++b)
      if (a != b && regions_[a].intersects(regions_[b]))
        region_region_[static_cast<std::size_t>(a) * R + b] = 1;
  node_region_.assign(static_cast<std::size_t>(N) * R, 0);
  for (int u = 0; u < N; ++u) {
    const TwNode& node = tw_.nodes[u];
    const Vec2 a = node.start;
    const Vec2 b = node.is_depot() ? node.start : node.pos_at(node.t_hi);
    for (int r = 0; r < R; ++r)
      if (segment_intersects_rect(a, b, regions_[r], kGeomTol))
        node_region_[static_cast<std::size_t>(u) * R + r] = 1;
  }
  node_node_.assign(static_cast<std::size_t>(N) * N, 0);
  for (int u = 0; u < N; ++u)
    for (int v = 0; v < N; ++v)
      if (u == v || nodes_intersect(tw_.nodes[u], tw_.nodes[v], kGeomTol))
        node_node_[static_cast<std::size_t>(u) * N + v] = 1;
}

TourGcs TourEvaluator::build_gcs(const Tour& tour) const {
  TourGcs g;
  g.tour = &tour;
  g.n_regions = static_cast<int>(regions_.size());
  g.len = tour.len();
  const int R = g.n_regions;
  g.adj.assign(g.n_nodes(), {});
  auto connect = [&](int a, int b) {
    g.adj[a].push_back(b);
    g.adj[b].push_back(a);
  };
  for (int a = 0; a < R; ++a)
    for (int b = a + 1; b < R; ++b)
      if (region_region_[static_cast<std::size_t>(a) * R + b]) connect(a, b);
  for (int p = 0; p < g.len; ++p) {
    const int u = tour.nodes[p];
    for (int r = 0; r < R; ++r)
      if (node_region_[static_cast<std::size_t>(u) * R + r]) connect(g.position_node(p), r);
    for (int q = p + 1; q < g.len; ++q)
      if (node_node_[static_cast<std::size_t>(u) * tw_.n_nodes() + tour.nodes[q]])
        connect(g.position_node(p), g.position_node(q));
  }
  return g;
}

std::optional<Relaxation> TourEvaluator::solve_path_relaxation(
    const TourGcs& gcs, const std::vector<int>& path, int visited, const AffineHeuristic& heur,
    const std::vector<double>& tmax, const GcsOptions& opt) const {
  const Tour& tour = *gcs.tour;
  const int L = static_cast<int>(path.size());
  const int len = gcs.len;

  std::vector<int> completion;  // tour positions intercepted by the straight tail
  if (visited < len) {
    if (opt.mode == TourCostMode::AffineHeuristic) {
      completion = {visited};
    } else {
      for (int p = visited; p < len; ++p) completion.push_back(p);
    }
  }
  const int n_comp = static_cast<int>(completion.size());
  const int n_norms = L + n_comp;

  ProgramBuilder pb;
  const auto knot = [&](int k) { return 3 * k; };                       // k in [0, L]
  const auto comp = [&](int r) { return 3 * (L + 1) + 3 * r; };         // r in [0, n_comp)
  const int w0 = 3 * (L + 1) + 3 * n_comp;
  pb.n_vars = w0 + n_norms;
  pb.c = Eigen::VectorXd::Zero(pb.n_vars);
  double constant = 0.0;

  auto add_membership = [&](int base, int gcs_node) {
    if (gcs.is_region(gcs_node)) {
      const ConvexRegion& r = regions_[gcs_node];
      pb.lower(base + 0, r.lo.x());
      pb.upper(base + 0, r.hi.x());
      pb.lower(base + 1, r.lo.y());
      pb.upper(base + 1, r.hi.y());
      return;
    }
    const TwNode& node = tw_.nodes[tour.nodes[gcs.position_of(gcs_node)]];
    // q - vel * t = start - vel * t_lo
    pb.eqs.push_back({{{base + 0, 1.0}, {base + 2, -node.vel.x()}},
                      node.start.x() - node.vel.x() * node.t_lo});
    pb.eqs.push_back({{{base + 1, 1.0}, {base + 2, -node.vel.y()}},
                      node.start.y() - node.vel.y() * node.t_lo});
    pb.lower(base + 2, node.t_lo);
    if (std::isfinite(node.t_hi)) pb.upper(base + 2, node.t_hi);
  };

  // Start knot pinned to (depot, 0).
  pb.fix(knot(0) + 0, inst_.depot.x());
  pb.fix(knot(0) + 1, inst_.depot.y());
  pb.fix(knot(0) + 2, 0.0);
  // Interior knots live in consecutive set intersections; the last knot is
  // free within the final set.
  for (int k = 1; k <= L - 1; ++k) {
    const int a = path[k - 1], b = path[k];
    add_membership(knot(k), a);
    const bool duplicate = !gcs.is_region(a) && !gcs.is_region(b) &&
                           tour.nodes[gcs.position_of(a)] == tour.nodes[gcs.position_of(b)];
    if (!duplicate) add_membership(knot(k), b);
  }
  add_membership(knot(L), path[L - 1]);

  for (int r = 0; r < n_comp; ++r) {
    const int p = completion[r];
    add_membership(comp(r), gcs.position_node(p));
    if (std::isfinite(tmax[p])) pb.upper(comp(r) + 2, tmax[p]);
  }

  // One norm epigraph per motion leg, linked to the speed limit.
  int w = w0;
  auto add_leg = [&](int u, int v) {
    std::array<LinRow, 3> soc;
    soc[0] = {{{w, -1.0}}, 0.0};
    soc[1] = {{{v + 0, -1.0}, {u + 0, 1.0}}, 0.0};
    soc[2] = {{{v + 1, -1.0}, {u + 1, 1.0}}, 0.0};
    pb.socs.push_back(soc);
    pb.ineqs.push_back(
        {{{v + 2, -inst_.v_max}, {u + 2, inst_.v_max}, {w, 1.0}}, 0.0});
    pb.c[w] = 1.0;
    ++w;
  };
  for (int k = 1; k <= L; ++k) add_leg(knot(k - 1), knot(k));
  int prev = knot(L);
  for (int r = 0; r < n_comp; ++r) {
    add_leg(prev, comp(r));
    prev = comp(r);
  }

  if (!completion.empty() && opt.mode == TourCostMode::AffineHeuristic) {
    const int p = completion[0];
    pb.c[comp(0) + 2] += heur.slope[p];
    constant = heur.intercept[p];
  }

  const ConicProblem prob = pb.assemble();
  const ConicResult res = solve_conic(prob, opt.conic);
  bool ok = res.status == ConicStatus::Optimal;
  if (res.status == ConicStatus::MaxIterations)
    ok = res.pres <= 1e-6 && res.dres <= 1e-6 && res.gap <= 1e-5;
#ifdef MTVRPO_GCS_TRACE
  if (!ok) {
    std::fprintf(stderr, "[relax drop] status=%d pres=%.2e dres=%.2e gap=%.2e L=%d\n",
                 (int)res.status, res.pres, res.dres, res.gap, L);
    if (const char* dump = std::getenv("MTVRPO_DUMP")) {
      static int dumped = 0;
      if (dumped < 2000) {
        std::string path = std::string(dump) + "." + std::to_string(dumped++);
        FILE* f = std::fopen(path.c_str(), "w");
        const auto& P = prob;
        std::fprintf(f, "%d %d %d %d\n", (int)P.c.size(), (int)P.b.size(),
                     (int)P.h.size(), P.cones.nonneg);
        std::fprintf(f, "%d", (int)P.cones.soc.size());
        for (int q : P.cones.soc) std::fprintf(f, " %d", q);
        std::fprintf(f, "\n");
        auto dumpv = [&](const Eigen::VectorXd& v) {
          for (int i = 0; i < v.size(); ++i) std::fprintf(f, "%.17g ", v[i]);
          std::fprintf(f, "\n");
        };
        auto dumpm = [&](const Eigen::MatrixXd& m) {
          for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j) std::fprintf(f, "%.17g ", m(i, j));
          std::fprintf(f, "\n");
        };
        dumpv(P.c);
        dumpm(P.A);
        dumpv(P.b);
        dumpm(P.G);
        dumpv(P.h);
        std::fclose(f);
      }
    }
  }
#endif
  if (!ok) return std::nullopt;

  Relaxation out;
  out.f = res.objective + constant;
  out.knots.resize(L + 1);
  for (int k = 0; k <= L; ++k) {
    out.knots[k].pos = Vec2(res.x[knot(k) + 0], res.x[knot(k) + 1]);
    out.knots[k].t = res.x[knot(k) + 2];
  }
  return out;
}

TourCost TourEvaluator::evaluate(const Tour& tour, const GcsOptions& opt) const {
  const int len = tour.len();
  if (len < 2 || tour.nodes.front() != 0 || tour.nodes.back() != 0)
    throw std::invalid_argument("evaluate: tour must begin and end at the depot");
  const std::vector<double> tmax = compute_tmax(tour, tw_, kin_);
  AffineHeuristic heur;
  if (opt.mode == TourCostMode::AffineHeuristic) {
    heur = fit_affine_heuristic(tour, sd_, compute_h_seg(tour, sd_));
  } else {
    heur.slope.assign(len, 0.0);
    heur.intercept.assign(len, 0.0);
  }
  const TourGcs gcs = build_gcs(tour);

  struct PathNode {
    int parent;
    int gcs_node;
    int visited;
  };
  struct Entry {
    double f;
    int visited;
    int depth;
    long seq;
    int idx;
    bool solved;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.visited != b.visited) return a.visited < b.visited;
    if (a.depth != b.depth) return a.depth > b.depth;
    return a.seq > b.seq;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
  std::vector<PathNode> pool;

  pool.push_back({-1, gcs.position_node(0), 1});
  open.push({0.0, 1, 1, 0, 0, true});
  long seq = 1;
  GcsStats stats;
  double max_popped_f = 0.0;
  // Successors inherit f from their parent and are priced only when popped;
  // the relaxation can only raise f, so ordering stays exact.
  const double prune_above = tour.ub < kInf ? tour.ub + kTimeTol : kInf;

  std::vector<int> scratch;
  auto reconstruct = [&](int idx) {
    scratch.clear();
    for (int cur = idx; cur != -1; cur = pool[cur].parent) scratch.push_back(pool[cur].gcs_node);
    std::reverse(scratch.begin(), scratch.end());
    return scratch;
  };

  while (!open.empty()) {
    Entry e = open.top();
    open.pop();
    ++stats.pops;
    if (stats.pops > opt.max_pops)
      throw ResourceExhausted("evaluate: GCS search pop budget exceeded");
    const PathNode cur = pool[e.idx];

    if (!e.solved) {
      const auto path = reconstruct(e.idx);
      auto relax = solve_path_relaxation(gcs, path, cur.visited, heur, tmax, opt);
      ++stats.relaxations;
      if (!relax) continue;
      if (relax->f > prune_above) continue;
      e.f = std::max(e.f, relax->f);
      e.solved = true;
      if (!open.empty() && worse(e, open.top())) {
        open.push(e);
        continue;
      }
    }
    stats.max_pop_regression = std::max(stats.max_pop_regression, max_popped_f - e.f);
    max_popped_f = std::max(max_popped_f, e.f);

    if (cur.gcs_node == gcs.position_node(len - 1) && cur.visited == len) {
      const auto path = reconstruct(e.idx);
      auto relax = solve_path_relaxation(gcs, path, len, heur, tmax, opt);
      ++stats.relaxations;
      if (!relax) throw TourInfeasible("evaluate: goal relaxation became infeasible");
      TourCost out;
      out.cost = relax->f;
      out.stats = stats;
      out.traj.knots = relax->knots;
      // Snap knots onto their sets: the interior-point solution carries a
      // ~1e-8 residual, while claims are checked against exact interception.
      for (std::size_t j = 0; j < path.size(); ++j) {
        TrajKnot& k = out.traj.knots[j];  // entry knot of set path[j]
        if (gcs.is_region(path[j])) {
          const ConvexRegion& r = regions_[path[j]];
          k.pos = k.pos.cwiseMax(r.lo).cwiseMin(r.hi);
        } else {
          const TwNode& node = tw_.nodes[tour.nodes[gcs.position_of(path[j])]];
          k.t = std::clamp(k.t, node.t_lo, std::min(node.t_hi, kInf));
          k.pos = node.pos_at(k.t);
        }
      }
      out.traj.knots.back().pos = inst_.depot;
      int visited = 0;
      for (std::size_t j = 0; j < path.size(); ++j) {
        if (gcs.is_region(path[j])) continue;
        const int p = gcs.position_of(path[j]);
        if (p != visited) continue;
        ++visited;
        const int target = tw_.nodes[tour.nodes[p]].target;
        if (target != 0)
          out.traj.claims.push_back({target, out.traj.knots[j].t});
      }
      return out;
    }
    for (int nxt : gcs.adj[cur.gcs_node]) {
      int visited = cur.visited;
      if (gcs.is_region(nxt)) {
        bool repeat = false;
        for (int walk = e.idx; walk != -1; walk = pool[walk].parent) {
          if (!gcs.is_region(pool[walk].gcs_node)) break;
          if (pool[walk].gcs_node == nxt) {
            repeat = true;
            break;
          }
        }
        if (repeat) continue;
      } else {
        // A window node is appended only when it advances the tour order:
        // earlier windows are already reachable through the region cover, and
        // re-appending them spawns endless zero-length revisit cycles.
        if (gcs.position_of(nxt) != cur.visited) continue;
        ++visited;
      }
      pool.push_back({e.idx, nxt, visited});
      open.push({e.f, visited, e.depth + 1, seq++, static_cast<int>(pool.size()) - 1, false});
    }
  }
  throw TourInfeasible("evaluate: GCS search exhausted without reaching the goal");
}

}  // namespace mtvrpo
