#include "mtvrpo/segments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtvrpo/thread_pool.hpp"

namespace mtvrpo {

std::vector<int> apportion(const std::vector<double>& weights, int total) {
  const int n = static_cast<int>(weights.size());
  if (total < n) throw ConfigError("apportion: fewer slots than windows");
  double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> quota(n);
  for (int j = 0; j < n; ++j)
    quota[j] = sum > 0 ? total * weights[j] / sum : static_cast<double>(total) / n;
  std::vector<int> out(n);
  int allocated = 0;
  for (int j = 0; j < n; ++j) {
    out[j] = std::max(1, static_cast<int>(std::floor(quota[j] + 1e-12)));
    allocated += out[j];
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return quota[a] - std::floor(quota[a] + 1e-12) > quota[b] - std::floor(quota[b] + 1e-12);
  });
  std::size_t cursor = 0;
  while (allocated < total) {
    ++out[order[cursor % order.size()]];
    ++cursor;
    ++allocated;
  }
  while (allocated > total) {
    const int j = static_cast<int>(
        std::max_element(out.begin(), out.end()) - out.begin());
    --out[j];
    --allocated;
  }
  return out;
}

SegmentData::SegmentData(const Instance& inst, const TWGraph& tw, const VisibilityGraph& vg,
                         int n_seg_tar, int n_threads)
    : inst_(inst), n_seg_tar_(n_seg_tar) {
  per_node_.resize(tw.n_nodes());
  Segment depot;
  depot.id = 0;
  depot.node = 0;
  depot.index = 0;
  depot.t_lo = 0.0;
  depot.t_hi = kInf;
  depot.start = inst.depot;
  all_.push_back(depot);
  per_node_[0] = {0};

  for (int i = 1; i <= inst.n_tar(); ++i) {
    const Target& tar = inst.target(i);
    std::vector<double> durations;
    for (const Window& w : tar.windows) durations.push_back(w.duration());
    const std::vector<int> counts = apportion(durations, n_seg_tar);
    for (std::size_t j = 0; j < tar.windows.size(); ++j) {
      const Window& w = tar.windows[j];
      const int node = tw.node_of(i, static_cast<int>(j));
      const int nk = counts[j];
      for (int k = 0; k < nk; ++k) {
        Segment s;
        s.id = static_cast<int>(all_.size());
        s.node = node;
        s.index = k;
        s.t_lo = w.t_lo + w.duration() * k / nk;
        s.t_hi = w.t_lo + w.duration() * (k + 1) / nk;
        s.start = w.pos_at(s.t_lo);
        s.vel = w.vel;
        per_node_[node].push_back(s.id);
        all_.push_back(s);
      }
    }
  }

  const int S = n_segments();
  seg_dist_.setConstant(S, S, std::numeric_limits<double>::quiet_NaN());
  start_dist_.setConstant(S, S, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::pair<int, int>> pairs;
  auto target_of = [&](int sid) { return tw.nodes[all_[sid].node].target; };
  for (int a = 0; a < S; ++a)
    for (int b = a; b < S; ++b)
      if (a == b || target_of(a) != target_of(b)) pairs.emplace_back(a, b);
  parallel_for(static_cast<int>(pairs.size()), n_threads, [&](int k) {
    const auto [a, b] = pairs[k];
    const Segment& sa = all_[a];
    const Segment& sb = all_[b];
    const double dseg =
        vg.segment_set_distance(sa.start, sa.end_point(), sb.start, sb.end_point());
    const double dstart = vg.field(sa.start)->distance_to(sb.start);
    seg_dist_(a, b) = seg_dist_(b, a) = dseg;
    start_dist_(a, b) = start_dist_(b, a) = dstart;
  });
}

double SegmentData::c_seg(int a, int b) const {
  const double c = seg_dist_(a, b);
  if (!(c < kInf)) return kInf;
  return all_[a].t_lo + c / inst_.v_max <= all_[b].t_hi ? c : kInf;
}

double SegmentData::c_start(int a, int b) const {
  const double c = start_dist_(a, b);
  if (!(c < kInf)) return kInf;
  if (b == 0) return c;  // return leg to the depot carries no deadline
  return all_[a].t_lo + c / inst_.v_max <= all_[b].t_lo ? c : kInf;
}

namespace {

// Shared forward recursion for Eq.-style bounds; `cost` is c_seg or c_start.
template <typename CostFn>
double chain_bound(const Tour& tour, const SegmentData& sd, CostFn cost,
                   const std::vector<double>* g_at_last) {
  const int len = tour.len();
  if (len <= 2) return 0.0;
  std::vector<double> g;
  if (g_at_last) {
    g = *g_at_last;
  } else {
    const auto& first = sd.segments_of(tour.nodes[1]);
    g.resize(first.size());
    for (std::size_t k = 0; k < first.size(); ++k) g[k] = cost(0, first[k]);
    for (int p = 2; p <= len - 2; ++p) {
      const auto& prev = sd.segments_of(tour.nodes[p - 1]);
      const auto& cur = sd.segments_of(tour.nodes[p]);
      std::vector<double> gn(cur.size(), kInf);
      for (std::size_t k2 = 0; k2 < cur.size(); ++k2)
        for (std::size_t k1 = 0; k1 < prev.size(); ++k1)
          gn[k2] = std::min(gn[k2], g[k1] + cost(prev[k1], cur[k2]));
      g = std::move(gn);
    }
  }
  const auto& last = sd.segments_of(tour.nodes[len - 2]);
  double best = kInf;
  for (std::size_t k = 0; k < last.size(); ++k) best = std::min(best, g[k] + cost(last[k], 0));
  return best;
}

}  // namespace

double tour_lower_bound(const Tour& tour, const SegmentData& sd,
                        const std::vector<double>* g_at_last) {
  return chain_bound(
      tour, sd, [&](int a, int b) { return sd.c_seg(a, b); }, g_at_last);
}

double tour_upper_bound(const Tour& tour, const SegmentData& sd,
                        const std::vector<double>* g_at_last) {
  return chain_bound(
      tour, sd, [&](int a, int b) { return sd.c_start(a, b); }, g_at_last);
}

std::vector<std::vector<double>> compute_h_seg(const Tour& tour, const SegmentData& sd) {
  const int len = tour.len();
  std::vector<std::vector<double>> h(len);
  for (int p = len - 2; p >= 1; --p) {
    const auto& segs = sd.segments_of(tour.nodes[p]);
    h[p].assign(segs.size(), kInf);
    if (p == len - 2) {
      for (std::size_t k = 0; k < segs.size(); ++k) h[p][k] = sd.c_seg(segs[k], 0);
    } else {
      const auto& nxt = sd.segments_of(tour.nodes[p + 1]);
      for (std::size_t k = 0; k < segs.size(); ++k)
        for (std::size_t k2 = 0; k2 < nxt.size(); ++k2)
          h[p][k] = std::min(h[p][k], sd.c_seg(segs[k], nxt[k2]) + h[p + 1][k2]);
    }
  }
  return h;
}

AffineHeuristic fit_affine_heuristic(const Tour& tour, const SegmentData& sd,
                                     const std::vector<std::vector<double>>& h_seg) {
  const int len = tour.len();
  AffineHeuristic out;
  out.slope.assign(len, 0.0);
  out.intercept.assign(len, 0.0);
  for (int p = 1; p <= len - 2; ++p) {
    const auto& segs = sd.segments_of(tour.nodes[p]);
    double s_tt = 0, s_t = 0, s_1 = 0, s_th = 0, s_h = 0;
    int finite = 0;
    for (std::size_t k = 0; k < segs.size(); ++k) {
      const double hk = h_seg[p][k];
      if (!(hk < kInf)) continue;
      const double t = sd.seg(segs[k]).t_lo;
      s_tt += t * t;
      s_t += t;
      s_1 += 1;
      s_th += t * hk;
      s_h += hk;
      ++finite;
    }
    if (finite == 0)
      throw TourInfeasible("fit_affine_heuristic: no finite backward cost at a position");
    const double det = s_tt * s_1 - s_t * s_t;
    double a = 0.0, b = 0.0;
    if (std::abs(det) < 1e-12) {
      b = s_h / s_1;  // constant fit for coincident start times
    } else {
      a = (s_th * s_1 - s_t * s_h) / det;
      b = (s_tt * s_h - s_t * s_th) / det;
    }
    double r_max = -kInf;
    for (std::size_t k = 0; k < segs.size(); ++k) {
      const double hk = h_seg[p][k];
      if (!(hk < kInf)) continue;
      const Segment& s = sd.seg(segs[k]);
      r_max = std::max(r_max, a * s.t_lo + b - hk);
      r_max = std::max(r_max, a * s.t_hi + b - hk);
    }
    out.slope[p] = a;
    out.intercept[p] = b - r_max;
  }
  return out;
}

std::vector<double> compute_tmax(const Tour& tour, const TWGraph& tw, const Kinematics& kin) {
  const int len = tour.len();
  std::vector<double> tmax(len, kInf);
  for (int p = len - 2; p >= 0; --p) {
    const TwNode& from = tw.nodes[tour.nodes[p]];
    const TwNode& to = tw.nodes[tour.nodes[p + 1]];
    auto t = kin.lfdt(from, to, tmax[p + 1]);
    if (!t) throw TourInfeasible("compute_tmax: no feasible departure at position " +
                                 std::to_string(p));
    tmax[p] = std::min(*t, from.t_hi);
    if (tmax[p] < from.t_lo - kTimeTol)
      throw TourInfeasible("compute_tmax: latest departure precedes the window start");
  }
  return tmax;
}

}  // namespace mtvrpo
