#include "mtvrpo/seed.hpp"

#include <algorithm>
#include <numeric>

#include "mtvrpo/rng.hpp"

namespace mtvrpo {

namespace {

// One construction attempt with the given target priority order.
std::optional<std::vector<Tour>> attempt(const Instance& inst, const TWGraph& tw,
                                         const Kinematics& kin, const EdgeSet& disallowed,
                                         const std::vector<int>& priority) {
  const int n_tar = inst.n_tar();
  std::vector<int> rank(n_tar + 1, 0);
  for (std::size_t r = 0; r < priority.size(); ++r) rank[priority[r]] = static_cast<int>(r);
  std::vector<std::uint8_t> routed(n_tar + 1, 0);
  int n_routed = 0;
  std::vector<Tour> tours;

  for (int agent = 0; agent < inst.n_agt && n_routed < n_tar; ++agent) {
    Tour tour;
    tour.nodes = {0};
    double t = 0.0, sigma = 0.0;
    int last = 0;
    while (true) {
      int best_node = -1;
      double best_t = kInf;
      int best_rank = 0;
      for (int v = 1; v < tw.n_nodes(); ++v) {
        const int tv = tw.nodes[v].target;
        if (routed[tv]) continue;
        if (disallowed.count({last, v})) continue;
        if (!(t <= tw.lfdt(last, v))) continue;
        if (sigma + inst.target(tv).demand > inst.d_max + 1e-9) continue;
        const auto arr = kin.efat(tw.nodes[last], tw.nodes[v], t);
        if (!arr) continue;
        if (*arr < best_t - 1e-12 ||
            (*arr < best_t + 1e-12 && (best_node < 0 || rank[tv] < best_rank))) {
          best_node = v;
          best_t = *arr;
          best_rank = rank[tv];
        }
      }
      if (best_node < 0) break;
      // The return leg must stay open.
      if (disallowed.count({best_node, 0}) || !(tw.lfdt(best_node, 0) > -kInf)) {
        routed[tw.nodes[best_node].target] = 2;  // unusable for this tour; retry later
        continue;
      }
      tour.nodes.push_back(best_node);
      routed[tw.nodes[best_node].target] = 1;
      ++n_routed;
      sigma += inst.target(tw.nodes[best_node].target).demand;
      t = best_t;
      last = best_node;
    }
    for (int i = 1; i <= n_tar; ++i)
      if (routed[i] == 2) routed[i] = 0;
    if (tour.nodes.size() > 1) {
      if (disallowed.count({last, 0}) || !(tw.lfdt(last, 0) > -kInf)) return std::nullopt;
      tour.nodes.push_back(0);
      tours.push_back(std::move(tour));
    }
  }
  if (n_routed < n_tar) return std::nullopt;
  return tours;
}

}  // namespace

std::optional<std::vector<Tour>> generate_feasible_solution(
    const Instance& inst, const TWGraph& tw, const Kinematics& kin, const SegmentData& sd,
    const EdgeSet& disallowed, std::uint64_t seed) {
  const int n_tar = inst.n_tar();
  if (n_tar == 0) return std::vector<Tour>{};
  std::vector<int> order(n_tar);
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    double ea = kInf, eb = kInf;
    for (const Window& w : inst.target(a).windows) ea = std::min(ea, w.t_hi);
    for (const Window& w : inst.target(b).windows) eb = std::min(eb, w.t_hi);
    return ea < eb;
  });

  Rng rng(seed ^ 0x5eedULL);
  for (int trial = 0; trial < 21; ++trial) {
    auto result = attempt(inst, tw, kin, disallowed, order);
    if (result) {
      // The EFAT chain guarantees executability; the start-graph bound may
      // still be +inf (segment starts are reachable only at their exact
      // times), which is an honest if useless upper bound.
      for (Tour& tour : *result) {
        tour.lb = tour_lower_bound(tour, sd);
        tour.ub = tour_upper_bound(tour, sd);
      }
      return result;
    }
    // Shuffle for the next trial.
    for (int i = n_tar - 1; i > 0; --i) std::swap(order[i], order[rng.below_int(i + 1)]);
  }
  return std::nullopt;
}

}  // namespace mtvrpo
