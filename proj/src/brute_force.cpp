#include "mtvrpo/brute_force.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <mutex>

#include "mtvrpo/thread_pool.hpp"

namespace mtvrpo {

namespace {

struct Candidate {
  std::vector<int> nodes;  // full tour including depot ends
  double lb = kInf;
};

}  // namespace

Solution brute_force_solve(const Instance& inst, const BruteForceOptions& opt) {
  const auto t_start = std::chrono::steady_clock::now();
  const int n_threads = resolve_thread_count(opt.threads);
  VisibilityGraph vg(inst.map);
  Kinematics kin(inst, vg);
  const TWGraph tw = build_tw_graph(inst, kin, n_threads);
  const SegmentData sd(inst, tw, vg, opt.n_seg_tar, n_threads);
  const TourEvaluator eval(inst, vg, tw, sd, kin);
  const int n_tar = inst.n_tar();

  // Enumerate every feasible window sequence (DFS over the EFAT chain).
  std::map<unsigned, std::vector<Candidate>> by_mask;
  long states = 0;
  std::vector<int> seq;
  auto record = [&](int last) {
    if (seq.empty()) return;
    if (!(tw.lfdt(last, 0) > -kInf)) return;  // depot unreachable
    Candidate cand;
    cand.nodes.push_back(0);
    cand.nodes.insert(cand.nodes.end(), seq.begin(), seq.end());
    cand.nodes.push_back(0);
    Tour probe;
    probe.nodes = cand.nodes;
    cand.lb = tour_lower_bound(probe, sd);
    unsigned mask = 0;
    for (int node : seq) mask |= 1u << (tw.nodes[node].target - 1);
    by_mask[mask].push_back(std::move(cand));
  };
  std::function<void(int, double, double, unsigned)> dfs = [&](int last, double t,
                                                               double sigma, unsigned mask) {
    if (++states > opt.enumeration_cap)
      throw ResourceExhausted("brute_force_solve: enumeration cap exceeded");
    record(last);
    for (int v = 1; v < tw.n_nodes(); ++v) {
      const int tv = tw.nodes[v].target;
      if (mask & (1u << (tv - 1))) continue;
      if (!tw.has_edge(last, v)) continue;
      if (!(t <= tw.lfdt(last, v))) continue;
      if (sigma + inst.target(tv).demand > inst.d_max + 1e-9) continue;
      const auto arr = kin.efat(tw.nodes[last], tw.nodes[v], t);
      if (!arr) continue;
      seq.push_back(v);
      dfs(v, *arr, sigma + inst.target(tv).demand, mask | (1u << (tv - 1)));
      seq.pop_back();
    }
  };
  dfs(0, 0.0, 0.0, 0u);

  // Cheapest exact tour per target set: evaluate candidates in lower-bound
  // order until the bound rules the rest out.
  GcsOptions gopts;
  gopts.max_pops = opt.max_pops;
  std::vector<unsigned> masks;
  for (auto& [mask, cands] : by_mask) {
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.lb != b.lb) return a.lb < b.lb;
      return a.nodes < b.nodes;
    });
    masks.push_back(mask);
  }
  std::map<unsigned, std::pair<double, Tour>> best;  // mask -> (cost, evaluated tour)
  std::mutex best_mu;
  long queries = 0;
  parallel_for(static_cast<int>(masks.size()), n_threads, [&](int mi) {
    const unsigned mask = masks[mi];
    double best_cost = kInf;
    Tour best_tour;
    for (const Candidate& cand : by_mask[mask]) {
      if (cand.lb >= best_cost) break;
      Tour probe;
      probe.nodes = cand.nodes;
      try {
        TourCost r = eval.evaluate(probe, gopts);
        {
          std::lock_guard<std::mutex> lock(best_mu);
          ++queries;
        }
        if (r.cost < best_cost) {
          best_cost = r.cost;
          best_tour = probe;
          best_tour.exact = best_tour.lb = best_tour.ub = r.cost;
          best_tour.evaluated = true;
          best_tour.traj = std::move(r.traj);
        }
      } catch (const TourInfeasible&) {
        // EFAT-feasible sequences are executable; defensive only.
      }
    }
    if (best_cost < kInf) {
      std::lock_guard<std::mutex> lock(best_mu);
      best[mask] = {best_cost, std::move(best_tour)};
    }
  });

  Solution sol;
  sol.stats.gcs_queries = queries;
  sol.stats.tours_evaluated = queries;
  const unsigned full = n_tar == 0 ? 0u : (1u << n_tar) - 1;
  if (full == 0u) {
    sol.status = SolveStatus::Optimal;
    sol.total_cost = 0.0;
    sol.stats.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return sol;
  }

  // Partition DP over target subsets, at most n_agt parts.
  const unsigned n_masks = full + 1;
  const int max_parts = std::min(inst.n_agt, n_tar);
  std::vector<std::vector<double>> dp(max_parts + 1,
                                      std::vector<double>(n_masks, kInf));
  std::vector<std::vector<unsigned>> choice(max_parts + 1,
                                            std::vector<unsigned>(n_masks, 0));
  dp[0][0] = 0.0;
  for (int parts = 1; parts <= max_parts; ++parts) {
    for (unsigned mask = 0; mask <= full; ++mask) {
      dp[parts][mask] = dp[parts - 1][mask];
      choice[parts][mask] = 0;
      if (mask == 0) continue;
      const unsigned low = mask & (~mask + 1);  // force the lowest target into this part
      for (unsigned sub = mask; sub > 0; sub = (sub - 1) & mask) {
        if (!(sub & low)) continue;
        auto it = best.find(sub);
        if (it == best.end()) continue;
        const double alt = dp[parts - 1][mask ^ sub] + it->second.first;
        if (alt < dp[parts][mask]) {
          dp[parts][mask] = alt;
          choice[parts][mask] = sub;
        }
      }
    }
  }
  if (!(dp[max_parts][full] < kInf)) {
    sol.status = SolveStatus::Infeasible;
    sol.stats.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return sol;
  }
  sol.status = SolveStatus::Optimal;
  sol.total_cost = dp[max_parts][full];
  unsigned mask = full;
  int parts = max_parts;
  while (mask != 0) {
    const unsigned sub = choice[parts][mask];
    if (sub == 0) {
      --parts;
      continue;
    }
    sol.tours.push_back(best[sub].second);
    mask ^= sub;
    --parts;
  }
  sol.stats.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return sol;
}

}  // namespace mtvrpo
