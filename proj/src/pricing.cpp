#include "mtvrpo/pricing.hpp"

#include <algorithm>
#include <queue>

#include "mtvrpo/thread_pool.hpp"

namespace mtvrpo {

double reduced_cost_lb(const Tour& tour, const Duals& duals,
                       const std::vector<int>& node_target) {
  double rc = tour.lb - duals.agent;
  std::vector<std::uint8_t> seen(duals.coverage.size(), 0);
  for (int node : tour.nodes) {
    const int t = node_target[node];
    if (t > 0 && !seen[t]) {
      seen[t] = 1;
      rc -= duals.coverage[t];
    }
  }
  return rc;
}

namespace {

struct Label {
  int node = 0;
  double t = 0.0;
  double sigma = 0.0;
  std::vector<std::uint8_t> b;
  std::vector<double> g_ub;
  std::vector<double> g_lb;
  double lambda = 0.0;
  int parent = -1;
  long seq = 0;
  bool discarded = false;
  double min_glb = 0.0;
};

double min_finite(const std::vector<double>& v) {
  double m = kInf;
  for (double x : v) m = std::min(m, x);
  return m;
}

// l dominates l2 (both at the same non-depot node).
bool dominates(const Label& l, const Label& l2, const std::vector<double>& delta) {
  if (l.sigma > l2.sigma + 1e-12) return false;
  for (std::size_t i = 0; i < l.b.size(); ++i)
    if (l.b[i] > l2.b[i]) return false;
  for (std::size_t k = 0; k < l.g_ub.size(); ++k)
    if (l.g_ub[k] + delta[k] - l.lambda > l2.g_lb[k] - l2.lambda + 1e-12) return false;
  return true;
}

bool dominates_depot(const Label& l, const Label& l2) {
  return l.g_ub[0] - l.lambda <= l2.g_lb[0] - l2.lambda + 1e-12;
}

}  // namespace

Pricer::Pricer(const Instance& inst, const TWGraph& tw, const SegmentData& sd,
               const Kinematics& kin)
    : inst_(inst), tw_(tw), sd_(sd), kin_(kin) {}

PricingResult Pricer::price(const Duals& duals, const EdgeSet& disallowed,
                            const std::set<std::vector<int>>& exclude_keys,
                            const PricingOptions& opt) const {
  const int n_nodes = tw_.n_nodes();
  const int n_tar = inst_.n_tar();
  PricingResult out;

  std::vector<std::vector<double>> delta(n_nodes);  // segment lengths per node
  for (int u = 0; u < n_nodes; ++u)
    for (int sid : sd_.segments_of(u)) delta[u].push_back(sd_.seg(sid).length());

  std::vector<Label> pool;
  std::vector<std::vector<int>> bucket(n_nodes);
  struct Entry {
    double t, sigma, min_glb;
    long seq;
    int idx;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.t != b.t) return a.t > b.t;
    if (a.sigma != b.sigma) return a.sigma > b.sigma;
    if (a.min_glb != b.min_glb) return a.min_glb > b.min_glb;
    return a.seq > b.seq;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
  long seq = 0;

  Label root;
  root.node = 0;
  root.b.assign(n_tar + 1, 0);
  root.g_ub = {0.0};
  root.g_lb = {0.0};
  root.lambda = duals.agent;
  root.seq = seq++;
  pool.push_back(root);
  open.push({0.0, 0.0, 0.0, root.seq, 0});

  std::vector<std::pair<double, int>> candidates;  // (reduced cost, label idx)

  struct SuccessorDraft {
    bool valid = false;
    double t = 0.0;
    std::vector<double> g_ub, g_lb;
  };

  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    // Copy: pool may reallocate while we append successors.
    const Label cur = pool[e.idx];
    if (cur.discarded) continue;
    if (cur.node == 0 && cur.parent != -1) continue;  // completed tours are terminal
    ++out.labels_expanded;

    std::vector<int> succ_nodes;
    for (int v = 0; v < n_nodes; ++v) {
      if (!tw_.has_edge(cur.node, v)) continue;
      if (disallowed.count({cur.node, v})) continue;
      const double edge_lfdt = tw_.lfdt(cur.node, v);
      if (!(cur.t <= edge_lfdt)) continue;
      const int tv = tw_.nodes[v].target;
      const double dv = tv > 0 ? inst_.target(tv).demand : 0.0;
      if (cur.sigma + dv > inst_.d_max + 1e-9) continue;
      if (tv != 0 && cur.b[tv]) continue;
      succ_nodes.push_back(v);
    }

    std::vector<SuccessorDraft> drafts(succ_nodes.size());
    parallel_for(static_cast<int>(succ_nodes.size()), opt.n_threads, [&](int si) {
      const int v = succ_nodes[si];
      SuccessorDraft& d = drafts[si];
      const auto t_arr = kin_.efat(tw_.nodes[cur.node], tw_.nodes[v], cur.t);
      if (!t_arr) return;
      d.t = *t_arr;
      const auto& from_segs = sd_.segments_of(cur.node);
      const auto& to_segs = sd_.segments_of(v);
      d.g_ub.assign(to_segs.size(), kInf);
      d.g_lb.assign(to_segs.size(), kInf);
      for (std::size_t k2 = 0; k2 < to_segs.size(); ++k2)
        for (std::size_t k1 = 0; k1 < from_segs.size(); ++k1) {
          d.g_ub[k2] = std::min(d.g_ub[k2],
                                cur.g_ub[k1] + sd_.c_start(from_segs[k1], to_segs[k2]));
          d.g_lb[k2] = std::min(d.g_lb[k2],
                                cur.g_lb[k1] + sd_.c_seg(from_segs[k1], to_segs[k2]));
        }
      d.valid = min_finite(d.g_lb) < kInf;
    });

    for (std::size_t si = 0; si < succ_nodes.size(); ++si) {
      if (!drafts[si].valid) continue;
      const int v = succ_nodes[si];
      const int tv = tw_.nodes[v].target;
      Label nl;
      nl.node = v;
      nl.t = drafts[si].t;
      nl.sigma = cur.sigma + (tv > 0 ? inst_.target(tv).demand : 0.0);
      nl.b = cur.b;
      nl.g_ub = std::move(drafts[si].g_ub);
      nl.g_lb = std::move(drafts[si].g_lb);
      nl.lambda = cur.lambda + (tv > 0 ? duals.coverage[tv] : 0.0);
      nl.parent = e.idx;
      if (tv != 0) {
        nl.b[tv] = 1;
        for (int i2 = 1; i2 <= n_tar; ++i2) {
          if (nl.b[i2]) continue;
          if (nl.sigma + inst_.target(i2).demand > inst_.d_max + 1e-9) {
            nl.b[i2] = 1;
            continue;
          }
          bool all_missed = true;
          for (std::size_t j2 = 0; j2 < inst_.target(i2).windows.size() && all_missed; ++j2)
            if (nl.t <= tw_.lfdt(v, tw_.node_of(i2, static_cast<int>(j2)))) all_missed = false;
          if (all_missed) nl.b[i2] = 1;
        }
      }

      if (v == 0) {
        // Completed tour: collapse bounds per the depot label convention.
        nl.g_ub = {nl.g_ub.empty() ? kInf : nl.g_ub[0]};
        nl.g_lb = {nl.g_lb.empty() ? kInf : nl.g_lb[0]};
        if (!(nl.g_lb[0] < kInf)) continue;

        auto dominated_at_depot = [&]() {
          if (!opt.use_dominance) return false;
          for (int idx : bucket[0])
            if (dominates_depot(pool[idx], nl)) return true;
          return false;
        };
        if (dominated_at_depot()) continue;
        if (opt.pin_exact) {
          Tour tour;
          std::vector<int> chain{0};
          for (int walk = e.idx; walk != -1; walk = pool[walk].parent)
            chain.push_back(pool[walk].node);
          std::reverse(chain.begin(), chain.end());
          tour.nodes = chain;
          tour.lb = nl.g_lb[0];
          tour.ub = nl.g_ub[0];
          const double exact = opt.pin_exact(tour);
          if (!(exact < kInf)) continue;  // unexecutable
          nl.g_lb = {exact};
          nl.g_ub = {exact};
          if (dominated_at_depot()) continue;
        }
        nl.seq = seq++;
        nl.min_glb = nl.g_lb[0];
        pool.push_back(nl);
        const int idx = static_cast<int>(pool.size()) - 1;
        if (opt.use_dominance) {
          auto& bk = bucket[0];
          bk.erase(std::remove_if(bk.begin(), bk.end(),
                                  [&](int other) {
                                    if (dominates_depot(pool[idx], pool[other])) {
                                      pool[other].discarded = true;
                                      return true;
                                    }
                                    return false;
                                  }),
                   bk.end());
          bk.push_back(idx);
        }
        ++out.labels_created;
        const double rc = nl.g_lb[0] - nl.lambda;
        if (rc < opt.negativity_threshold) candidates.emplace_back(rc, idx);
        continue;
      }

      if (opt.use_dominance) {
        bool dead = false;
        for (int other : bucket[v])
          if (dominates(pool[other], nl, delta[v])) {
            dead = true;
            break;
          }
        if (dead) continue;
      }
      nl.seq = seq++;
      nl.min_glb = min_finite(nl.g_lb);
      pool.push_back(std::move(nl));
      const int idx = static_cast<int>(pool.size()) - 1;
      if (opt.use_dominance) {
        auto& bk = bucket[v];
        bk.erase(std::remove_if(bk.begin(), bk.end(),
                                [&](int other) {
                                  if (dominates(pool[idx], pool[other], delta[v])) {
                                    pool[other].discarded = true;
                                    return true;
                                  }
                                  return false;
                                }),
                 bk.end());
        bk.push_back(idx);
      }
      ++out.labels_created;
      open.push({pool[idx].t, pool[idx].sigma, pool[idx].min_glb, pool[idx].seq, idx});
    }
  }

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [rc, idx] : candidates) {
    if (static_cast<int>(out.tours.size()) >= opt.max_tours) break;
    std::vector<int> chain;
    for (int walk = idx; walk != -1; walk = pool[walk].parent) chain.push_back(pool[walk].node);
    std::reverse(chain.begin(), chain.end());
    if (exclude_keys.count(chain)) continue;
    Tour tour;
    tour.nodes = std::move(chain);
    tour.lb = pool[idx].g_lb[0];
    tour.ub = pool[idx].g_ub[0];
    out.tours.push_back(std::move(tour));
    out.reduced_costs.push_back(rc);
  }
  return out;
}

}  // namespace mtvrpo
