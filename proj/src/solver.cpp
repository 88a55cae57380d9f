#include "mtvrpo/solver.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <chrono>
#include <map>
#include <mutex>
#include <set>

#include "mtvrpo/seed.hpp"
#include "mtvrpo/thread_pool.hpp"

namespace mtvrpo {

std::pair<EdgeSet, EdgeSet> generate_successors(const EdgeSet& B,
                                                const std::vector<double>& theta,
                                                const std::vector<const Tour*>& columns,
                                                const TWGraph& tw) {
  std::map<std::pair<int, int>, double> flow;
  std::map<int, double> window_flow;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (theta[k] <= 1e-9) continue;
    const auto& nodes = columns[k]->nodes;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
      flow[{nodes[i], nodes[i + 1]}] += theta[k];
    for (int node : nodes)
      if (node != 0) window_flow[node] += theta[k];
  }
  auto fractional = [](double f) { return std::abs(f - std::round(f)) > 1e-6; };

  // Preferred: branch on an edge between two target windows. Forcing such an
  // edge bans every other edge out of its tail and into its head. Depot
  // edges cannot be forced that way: every tour of a solution leaves and
  // re-enters the depot, so the ban set would cap the solution at one tour.
  std::pair<int, int> best_edge{-1, -1};
  double best_score = kInf;
  for (const auto& [edge, f] : flow) {
    if (edge.first == 0 || edge.second == 0) continue;
    if (!fractional(f)) continue;
    const double score = std::abs(f - 0.5);
    if (score < best_score - 1e-12) {
      best_score = score;
      best_edge = edge;
    }
  }
  if (best_edge.first >= 0) {
    EdgeSet forbid = B;
    forbid.insert(best_edge);
    EdgeSet force = B;
    const auto [u, v] = best_edge;
    for (int x = 0; x < tw.n_nodes(); ++x) {
      if (tw.has_edge(u, x) && x != v) force.insert({u, x});
      if (tw.has_edge(x, v) && x != u) force.insert({x, v});
    }
    return {forbid, force};
  }

  // Fallback: branch on a window-assignment flow (the mass of tours serving
  // a target through one particular window), which is still expressible as
  // a disallowed-edge set: ban all edges into the window, or into all of the
  // target's other windows.
  int best_node = -1;
  best_score = kInf;
  for (const auto& [node, f] : window_flow) {
    if (!fractional(f)) continue;
    const double score = std::abs(f - 0.5);
    if (score < best_score - 1e-12) {
      best_score = score;
      best_node = node;
    }
  }
  if (best_node < 0)
    throw NoFractionalEdge("generate_successors: theta fractional but all flows integral");
  EdgeSet forbid = B;
  EdgeSet force = B;
  const int target = tw.nodes[best_node].target;
  for (int x = 0; x < tw.n_nodes(); ++x) {
    if (tw.has_edge(x, best_node)) forbid.insert({x, best_node});
    for (int v = tw.first_node[target];
         v < tw.n_nodes() && tw.nodes[v].target == target; ++v)
      if (v != best_node && tw.has_edge(x, v)) force.insert({x, v});
  }
  return {forbid, force};
}

namespace {

using Clock = std::chrono::steady_clock;
using Key = std::vector<int>;

struct Column {
  Tour tour;
  bool dead = false;  // proven unexecutable
};

struct Ctx {
  const Instance& inst;
  const SolverConfig& cfg;
  int n_threads;
  VisibilityGraph vg;
  Kinematics kin;
  TWGraph tw;
  SegmentData sd;
  TourEvaluator eval;
  Pricer pricer;
  std::vector<int> node_target;
  GcsOptions gcs_opts;

  std::vector<Column> F;
  std::map<Key, int> f_index;
  std::map<Key, std::pair<double, Trajectory>> evaluated;
  std::mutex eval_mu;

  std::vector<Key> inc_keys;
  bool has_inc = false;
  SolveStats stats;
  Clock::time_point t_start;
  bool timed_out = false;

  Ctx(const Instance& inst_, const SolverConfig& cfg_)
      : inst(inst_),
        cfg(cfg_),
        n_threads(resolve_thread_count(cfg_.threads)),
        vg(inst_.map),
        kin(inst_, vg),
        tw(build_tw_graph(inst_, kin, n_threads)),
        sd(inst_, tw, vg, cfg_.n_seg_tar, n_threads),
        eval(inst_, vg, tw, sd, kin),
        pricer(inst_, tw, sd, kin) {
    for (const TwNode& n : tw.nodes) node_target.push_back(n.target);
    gcs_opts.mode = cfg.mode == SolveMode::NoAffineHeuristic
                        ? TourCostMode::SequentialCompletion
                        : TourCostMode::AffineHeuristic;
    gcs_opts.max_pops = cfg.max_pops;
    t_start = Clock::now();
  }

  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - t_start).count();
  }
  bool time_up() {
    if (!timed_out && elapsed() > cfg.time_limit) timed_out = true;
    return timed_out;
  }

  // Exact cost through the shared registry; +inf for unexecutable tours.
  double evaluate_tour(const Tour& tour) {
    {
      std::lock_guard<std::mutex> lock(eval_mu);
      auto it = evaluated.find(tour.nodes);
      if (it != evaluated.end()) return it->second.first;
    }
    double cost = kInf;
    Trajectory traj;
    try {
      TourCost r = eval.evaluate(tour, gcs_opts);
      cost = r.cost;
      traj = std::move(r.traj);
    } catch (const TourInfeasible&) {
      cost = kInf;
    }
    std::lock_guard<std::mutex> lock(eval_mu);
    ++stats.gcs_queries;
    ++stats.tours_evaluated;
    evaluated[tour.nodes] = {cost, std::move(traj)};
    return cost;
  }

  void apply_exact(const Key& key, double cost) {
    auto it = f_index.find(key);
    if (it == f_index.end()) return;
    Column& col = F[it->second];
    if (cost < kInf) {
      col.tour.lb = col.tour.ub = cost;
      col.tour.exact = cost;
      col.tour.evaluated = true;
    } else {
      col.tour.lb = col.tour.ub = kInf;
      col.dead = true;  // delete from the master immediately
    }
  }

  void merge_tour(Tour tour) {
    auto reg = evaluated.find(tour.nodes);
    if (reg != evaluated.end()) {
      if (!(reg->second.first < kInf)) return;  // known unexecutable
      tour.lb = tour.ub = tour.exact = reg->second.first;
      tour.evaluated = true;
    }
    auto it = f_index.find(tour.nodes);
    if (it == f_index.end()) {
      f_index[tour.nodes] = static_cast<int>(F.size());
      F.push_back({std::move(tour), false});
    } else {
      Column& col = F[it->second];
      col.tour.lb = std::max(col.tour.lb, tour.lb);
      col.tour.ub = std::min(col.tour.ub, tour.ub);
      if (tour.evaluated && !col.tour.evaluated) {
        col.tour.exact = tour.exact;
        col.tour.evaluated = true;
      }
    }
  }

  double incumbent_cost() const {
    if (!has_inc) return kInf;
    double total = 0.0;
    for (const Key& key : inc_keys) {
      auto it = f_index.find(key);
      total += it == f_index.end() ? kInf : F[it->second].tour.ub;
    }
    return total;
  }

  bool traverses(const Tour& tour, const EdgeSet& B) const {
    if (B.empty()) return false;
    for (std::size_t i = 0; i + 1 < tour.nodes.size(); ++i)
      if (B.count({tour.nodes[i], tour.nodes[i + 1]})) return true;
    return false;
  }

  std::vector<int> eligible_columns(const EdgeSet& B) const {
    std::vector<int> cols;
    for (std::size_t j = 0; j < F.size(); ++j)
      if (!F[j].dead && F[j].tour.lb < kInf && !traverses(F[j].tour, B))
        cols.push_back(static_cast<int>(j));
    return cols;
  }
};

struct CgOutcome {
  bool ok = false;  // false: LP-B infeasible even after reseeding
  std::vector<double> theta;
  std::vector<int> cols;
  double obj = kInf;
  bool integral = false;
};

CgOutcome column_generation(Ctx& ctx, const EdgeSet& B) {
  CgOutcome out;
  bool reseeded = false;
  PricingOptions popts;
  popts.max_tours = ctx.cfg.pricing_batch;
  popts.n_threads = ctx.n_threads;
  if (ctx.cfg.mode == SolveMode::NonLazy)
    popts.pin_exact = [&ctx](const Tour& t) { return ctx.evaluate_tour(t); };

  while (true) {
    if (ctx.time_up()) return out;
    const std::vector<int> cols = ctx.eligible_columns(B);
    std::vector<const Tour*> columns;
    for (int j : cols) columns.push_back(&ctx.F[j].tour);
    const RmpSolution rmp =
        solve_rmp(columns, ctx.node_target, ctx.inst.n_tar(), ctx.inst.n_agt);
    if (!rmp.feasible) {
      if (reseeded) return out;
      reseeded = true;
      auto seeds = generate_feasible_solution(ctx.inst, ctx.tw, ctx.kin, ctx.sd, B,
                                              ctx.cfg.seed);
      if (!seeds) return out;
      for (Tour& t : *seeds) ctx.merge_tour(std::move(t));
      continue;
    }
    ++ctx.stats.pricing_rounds;

    if (rmp.integral) {
      // An integral master solution is a feasible routing; adopt it when its
      // current upper bound beats the incumbent.
      double ub = 0.0;
      std::vector<Key> keys;
      for (std::size_t k = 0; k < rmp.theta.size(); ++k)
        if (rmp.theta[k] > 0.5) {
          ub += columns[k]->ub;
          keys.push_back(columns[k]->nodes);
        }
      if (ub < ctx.incumbent_cost()) ctx.inc_keys = keys;
    }

    std::set<Key> exclude;
    for (const auto& [key, idx] : ctx.f_index) exclude.insert(key);
    for (const auto& [key, val] : ctx.evaluated) exclude.insert(key);
    const Duals& duals = rmp.duals;
    PricingResult priced = ctx.pricer.price(duals, B, exclude, popts);
    if (priced.tours.empty()) {
      out.ok = true;
      out.theta = rmp.theta;
      out.cols = cols;
      out.obj = rmp.objective;
      out.integral = rmp.integral;
      return out;
    }
    for (Tour& t : priced.tours) ctx.merge_tour(std::move(t));
  }
}

}  // namespace

Solution solve(const Instance& inst, const SolverConfig& config) {
  Ctx ctx(inst, config);
  Solution sol;

  auto seeds = generate_feasible_solution(inst, ctx.tw, ctx.kin, ctx.sd, {}, config.seed);
  if (!seeds) {
    sol.status = SolveStatus::Infeasible;
    sol.stats = ctx.stats;
    sol.stats.wall_time_s = ctx.elapsed();
    return sol;
  }
  for (const Tour& t : *seeds) ctx.inc_keys.push_back(t.nodes);
  ctx.has_inc = true;
  for (Tour& t : *seeds) ctx.merge_tour(std::move(t));

  struct BnbNode {
    EdgeSet B;
    double lb;
  };
  std::vector<BnbNode> stack;
  stack.push_back({{}, 0.0});

  const bool trace = std::getenv("MTVRPO_TRACE") != nullptr;
  while (!stack.empty()) {
    if (ctx.time_up()) break;
    BnbNode node = std::move(stack.back());
    stack.pop_back();
    ++ctx.stats.nodes_expanded;
    if (trace)
      std::fprintf(stderr, "[bnb] node %ld |B|=%zu lb=%.4f inc=%.4f\n",
                   ctx.stats.nodes_expanded, node.B.size(), node.lb, ctx.incumbent_cost());
    if (node.lb >= ctx.incumbent_cost() - 1e-9) continue;

    double c_theta = kInf;
    std::vector<double> theta;
    std::vector<int> cols;
    while (true) {
      CgOutcome cg = column_generation(ctx, node.B);
      if (ctx.timed_out) break;
      if (!cg.ok) {
        c_theta = kInf;
        break;
      }
      c_theta = cg.obj;
      theta = cg.theta;
      cols = cg.cols;
      if (trace)
        std::fprintf(stderr, "[bnb]   cg: obj=%.4f integral=%d inc=%.4f\n", c_theta,
                     (int)cg.integral, ctx.incumbent_cost());
      if (!(cg.integral && c_theta < ctx.incumbent_cost() - 1e-9)) break;

      std::vector<Key> sol_keys;
      std::vector<Key> uneval;
      for (std::size_t k = 0; k < theta.size(); ++k)
        if (theta[k] > 0.5) {
          const Tour& t = ctx.F[cols[k]].tour;
          sol_keys.push_back(t.nodes);
          if (!t.evaluated) uneval.push_back(t.nodes);
        }
      if (uneval.empty()) break;  // theta is optimal for LP-B

      std::vector<double> costs(uneval.size(), kInf);
      parallel_for(static_cast<int>(uneval.size()), ctx.n_threads, [&](int i) {
        if (ctx.timed_out) return;
        Tour probe;
        probe.nodes = uneval[i];
        costs[i] = ctx.evaluate_tour(probe);
      });
      for (std::size_t i = 0; i < uneval.size(); ++i) ctx.apply_exact(uneval[i], costs[i]);
      double sol_ub = 0.0;
      for (const Key& key : sol_keys) {
        auto it = ctx.f_index.find(key);
        sol_ub += it == ctx.f_index.end() ? kInf : ctx.F[it->second].tour.ub;
      }
      if (sol_ub < ctx.incumbent_cost()) ctx.inc_keys = sol_keys;
      if (ctx.time_up()) break;
    }
    if (ctx.timed_out) break;
    if (c_theta >= ctx.incumbent_cost() - 1e-9) continue;

    std::vector<const Tour*> columns;
    for (int j : cols) columns.push_back(&ctx.F[j].tour);
    auto [forbid, force] = generate_successors(node.B, theta, columns, ctx.tw);
    stack.push_back({std::move(forbid), c_theta});
    stack.push_back({std::move(force), c_theta});  // explore the forcing child first
  }

  // Materialize the incumbent: exact costs and trajectories.
  sol.status = ctx.timed_out ? SolveStatus::Timeout : SolveStatus::Optimal;
  sol.total_cost = 0.0;
  for (const Key& key : ctx.inc_keys) {
    Tour tour;
    tour.nodes = key;
    const double cost = ctx.evaluate_tour(tour);
    tour.exact = tour.lb = tour.ub = cost;
    tour.evaluated = true;
    tour.traj = ctx.evaluated[key].second;
    sol.total_cost += cost;
    sol.tours.push_back(std::move(tour));
  }
  // A target may appear in two selected tours; only the cheaper tour keeps
  // the claim.
  std::map<int, std::pair<double, int>> claim_owner;  // target -> (cost, tour idx)
  for (std::size_t j = 0; j < sol.tours.size(); ++j)
    for (const Claim& c : sol.tours[j].traj.claims) {
      auto it = claim_owner.find(c.target);
      if (it == claim_owner.end() || sol.tours[j].exact < it->second.first)
        claim_owner[c.target] = {sol.tours[j].exact, static_cast<int>(j)};
    }
  for (std::size_t j = 0; j < sol.tours.size(); ++j) {
    auto& claims = sol.tours[j].traj.claims;
    claims.erase(std::remove_if(claims.begin(), claims.end(),
                                [&](const Claim& c) {
                                  return claim_owner[c.target].second != static_cast<int>(j);
                                }),
                 claims.end());
  }
  sol.stats = ctx.stats;
  sol.stats.wall_time_s = ctx.elapsed();
  return sol;
}

}  // namespace mtvrpo
