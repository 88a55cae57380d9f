#include "mtvrpo/io_json.hpp"

#include <json.hpp>

namespace mtvrpo {

using nlohmann::json;

std::vector<std::pair<int, int>> tw_node_layout(const Instance& inst) {
  std::vector<std::pair<int, int>> layout{{0, 0}};
  for (int i = 1; i <= inst.n_tar(); ++i)
    for (std::size_t j = 0; j < inst.target(i).windows.size(); ++j)
      layout.emplace_back(i, static_cast<int>(j));
  return layout;
}

Instance parse_instance(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("instance: ") + e.what());
  }
  Instance inst;
  try {
    inst.map = load_map(doc.at("map").get<std::string>());
    inst.depot = Vec2(doc.at("depot").at(0).get<double>(), doc.at("depot").at(1).get<double>());
    inst.v_max = doc.at("v_max").get<double>();
    inst.d_max = doc.at("d_max").get<double>();
    inst.n_agt = doc.at("n_agt").get<int>();
    for (const json& jt : doc.at("targets")) {
      Target tar;
      tar.demand = jt.at("demand").get<double>();
      for (const json& jw : jt.at("windows")) {
        Window w;
        w.t_lo = jw.at("t_lo").get<double>();
        w.t_hi = jw.at("t_hi").get<double>();
        w.start = Vec2(jw.at("start").at(0).get<double>(), jw.at("start").at(1).get<double>());
        w.vel = Vec2(jw.at("vel").at(0).get<double>(), jw.at("vel").at(1).get<double>());
        tar.windows.push_back(w);
      }
      inst.targets.push_back(std::move(tar));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("instance: ") + e.what());
  }
  validate_instance(inst);
  return inst;
}

std::string serialize_instance(const Instance& inst) {
  json doc;
  doc["map"] = save_map(inst.map);
  doc["depot"] = {inst.depot.x(), inst.depot.y()};
  doc["v_max"] = inst.v_max;
  doc["d_max"] = inst.d_max;
  doc["n_agt"] = inst.n_agt;
  doc["targets"] = json::array();
  for (const Target& tar : inst.targets) {
    json jt;
    jt["demand"] = tar.demand;
    jt["windows"] = json::array();
    for (const Window& w : tar.windows) {
      json jw;
      jw["t_lo"] = w.t_lo;
      jw["t_hi"] = w.t_hi;
      jw["start"] = {w.start.x(), w.start.y()};
      jw["vel"] = {w.vel.x(), w.vel.y()};
      jt["windows"].push_back(jw);
    }
    doc["targets"].push_back(jt);
  }
  return doc.dump(2) + "\n";
}

namespace {

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "OPTIMAL";
    case SolveStatus::Infeasible:
      return "INFEASIBLE";
    default:
      return "TIMEOUT";
  }
}

}  // namespace

std::string serialize_solution(const Solution& sol, const Instance& inst) {
  const auto layout = tw_node_layout(inst);
  json doc;
  doc["status"] = status_name(sol.status);
  doc["total_cost"] = sol.total_cost;
  doc["tours"] = json::array();
  for (const Tour& tour : sol.tours) {
    json jt;
    jt["cost"] = tour.exact;
    jt["windows"] = json::array();
    for (int node : tour.nodes)
      if (node != 0)
        jt["windows"].push_back({layout[node].first, layout[node].second});
    jt["trajectory"] = json::array();
    for (const TrajKnot& k : tour.traj.knots)
      jt["trajectory"].push_back({k.pos.x(), k.pos.y(), k.t});
    jt["claims"] = json::array();
    for (const Claim& c : tour.traj.claims) jt["claims"].push_back({double(c.target), c.time});
    doc["tours"].push_back(jt);
  }
  doc["stats"] = {{"nodes_expanded", sol.stats.nodes_expanded},
                  {"tours_evaluated", sol.stats.tours_evaluated},
                  {"pricing_rounds", sol.stats.pricing_rounds},
                  {"gcs_queries", sol.stats.gcs_queries},
                  {"wall_time_s", sol.stats.wall_time_s}};
  return doc.dump(2) + "\n";
}

Solution parse_solution(const std::string& text, const Instance& inst) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("solution: ") + e.what());
  }
  Solution sol;
  try {
    const std::string status = doc.at("status").get<std::string>();
    sol.status = status == "OPTIMAL"    ? SolveStatus::Optimal
                 : status == "TIMEOUT"  ? SolveStatus::Timeout
                                        : SolveStatus::Infeasible;
    sol.total_cost = doc.at("total_cost").get<double>();
    std::vector<int> first_node(inst.n_tar() + 1, 0);
    {
      int next = 1;
      for (int i = 1; i <= inst.n_tar(); ++i) {
        first_node[i] = next;
        next += static_cast<int>(inst.target(i).windows.size());
      }
    }
    for (const json& jt : doc.at("tours")) {
      Tour tour;
      tour.nodes.push_back(0);
      for (const json& jw : jt.at("windows"))
        tour.nodes.push_back(first_node[jw.at(0).get<int>()] + jw.at(1).get<int>());
      tour.nodes.push_back(0);
      tour.exact = jt.at("cost").get<double>();
      tour.lb = tour.ub = tour.exact;
      tour.evaluated = true;
      for (const json& jk : jt.at("trajectory"))
        tour.traj.knots.push_back(
            {Vec2(jk.at(0).get<double>(), jk.at(1).get<double>()), jk.at(2).get<double>()});
      for (const json& jc : jt.at("claims"))
        tour.traj.claims.push_back(
            {static_cast<int>(std::lround(jc.at(0).get<double>())), jc.at(1).get<double>()});
      sol.tours.push_back(std::move(tour));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("solution: ") + e.what());
  }
  return sol;
}

}  // namespace mtvrpo
