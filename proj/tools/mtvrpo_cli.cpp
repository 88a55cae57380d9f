#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mtvrpo/brute_force.hpp"
#include "mtvrpo/instance.hpp"
#include "mtvrpo/io_json.hpp"
#include "mtvrpo/solver.hpp"
#include "mtvrpo/validate.hpp"

namespace {

using namespace mtvrpo;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << content;
}

SolveMode parse_mode(const std::string& name) {
  if (name == "lazy") return SolveMode::Lazy;
  if (name == "non_lazy") return SolveMode::NonLazy;
  if (name == "no_affine_heuristic") return SolveMode::NoAffineHeuristic;
  throw CLI::ValidationError("--mode", "unknown mode " + name);
}

const char* mode_name(SolveMode m) {
  switch (m) {
    case SolveMode::Lazy:
      return "lazy";
    case SolveMode::NonLazy:
      return "non_lazy";
    default:
      return "no_affine_heuristic";
  }
}

int status_exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return 0;
    case SolveStatus::Infeasible:
      return 2;
    default:
      return 3;
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact solver for the moving-target VRP with obstacles"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a random instance");
  std::uint64_t g_seed = 1;
  int g_ntar = 3, g_res = 10, g_nagt = 3;
  double g_dmax = 0.0, g_cell = 1.0, g_vmax = 4.0;
  std::string g_out;
  gen->add_option("--seed", g_seed, "RNG seed");
  gen->add_option("--n-tar", g_ntar, "number of targets");
  gen->add_option("--resolution", g_res, "map width in grid cells");
  gen->add_option("--d-max", g_dmax, "agent capacity (0: ceil(n_tar/n_agt))");
  gen->add_option("--n-agt", g_nagt, "number of agents");
  gen->add_option("--cell-size", g_cell, "grid cell size in meters");
  gen->add_option("--v-max", g_vmax, "agent speed limit (m/s)");
  gen->add_option("-o,--out", g_out, "output path (default stdout)");

  // solve
  auto* slv = app.add_subcommand("solve", "Solve an instance");
  std::string s_instance, s_out, s_mode = "lazy";
  SolverConfig s_cfg;
  int s_threads = 0;
  slv->add_option("instance", s_instance, "instance JSON path")->required();
  slv->add_option("-o,--out", s_out, "solution JSON path (default stdout)");
  slv->add_option("--mode", s_mode, "lazy | non_lazy | no_affine_heuristic");
  slv->add_option("--n-seg-tar", s_cfg.n_seg_tar, "segments per target");
  slv->add_option("--time-limit", s_cfg.time_limit, "seconds");
  slv->add_option("--threads", s_threads, "worker threads (0: auto)");
  slv->add_option("--seed", s_cfg.seed, "seed-heuristic randomization");

  // validate
  auto* val = app.add_subcommand("validate", "Validate a solution against an instance");
  std::string v_instance, v_solution;
  val->add_option("instance", v_instance, "instance JSON path")->required();
  val->add_option("solution", v_solution, "solution JSON path")->required();

  // bench
  auto* ben = app.add_subcommand("bench", "Sweep a parameter and benchmark all modes");
  std::string b_sweep, b_out = "bench.csv", b_modes = "lazy,non_lazy,no_affine_heuristic";
  int b_from = 0, b_to = -1, b_step = 1, b_count = 10;
  int b_ntar = 9, b_res = 30, b_nagt = 3;
  double b_dmax = 0.0;
  SolverConfig b_cfg;
  std::uint64_t b_seed = 1;
  ben->add_option("--sweep", b_sweep, "n_tar | resolution | d_max")->required();
  ben->add_option("--from", b_from, "sweep start")->required();
  ben->add_option("--to", b_to, "sweep end (inclusive)")->required();
  ben->add_option("--step", b_step, "sweep step");
  ben->add_option("--instances", b_count, "instances per sweep point");
  ben->add_option("--n-tar", b_ntar, "fixed target count");
  ben->add_option("--resolution", b_res, "fixed map resolution");
  ben->add_option("--d-max", b_dmax, "fixed capacity (0: ceil(n_tar/n_agt))");
  ben->add_option("--n-agt", b_nagt, "agents");
  ben->add_option("--modes", b_modes, "comma-separated mode list");
  ben->add_option("--seed", b_seed, "base seed");
  ben->add_option("--time-limit", b_cfg.time_limit, "seconds per run");
  ben->add_option("--n-seg-tar", b_cfg.n_seg_tar, "segments per target");
  ben->add_option("--threads", b_cfg.threads, "worker threads (0: auto)");
  ben->add_option("-o,--out", b_out, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) {
      const Instance inst =
          generate_instance(g_seed, g_ntar, g_res, g_dmax, g_nagt, g_cell, g_vmax);
      write_output(g_out, serialize_instance(inst));
      return 0;
    }
    if (slv->parsed()) {
      s_cfg.mode = parse_mode(s_mode);
      s_cfg.threads = s_threads;
      const Instance inst = parse_instance(read_file(s_instance));
      const Solution sol = solve(inst, s_cfg);
      write_output(s_out, serialize_solution(sol, inst));
      std::cerr << "status=" << status_exit_code(sol.status) << " cost=" << sol.total_cost
                << " wall=" << sol.stats.wall_time_s << "s gcs_queries="
                << sol.stats.gcs_queries << "\n";
      return status_exit_code(sol.status);
    }
    if (val->parsed()) {
      const Instance inst = parse_instance(read_file(v_instance));
      const Solution sol = parse_solution(read_file(v_solution), inst);
      const ValidationReport rep = validate_solution(inst, sol);
      for (const std::string& issue : rep.issues) std::cerr << "INVALID: " << issue << "\n";
      if (rep.ok) std::cout << "solution valid\n";
      return rep.ok ? 0 : 1;
    }
    if (ben->parsed()) {
      if (b_sweep != "n_tar" && b_sweep != "resolution" && b_sweep != "d_max") {
        std::cerr << "error: --sweep must be one of n_tar, resolution, d_max\n";
        return 1;
      }
      if (b_to < b_from || b_step <= 0) {
        std::cerr << "error: empty sweep\n";
        return 1;
      }
      std::vector<SolveMode> modes;
      {
        std::stringstream ss(b_modes);
        std::string tok;
        while (std::getline(ss, tok, ',')) modes.push_back(parse_mode(tok));
      }
      std::ofstream csv(b_out);
      if (!csv) {
        std::cerr << "error: cannot write " << b_out << "\n";
        return 1;
      }
      csv << "instance,mode,status,cost,runtime_s,nodes,tours_evaluated,gcs_queries\n";
      for (int value = b_from; value <= b_to; value += b_step) {
        int n_tar = b_ntar, res = b_res;
        double d_max = b_dmax;
        if (b_sweep == "n_tar") n_tar = value;
        if (b_sweep == "resolution") res = value;
        if (b_sweep == "d_max") d_max = value;
        std::map<std::string, std::vector<double>> runtimes;
        for (int idx = 0; idx < b_count; ++idx) {
          const std::uint64_t seed = b_seed + 1009ull * value + idx;
          Instance inst;
          try {
            inst = generate_instance(seed, n_tar, res, d_max, b_nagt);
          } catch (const GenerationFailed&) {
            continue;
          }
          const std::string name =
              b_sweep + std::to_string(value) + "_seed" + std::to_string(seed);
          for (SolveMode mode : modes) {
            SolverConfig cfg = b_cfg;
            cfg.mode = mode;
            const Solution sol = solve(inst, cfg);
            csv << name << "," << mode_name(mode) << ","
                << (sol.status == SolveStatus::Optimal    ? "OPTIMAL"
                    : sol.status == SolveStatus::Timeout ? "TIMEOUT"
                                                         : "INFEASIBLE")
                << "," << sol.total_cost << "," << sol.stats.wall_time_s << ","
                << sol.stats.nodes_expanded << "," << sol.stats.tours_evaluated << ","
                << sol.stats.gcs_queries << "\n";
            csv.flush();
            runtimes[mode_name(mode)].push_back(sol.stats.wall_time_s);
          }
        }
        for (const auto& [mode, times] : runtimes) {
          const double lo = *std::min_element(times.begin(), times.end());
          const double hi = *std::max_element(times.begin(), times.end());
          std::cout << b_sweep << "=" << value << " mode=" << mode << " min=" << lo
                    << " median=" << median(times) << " max=" << hi << " (" << times.size()
                    << " runs)\n";
        }
      }
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const GenerationFailed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
