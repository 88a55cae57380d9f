#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mtvrpo/instance.hpp"
#include "mtvrpo/solver.hpp"

namespace mtvrpo {

// Node layout of the target-window graph without building it: entry k is the
// (target, window) pair of node k, with node 0 the depot.
std::vector<std::pair<int, int>> tw_node_layout(const Instance& inst);

Instance parse_instance(const std::string& text);
std::string serialize_instance(const Instance& inst);

std::string serialize_solution(const Solution& sol, const Instance& inst);
Solution parse_solution(const std::string& text, const Instance& inst);

}  // namespace mtvrpo
