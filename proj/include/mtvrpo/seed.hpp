#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mtvrpo/instance.hpp"
#include "mtvrpo/kinematics.hpp"
#include "mtvrpo/pricing.hpp"
#include "mtvrpo/segments.hpp"
#include "mtvrpo/tour.hpp"

namespace mtvrpo {

// Greedy sequential insertion: targets ordered by earliest window end, each
// agent in turn appends the unrouted target-window with the smallest
// earliest-feasible-arrival time, subject to capacity and the disallowed
// edge set. Falls back to 20 seeded random orderings. Bounds are filled in
// after construction. nullopt when no covering set of tours was found.
std::optional<std::vector<Tour>> generate_feasible_solution(
    const Instance& inst, const TWGraph& tw, const Kinematics& kin, const SegmentData& sd,
    const EdgeSet& disallowed, std::uint64_t seed);

}  // namespace mtvrpo
