#include "mtvrpo/validate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mtvrpo {

namespace {

constexpr double kPosTol = 1e-6;
constexpr double kSpeedTol = 1e-6;
constexpr double kCollisionStep = 1e-2;

// Free-space membership with a slack band for solver residuals.
bool near_free(const ObstacleMap& map, const Vec2& p, double tol) {
  if (point_in_free_space(map, p)) return true;
  for (int dx = -1; dx <= 1; ++dx)
    for (int dy = -1; dy <= 1; ++dy)
      if (point_in_free_space(map, p + tol * Vec2(dx, dy))) return true;
  return false;
}

Vec2 traj_pos_at(const Trajectory& traj, double t) {
  if (traj.knots.empty()) return Vec2::Zero();
  if (t <= traj.knots.front().t) return traj.knots.front().pos;
  for (std::size_t i = 1; i < traj.knots.size(); ++i) {
    const TrajKnot& a = traj.knots[i - 1];
    const TrajKnot& b = traj.knots[i];
    if (t <= b.t) {
      const double span = b.t - a.t;
      if (span <= 1e-12) return b.pos;
      const double u = (t - a.t) / span;
      return a.pos + u * (b.pos - a.pos);
    }
  }
  return traj.knots.back().pos;
}

}  // namespace

ValidationReport validate_solution(const Instance& inst, const Solution& sol) {
  ValidationReport rep;
  if (static_cast<int>(sol.tours.size()) > inst.n_agt)
    rep.fail("more tours than agents");

  std::map<int, int> claim_count;
  for (std::size_t j = 0; j < sol.tours.size(); ++j) {
    const std::string who = "tour " + std::to_string(j);
    const Trajectory& traj = sol.tours[j].traj;
    if (traj.knots.empty()) {
      rep.fail(who + ": empty trajectory");
      continue;
    }
    if ((traj.knots.front().pos - inst.depot).norm() > kPosTol)
      rep.fail(who + ": does not start at the depot");
    if (std::abs(traj.knots.front().t) > kPosTol)
      rep.fail(who + ": does not start at time 0");
    if ((traj.knots.back().pos - inst.depot).norm() > kPosTol)
      rep.fail(who + ": does not end at the depot");

    double measured = 0.0;
    for (std::size_t i = 1; i < traj.knots.size(); ++i) {
      const TrajKnot& a = traj.knots[i - 1];
      const TrajKnot& b = traj.knots[i];
      const double dt = b.t - a.t;
      const double dq = (b.pos - a.pos).norm();
      measured += dq;
      if (dt < -1e-9) {
        rep.fail(who + ": time decreases at knot " + std::to_string(i));
        continue;
      }
      if (dq > inst.v_max * std::max(dt, 0.0) + kSpeedTol)
        rep.fail(who + ": speed limit violated at knot " + std::to_string(i));
      const int samples = std::max(1, static_cast<int>(std::ceil(dq / kCollisionStep)));
      for (int s = 0; s <= samples; ++s) {
        const Vec2 p = a.pos + (static_cast<double>(s) / samples) * (b.pos - a.pos);
        if (!near_free(inst.map, p, kPosTol)) {
          rep.fail(who + ": collision on segment " + std::to_string(i));
          break;
        }
      }
    }
    if (sol.tours[j].exact >= 0 && std::abs(measured - sol.tours[j].exact) > 1e-4)
      rep.fail(who + ": reported cost differs from trajectory length");

    double demand = 0.0;
    for (const Claim& c : sol.tours[j].traj.claims) {
      if (c.target < 1 || c.target > inst.n_tar()) {
        rep.fail(who + ": claim on unknown target");
        continue;
      }
      ++claim_count[c.target];
      demand += inst.target(c.target).demand;
      bool in_window = false;
      Vec2 target_pos = Vec2::Zero();
      for (const Window& w : inst.target(c.target).windows)
        if (c.time >= w.t_lo - kPosTol && c.time <= w.t_hi + kPosTol) {
          in_window = true;
          target_pos = w.pos_at(c.time);
          break;
        }
      if (!in_window) {
        rep.fail(who + ": claim of target " + std::to_string(c.target) +
                 " outside every window");
        continue;
      }
      if ((traj_pos_at(traj, c.time) - target_pos).norm() > kPosTol)
        rep.fail(who + ": claim of target " + std::to_string(c.target) +
                 " misses the target position");
    }
    if (demand > inst.d_max + 1e-9) rep.fail(who + ": capacity exceeded");
  }

  for (int i = 1; i <= inst.n_tar(); ++i) {
    const int n = claim_count.count(i) ? claim_count[i] : 0;
    if (n == 0) rep.fail("target " + std::to_string(i) + " never claimed");
    if (n > 1) rep.fail("target " + std::to_string(i) + " claimed more than once");
  }
  return rep;
}

}  // namespace mtvrpo
