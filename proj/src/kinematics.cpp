#include "mtvrpo/kinematics.hpp"

#include <cmath>

namespace mtvrpo {

namespace {
constexpr int kMaxBisectIters = 60;
constexpr double kCacheQuantum = 1e-9;  // seconds

std::int64_t quantize_time(double t) {
  if (!std::isfinite(t)) return std::numeric_limits<std::int64_t>::max();
  return llround(t / kCacheQuantum);
}
}  // namespace

bool Kinematics::reach_feasible(const Vec2& p, double t, const TwNode& to,
                                double t_prime) const {
  const double d = vg_.field(p)->distance_to(to.pos_at(t_prime));
  return d <= inst_.v_max * (t_prime - t);
}

std::optional<double> Kinematics::cached(int kind, const TwNode& from, const TwNode& to,
                                         double t, bool* hit) const {
  *hit = false;
  if (!cache_enabled_ || from.id < 0 || to.id < 0) return std::nullopt;
  Key key{static_cast<std::uint64_t>(kind) << 48 |
              static_cast<std::uint64_t>(from.id) << 24 | static_cast<std::uint64_t>(to.id),
          quantize_time(t)};
  std::lock_guard<std::mutex> lock(cache_mu_);
  auto it = cache_.find(key);
  if (it == cache_.end()) return std::nullopt;
  *hit = true;
  if (std::isnan(it->second)) return std::nullopt;
  return it->second;
}

void Kinematics::store(int kind, const TwNode& from, const TwNode& to, double t,
                       double value) const {
  if (!cache_enabled_ || from.id < 0 || to.id < 0) return;
  Key key{static_cast<std::uint64_t>(kind) << 48 |
              static_cast<std::uint64_t>(from.id) << 24 | static_cast<std::uint64_t>(to.id),
          quantize_time(t)};
  std::lock_guard<std::mutex> lock(cache_mu_);
  cache_[key] = value;
}

std::optional<double> Kinematics::efat(const TwNode& from, const TwNode& to, double t) const {
  bool hit = false;
  auto c = cached(0, from, to, t, &hit);
  if (hit) return c;
  auto r = efat_impl(from, to, t);
  store(0, from, to, t, r ? *r : std::numeric_limits<double>::quiet_NaN());
  return r;
}

std::optional<double> Kinematics::lfdt(const TwNode& from, const TwNode& to,
                                       double t_arr) const {
  bool hit = false;
  auto c = cached(1, from, to, t_arr, &hit);
  if (hit) return c;
  auto r = lfdt_impl(from, to, t_arr);
  store(1, from, to, t_arr, r ? *r : std::numeric_limits<double>::quiet_NaN());
  return r;
}

std::optional<double> Kinematics::efat_impl(const TwNode& from, const TwNode& to,
                                            double t) const {
  const Vec2 p = from.pos_at(t);
  auto field = vg_.field(p);
  if (to.is_depot()) {
    const double d = field->distance_to(to.start);
    if (d == kInf) return std::nullopt;
    return std::max(t, 0.0) + d / inst_.v_max;
  }
  const double lo = std::max(t, to.t_lo);
  const double hi = to.t_hi;
  if (lo > hi) return std::nullopt;
  auto margin = [&](double ts) {
    return inst_.v_max * (ts - t) - field->distance_to(to.pos_at(ts));
  };
  if (margin(lo) >= 0.0) return lo;
  if (margin(hi) < 0.0) return std::nullopt;
  double a = lo, b = hi;  // margin(a) < 0 <= margin(b)
  for (int it = 0; it < kMaxBisectIters && b - a > kTimeTol; ++it) {
    const double mid = 0.5 * (a + b);
    if (margin(mid) >= 0.0)
      b = mid;
    else
      a = mid;
  }
  return b;
}

std::optional<double> Kinematics::lfdt_impl(const TwNode& from, const TwNode& to,
                                            double t_arr) const {
  if (to.is_depot()) {
    // No deadline; any departure works if the depot is spatially reachable.
    const double d = vg_.field(to.start)->distance_to(from.pos_at(from.t_hi));
    if (d == kInf) return std::nullopt;
    return from.t_hi;
  }
  t_arr = std::min(t_arr, to.t_hi);
  if (!std::isfinite(from.t_hi)) {
    // Stationary source with an open-ended window (the depot): closed form.
    const double d = vg_.field(to.pos_at(t_arr))->distance_to(from.start);
    if (d == kInf) return std::nullopt;
    const double t = t_arr - d / inst_.v_max;
    if (t < from.t_lo - kTimeTol) return std::nullopt;
    return std::max(t, from.t_lo);
  }
  const Vec2 goal = to.pos_at(t_arr);
  auto field = vg_.field(goal);
  auto margin = [&](double ts) {
    return inst_.v_max * (t_arr - ts) - field->distance_to(from.pos_at(ts));
  };
  if (margin(from.t_hi) >= 0.0) return from.t_hi;
  if (margin(from.t_lo) < 0.0) return std::nullopt;
  double a = from.t_lo, b = from.t_hi;  // margin(a) >= 0 > margin(b)
  for (int it = 0; it < kMaxBisectIters && b - a > kTimeTol; ++it) {
    const double mid = 0.5 * (a + b);
    if (margin(mid) >= 0.0)
      a = mid;
    else
      b = mid;
  }
  return a;
}

}  // namespace mtvrpo
