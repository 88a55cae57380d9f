#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>

#include "mtvrpo/geometry.hpp"
#include "mtvrpo/instance.hpp"

namespace mtvrpo {

// Earliest-feasible-arrival-time and latest-feasible-departure-time queries,
// answered by bisection on the monotone feasibility margin
//   m(t*) = v_max (t* - t) - dist(p, pos(t*)).
// Queries are pure; the memo cache is safe for concurrent use.
class Kinematics {
 public:
  Kinematics(const Instance& inst, const VisibilityGraph& vg)
      : inst_(inst), vg_(vg) {}

  // True iff an agent at p at time t can intercept `to` at time t_prime.
  bool reach_feasible(const Vec2& p, double t, const TwNode& to, double t_prime) const;

  // Smallest arrival time in [max(t, to.t_lo), to.t_hi]; nullopt if none.
  std::optional<double> efat(const TwNode& from, const TwNode& to, double t) const;

  // Largest departure time in [from.t_lo, from.t_hi] that still intercepts
  // `to` at t_arr; nullopt if none.
  std::optional<double> lfdt(const TwNode& from, const TwNode& to, double t_arr) const;

  void set_cache_enabled(bool on) { cache_enabled_ = on; }
  const VisibilityGraph& world() const { return vg_; }
  double v_max() const { return inst_.v_max; }

 private:
  struct Key {
    std::uint64_t meta;  // kind | from.id | to.id
    std::int64_t qt;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<std::uint64_t>()(k.meta * 0x9E3779B97F4A7C15ull ^
                                        static_cast<std::uint64_t>(k.qt));
    }
  };

  std::optional<double> cached(int kind, const TwNode& from, const TwNode& to, double t,
                               bool* hit) const;
  void store(int kind, const TwNode& from, const TwNode& to, double t, double value) const;

  std::optional<double> efat_impl(const TwNode& from, const TwNode& to, double t) const;
  std::optional<double> lfdt_impl(const TwNode& from, const TwNode& to, double t_arr) const;

  const Instance& inst_;
  const VisibilityGraph& vg_;
  bool cache_enabled_ = true;
  mutable std::mutex cache_mu_;
  mutable std::unordered_map<Key, double, KeyHash> cache_;
};

}  // namespace mtvrpo
