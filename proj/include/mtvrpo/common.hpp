#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <string>

namespace mtvrpo {

using Vec2 = Eigen::Vector2d;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Geometric tolerance for point-in-set and visibility tests (meters).
inline constexpr double kGeomTol = 1e-9;

// Bisection tolerance for interception-time queries (seconds).
inline constexpr double kTimeTol = 1e-6;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidMap : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PointInObstacle : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Unreachable : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GenerationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotIntegral : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoFractionalEdge : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResourceExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TourInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mtvrpo
