#pragma once

// Analytic trajectory programs for observers and targets. Every kind returns
// position together with its exact first and second derivatives.

#include <cmath>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "bbx/error.hpp"
#include "bbx/linalg.hpp"

namespace bbx {

struct TrajectorySample {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
};

struct TrajectoryProgram;

namespace traj {

struct Stationary {
  Vec3 position = Vec3::Zero();
};

struct ConstantVelocity {
  Vec3 origin = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

/// Waypoints visited in order at constant speed; holds the last one at the end.
/// Acceleration is zero on the segments (the corner impulses are not modelled).
struct StraightLines {
  std::vector<Vec3> waypoints;
  double speed = 1.0;
};

/// Horizontal circle (constant z).
struct Circle {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  double speed = 1.0;
  double phase = 0.0;
};

/// Horizontal circle whose centre drifts with a constant velocity (a helix
/// when the drift is vertical).
struct Spiral {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  double speed = 1.0;
  double phase = 0.0;
  Vec3 drift = Vec3::Zero();
};

/// Constant forward velocity plus a triangle-wave lateral offset: straight
/// legs at constant speed with turns every half period.
struct Zigzag {
  Vec3 origin = Vec3::Zero();
  Vec3 velocity = Vec3::UnitX();
  Vec3 lateral = Vec3::UnitY();
  double amplitude = 1.0;
  double period = 4.0;
};

/// Pursuit of another program: the commanded velocity is the target velocity
/// plus `gain * (range - standoff)` along the line of sight, capped at
/// `max_speed`, and the actual velocity follows it with a first-order lag.
struct Guidance {
  std::shared_ptr<const TrajectoryProgram> target;
  Vec3 origin = Vec3::Zero();
  Vec3 initial_velocity = Vec3::Zero();
  double standoff = 10.0;
  double gain = 0.3;
  double max_speed = 5.0;
  double lag = 1.0;
};

/// p(t) = sum_i coeffs[i] t^i.
struct Polynomial {
  std::vector<Vec3> coeffs;
};

}  // namespace traj

struct TrajectoryProgram {
  using Kind = std::variant<traj::Stationary, traj::ConstantVelocity, traj::StraightLines, traj::Circle, traj::Spiral,
                            traj::Zigzag, traj::Guidance, traj::Polynomial>;
  Kind kind = traj::Stationary{};

  TrajectoryProgram() = default;
  template <typename K>
  TrajectoryProgram(K k) : kind(std::move(k)) {}  // NOLINT(google-explicit-constructor)

  void validate() const;
};

inline const char* kind_name(const TrajectoryProgram& p) {
  static constexpr const char* names[] = {"stationary", "constant_velocity", "straight_lines", "circle",
                                          "spiral",     "zigzag",            "guidance",       "polynomial"};
  return names[p.kind.index()];
}

inline void TrajectoryProgram::validate() const {
  std::visit(
      [](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, traj::Circle> || std::is_same_v<T, traj::Spiral>) {
          if (!(k.radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
          if (!(k.speed >= 0.0)) throw Error(ErrorCode::InvalidArgument, "speed must be non-negative");
        } else if constexpr (std::is_same_v<T, traj::StraightLines>) {
          if (k.waypoints.empty()) throw Error(ErrorCode::InvalidArgument, "straight_lines needs waypoints");
          if (!(k.speed > 0.0)) throw Error(ErrorCode::InvalidArgument, "speed must be positive");
        } else if constexpr (std::is_same_v<T, traj::Zigzag>) {
          if (!(k.period > 0.0)) throw Error(ErrorCode::InvalidArgument, "period must be positive");
          if (!(k.amplitude >= 0.0)) throw Error(ErrorCode::InvalidArgument, "amplitude must be non-negative");
        } else if constexpr (std::is_same_v<T, traj::Guidance>) {
          if (!k.target) throw Error(ErrorCode::InvalidArgument, "guidance needs a target program");
          if (std::holds_alternative<traj::Guidance>(k.target->kind)) {
            throw Error(ErrorCode::InvalidArgument, "guidance cannot pursue another guidance program");
          }
          if (!(k.lag > 0.0 && k.max_speed > 0.0 && k.gain >= 0.0 && k.standoff >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "invalid guidance parameters");
          }
        } else if constexpr (std::is_same_v<T, traj::Polynomial>) {
          if (k.coeffs.empty()) throw Error(ErrorCode::InvalidArgument, "polynomial needs coefficients");
        }
      },
      kind);
}

namespace detail {

inline TrajectorySample sample_closed_form(const TrajectoryProgram& prog, double t);

inline constexpr double kGuidanceStep = 0.005;

struct GuidanceState {
  Vec3 p;
  Vec3 v;
};

inline Vec3 guidance_accel(const traj::Guidance& g, const Vec3& p, const Vec3& v, double t) {
  const TrajectorySample tgt = sample_closed_form(*g.target, t);
  const Vec3 d = tgt.p - p;
  const double range = d.norm();
  Vec3 cmd = tgt.v;
  if (range > 1e-9) cmd += g.gain * (range - g.standoff) * (d / range);
  const double speed = cmd.norm();
  if (speed > g.max_speed) cmd *= g.max_speed / speed;
  return (cmd - v) / g.lag;
}

inline GuidanceState guidance_rk4(const traj::Guidance& g, const GuidanceState& s, double t, double h) {
  const auto f = [&](const GuidanceState& x, double tt) {
    return GuidanceState{x.v, guidance_accel(g, x.p, x.v, tt)};
  };
  const auto add = [](const GuidanceState& x, const GuidanceState& k, double c) {
    return GuidanceState{x.p + c * k.p, x.v + c * k.v};
  };
  const GuidanceState k1 = f(s, t);
  const GuidanceState k2 = f(add(s, k1, 0.5 * h), t + 0.5 * h);
  const GuidanceState k3 = f(add(s, k2, 0.5 * h), t + 0.5 * h);
  const GuidanceState k4 = f(add(s, k3, h), t + h);
  return GuidanceState{s.p + (h / 6.0) * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
                       s.v + (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
}

/// Integrates on the fixed grid n * kGuidanceStep, then one partial step to t.
/// `grid` holds the state at grid index `grid_index`; it is advanced in place.
inline TrajectorySample guidance_sample(const traj::Guidance& g, double t, GuidanceState& grid, long& grid_index) {
  const long target_index = static_cast<long>(std::floor(t / kGuidanceStep));
  if (grid_index > target_index || grid_index < 0) {
    grid = GuidanceState{g.origin, g.initial_velocity};
    grid_index = 0;
  }
  while (grid_index < target_index) {
    grid = guidance_rk4(g, grid, static_cast<double>(grid_index) * kGuidanceStep, kGuidanceStep);
    ++grid_index;
  }
  const double t0 = static_cast<double>(grid_index) * kGuidanceStep;
  const GuidanceState s = t > t0 ? guidance_rk4(g, grid, t0, t - t0) : grid;
  return TrajectorySample{s.p, s.v, guidance_accel(g, s.p, s.v, t)};
}

inline double triangle_wave(double t, double period, double& slope) {
  // Starts at 0, peaks at +1 at period/4, -1 at 3 period/4.
  const double u = t / period - std::floor(t / period);
  if (u < 0.25) {
    slope = 4.0 / period;
    return 4.0 * u;
  }
  if (u < 0.75) {
    slope = -4.0 / period;
    return 2.0 - 4.0 * u;
  }
  slope = 4.0 / period;
  return 4.0 * u - 4.0;
}

inline TrajectorySample sample_closed_form(const TrajectoryProgram& prog, double t) {
  return std::visit(
      [t](const auto& k) -> TrajectorySample {
        using T = std::decay_t<decltype(k)>;
        TrajectorySample s;
        if constexpr (std::is_same_v<T, traj::Stationary>) {
          s.p = k.position;
        } else if constexpr (std::is_same_v<T, traj::ConstantVelocity>) {
          s.p = k.origin + t * k.velocity;
          s.v = k.velocity;
        } else if constexpr (std::is_same_v<T, traj::StraightLines>) {
          s.p = k.waypoints.front();
          double remaining = t * k.speed;
          for (std::size_t i = 1; i < k.waypoints.size(); ++i) {
            const Vec3 leg = k.waypoints[i] - k.waypoints[i - 1];
            const double len = leg.norm();
            if (len <= 0.0) continue;
            if (remaining <= len) {
              s.p = k.waypoints[i - 1] + (remaining / len) * leg;
              s.v = (k.speed / len) * leg;
              return s;
            }
            remaining -= len;
            s.p = k.waypoints[i];
          }
        } else if constexpr (std::is_same_v<T, traj::Circle> || std::is_same_v<T, traj::Spiral>) {
          const double w = k.speed / k.radius;
          const double th = w * t + k.phase;
          const double c = std::cos(th), sn = std::sin(th);
          s.p = k.center + k.radius * Vec3(c, sn, 0.0);
          s.v = k.speed * Vec3(-sn, c, 0.0);
          s.a = -k.speed * w * Vec3(c, sn, 0.0);
          if constexpr (std::is_same_v<T, traj::Spiral>) {
            s.p += t * k.drift;
            s.v += k.drift;
          }
        } else if constexpr (std::is_same_v<T, traj::Zigzag>) {
          double slope = 0.0;
          const double w = triangle_wave(t, k.period, slope);
          s.p = k.origin + t * k.velocity + k.amplitude * w * k.lateral;
          s.v = k.velocity + k.amplitude * slope * k.lateral;
        } else if constexpr (std::is_same_v<T, traj::Polynomial>) {
          // Horner for p, v, a simultaneously.
          for (std::size_t i = k.coeffs.size(); i-- > 0;) {
            s.a = s.a * t + 2.0 * s.v;
            s.v = s.v * t + s.p;
            s.p = s.p * t + k.coeffs[i];
          }
        } else if constexpr (std::is_same_v<T, traj::Guidance>) {
          GuidanceState grid{};
          long index = -1;
          return guidance_sample(k, t, grid, index);
        }
        return s;
      },
      prog.kind);
}

}  // namespace detail

/// Position, velocity and acceleration of `prog` at time t >= 0.
inline TrajectorySample sample_trajectory(const TrajectoryProgram& prog, double t) {
  return detail::sample_closed_form(prog, t);
}

/// Sequential sampler that keeps the guidance integration state between
/// calls, so sampling n frames costs O(n) instead of O(n^2). Results are
/// identical to sample_trajectory().
class TrajectorySampler {
 public:
  explicit TrajectorySampler(TrajectoryProgram prog) : prog_(std::move(prog)) { prog_.validate(); }

  TrajectorySample operator()(double t) {
    if (const auto* g = std::get_if<traj::Guidance>(&prog_.kind)) {
      return detail::guidance_sample(*g, t, grid_, grid_index_);
    }
    return sample_trajectory(prog_, t);
  }

  const TrajectoryProgram& program() const { return prog_; }

 private:
  TrajectoryProgram prog_;
  detail::GuidanceState grid_{};
  long grid_index_ = -1;
};

}  // namespace bbx
