#pragma once

// Built-in scenarios.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bbx/simulator.hpp"

namespace bbx {

inline const std::vector<std::string>& builtin_scenario_names() {
  static const std::vector<std::string> names = {"case1",         "case2",      "case3",       "case4",
                                                 "airsim-circle", "car-zigzag", "car-straight"};
  return names;
}

namespace detail {

inline Scenario base_scenario(std::string name, std::uint64_t seed) {
  Scenario sc;
  sc.name = std::move(name);
  sc.seed = seed;
  sc.dt = 0.02;
  sc.duration = 30.0;
  sc.init.cov_scale = 0.5;
  sc.noise.sigma_tbar = 0.05;
  sc.noise.sigma_h = 0.01;
  return sc;
}

inline TrajectoryProgram mav_circle() { return traj::Circle{Vec3::Zero(), 4.0, 4.0, 0.0}; }

}  // namespace detail

/// Estimators that apply to a scenario by default.
inline std::vector<EstimatorKind> default_estimators(const Scenario& sc) {
  return {sc.target_is_mav ? EstimatorKind::BearingBoxMav : EstimatorKind::BearingBox, EstimatorKind::BearingOnly,
          EstimatorKind::BearingAngle};
}

inline std::optional<Scenario> builtin_scenario(std::string_view name, std::uint64_t seed = 0) {
  using namespace traj;
  if (name == "case1") {
    // Target on a circle, camera on a climbing spiral.
    Scenario sc = detail::base_scenario("case1", seed);
    sc.target = Circle{Vec3::Zero(), 3.0, 1.0, 0.0};
    sc.observer = Spiral{Vec3(-15.0, 0.0, 0.0), 4.0, 6.0, 0.0, Vec3(0.2, 0.0, -0.1)};
    sc.target_cuboid = Cuboid(1.5, 1.0, 0.8);
    // The circling target is outside the constant-velocity model.
    sc.noise.sigma_v = 0.005;
    return sc;
  }
  if (name == "case2") {
    Scenario sc = detail::base_scenario("case2", seed);
    sc.target = ConstantVelocity{Vec3::Zero(), Vec3(1.0, 0.0, 0.0)};
    sc.observer = Zigzag{Vec3(-15.0, 0.0, 0.0), Vec3(1.0, 0.0, 0.0), Vec3(0.0, 1.0, 0.0), 4.0, 4.0};
    sc.target_cuboid = Cuboid(1.5, 1.0, 0.8);
    return sc;
  }
  if (name == "case3") {
    Scenario sc = detail::base_scenario("case3", seed);
    sc.target = ConstantVelocity{Vec3::Zero(), Vec3(1.0, 0.5, 0.0)};
    Guidance g;
    g.target = std::make_shared<const TrajectoryProgram>(sc.target);
    g.origin = Vec3(-15.0, -5.0, 0.0);
    g.standoff = 10.0;
    g.gain = 0.4;
    sc.observer = g;
    sc.target_cuboid = Cuboid(1.5, 1.0, 0.8);
    return sc;
  }
  if (name == "case4" || name == "airsim-circle") {
    Scenario sc = detail::base_scenario(std::string(name), seed);
    sc.target = detail::mav_circle();
    sc.observer = Stationary{Vec3(-12.0, 0.0, 1.0)};
    sc.target_is_mav = true;
    sc.target_cuboid = Cuboid(0.92, 0.92, 0.55);
    sc.pointing = CameraPointing::Fixed;
    sc.look_at_point = Vec3::Zero();
    sc.noise.sigma_h = 0.02;
    sc.noise.sigma_tbar = 0.2;
    sc.init.cov_scale = 1.0;
    if (name == "airsim-circle") {
      sc.init.cov_scale = 2.0;
      sc.noise.sigma_v = 1e-4;
    }
    return sc;
  }
  if (name == "car-zigzag" || name == "car-straight") {
    Scenario sc = detail::base_scenario(std::string(name), seed);
    sc.target = ConstantVelocity{Vec3::Zero(), Vec3(0.5, 0.0, 0.0)};
    sc.target_cuboid = Cuboid(0.28, 0.24, 0.14);
    if (name == "car-zigzag") {
      sc.observer = Zigzag{Vec3(-3.0, 0.0, 0.0), Vec3(0.5, 0.0, 0.0), Vec3(0.0, 1.0, 0.0), 0.5, 4.0};
    } else {
      // speed alternates 0.2 / 0.8 m/s along the line of travel
      sc.observer = Zigzag{Vec3(-3.0, 0.0, 0.0), Vec3(0.5, 0.0, 0.0), Vec3(1.0, 0.0, 0.0), 0.6, 4.0};
    }
    return sc;
  }
  return std::nullopt;
}

}  // namespace bbx
