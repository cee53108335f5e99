#include <gtest/gtest.h>

#include <cmath>

#include "bbx/scenarios.hpp"

using namespace bbx;
using namespace bbx::traj;

namespace {

void expect_same_trace(const EstimateTrace& a, const EstimateTrace& b) {
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    ASSERT_EQ(x.t, y.t);
    ASSERT_EQ(x.p, y.p);
    ASSERT_EQ(x.v, y.v);
    ASSERT_EQ(x.alpha, y.alpha);
    ASSERT_EQ(x.depth_est, y.depth_est);
    ASSERT_EQ(x.nees, y.nees);
    ASSERT_EQ(x.in_fov, y.in_fov);
  }
}

Scenario quiet(Scenario sc) {
  sc.noise.sigma_tbar = 0.0;
  sc.noise.sigma_h = 0.0;
  sc.noise.sigma_bearing = 0.0;
  sc.noise.sigma_angle = 0.0;
  sc.sigma_vertex = 0.0;
  sc.sigma_rotation = 0.0;
  return sc;
}

}  // namespace

TEST(SampleTrajectory, Examples) {
  const auto c = sample_trajectory(Circle{Vec3::Zero(), 4.0, 4.0, 0.0}, 0.0);
  for (double t : {0.0, 0.7, 3.1, 11.0}) {
    EXPECT_NEAR(sample_trajectory(Circle{Vec3::Zero(), 4.0, 4.0, 0.0}, t).a.norm(), 4.0, 1e-12);
  }
  EXPECT_NEAR(c.v.norm(), 4.0, 1e-12);

  const auto s = sample_trajectory(Stationary{Vec3(1, 2, 3)}, 5.0);
  EXPECT_EQ(s.p, Vec3(1, 2, 3));
  EXPECT_EQ(s.v, Vec3::Zero());
  EXPECT_EQ(s.a, Vec3::Zero());

  const auto p = sample_trajectory(Polynomial{{Vec3(1, 0, 0), Vec3(0, 1, 0)}}, 2.0);
  EXPECT_EQ(p.p, Vec3(1, 2, 0));
  EXPECT_EQ(p.v, Vec3(0, 1, 0));
  EXPECT_EQ(p.a, Vec3::Zero());

  const auto q = sample_trajectory(Polynomial{{Vec3::Zero(), Vec3::Zero(), Vec3(0, 0, 1.5)}}, 2.0);
  EXPECT_EQ(q.a, Vec3(0, 0, 3));
}

TEST(SampleTrajectory, StraightLinesHoldLastWaypoint) {
  const StraightLines s{{Vec3::Zero(), Vec3(3, 0, 0), Vec3(3, 4, 0)}, 1.0};
  EXPECT_LE((sample_trajectory(s, 1.5).p - Vec3(1.5, 0, 0)).norm(), 1e-15);
  EXPECT_LE((sample_trajectory(s, 5.0).p - Vec3(3, 2, 0)).norm(), 1e-15);
  EXPECT_EQ(sample_trajectory(s, 5.0).v, Vec3(0, 1, 0));
  const auto end = sample_trajectory(s, 100.0);
  EXPECT_EQ(end.p, Vec3(3, 4, 0));
  EXPECT_EQ(end.v, Vec3::Zero());
}

TEST(SampleTrajectory, DerivativesMatchFiniteDifferences) {
  const auto target = std::make_shared<const TrajectoryProgram>(Circle{Vec3(0, 0, -2), 3.0, 1.0, 0.0});
  Guidance g;
  g.target = target;
  g.origin = Vec3(-15, -5, 0);
  const std::vector<TrajectoryProgram> programs = {
      Stationary{Vec3(1, 1, 1)},
      ConstantVelocity{Vec3::Zero(), Vec3(1, -2, 0.5)},
      StraightLines{{Vec3::Zero(), Vec3(10, 0, 0), Vec3(10, 10, 0)}, 2.0},
      Circle{Vec3::Zero(), 4.0, 4.0, 0.3},
      Spiral{Vec3(-15, 0, 0), 4.0, 6.0, 0.0, Vec3(0.2, 0, -0.1)},
      Zigzag{Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 1, 0), 4.0, 4.0},
      Polynomial{{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0.5, 0, 0.2), Vec3(0, 0.1, 0)}},
      g,
  };
  const double h = 0.02;
  for (const auto& prog : programs) {
    for (double t : {2.5, 6.5, 10.5}) {  // away from zigzag and waypoint corners
      const auto m = sample_trajectory(prog, t - h);
      const auto c = sample_trajectory(prog, t);
      const auto p = sample_trajectory(prog, t + h);
      const Vec3 v_fd = (p.p - m.p) / (2 * h);
      const Vec3 a_fd = (p.p - 2 * c.p + m.p) / (h * h);
      const double vs = std::max(1.0, c.v.norm());
      const double as = std::max(1.0, c.a.norm());
      EXPECT_LT((v_fd - c.v).norm() / vs, 1e-3) << kind_name(prog) << " t=" << t;
      EXPECT_LT((a_fd - c.a).norm() / as, 1e-3) << kind_name(prog) << " t=" << t;
    }
  }
}

TEST(SampleTrajectory, SequentialSamplerMatchesDirect) {
  Guidance g;
  g.target = std::make_shared<const TrajectoryProgram>(Circle{Vec3::Zero(), 3.0, 1.0, 0.0});
  g.origin = Vec3(-10, 2, 0);
  TrajectorySampler sampler(g);
  for (int k = 0; k < 300; k += 7) {
    const double t = 0.02 * k;
    const auto a = sampler(t);
    const auto b = sample_trajectory(g, t);
    EXPECT_EQ(a.p, b.p);
    EXPECT_EQ(a.v, b.v);
    EXPECT_EQ(a.a, b.a);
  }
}

TEST(MavAttitude, Examples) {
  EXPECT_LE((thrust_direction(mav_attitude_from_accel(Vec3::Zero(), 9.81, 0.3)) + kE3).norm(), 1e-15);
  const Vec3 h = thrust_direction(mav_attitude_from_accel(Vec3(4, 0, 0), 9.81, 0.0));
  EXPECT_LE((h - Vec3(4, 0, -9.81).normalized()).norm(), 1e-12);
}

TEST(MavAttitude, RoundTrip) {
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a(rng.normal(5.0), rng.normal(5.0), rng.normal(5.0));
    const double yaw = 6.0 * rng.uniform();
    const Rotation r = mav_attitude_from_accel(a, 9.81, yaw);
    EXPECT_LE((thrust_direction(r) - (a - 9.81 * kE3).normalized()).norm(), 1e-12);
    EXPECT_LE((projector(thrust_direction(r)) * (a - 9.81 * kE3)).norm(), 1e-10);
  }
}

TEST(MavAttitude, FreeFallThrows) {
  try {
    mav_attitude_from_accel(Vec3(0, 0, 9.81), 9.81, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FreeFall);
  }
}

TEST(SynthesizeFrame, ZeroNoiseDetectionIsExact) {
  for (auto mode : {NoiseMode::A, NoiseMode::B}) {
    auto sc = quiet(*builtin_scenario("case1", 0));
    sc.noise_mode = mode;
    Rng rng(1);
    const auto f = synthesize_frame(sc, 3.0, rng);
    ASSERT_TRUE(f.in_fov);
    ASSERT_TRUE(f.noisy && f.exact);
    for (int i = 0; i < 8; ++i) EXPECT_LE((f.noisy->vertices[i].vec() - f.exact->vertices[i].vec()).norm(), 1e-15);
    EXPECT_LE((f.noisy->r_oc.matrix() - f.exact->r_oc.matrix()).norm(), 1e-12);
    const Vec3 tbar = (f.target.p - f.observer.translation) / sc.target_cuboid.alpha();
    EXPECT_LE((f.observation.meas.tbar.tbar - tbar).norm(), 1e-9 * tbar.norm());
  }
}

TEST(SynthesizeFrame, ThrustNoiseSpread) {
  auto sc = *builtin_scenario("case4", 0);
  sc.noise.sigma_h = 0.02;
  FrameSynthesizer synth(sc);
  Rng rng(2);
  double sum2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto f = synth(1.0, rng);
    const double ang = std::acos(std::clamp(f.observation.meas.h.dot(*f.h), -1.0, 1.0));
    sum2 += ang * ang;
  }
  const double sd = std::sqrt(sum2 / n);
  EXPECT_GE(sd, 0.5 * sc.noise.sigma_h);
  EXPECT_LE(sd, 3.0 * sc.noise.sigma_h);
}

TEST(SynthesizeFrame, TargetBehindCameraIsOutOfView) {
  auto sc = *builtin_scenario("case2", 0);
  sc.pointing = CameraPointing::Fixed;
  sc.observer = Stationary{Vec3(-10, 0, 0)};
  sc.target = Stationary{Vec3(-20, 0, 0)};
  sc.look_at_point = Vec3::Zero();
  Rng rng(3);
  const auto f = synthesize_frame(sc, 0.0, rng);
  EXPECT_FALSE(f.in_fov);
  EXPECT_FALSE(f.observation.detected);
  sc.target = Stationary{Vec3(5, 0, 0)};
  EXPECT_TRUE(synthesize_frame(sc, 0.0, rng).in_fov);
}

TEST(SynthesizeFrame, MavAttitudeConsistent) {
  const auto sc = *builtin_scenario("case4", 0);
  FrameSynthesizer synth(sc);
  Rng rng(4);
  for (int k = 0; k < 500; k += 13) {
    const auto f = synth(0.02 * k, rng);
    ASSERT_TRUE(f.h);
    EXPECT_LE((projector(*f.h) * (f.target.a - sc.noise.g * kE3)).norm(), 1e-10);
  }
}

TEST(RunScenario, FrameCount) {
  auto sc = *builtin_scenario("case1", 0);
  EXPECT_EQ(sc.frame_count(), 1501u);
  sc.duration = 1.0;
  sc.dt = 0.3;
  EXPECT_EQ(sc.frame_count(), 4u);
  const auto run = run_scenario(sc, {EstimatorKind::BearingBox});
  EXPECT_EQ(run.traces[0].records.size(), 4u);
  EXPECT_DOUBLE_EQ(run.traces[0].records.back().t, 0.9);
}

TEST(RunScenario, Deterministic) {
  for (auto mode : {NoiseMode::A, NoiseMode::B}) {
    auto sc = *builtin_scenario("case3", 9);
    sc.noise_mode = mode;
    sc.duration = 5.0;
    const auto a = run_scenario(sc, default_estimators(sc));
    const auto b = run_scenario(sc, default_estimators(sc));
    for (std::size_t i = 0; i < a.traces.size(); ++i) expect_same_trace(a.traces[i], b.traces[i]);
  }
}

TEST(RunScenario, SeedChangesNoise) {
  auto sc = *builtin_scenario("case1", 1);
  sc.duration = 1.0;
  const auto a = run_scenario(sc, {EstimatorKind::BearingBox});
  sc.seed = 2;
  const auto b = run_scenario(sc, {EstimatorKind::BearingBox});
  EXPECT_NE(a.traces[0].records.back().p, b.traces[0].records.back().p);
}

TEST(RunScenario, NoEstimatorThrows) {
  try {
    run_scenario(*builtin_scenario("case1", 0), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(RunScenario, StationaryCameraMavBeatsBearingOnly) {
  const auto sc = *builtin_scenario("case4", 1);
  const auto run = run_scenario(sc, {EstimatorKind::BearingBoxMav, EstimatorKind::BearingOnly});
  EXPECT_LT(nide(run.traces[0]), 0.3);
  EXPECT_GT(nide(run.traces[1]), 0.5);
}

TEST(RunScenario, SpiralObserverBothConverge) {
  const auto sc = *builtin_scenario("case1", 1);
  const auto run = run_scenario(sc, {EstimatorKind::BearingBox, EstimatorKind::BearingOnly});
  for (const auto& tr : run.traces) {
    const auto& last = tr.records.back();
    EXPECT_LT(std::abs(last.depth_est - *last.depth_true) / *last.depth_true, 0.1) << tr.estimator;
  }
}

TEST(DepthOf, OpticalAxisAndRange) {
  const Pose cam{look_at(Vec3::Zero(), Vec3(10, 0, 0)), Vec3::Zero(), Frame::Camera, Frame::World};
  const Vec3 p(10, 3, 4);
  EXPECT_NEAR(depth_of(p, cam, DepthKind::OpticalAxis), 10.0, 1e-12);
  EXPECT_NEAR(depth_of(p, cam, DepthKind::Range), std::sqrt(125.0), 1e-12);
}

TEST(Scenario, ValidateRejectsBadTiming) {
  auto sc = *builtin_scenario("case1", 0);
  sc.dt = 0.0;
  try {
    sc.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(Scenario, BuiltinsListed) {
  for (const auto& n : builtin_scenario_names()) EXPECT_TRUE(builtin_scenario(n, 0).has_value()) << n;
  EXPECT_EQ(builtin_scenario_names().size(), 7u);
  EXPECT_FALSE(builtin_scenario("case9", 0));
}
