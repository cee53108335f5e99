#pragma once

// Deterministic scenario simulation: observer/target trajectories, MAV
// attitude from acceleration, noisy synthetic detections and the driver that
// runs the estimators over the frame stream.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bbx/box3d.hpp"
#include "bbx/estimators.hpp"
#include "bbx/metrics.hpp"
#include "bbx/random.hpp"
#include "bbx/trajectory.hpp"

namespace bbx {

/// Where the measurement noise enters.
///   A: additive Gaussian on the world-frame pseudo-measurement tbar, on the
///      thrust direction, the bearing and the subtended angle (exact filter
///      noise model).
///   B: Gaussian on the unit-plane corner/centre coordinates plus a small
///      random rotation on R_o^c; everything downstream is recomputed from
///      the corrupted detection.
enum class NoiseMode { A, B };

enum class CameraPointing { TrackTarget, Fixed };

enum class DepthKind { OpticalAxis, Range };

struct Scenario {
  std::string name = "custom";
  TrajectoryProgram observer;
  TrajectoryProgram target;
  Cuboid target_cuboid{1.0, 1.0, 1.0};
  bool target_is_mav = false;
  CameraIntrinsics camera;
  CameraPointing pointing = CameraPointing::TrackTarget;
  Vec3 look_at_point = Vec3::Zero();  // used with CameraPointing::Fixed
  double dt = 0.02;
  double duration = 30.0;
  NoiseParams noise;
  NoiseMode noise_mode = NoiseMode::A;
  double sigma_vertex = 0.002;    // mode B, unit-plane units
  double sigma_rotation = 0.01;   // mode B, rad
  FilterInit init;
  DepthKind depth = DepthKind::OpticalAxis;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    if (!(duration >= dt)) throw Error(ErrorCode::InvalidArgument, "duration must be at least dt");
    if (!(sigma_vertex >= 0.0 && sigma_rotation >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "detection noise stds must be non-negative");
    }
    camera.validate();
    target_cuboid.validate();
    noise.validate();
    observer.validate();
    target.validate();
  }

  std::size_t frame_count() const { return static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1; }
  double frame_time(std::size_t k) const { return static_cast<double>(k) * dt; }
};

/// World->object attitude of a multicopter whose thrust is aligned with
/// a - g e3. `yaw` fixes the rotation about the thrust axis.
inline Rotation mav_attitude_from_accel(const Vec3& a, double g, double yaw) {
  const Vec3 f = a - g * kE3;
  const double n = f.norm();
  if (!(n > 1e-6)) throw Error(ErrorCode::FreeFall, "a = g e3 leaves the thrust direction undefined");
  const Vec3 h = f / n;
  const Vec3 z = -h;
  Vec3 heading(std::cos(yaw), std::sin(yaw), 0.0);
  Vec3 x = heading - heading.dot(z) * z;
  if (x.norm() < 1e-9) {
    heading = Vec3(-std::sin(yaw), std::cos(yaw), 0.0);
    x = heading - heading.dot(z) * z;
    if (x.norm() < 1e-9) x = Vec3::UnitX() - Vec3::UnitX().dot(z) * z;
  }
  x.normalize();
  Mat3 r;
  r.col(0) = x;
  r.col(1) = z.cross(x);
  r.col(2) = z;
  return Rotation::nearest(r);
}

inline double heading_of(const Vec3& v) {
  return Vec3(v.x(), v.y(), 0.0).norm() > 1e-9 ? std::atan2(v.y(), v.x()) : 0.0;
}

struct FrameTruth {
  double t = 0.0;
  TruthState target;
  Rotation r_ow;
  Pose observer{Rotation(), Vec3::Zero(), Frame::Camera, Frame::World};
  Vec3 observer_velocity = Vec3::Zero();
  Vec3 observer_accel = Vec3::Zero();
  std::optional<Vec3> h;
  std::optional<Box3DDetection> exact;
  std::optional<Box3DDetection> noisy;
  bool in_fov = false;
  FrameObservation observation;  // noisy measurements handed to the estimators
};

/// Stateful frame generator for one scenario (holds the trajectory samplers).
class FrameSynthesizer {
 public:
  explicit FrameSynthesizer(Scenario sc) : sc_(std::move(sc)), observer_(sc_.observer), target_(sc_.target) {
    sc_.validate();
  }

  const Scenario& scenario() const { return sc_; }

  FrameTruth operator()(double t, Rng& rng) {
    FrameTruth f;
    f.t = t;
    const TrajectorySample obs = observer_(t);
    const TrajectorySample tgt = target_(t);
    f.target = TruthState{tgt.p, tgt.v, tgt.a, sc_.target_cuboid.alpha()};
    f.observer_velocity = obs.v;
    f.observer_accel = obs.a;

    const double yaw = heading_of(tgt.v);
    if (sc_.target_is_mav) {
      f.r_ow = mav_attitude_from_accel(tgt.a, sc_.noise.g, yaw);
      f.h = thrust_direction(f.r_ow);
    } else {
      f.r_ow = Rotation::about_z(yaw);
    }

    const Rotation r_cw = sc_.pointing == CameraPointing::TrackTarget ? look_at(obs.p, tgt.p)
                                                                        : look_at(obs.p, sc_.look_at_point);
    f.observer = Pose{r_cw, obs.p, Frame::Camera, Frame::World};

    const Pose pose_oc{r_cw.inverse() * f.r_ow, r_cw.inverse() * (tgt.p - obs.p), Frame::Object, Frame::Camera};
    try {
      f.exact = make_detection(pose_oc, sc_.target_cuboid);
      const auto px = unit_plane_to_pixel(f.exact->center, sc_.camera);
      f.in_fov = px[0] >= 0.0 && px[0] < sc_.camera.width && px[1] >= 0.0 && px[1] < sc_.camera.height;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonPositiveDepth) throw;
      f.in_fov = false;
    }

    FrameObservation& o = f.observation;
    o.t = t;
    o.p_cw = obs.p;
    o.r_cw = r_cw;
    if (sc_.noise_mode == NoiseMode::A) {
      const Vec3 e_t = rng.normal3(sc_.noise.sigma_tbar);
      const Vec3 e_h = rng.normal3(sc_.noise.sigma_h);
      const Vec3 e_g = rng.normal3(sc_.noise.sigma_bearing);
      const double e_a = rng.normal(sc_.noise.sigma_angle);
      if (f.in_fov) {
        f.noisy = f.exact;
        const Vec3 rel = tgt.p - obs.p;
        o.meas.tbar = WorldPseudoMeasurement{rel / sc_.target_cuboid.alpha() + e_t, t};
        const Vec3 h = sc_.target_is_mav ? *f.h : thrust_direction(f.r_ow);
        o.meas.h = (h + e_h).normalized();
        o.meas.bearing = (rel.normalized() + e_g).normalized();
        o.meas.angle = apparent_angle(f.exact->vertices) + e_a;
        o.detected = true;
      }
    } else {
      std::array<Vec3, 8> dv;
      for (auto& d : dv) d = Vec3(rng.normal(sc_.sigma_vertex), rng.normal(sc_.sigma_vertex), 0.0);
      const Vec3 dc(rng.normal(sc_.sigma_vertex), rng.normal(sc_.sigma_vertex), 0.0);
      const Vec3 drot = rng.normal3(sc_.sigma_rotation);
      if (f.in_fov) {
        Box3DDetection d = *f.exact;
        for (int i = 0; i < 8; ++i) d.vertices[i] = UnitPlanePoint(d.vertices[i].x() + dv[i].x(), d.vertices[i].y() + dv[i].y());
        d.center = UnitPlanePoint(d.center.x() + dc.x(), d.center.y() + dc.y());
        d.r_oc = Rotation::nearest((Rotation::exp(drot) * d.r_oc).matrix());
        f.noisy = d;
        try {
          o.meas = measurements_from_detection(d, r_cw, t);
          o.detected = true;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::SingularSystem) throw;
          o.detected = false;
        }
      }
    }
    return f;
  }

 private:
  Scenario sc_;
  TrajectorySampler observer_;
  TrajectorySampler target_;
};

inline FrameTruth synthesize_frame(const Scenario& sc, double t, Rng& rng) {
  FrameSynthesizer synth(sc);
  return synth(t, rng);
}

inline double depth_of(const Vec3& p_world, const Pose& camera_to_world, DepthKind kind) {
  const Vec3 rel = p_world - camera_to_world.translation;
  if (kind == DepthKind::Range) return rel.norm();
  return (camera_to_world.rotation.inverse() * rel).z();
}

inline TraceRecord make_record(const Estimator& est, const FrameObservation& obs, const Pose& camera,
                               const std::optional<TruthState>& truth, bool in_fov, DepthKind depth) {
  TraceRecord r;
  r.t = obs.t;
  r.truth = truth;
  r.p = est.position();
  r.v = est.velocity();
  r.a = est.acceleration();
  r.alpha = est.size();
  r.cov_diag = est.covariance().diagonal();
  r.depth_est = depth_of(r.p, camera, depth);
  if (truth) {
    r.depth_true = depth_of(truth->p, camera, depth);
    r.nees = est.nees(*truth);
  }
  r.in_fov = in_fov;
  return r;
}

struct ScenarioRun {
  std::vector<EstimateTrace> traces;
  std::vector<FrameTruth> frames;
};

/// Runs every selected estimator over the same frame stream. Deterministic
/// given the scenario (including its seed).
inline ScenarioRun run_scenario(const Scenario& sc, const std::vector<EstimatorKind>& estimators,
                                bool keep_frames = false) {
  if (estimators.empty()) throw Error(ErrorCode::InvalidArgument, "no estimator selected");
  FrameSynthesizer synth(sc);
  Rng rng(sc.seed);
  std::vector<std::unique_ptr<Estimator>> ests;
  ScenarioRun run;
  for (auto k : estimators) {
    ests.push_back(make_estimator(k, sc.init, sc.noise));
    run.traces.push_back(EstimateTrace{sc.name, to_string(k), sc.seed, {}});
    run.traces.back().records.reserve(sc.frame_count());
  }
  for (std::size_t k = 0; k < sc.frame_count(); ++k) {
    FrameTruth f = synth(sc.frame_time(k), rng);
    for (std::size_t i = 0; i < ests.size(); ++i) {
      ests[i]->step(f.observation);
      run.traces[i].records.push_back(make_record(*ests[i], f.observation, f.observer, f.target, f.in_fov, sc.depth));
    }
    if (keep_frames) run.frames.push_back(std::move(f));
  }
  return run;
}

}  // namespace bbx
