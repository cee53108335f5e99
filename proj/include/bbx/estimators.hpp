#pragma once

// Runtime-selectable wrappers around the filter functions, driven frame by
// frame by the simulator and the log replay path.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bbx/filters.hpp"
#include "bbx/metrics.hpp"

namespace bbx {

enum class EstimatorKind { BearingBox, BearingBoxMav, BearingOnly, BearingAngle };

inline const char* to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::BearingBox: return "bearing-box";
    case EstimatorKind::BearingBoxMav: return "bearing-box-mav";
    case EstimatorKind::BearingOnly: return "bearing-only";
    case EstimatorKind::BearingAngle: return "bearing-angle";
  }
  return "?";
}

inline std::optional<EstimatorKind> parse_estimator(std::string_view s) {
  for (auto k : {EstimatorKind::BearingBox, EstimatorKind::BearingBoxMav, EstimatorKind::BearingOnly,
                 EstimatorKind::BearingAngle}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

/// Initial estimate shared by all estimators. `cov_diag`, when non-empty,
/// overrides `cov_scale * I` and must match the estimator's state size.
struct FilterInit {
  Vec3 p = Vec3(1.0, 2.0, 0.0);
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  double alpha = 1.0;
  double cov_scale = 10.0;
  Eigen::VectorXd cov_diag;

  template <int N>
  Eigen::Matrix<double, N, N> covariance() const {
    if (cov_diag.size() == 0) return cov_scale * Eigen::Matrix<double, N, N>::Identity();
    if (cov_diag.size() != N) throw Error(ErrorCode::InvalidArgument, "initial covariance size mismatch");
    return cov_diag.asDiagonal();
  }
};

/// One camera frame as seen by an estimator.
struct FrameObservation {
  double t = 0.0;
  Vec3 p_cw = Vec3::Zero();
  Rotation r_cw;
  bool detected = false;
  DetectionMeasurements meas;
};

class Estimator {
 public:
  virtual ~Estimator() = default;

  virtual EstimatorKind kind() const = 0;
  std::string name() const { return to_string(kind()); }

  /// Predicts to the frame time (skipped for the first frame) and corrects
  /// when the frame carries a detection.
  void step(const FrameObservation& f) {
    if (last_t_) predict(f.t - *last_t_);
    if (f.detected) update(f);
    last_t_ = f.t;
  }

  virtual Vec3 position() const = 0;
  virtual Vec3 velocity() const = 0;
  virtual std::optional<Vec3> acceleration() const { return std::nullopt; }
  virtual std::optional<double> size() const { return std::nullopt; }
  virtual Eigen::VectorXd state() const = 0;
  virtual Eigen::MatrixXd covariance() const = 0;

  /// NEES against ground truth over the estimator's consistency block.
  virtual double nees(const TruthState& truth) const {
    return bbx::nees(truth_vector(truth), state(), covariance());
  }

 protected:
  virtual void predict(double dt) = 0;
  virtual void update(const FrameObservation& f) = 0;
  virtual Eigen::VectorXd truth_vector(const TruthState& t) const = 0;

 private:
  std::optional<double> last_t_;
};

class BearingBoxFilter final : public Estimator {
 public:
  BearingBoxFilter(const FilterInit& init, const NoiseParams& noise) : noise_(noise) {
    s_.p = init.p;
    s_.v = init.v;
    s_.alpha = init.alpha;
    s_.cov = init.covariance<7>();
  }
  EstimatorKind kind() const override { return EstimatorKind::BearingBox; }
  Vec3 position() const override { return s_.p; }
  Vec3 velocity() const override { return s_.v; }
  std::optional<double> size() const override { return s_.alpha; }
  Eigen::VectorXd state() const override { return s_.vector(); }
  Eigen::MatrixXd covariance() const override { return s_.cov; }
  const CommonState& raw() const { return s_; }

 protected:
  void predict(double dt) override { s_ = predict_common(s_, dt, noise_); }
  void update(const FrameObservation& f) override {
    s_ = update_common(s_, MeasurementFrame{f.meas.tbar, std::nullopt, f.p_cw, f.t}, noise_);
  }
  Eigen::VectorXd truth_vector(const TruthState& t) const override {
    return (Vec7() << t.p, t.v, t.alpha).finished();
  }

 private:
  NoiseParams noise_;
  CommonState s_;
};

class BearingBoxMavFilter final : public Estimator {
 public:
  BearingBoxMavFilter(const FilterInit& init, const NoiseParams& noise) : noise_(noise) {
    s_.p = init.p;
    s_.v = init.v;
    s_.a = init.a;
    s_.alpha = init.alpha;
    s_.cov = init.covariance<10>();
  }
  EstimatorKind kind() const override { return EstimatorKind::BearingBoxMav; }
  Vec3 position() const override { return s_.p; }
  Vec3 velocity() const override { return s_.v; }
  std::optional<Vec3> acceleration() const override { return s_.a; }
  std::optional<double> size() const override { return s_.alpha; }
  Eigen::VectorXd state() const override { return s_.vector(); }
  Eigen::MatrixXd covariance() const override { return s_.cov; }
  const MavState& raw() const { return s_; }

 protected:
  void predict(double dt) override { s_ = predict_mav(s_, dt, noise_); }
  void update(const FrameObservation& f) override {
    s_ = update_mav(s_, MeasurementFrame{f.meas.tbar, f.meas.h, f.p_cw, f.t}, noise_);
  }
  Eigen::VectorXd truth_vector(const TruthState& t) const override {
    return (Vec10() << t.p, t.v, t.a, t.alpha).finished();
  }

 private:
  NoiseParams noise_;
  MavState s_;
};

class BearingOnlyFilter final : public Estimator {
 public:
  BearingOnlyFilter(const FilterInit& init, const NoiseParams& noise) : noise_(noise) {
    s_.p = init.p;
    s_.v = init.v;
    s_.cov = init.covariance<6>();
  }
  EstimatorKind kind() const override { return EstimatorKind::BearingOnly; }
  Vec3 position() const override { return s_.p; }
  Vec3 velocity() const override { return s_.v; }
  Eigen::VectorXd state() const override { return s_.vector(); }
  Eigen::MatrixXd covariance() const override { return s_.cov; }

 protected:
  void predict(double dt) override { s_ = predict_bearing_only(s_, dt, noise_); }
  void update(const FrameObservation& f) override {
    s_ = update_bearing_only(s_, BearingMeasurement{f.meas.bearing, f.p_cw, f.t}, noise_);
  }
  Eigen::VectorXd truth_vector(const TruthState& t) const override { return (Vec6() << t.p, t.v).finished(); }

 private:
  NoiseParams noise_;
  BearingOnlyState s_;
};

/// The size state is the apparent (sphere-equivalent) size, which has no
/// ground truth for box targets, so NEES covers position and velocity only.
class BearingAngleFilter final : public Estimator {
 public:
  BearingAngleFilter(const FilterInit& init, const NoiseParams& noise) : noise_(noise) {
    s_.p = init.p;
    s_.v = init.v;
    s_.alpha = init.alpha;
    s_.cov = init.covariance<7>();
  }
  EstimatorKind kind() const override { return EstimatorKind::BearingAngle; }
  Vec3 position() const override { return s_.p; }
  Vec3 velocity() const override { return s_.v; }
  std::optional<double> size() const override { return s_.alpha; }
  Eigen::VectorXd state() const override { return s_.vector(); }
  Eigen::MatrixXd covariance() const override { return s_.cov; }
  double nees(const TruthState& truth) const override {
    return bbx::nees((Vec6() << truth.p, truth.v).finished(), s_.vector().head<6>(), s_.cov.topLeftCorner<6, 6>());
  }

 protected:
  void predict(double dt) override { s_ = predict_bearing_angle(s_, dt, noise_); }
  void update(const FrameObservation& f) override {
    if (!(f.meas.angle > 0.0)) return;  // degenerate box extent, treat as a missed detection
    s_ = update_bearing_angle(s_, BearingAngleMeasurement{f.meas.bearing, f.meas.angle, f.p_cw, f.t}, noise_);
  }
  Eigen::VectorXd truth_vector(const TruthState& t) const override { return (Vec6() << t.p, t.v).finished(); }

 private:
  NoiseParams noise_;
  CommonState s_;
};

inline std::unique_ptr<Estimator> make_estimator(EstimatorKind kind, const FilterInit& init, const NoiseParams& noise) {
  switch (kind) {
    case EstimatorKind::BearingBox: return std::make_unique<BearingBoxFilter>(init, noise);
    case EstimatorKind::BearingBoxMav: return std::make_unique<BearingBoxMavFilter>(init, noise);
    case EstimatorKind::BearingOnly: return std::make_unique<BearingOnlyFilter>(init, noise);
    case EstimatorKind::BearingAngle: return std::make_unique<BearingAngleFilter>(init, noise);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown estimator");
}

}  // namespace bbx
