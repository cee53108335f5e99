#pragma once

// Pseudo-linear Kalman filters: bearing-box (p, v, alpha), bearing-box-MAV
// (p, v, a, alpha) and the bearing-only / bearing-angle baselines.

#include <algorithm>
#include <cmath>
#include <optional>

#include "bbx/box3d.hpp"
#include "bbx/linalg.hpp"

namespace bbx {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec7 = Eigen::Matrix<double, 7, 1>;
using Vec10 = Eigen::Matrix<double, 10, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat7 = Eigen::Matrix<double, 7, 7>;
using Mat10 = Eigen::Matrix<double, 10, 10>;

inline constexpr double kAlphaFloor = 1e-3;
inline constexpr double kThrustAccelFloor = 1e-2;
inline constexpr double kRangeFloor = 1e-3;

/// Measurement and process noise levels. The same values drive the noise
/// injected by the simulator and the filter tuning.
struct NoiseParams {
  double sigma_tbar = 0.2;       // std of the additive noise on tbar (unitless)
  double sigma_h = 0.02;         // std of the additive noise on the thrust direction
  double sigma_bearing = 0.01;   // std of the bearing noise (baselines)
  double sigma_angle = 0.01;     // std of the subtended-angle noise, rad (bearing-angle)
  double sigma_p = 0.0;
  double sigma_v = 0.001;
  double sigma_a = 0.0316227766016838;  // sqrt(0.001)
  double sigma_alpha = 1e-4;
  double g = 9.81;

  void validate() const {
    for (double s : {sigma_tbar, sigma_h, sigma_bearing, sigma_angle, sigma_p, sigma_v, sigma_a, sigma_alpha}) {
      if (!(s >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise stds must be non-negative");
    }
    if (!(g > 0.0)) throw Error(ErrorCode::InvalidArgument, "gravity must be positive");
  }
};

struct CommonState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  double alpha = 1.0;
  Mat7 cov = Mat7::Identity();

  Vec7 vector() const {
    Vec7 x;
    x << p, v, alpha;
    return x;
  }
  void set(const Vec7& x) {
    p = x.segment<3>(0);
    v = x.segment<3>(3);
    alpha = x(6);
  }
};

struct MavState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  double alpha = 1.0;
  Mat10 cov = Mat10::Identity();

  Vec10 vector() const {
    Vec10 x;
    x << p, v, a, alpha;
    return x;
  }
  void set(const Vec10& x) {
    p = x.segment<3>(0);
    v = x.segment<3>(3);
    a = x.segment<3>(6);
    alpha = x(9);
  }
};

/// Position/velocity state of the bearing-only baseline.
struct BearingOnlyState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Mat6 cov = Mat6::Identity();

  Vec6 vector() const {
    Vec6 x;
    x << p, v;
    return x;
  }
  void set(const Vec6& x) {
    p = x.segment<3>(0);
    v = x.segment<3>(3);
  }
};

struct MeasurementFrame {
  WorldPseudoMeasurement tbar;
  std::optional<Vec3> h;  // thrust direction, MAV targets only
  Vec3 p_cw = Vec3::Zero();
  double timestamp = 0.0;
};

struct BearingMeasurement {
  Vec3 bearing = Vec3::UnitX();  // world frame, unit
  Vec3 p_cw = Vec3::Zero();
  double timestamp = 0.0;
};

struct BearingAngleMeasurement {
  Vec3 bearing = Vec3::UnitX();
  double angle = 0.0;  // subtended angle, rad
  Vec3 p_cw = Vec3::Zero();
  double timestamp = 0.0;
};

/// Orthogonal projector onto the complement of h. The input is renormalized.
inline Mat3 projector(const Vec3& h) {
  const double n = h.norm();
  if (!(n >= 1e-9)) throw Error(ErrorCode::ZeroVector, "cannot build projector from a zero vector");
  const Vec3 u = h / n;
  return Mat3::Identity() - u * u.transpose();
}

/// Orthonormal basis B (3x2) of the plane orthogonal to h, so P_h = B B^T.
inline Eigen::Matrix<double, 3, 2> complement_basis(const Vec3& h) {
  const double n = h.norm();
  if (!(n >= 1e-9)) throw Error(ErrorCode::ZeroVector, "cannot build a basis from a zero vector");
  const Vec3 u = h / n;
  Vec3 e = Vec3::UnitX();
  if (std::abs(u.x()) > std::abs(u.y()) && std::abs(u.x()) > std::abs(u.z())) e = Vec3::UnitY();
  Eigen::Matrix<double, 3, 2> b;
  b.col(0) = (e - e.dot(u) * u).normalized();
  b.col(1) = u.cross(b.col(0));
  return b;
}

/// K = P H^T (H P H^T + R)^+. With `use_pinv = false` the explicit inverse is
/// used instead; both agree when the innovation covariance is well conditioned.
template <int N, int M>
Eigen::Matrix<double, N, M> kalman_gain(const Eigen::Matrix<double, N, N>& p, const Eigen::Matrix<double, M, N>& h,
                                        const Eigen::Matrix<double, M, M>& r, bool use_pinv = true) {
  const Eigen::Matrix<double, M, M> s = h * p * h.transpose() + r;
  if (use_pinv) return p * h.transpose() * pseudo_inverse(s);
  return p * h.transpose() * s.inverse();
}

namespace detail {

template <int N, int M>
void correct(Eigen::Matrix<double, N, 1>& x, Eigen::Matrix<double, N, N>& p, const Eigen::Matrix<double, M, 1>& z,
             const Eigen::Matrix<double, M, N>& h, const Eigen::Matrix<double, M, M>& r) {
  const Eigen::Matrix<double, N, M> k = kalman_gain<N, M>(p, h, r);
  x += k * (z - h * x);
  // Joseph form: same as (I - K H) P for the optimal gain, but keeps P
  // positive semi-definite when R is small relative to H P H^T.
  const Eigen::Matrix<double, N, N> i_kh = Eigen::Matrix<double, N, N>::Identity() - k * h;
  p = (i_kh * p * i_kh.transpose() + k * r * k.transpose()).eval();
  symmetrize(p);
}

inline void check_dt(double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
}

inline Mat7 constant_velocity_transition(double dt) {
  Mat7 a = Mat7::Identity();
  a.block<3, 3>(0, 3) = dt * Mat3::Identity();
  return a;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Bearing-box (common objects)

inline CommonState predict_common(const CommonState& s, double dt, const NoiseParams& n) {
  detail::check_dt(dt);
  const Mat7 a = detail::constant_velocity_transition(dt);
  Vec7 w;
  w << Vec3::Constant(n.sigma_p * n.sigma_p), Vec3::Constant(n.sigma_v * n.sigma_v), n.sigma_alpha * n.sigma_alpha;
  CommonState out;
  out.set(a * s.vector());
  out.cov = a * s.cov * a.transpose();
  out.cov.diagonal() += w;
  return out;
}

/// z = p_c^w = [I, O, -tbar] x with R = alpha_hat^2 sigma_tbar^2 I.
inline CommonState update_common(const CommonState& s, const MeasurementFrame& m, const NoiseParams& n) {
  Eigen::Matrix<double, 3, 7> h = Eigen::Matrix<double, 3, 7>::Zero();
  h.block<3, 3>(0, 0) = Mat3::Identity();
  h.block<3, 1>(0, 6) = -m.tbar.tbar;
  const double alpha = std::max(s.alpha, kAlphaFloor);
  const Mat3 r = (alpha * alpha * n.sigma_tbar * n.sigma_tbar) * Mat3::Identity();
  Vec7 x = s.vector();
  CommonState out = s;
  detail::correct<7, 3>(x, out.cov, m.p_cw, h, r);
  out.set(x);
  return out;
}

// ---------------------------------------------------------------------------
// Bearing-box-MAV

inline MavState predict_mav(const MavState& s, double dt, const NoiseParams& n) {
  detail::check_dt(dt);
  Mat10 a = Mat10::Identity();
  a.block<3, 3>(0, 3) = dt * Mat3::Identity();
  a.block<3, 3>(0, 6) = 0.5 * dt * dt * Mat3::Identity();
  a.block<3, 3>(3, 6) = dt * Mat3::Identity();
  Vec10 w;
  // Position rows carry no process noise in the constant-acceleration model.
  w << Vec3::Zero(), Vec3::Constant(n.sigma_v * n.sigma_v), Vec3::Constant(n.sigma_a * n.sigma_a),
      n.sigma_alpha * n.sigma_alpha;
  MavState out;
  out.set(a * s.vector());
  out.cov = a * s.cov * a.transpose();
  out.cov.diagonal() += w;
  return out;
}

/// Joint update with z = [p_c^w; P_h g e3] and
/// H = [[I, O, O, -tbar], [O, O, P_h, O]]. R = V Sigma V^T with
/// V = blockdiag(alpha_hat I, |a_hat - g e3| P_h).
/// The attitude block is identically zero along h, so it is expressed in a
/// basis B of the plane orthogonal to h (P_h = B B^T) before the gain.
inline MavState update_mav(const MavState& s, const MeasurementFrame& m, const NoiseParams& n) {
  if (!m.h) throw Error(ErrorCode::MissingAttitude, "MAV update needs a thrust direction");
  const Eigen::Matrix<double, 3, 2> b = complement_basis(*m.h);

  Eigen::Matrix<double, 5, 1> z;
  z << m.p_cw, b.transpose() * (n.g * kE3);

  Eigen::Matrix<double, 5, 10> h = Eigen::Matrix<double, 5, 10>::Zero();
  h.block<3, 3>(0, 0) = Mat3::Identity();
  h.block<3, 1>(0, 9) = -m.tbar.tbar;
  h.block<2, 3>(3, 6) = b.transpose();

  const double alpha = std::max(s.alpha, kAlphaFloor);
  const double thrust_accel = std::max((s.a - n.g * kE3).norm(), kThrustAccelFloor);
  Eigen::Matrix<double, 5, 5> r = Eigen::Matrix<double, 5, 5>::Zero();
  r.block<3, 3>(0, 0) = (alpha * alpha * n.sigma_tbar * n.sigma_tbar) * Mat3::Identity();
  r.block<2, 2>(3, 3) = (thrust_accel * thrust_accel * n.sigma_h * n.sigma_h) * Eigen::Matrix2d::Identity();

  Vec10 x = s.vector();
  MavState out = s;
  detail::correct<10, 5>(x, out.cov, z, h, r);
  out.set(x);
  return out;
}

// ---------------------------------------------------------------------------
// Bearing-only baseline: P_g p_o^w = P_g p_c^w.

inline BearingOnlyState predict_bearing_only(const BearingOnlyState& s, double dt, const NoiseParams& n) {
  detail::check_dt(dt);
  Mat6 a = Mat6::Identity();
  a.block<3, 3>(0, 3) = dt * Mat3::Identity();
  BearingOnlyState out;
  out.set(a * s.vector());
  out.cov = a * s.cov * a.transpose();
  out.cov.diagonal() += (Vec6() << Vec3::Constant(n.sigma_p * n.sigma_p), Vec3::Constant(n.sigma_v * n.sigma_v))
                            .finished();
  return out;
}

/// R = r_hat^2 sigma_bearing^2 P_g with r_hat the estimated range. Expressed
/// in a basis of the plane orthogonal to the bearing, where P_g = B B^T.
inline BearingOnlyState update_bearing_only(const BearingOnlyState& s, const BearingMeasurement& m,
                                            const NoiseParams& n) {
  const Eigen::Matrix<double, 3, 2> b = complement_basis(m.bearing);
  Eigen::Matrix<double, 2, 6> h = Eigen::Matrix<double, 2, 6>::Zero();
  h.block<2, 3>(0, 0) = b.transpose();
  const Eigen::Vector2d z = b.transpose() * m.p_cw;
  const double range = std::max((s.p - m.p_cw).norm(), kRangeFloor);
  const Eigen::Matrix2d r = (range * range * n.sigma_bearing * n.sigma_bearing) * Eigen::Matrix2d::Identity();
  Vec6 x = s.vector();
  BearingOnlyState out = s;
  detail::correct<6, 2>(x, out.cov, z, h, r);
  out.set(x);
  return out;
}

// ---------------------------------------------------------------------------
// Bearing-angle baseline: p_c^w = p_o^w - (g / theta) l, state (p, v, l).

inline CommonState predict_bearing_angle(const CommonState& s, double dt, const NoiseParams& n) {
  return predict_common(s, dt, n);
}

inline CommonState update_bearing_angle(const CommonState& s, const BearingAngleMeasurement& m, const NoiseParams& n) {
  if (!(m.angle > 0.0)) throw Error(ErrorCode::NonPositiveAngle, "subtended angle must be positive");
  const Vec3 g = m.bearing.normalized();
  Eigen::Matrix<double, 3, 7> h = Eigen::Matrix<double, 3, 7>::Zero();
  h.block<3, 3>(0, 0) = Mat3::Identity();
  h.block<3, 1>(0, 6) = -g / m.angle;
  const double size = std::max(s.alpha, kAlphaFloor);
  const double scale = size / m.angle;
  const double rel_angle = n.sigma_angle / m.angle;
  const Mat3 r = scale * scale *
                 (n.sigma_bearing * n.sigma_bearing * Mat3::Identity() + rel_angle * rel_angle * g * g.transpose());
  Vec7 x = s.vector();
  CommonState out = s;
  detail::correct<7, 3>(x, out.cov, m.p_cw, h, r);
  out.set(x);
  return out;
}

}  // namespace bbx
