#pragma once

// Stacked observation matrices for the box-measurement model and numeric
// observability decisions by SVD rank.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bbx/error.hpp"
#include "bbx/filters.hpp"
#include "bbx/linalg.hpp"

namespace bbx {

/// One noise-free observation: time, world pseudo-measurement
/// tbar = (p_o - p_c) / alpha, observer position and, for MAV targets, the
/// thrust direction.
struct StackObservation {
  double t = 0.0;
  Vec3 tbar = Vec3::Zero();
  Vec3 p_c = Vec3::Zero();
  std::optional<Vec3> h;
};

enum class RowKind { Position, Attitude };

struct RowTag {
  RowKind kind = RowKind::Position;
  double t = 0.0;
};

struct ObservationStack {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
  std::vector<RowTag> meta;  // one entry per 3-row block

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
};

enum class ConditionTriggered { HigherOrderMotion, ThrustOrthogonalAccel, None };

inline const char* to_string(ConditionTriggered c) {
  switch (c) {
    case ConditionTriggered::HigherOrderMotion: return "higher_order_motion";
    case ConditionTriggered::ThrustOrthogonalAccel: return "thrust_orthogonal_accel";
    case ConditionTriggered::None: return "none";
  }
  return "?";
}

struct RankInfo {
  int rank = 0;
  int cols = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  bool full() const { return rank == cols; }
};

inline RankInfo rank_info(const Eigen::MatrixXd& m) {
  RankInfo r;
  r.cols = static_cast<int>(m.cols());
  const Eigen::VectorXd s = singular_values(m);
  if (s.size() == 0) return r;
  r.rank = numeric_rank(m);
  r.sigma_max = s(0);
  // Smallest of the min(rows, cols) values; zero-padded when rows < cols.
  r.sigma_min = m.rows() < m.cols() ? 0.0 : s(s.size() - 1);
  return r;
}

struct ObservabilityVerdict {
  bool observable = false;
  int numeric_rank = 0;
  int cols = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  bool cond_a = false;  // observer motion of higher order than the target's
  bool cond_b = false;  // relative acceleration has a component orthogonal to h
  ConditionTriggered condition_triggered = ConditionTriggered::None;
  bool disagreement = false;  // analytic prediction != numeric rank verdict
};

namespace detail {

inline void check_increasing(const std::vector<StackObservation>& obs) {
  for (std::size_t k = 1; k < obs.size(); ++k) {
    if (!(obs[k].t > obs[k - 1].t)) throw Error(ErrorCode::InvalidArgument, "observation times must increase strictly");
  }
}

inline void put(ObservationStack& s, Eigen::Index row, const Mat3& block, Eigen::Index col) {
  s.matrix.block<3, 3>(row, col) = block;
}

}  // namespace detail

/// (3N+3) x 10 stack for a constant-acceleration MAV. Unknowns
/// (p_o(t_1), v_o(t_1), a_o, alpha); position rows [I, dt I, dt^2/2 I, -tbar]
/// with rhs p_c, then one attitude block [0, 0, P_h, 0] with rhs P_h g e3.
inline ObservationStack build_second_order_stack(const std::vector<StackObservation>& obs, const Vec3& h,
                                                 double g = 9.81) {
  if (obs.empty()) throw Error(ErrorCode::InsufficientObservations, "need at least one observation");
  detail::check_increasing(obs);
  const auto n = static_cast<Eigen::Index>(obs.size());
  ObservationStack s;
  s.matrix = Eigen::MatrixXd::Zero(3 * n + 3, 10);
  s.rhs = Eigen::VectorXd::Zero(3 * n + 3);
  const double t1 = obs.front().t;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double dt = obs[k].t - t1;
    const Eigen::Index r = 3 * k;
    detail::put(s, r, Mat3::Identity(), 0);
    detail::put(s, r, dt * Mat3::Identity(), 3);
    detail::put(s, r, 0.5 * dt * dt * Mat3::Identity(), 6);
    s.matrix.block<3, 1>(r, 9) = -obs[k].tbar;
    s.rhs.segment<3>(r) = obs[k].p_c;
    s.meta.push_back({RowKind::Position, obs[k].t});
  }
  const Mat3 ph = projector(h);
  detail::put(s, 3 * n, ph, 6);
  s.rhs.segment<3>(3 * n) = ph * (g * kE3);
  s.meta.push_back({RowKind::Attitude, obs.back().t});
  return s;
}

/// 3N x 7 stack for a constant-velocity target: rows [I, dt I, -tbar].
inline ObservationStack build_first_order_stack(const std::vector<StackObservation>& obs) {
  if (obs.empty()) throw Error(ErrorCode::InsufficientObservations, "need at least one observation");
  detail::check_increasing(obs);
  const auto n = static_cast<Eigen::Index>(obs.size());
  ObservationStack s;
  s.matrix = Eigen::MatrixXd::Zero(3 * n, 7);
  s.rhs = Eigen::VectorXd::Zero(3 * n);
  const double t1 = obs.front().t;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index r = 3 * k;
    detail::put(s, r, Mat3::Identity(), 0);
    detail::put(s, r, (obs[k].t - t1) * Mat3::Identity(), 3);
    s.matrix.block<3, 1>(r, 6) = -obs[k].tbar;
    s.rhs.segment<3>(r) = obs[k].p_c;
    s.meta.push_back({RowKind::Position, obs[k].t});
  }
  return s;
}

/// Second difference of t^m at the last of three sample times, as
/// 2 * f[t_{k-2}, t_{k-1}, t_k]. Equals the nested backward difference on a
/// uniform grid and gives exactly 2 for m = 2 on any grid.
inline double second_difference_pow(double t0, double t1, double t2, int m) {
  const auto f = [m](double t) { return std::pow(t, m); };
  const double d1 = (f(t1) - f(t0)) / (t1 - t0);
  const double d2 = (f(t2) - f(t1)) / (t2 - t1);
  return 2.0 * (d2 - d1) / (t2 - t0);
}

/// Stack for an n-th order polynomial target. Unknowns (b_0, ..., b_n, alpha)
/// with p_o(t) = sum_i b_i t^i and t measured from the first observation and
/// divided by `time_scale`. Position rows [I, t I, ..., t^n I, -tbar] with rhs
/// p_c; with `attitude_rows`, one block per k >= 3:
/// [0, 0, 2 P_h, D2(t^3) P_h, ..., D2(t^n) P_h, 0] with rhs P_h g e3 (scaled).
/// Without attitude rows this is 3N x (3n+4); with them (6N-6) x (3n+4).
inline ObservationStack build_polynomial_stack(const std::vector<StackObservation>& obs, int n, bool attitude_rows,
                                               double time_scale = 1.0, double g = 9.81) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "polynomial order must be at least 1");
  if (!(time_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "time_scale must be positive");
  if (static_cast<int>(obs.size()) < n + 1) {
    throw Error(ErrorCode::InsufficientObservations,
                "need at least " + std::to_string(n + 1) + " observations, got " + std::to_string(obs.size()));
  }
  detail::check_increasing(obs);
  const auto N = static_cast<Eigen::Index>(obs.size());
  const Eigen::Index cols = 3 * n + 4;
  const Eigen::Index att_blocks = attitude_rows ? std::max<Eigen::Index>(N - 2, 0) : 0;
  ObservationStack s;
  s.matrix = Eigen::MatrixXd::Zero(3 * N + 3 * att_blocks, cols);
  s.rhs = Eigen::VectorXd::Zero(s.matrix.rows());
  std::vector<double> tau(obs.size());
  for (std::size_t k = 0; k < obs.size(); ++k) tau[k] = (obs[k].t - obs.front().t) / time_scale;

  for (Eigen::Index k = 0; k < N; ++k) {
    const Eigen::Index r = 3 * k;
    double tp = 1.0;
    for (int i = 0; i <= n; ++i) {
      detail::put(s, r, tp * Mat3::Identity(), 3 * i);
      tp *= tau[k];
    }
    s.matrix.block<3, 1>(r, cols - 1) = -obs[k].tbar;
    s.rhs.segment<3>(r) = obs[k].p_c;
    s.meta.push_back({RowKind::Position, obs[k].t});
  }
  for (Eigen::Index j = 0; j < att_blocks; ++j) {
    const Eigen::Index k = j + 2;
    if (!obs[k].h) throw Error(ErrorCode::MissingAttitude, "attitude rows need h at every k >= 3");
    const Mat3 ph = projector(*obs[k].h);
    const Eigen::Index r = 3 * N + 3 * j;
    for (int i = 2; i <= n; ++i) {
      detail::put(s, r, second_difference_pow(tau[k - 2], tau[k - 1], tau[k], i) * ph, 3 * i);
    }
    // Accelerations in scaled time pick up time_scale^2.
    s.rhs.segment<3>(r) = ph * (g * time_scale * time_scale * kE3);
    s.meta.push_back({RowKind::Attitude, obs[k].t});
  }
  return s;
}

/// Relative-acceleration column entry from three consecutive pseudo-measurements:
/// (2/(t3-t1)) ((T2-T3)/(t3-t2) - (T1-T2)/(t2-t1)), i.e. (a_c - a_o)/alpha.
inline Vec3 rho(const StackObservation& o1, const StackObservation& o2, const StackObservation& o3) {
  return (2.0 / (o3.t - o1.t)) * ((o2.tbar - o3.tbar) / (o3.t - o2.t) - (o1.tbar - o2.tbar) / (o2.t - o1.t));
}

/// Returns {[[I, u], [P_h, 0]], [[I, u], [0, P_h u]]}.
inline std::pair<Eigen::Matrix<double, 6, 4>, Eigen::Matrix<double, 6, 4>> appendix_a_transform(const Vec3& h,
                                                                                                const Vec3& u) {
  if (std::abs(h.norm() - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "h must be a unit vector");
  const Mat3 ph = projector(h);
  Eigen::Matrix<double, 6, 4> left = Eigen::Matrix<double, 6, 4>::Zero();
  Eigen::Matrix<double, 6, 4> right = Eigen::Matrix<double, 6, 4>::Zero();
  left.topLeftCorner<3, 3>().setIdentity();
  left.block<3, 1>(0, 3) = u;
  left.bottomLeftCorner<3, 3>() = ph;
  right.topRows<3>() = left.topRows<3>();
  right.block<3, 1>(3, 3) = ph * u;
  return {left, right};
}

/// Ground-truth sample for check_theorem_conditions.
struct KinematicSample {
  double t = 0.0;
  Vec3 p_o = Vec3::Zero();
  Vec3 v_o = Vec3::Zero();
  Vec3 a_o = Vec3::Zero();
  Vec3 p_c = Vec3::Zero();
  Vec3 v_c = Vec3::Zero();
  Vec3 a_c = Vec3::Zero();
  double alpha = 1.0;
  std::optional<Vec3> h;  // present for MAV targets
};

inline constexpr double kMotionThreshold = 1e-6;

/// Observer motion of order > n on at least one step. n = 1 checks the
/// observer acceleration directly; n >= 2 checks the (n-1)-th backward
/// difference of the observer acceleration (jerk for n = 2).
inline bool observer_higher_order(const std::vector<KinematicSample>& s, int n) {
  if (n <= 1) {
    for (const auto& k : s) {
      if (k.a_c.norm() > kMotionThreshold) return true;
    }
    return false;
  }
  std::vector<Vec3> d;
  std::vector<double> t;
  for (const auto& k : s) {
    d.push_back(k.a_c);
    t.push_back(k.t);
  }
  for (int order = 1; order <= n - 1; ++order) {
    std::vector<Vec3> next;
    for (std::size_t i = 1; i < d.size(); ++i) next.push_back((d[i] - d[i - 1]) / (t[i + order - 1] - t[i + order - 2]));
    d = std::move(next);
  }
  for (const auto& v : d) {
    if (v.norm() > kMotionThreshold) return true;
  }
  return false;
}

inline bool thrust_orthogonal_accel(const std::vector<KinematicSample>& s) {
  for (const auto& k : s) {
    if (k.h && (projector(*k.h) * (k.a_o - k.a_c)).norm() > kMotionThreshold) return true;
  }
  return false;
}

inline std::vector<StackObservation> to_stack_observations(const std::vector<KinematicSample>& s) {
  std::vector<StackObservation> out;
  out.reserve(s.size());
  for (const auto& k : s) out.push_back({k.t, (k.p_o - k.p_c) / k.alpha, k.p_c, k.h});
  return out;
}

/// Evaluates the analytic conditions and the numeric rank. MAV samples
/// (h present) use the second-order stack with the first sample's h and
/// target order 2; common targets use the first-order stack and order 1.
inline ObservabilityVerdict check_theorem_conditions(const std::vector<KinematicSample>& samples, double g = 9.81) {
  if (samples.size() < 3) throw Error(ErrorCode::InsufficientObservations, "need at least three samples");
  const bool mav = samples.front().h.has_value();
  const int order = mav ? 2 : 1;
  const auto obs = to_stack_observations(samples);
  const ObservationStack st = mav ? build_second_order_stack(obs, *samples.front().h, g) : build_first_order_stack(obs);
  const RankInfo ri = rank_info(st.matrix);

  ObservabilityVerdict v;
  v.numeric_rank = ri.rank;
  v.cols = ri.cols;
  v.sigma_min = ri.sigma_min;
  v.sigma_max = ri.sigma_max;
  v.observable = ri.full();
  v.cond_a = observer_higher_order(samples, order);
  v.cond_b = mav && thrust_orthogonal_accel(samples);
  v.condition_triggered = v.cond_a   ? ConditionTriggered::HigherOrderMotion
                          : v.cond_b ? ConditionTriggered::ThrustOrthogonalAccel
                                     : ConditionTriggered::None;
  v.disagreement = v.observable != (v.cond_a || v.cond_b);
  return v;
}

}  // namespace bbx
