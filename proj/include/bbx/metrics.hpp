#pragma once

// Evaluation metrics over estimate traces: NIDE, NEES and per-axis RMSE.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bbx/error.hpp"
#include "bbx/linalg.hpp"

namespace bbx {

struct TruthState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  double alpha = 1.0;
};

struct TraceRecord {
  double t = 0.0;
  std::optional<TruthState> truth;  // absent when replaying logs without ground truth
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  std::optional<Vec3> a;
  std::optional<double> alpha;
  Eigen::VectorXd cov_diag;
  std::optional<double> depth_true;
  double depth_est = 0.0;
  std::optional<double> nees;
  bool in_fov = true;
};

struct EstimateTrace {
  std::string scenario;
  std::string estimator;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
};

/// Normalized integral depth error: mean over frames of |d_hat - d| / d.
/// Frames without a positive true depth are skipped, as are out-of-FOV
/// frames unless `include_out_of_fov` is set.
inline double nide(const EstimateTrace& trace, bool include_out_of_fov = false) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : trace.records) {
    if (!r.depth_true || !(*r.depth_true > 0.0)) continue;
    if (!r.in_fov && !include_out_of_fov) continue;
    sum += std::abs(r.depth_est - *r.depth_true) / *r.depth_true;
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::EmptyTrace, "no frames with a positive true depth");
  return sum / static_cast<double>(count);
}

struct NeesResult {
  double value = 0.0;
  bool pseudo_inverse_used = false;
};

/// (1/n_x) (x - x_hat)^T P^-1 (x - x_hat). Falls back to the pseudo-inverse
/// when P is singular and reports it.
inline NeesResult nees_checked(const Eigen::VectorXd& truth, const Eigen::VectorXd& est, const Eigen::MatrixXd& cov) {
  if (truth.size() != est.size() || cov.rows() != truth.size() || cov.cols() != truth.size() || truth.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "NEES dimension mismatch");
  }
  const Eigen::VectorXd e = truth - est;
  NeesResult out;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.vectorD().minCoeff() > 0.0 &&
                  ldlt.vectorD().minCoeff() > 1e-14 * ldlt.vectorD().maxCoeff();
  double q;
  if (ok) {
    q = e.dot(ldlt.solve(e));
  } else {
    q = e.dot(pseudo_inverse(cov) * e);
    out.pseudo_inverse_used = true;
  }
  out.value = std::max(0.0, q) / static_cast<double>(e.size());
  return out;
}

inline double nees(const Eigen::VectorXd& truth, const Eigen::VectorXd& est, const Eigen::MatrixXd& cov) {
  return nees_checked(truth, est, cov).value;
}

inline double mean_nees(const EstimateTrace& trace) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : trace.records) {
    if (!r.nees) continue;
    sum += *r.nees;
    ++count;
  }
  return count ? sum / static_cast<double>(count) : std::nan("");
}

/// Root-mean-square position error per world axis over frames with truth.
inline Vec3 axis_errors(const EstimateTrace& trace) {
  Vec3 acc = Vec3::Zero();
  std::size_t count = 0;
  for (const auto& r : trace.records) {
    if (!r.truth) continue;
    acc += (r.p - r.truth->p).cwiseAbs2();
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::EmptyTrace, "no frames with ground truth");
  return (acc / static_cast<double>(count)).cwiseSqrt();
}

}  // namespace bbx
