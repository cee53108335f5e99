#pragma once

// Small dense helpers shared by the estimators and the rank analysis.

#include <Eigen/Dense>

#include <algorithm>
#include <limits>

namespace bbx {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
}

/// Standard SVD rank rule: count sigma > max(rows, cols) * eps * reference.
/// `reference` defaults to the largest singular value of `m`.
inline int numeric_rank(const Eigen::MatrixXd& m, double reference = -1.0) {
  const Eigen::VectorXd s = singular_values(m);
  if (s.size() == 0) return 0;
  const double ref = reference > 0.0 ? reference : s(0);
  const double tol = static_cast<double>(std::max(m.rows(), m.cols())) * kEps * ref;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) ++rank;
  }
  return rank;
}

/// Moore-Penrose pseudo-inverse via SVD with the same cut-off as numeric_rank.
template <typename Derived>
Eigen::Matrix<double, Derived::ColsAtCompileTime, Derived::RowsAtCompileTime> pseudo_inverse(
    const Eigen::MatrixBase<Derived>& m) {
  using Result = Eigen::Matrix<double, Derived::ColsAtCompileTime, Derived::RowsAtCompileTime>;
  using Full = Eigen::Matrix<double, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
  const Eigen::JacobiSVD<Full> svd(m.eval(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Result out = Result::Zero(m.cols(), m.rows());
  if (s.size() == 0 || s(0) == 0.0) return out;
  const double tol = static_cast<double>(std::max(m.rows(), m.cols())) * kEps * s(0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) {
      out.noalias() += (svd.matrixV().col(i) / s(i)) * svd.matrixU().col(i).transpose();
    }
  }
  return out;
}

template <typename Derived>
void symmetrize(Eigen::MatrixBase<Derived>& m) {
  m = (0.5 * (m + m.transpose())).eval();
}

}  // namespace bbx
