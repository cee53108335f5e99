#pragma once

// Turning one 3D bounding-box detection into scale-free position measurements.

#include <algorithm>
#include <array>
#include <cmath>

#include "bbx/geometry.hpp"

namespace bbx {

/// One frame of 3D detection output: object->camera rotation, normalized
/// dims (1, l2/l1, l3/l1) and the unit-plane projections of the eight
/// corners (vertex_signs() order) and of the centre.
struct Box3DDetection {
  Rotation r_oc;
  Vec3 ldims = Vec3::Ones();
  std::array<UnitPlanePoint, 8> vertices;
  UnitPlanePoint center;

  void validate() const {
    if (ldims(0) != 1.0) throw Error(ErrorCode::InvalidArgument, "normalized dims must start with 1");
    if (!(ldims(1) > 0.0 && ldims(2) > 0.0)) throw Error(ErrorCode::InvalidArgument, "normalized dims must be positive");
  }
};

/// Object position in the camera frame divided by the unknown size alpha.
struct NormalizedRelPos {
  Vec3 pbar = Vec3::Zero();
  double residual = 0.0;
};

/// R_c^w * pbar, i.e. (p_o^w - p_c^w) / alpha.
struct WorldPseudoMeasurement {
  Vec3 tbar = Vec3::Zero();
  double timestamp = 0.0;
};

/// Exact detection for a cuboid seen at `pose_oc`.
inline Box3DDetection make_detection(const Pose& pose_oc, const Cuboid& c) {
  const CuboidProjection proj = project_cuboid(pose_oc, c);
  Box3DDetection d;
  d.r_oc = pose_oc.rotation;
  d.ldims = c.normalized();
  d.vertices = proj.vertices;
  d.center = proj.center;
  return d;
}

/// Least-squares solution of Q_i (R_o^c pbar_i + pbar_o^c) = 0 over the eight
/// corners, with Q_i = I - q_i e3^T. Solved by SVD on the stacked 24x3 system.
/// Throws SingularSystem when sigma_min < 1e-8 sigma_max (collinear corners).
inline NormalizedRelPos normalized_rel_pos(const Box3DDetection& d) {
  d.validate();
  const auto corners = cuboid_vertices(d.ldims);
  Eigen::MatrixXd a(24, 3);
  Eigen::VectorXd b(24);
  for (int i = 0; i < 8; ++i) {
    const Mat3 q = Mat3::Identity() - d.vertices[i].vec() * kE3.transpose();
    a.block<3, 3>(3 * i, 0) = q;
    b.segment<3>(3 * i) = -q * (d.r_oc * corners[i]);
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (!(s(2) >= 1e-8 * s(0)) || s(0) == 0.0) {
    throw Error(ErrorCode::SingularSystem, "projected vertices are collinear");
  }
  NormalizedRelPos out;
  out.pbar = svd.solve(b);
  out.residual = (a * out.pbar - b).norm();
  return out;
}

/// Closed-form normal-equation solution; kept as a cross-check of the SVD path.
inline Vec3 normalized_rel_pos_normal_equations(const Box3DDetection& d) {
  const auto corners = cuboid_vertices(d.ldims);
  Mat3 lhs = Mat3::Zero();
  Vec3 rhs = Vec3::Zero();
  for (int i = 0; i < 8; ++i) {
    const Mat3 q = Mat3::Identity() - d.vertices[i].vec() * kE3.transpose();
    const Mat3 qtq = q.transpose() * q;
    lhs += qtq;
    rhs += qtq * (d.r_oc * corners[i]);
  }
  return -lhs.inverse() * rhs;
}

inline WorldPseudoMeasurement to_world(const NormalizedRelPos& n, const Rotation& r_cw, double t) {
  return {r_cw * n.pbar, t};
}

/// Thrust direction of a multicopter, h = -R_o^w e3.
inline Vec3 thrust_direction(const Rotation& r_ow) { return -(r_ow * kE3); }

/// World-frame unit bearing towards the detected centre.
inline Vec3 bearing_from_center(const UnitPlanePoint& center, const Rotation& r_cw) {
  return r_cw * center.vec().normalized();
}

/// Horizontal angular extent of the detection's 2D bounding box, in radians.
inline double apparent_angle(const std::array<UnitPlanePoint, 8>& vertices) {
  double lo = vertices[0].x(), hi = vertices[0].x();
  for (const auto& v : vertices) {
    lo = std::min(lo, v.x());
    hi = std::max(hi, v.x());
  }
  return std::atan(hi) - std::atan(lo);
}

/// Everything the estimators consume from one detection.
struct DetectionMeasurements {
  WorldPseudoMeasurement tbar;
  Vec3 h = -kE3;
  Vec3 bearing = Vec3::UnitX();
  double angle = 0.0;
};

inline DetectionMeasurements measurements_from_detection(const Box3DDetection& d, const Rotation& r_cw, double t) {
  DetectionMeasurements m;
  m.tbar = to_world(normalized_rel_pos(d), r_cw, t);
  m.h = thrust_direction(r_cw * d.r_oc);
  m.bearing = bearing_from_center(d.center, r_cw);
  m.angle = apparent_angle(d.vertices);
  return m;
}

}  // namespace bbx
