#pragma once

// Frames, rotations, pinhole projection and the cuboid target model.
//
// Conventions:
//   * world frame has gravity along +z (e3 points "down");
//   * camera frame is x right, y down, z along the optical axis;
//   * object frame has dims (l1, l2, l3) along its x, y, z axes.

#include <array>
#include <cmath>
#include <string>

#include "bbx/error.hpp"
#include "bbx/linalg.hpp"

namespace bbx {

inline const Vec3 kE3 = Vec3::UnitZ();

struct CameraIntrinsics {
  double fx = 600.0;
  double fy = 600.0;
  double cx = 640.0;
  double cy = 360.0;
  double width = 1280.0;
  double height = 720.0;

  void validate() const {
    if (!(fx > 0.0 && fy > 0.0)) throw Error(ErrorCode::InvalidArgument, "focal lengths must be positive");
    if (!(width > 0.0 && height > 0.0)) throw Error(ErrorCode::InvalidArgument, "image size must be positive");
  }
};

/// Proper rotation matrix (R^T R = I, det R = +1).
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  /// Accepts `m` only if it is orthonormal with det +1 to within `tol`.
  static Rotation from_matrix(const Mat3& m, double tol = 1e-9) {
    if (!is_rotation(m, tol)) throw Error(ErrorCode::InvalidArgument, "matrix is not a proper rotation");
    return Rotation(m);
  }

  /// Nearest proper rotation in the Frobenius sense (polar factor via SVD).
  static Rotation nearest(const Mat3& m) {
    const Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 d = Mat3::Identity();
    d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    return Rotation(svd.matrixU() * d * svd.matrixV().transpose());
  }

  static Rotation axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (n < 1e-12) return Rotation();
    return Rotation(Eigen::AngleAxisd(angle, axis / n).toRotationMatrix());
  }

  /// Rotation vector (axis * angle) exponential map.
  static Rotation exp(const Vec3& rotvec) { return axis_angle(rotvec, rotvec.norm()); }

  static Rotation about_x(double a) { return axis_angle(Vec3::UnitX(), a); }
  static Rotation about_y(double a) { return axis_angle(Vec3::UnitY(), a); }
  static Rotation about_z(double a) { return axis_angle(Vec3::UnitZ(), a); }

  static bool is_rotation(const Mat3& m, double tol = 1e-9) {
    return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(m.determinant() - 1.0) <= tol;
  }

  const Mat3& matrix() const { return m_; }
  Rotation inverse() const { return Rotation(m_.transpose()); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_); }

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

enum class Frame { World, Camera, Object };

inline const char* to_string(Frame f) {
  switch (f) {
    case Frame::World: return "world";
    case Frame::Camera: return "camera";
    case Frame::Object: return "object";
  }
  return "?";
}

/// Rigid transform mapping coordinates in `from` to coordinates in `to`:
/// x_to = rotation * x_from + translation.
struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();
  Frame from = Frame::Object;
  Frame to = Frame::Camera;

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
};

struct Cuboid {
  Vec3 dims = Vec3::Ones();  // (l1, l2, l3) in meters

  Cuboid() = default;
  explicit Cuboid(const Vec3& d) : dims(d) { validate(); }
  Cuboid(double l1, double l2, double l3) : Cuboid(Vec3(l1, l2, l3)) {}

  void validate() const {
    if (!(dims.minCoeff() > 0.0)) throw Error(ErrorCode::InvalidArgument, "cuboid dims must be positive");
  }
  /// Scale factor alpha used for normalization (the first dimension).
  double alpha() const { return dims(0); }
  /// Normalized dims (1, l2/l1, l3/l1).
  Vec3 normalized() const { return dims / dims(0); }
};

/// Point on the normalized image plane z = 1.
class UnitPlanePoint {
 public:
  UnitPlanePoint() : q_(0.0, 0.0, 1.0) {}
  UnitPlanePoint(double x, double y) : q_(x, y, 1.0) {}

  double x() const { return q_.x(); }
  double y() const { return q_.y(); }
  const Vec3& vec() const { return q_; }

 private:
  Vec3 q_;
};

/// Corner sign pattern for vertex `i`: bit 2 flips x, bit 1 flips y, bit 0
/// flips z. Vertex 0 is (+,+,+), vertex 1 is (+,+,-), ..., vertex 7 (-,-,-).
inline Vec3 vertex_signs(int i) {
  return Vec3((i & 4) ? -1.0 : 1.0, (i & 2) ? -1.0 : 1.0, (i & 1) ? -1.0 : 1.0);
}

/// Eight object-frame corners of a cuboid centred at the origin, ordered
/// per vertex_signs().
inline std::array<Vec3, 8> cuboid_vertices(const Vec3& dims) {
  std::array<Vec3, 8> v;
  for (int i = 0; i < 8; ++i) v[i] = vertex_signs(i).cwiseProduct(0.5 * dims);
  return v;
}

inline std::array<Vec3, 8> cuboid_vertices(const Cuboid& c) { return cuboid_vertices(c.dims); }

inline UnitPlanePoint pixel_to_unit_plane(double mx, double my, const CameraIntrinsics& k) {
  return UnitPlanePoint((mx - k.cx) / k.fx, (my - k.cy) / k.fy);
}

inline std::array<double, 2> unit_plane_to_pixel(const UnitPlanePoint& q, const CameraIntrinsics& k) {
  return {k.fx * q.x() + k.cx, k.fy * q.y() + k.cy};
}

/// Perspective projection onto the unit plane. Throws NonPositiveDepth when
/// the point is not in front of the camera.
inline UnitPlanePoint project_point(const Vec3& p_c) {
  const double depth = p_c.z();
  if (!(depth > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "point depth " + std::to_string(depth));
  return UnitPlanePoint(p_c.x() / depth, p_c.y() / depth);
}

struct CuboidProjection {
  std::array<UnitPlanePoint, 8> vertices;
  UnitPlanePoint center;
};

/// Projects the cuboid corners and centre given the object->camera pose.
inline CuboidProjection project_cuboid(const Pose& pose_oc, const Cuboid& c) {
  CuboidProjection out;
  const auto corners = cuboid_vertices(c);
  for (int i = 0; i < 8; ++i) {
    const Vec3 p = pose_oc.apply(corners[i]);
    if (!(p.z() > 0.0)) {
      throw Error(ErrorCode::NonPositiveDepth, "vertex " + std::to_string(i) + " has depth " + std::to_string(p.z()));
    }
    out.vertices[i] = project_point(p);
  }
  if (!(pose_oc.translation.z() > 0.0)) {
    throw Error(ErrorCode::NonPositiveDepth, "center has depth " + std::to_string(pose_oc.translation.z()));
  }
  out.center = project_point(pose_oc.translation);
  return out;
}

/// Camera->world rotation whose optical axis points from `eye` to `target`,
/// image y axis as close to world +z (down) as possible.
inline Rotation look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 d = target - eye;
  if (d.norm() < 1e-12) return Rotation();
  const Vec3 z = d.normalized();
  Vec3 x = kE3.cross(z);
  if (x.norm() < 1e-9) x = Vec3::UnitX().cross(z);  // looking straight up or down
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return Rotation::from_matrix(r, 1e-9);
}

}  // namespace bbx
