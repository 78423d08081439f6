#include "laserguide/geom.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace laserguide::geom {

Rotation::Rotation(const Eigen::Quaterniond& q) : q_(q.normalized()) {
  if (q_.w() < 0.0) q_.coeffs() = -q_.coeffs();
}

Rotation Rotation::from_axis_angle(const Vec3& axis, double angle) {
  return Rotation(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())));
}

Rotation Rotation::from_matrix(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 u = svd.matrixU();
    u.col(2) = -u.col(2);
    r = u * svd.matrixV().transpose();
  }
  return Rotation(Eigen::Quaterniond(r));
}

Rotation Rotation::from_quaternion(const Eigen::Quaterniond& q) { return Rotation(q); }

Rotation Rotation::from_rpy(double roll, double pitch, double yaw) {
  return rot_z(yaw) * rot_y(pitch) * rot_x(roll);
}

Vec3 Rotation::rpy() const {
  const Mat3 m = matrix();
  const double pitch = std::atan2(-m(2, 0), std::hypot(m(0, 0), m(1, 0)));
  double roll = 0.0;
  double yaw = 0.0;
  if (std::hypot(m(0, 0), m(1, 0)) > 1e-12) {
    roll = std::atan2(m(2, 1), m(2, 2));
    yaw = std::atan2(m(1, 0), m(0, 0));
  } else {
    // gimbal lock: fold everything into yaw
    yaw = std::atan2(-m(0, 1), m(1, 1));
  }
  return {roll, pitch, yaw};
}

Rotation Rotation::operator*(const Rotation& other) const { return Rotation(q_ * other.q_); }

Rotation Rotation::inverse() const { return Rotation(q_.conjugate()); }

Vec3 Rotation::log() const {
  const Vec3 v = q_.vec();
  const double s = v.norm();
  if (s < 1e-300) return Vec3::Zero();
  // q_.w() >= 0 so the angle is in [0, pi]
  const double angle = 2.0 * std::atan2(s, q_.w());
  return v * (angle / s);
}

Rotation rot_x(double angle) { return Rotation::from_axis_angle(Vec3::UnitX(), angle); }
Rotation rot_y(double angle) { return Rotation::from_axis_angle(Vec3::UnitY(), angle); }
Rotation rot_z(double angle) { return Rotation::from_axis_angle(Vec3::UnitZ(), angle); }

Rotation rotation_between(const Vec3& a_in, const Vec3& b_in) {
  const Vec3 a = a_in.normalized();
  const Vec3 b = b_in.normalized();
  const Vec3 axis = a.cross(b);
  const double s = axis.norm();
  const double c = a.dot(b);
  if (s < 1e-12 && c > 0.0) return Rotation::identity();
  if (s < 1e-12) {
    int pick = 0;
    for (int i = 1; i < 3; ++i) {
      if (std::abs(a[i]) < std::abs(a[pick])) pick = i;
    }
    Vec3 perp = Vec3::Unit(pick);
    perp = (perp - perp.dot(a) * a).normalized();
    return Rotation::from_axis_angle(perp, kPi);
  }
  return Rotation::from_axis_angle(axis / s, std::atan2(s, c));
}

double angular_distance(const Rotation& a, const Rotation& b) {
  return (a.inverse() * b).angle();
}

Eigen::Isometry3d RigidTransform::isometry() const {
  Eigen::Isometry3d iso = Eigen::Isometry3d::Identity();
  iso.linear() = rotation.matrix();
  iso.translation() = translation;
  return iso;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

RigidTransform invert(const RigidTransform& t) {
  const Rotation inv = t.rotation.inverse();
  return {inv, -(inv * t.translation)};
}

Vec3 apply(const RigidTransform& t, const Vec3& p) { return t.rotation * p + t.translation; }

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

double line_angle(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), std::abs(a.dot(b)));
}

double collinearity_spread(const std::vector<Vec3>& points) {
  if (points.size() < 2) return 0.0;
  Vec3 mean = Vec3::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::MatrixX3d centered(points.size(), 3);
  for (std::size_t i = 0; i < points.size(); ++i) centered.row(i) = (points[i] - mean).transpose();
  // rms distance along the second principal axis
  Eigen::JacobiSVD<Eigen::MatrixX3d> svd(centered);
  return svd.singularValues()[1] / std::sqrt(static_cast<double>(points.size()));
}

}  // namespace laserguide::geom
