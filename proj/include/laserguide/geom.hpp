#pragma once

#include <vector>

#include <Eigen/Geometry>

namespace laserguide::geom {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Proper 3D rotation stored as a unit quaternion. Every constructor and
/// composition renormalizes, so long chains stay orthonormal.
class Rotation {
 public:
  Rotation() = default;

  static Rotation identity() { return {}; }
  static Rotation from_axis_angle(const Vec3& axis, double angle);
  /// `m` must be orthonormal with det +1; it is projected onto SO(3).
  static Rotation from_matrix(const Mat3& m);
  static Rotation from_quaternion(const Eigen::Quaterniond& q);
  /// Fixed-axis roll (x), pitch (y), yaw (z): R = Rz(yaw) Ry(pitch) Rx(roll).
  static Rotation from_rpy(double roll, double pitch, double yaw);

  Mat3 matrix() const { return q_.toRotationMatrix(); }
  const Eigen::Quaterniond& quaternion() const { return q_; }
  Vec3 rpy() const;

  Vec3 operator*(const Vec3& v) const { return q_ * v; }
  Rotation operator*(const Rotation& other) const;
  Rotation inverse() const;

  /// Rotation vector (axis * angle), angle in [0, pi].
  Vec3 log() const;
  double angle() const { return log().norm(); }

 private:
  explicit Rotation(const Eigen::Quaterniond& q);
  Eigen::Quaterniond q_ = Eigen::Quaterniond::Identity();
};

Rotation rot_x(double angle);
Rotation rot_y(double angle);
Rotation rot_z(double angle);

/// Rotation taking unit vector `a` onto unit vector `b` with minimal angle.
/// Antiparallel inputs turn 180 degrees about the coordinate axis least
/// aligned with `a` (lowest index on ties), projected perpendicular to `a`.
Rotation rotation_between(const Vec3& a, const Vec3& b);

/// Angle of the relative rotation a^-1 b.
double angular_distance(const Rotation& a, const Rotation& b);

struct RigidTransform {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) { return {Rotation{}, t}; }
  static RigidTransform from_rotation(const Rotation& r) { return {r, Vec3::Zero()}; }

  Eigen::Isometry3d isometry() const;
};

/// a∘b: apply b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);
Vec3 apply(const RigidTransform& t, const Vec3& p);

inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  return compose(a, b);
}

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();

  /// Normalizes `direction`.
  static Ray make(const Vec3& origin, const Vec3& direction) {
    return {origin, direction.normalized()};
  }
  Vec3 at(double t) const { return origin + t * direction; }
};

/// Unsigned angle between two vectors, robust near 0 and pi.
double angle_between(const Vec3& a, const Vec3& b);

/// Unsigned angle between two lines (direction sign ignored), in [0, pi/2].
double line_angle(const Vec3& a, const Vec3& b);

/// RMS spread of a point set along its second principal direction, in
/// meters. Near zero for collinear (or coincident) sets.
double collinearity_spread(const std::vector<Vec3>& points);

}  // namespace laserguide::geom
