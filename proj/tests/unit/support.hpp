#pragma once

#include <random>

#include <Eigen/Geometry>

#include "laserguide/geom.hpp"
#include "laserguide/mesh.hpp"

namespace testsupport {

using laserguide::geom::RigidTransform;
using laserguide::geom::Rotation;
using laserguide::geom::Vec3;

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

inline Rotation random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-laserguide::geom::kPi, laserguide::geom::kPi);
  return Rotation::from_axis_angle(random_unit(rng), u(rng));
}

inline RigidTransform random_transform(std::mt19937_64& rng, double span = 5.0) {
  std::uniform_real_distribution<double> u(-span, span);
  return {random_rotation(rng), Vec3(u(rng), u(rng), u(rng))};
}

/// Independent rotation-angle oracle: acos((tr R - 1) / 2).
inline double matrix_angle(const Eigen::Matrix3d& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

/// Same angle from the chordal distance, accurate near zero:
/// ||R - I||_F = 2 sqrt(2) sin(theta / 2).
inline double chordal_angle(const Eigen::Matrix3d& r) {
  const double c = (r - Eigen::Matrix3d::Identity()).norm() / (2.0 * std::sqrt(2.0));
  return 2.0 * std::asin(std::min(1.0, c));
}

/// Square of half-width `half` centered at `p` facing `n`.
inline laserguide::workcell::TriMesh plane_mesh(const Vec3& p, const Vec3& n, double half = 50.0) {
  const Vec3 nn = n.normalized();
  const Vec3 u = nn.unitOrthogonal();
  const Vec3 v = nn.cross(u);
  std::vector<Vec3> verts = {p - half * u - half * v, p + half * u - half * v,
                             p + half * u + half * v, p - half * u + half * v};
  return laserguide::workcell::TriMesh(verts, {{0, 1, 2}, {0, 2, 3}});
}

}  // namespace testsupport
