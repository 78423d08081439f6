#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "laserguide/geom.hpp"

namespace laserguide::workcell {

using geom::Ray;
using geom::Vec3;

struct RayHit {
  Vec3 point;
  int triangle = -1;
  double distance = 0.0;
};

struct SurfaceFrame {
  Vec3 normal;    // outward
  Vec3 tangent;   // along the triangle's first edge
  Vec3 bitangent; // normal x tangent
};

struct ClosestPoint {
  Vec3 point;
  int triangle = -1;
  double distance = 0.0;
};

/// Indexed triangle mesh with a bounding-volume hierarchy for ray queries.
/// Outward normals follow counter-clockwise winding unless given explicitly.
class TriMesh {
 public:
  TriMesh() = default;

  /// Throws ValidationError on out-of-range indices, degenerate triangles
  /// (area <= 1e-12 m^2) or explicit normals that are not perpendicular.
  TriMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles,
          std::vector<Vec3> explicit_normals = {});

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Vec3>& normals() const { return normals_; }
  bool has_explicit_normals() const { return explicit_normals_; }
  std::size_t size() const { return triangles_.size(); }

  const Vec3& corner(int tri, int k) const { return vertices_[triangles_[tri][k]]; }

  /// Nearest hit with distance > 1e-9 along the ray.
  std::optional<RayHit> ray_hit(const Ray& ray) const;
  /// Same contract as ray_hit, scanning every triangle.
  std::optional<RayHit> ray_hit_brute_force(const Ray& ray) const;

  ClosestPoint closest_point(const Vec3& p) const;

  /// Throws BadTriangle for an invalid id or a point off the triangle's plane.
  SurfaceFrame surface_frame(const Vec3& point, int triangle) const;

  Eigen::AlignedBox3d bounds() const;

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    int left = -1;   // child indices, -1 for leaves
    int right = -1;
    int first = 0;   // leaf range in order_
    int count = 0;
  };

  int build(int first, int count);
  bool intersect(const Ray& ray, int tri, double& t) const;

  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Vec3> normals_;
  bool explicit_normals_ = false;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

/// Plain-text triangle list:
///   # comment
///   v <x> <y> <z>
///   t <i> <j> <k> [<nx> <ny> <nz>]
/// Indices are 0-based into the preceding vertex lines.
TriMesh parse_mesh_text(const std::string& text);
std::string mesh_to_text(const TriMesh& mesh);

}  // namespace laserguide::workcell
