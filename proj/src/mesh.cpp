#include "laserguide/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "laserguide/error.hpp"

namespace laserguide::workcell {

namespace {

constexpr double kMinArea = 1e-12;
constexpr double kMinDistance = 1e-9;
constexpr int kLeafSize = 4;

// Lexicographic (distance, triangle id) ordering keeps the winner independent
// of traversal order, so the BVH and the brute-force scan agree exactly.
bool better(double t, int tri, double best_t, int best_tri) {
  return t < best_t || (t == best_t && tri < best_tri);
}

bool ray_box(const Ray& ray, const Eigen::AlignedBox3d& box, double max_t) {
  double lo = 0.0, hi = max_t;
  for (int a = 0; a < 3; ++a) {
    const double d = ray.direction[a];
    if (std::abs(d) < 1e-300) {
      if (ray.origin[a] < box.min()[a] || ray.origin[a] > box.max()[a]) return false;
      continue;
    }
    double t0 = (box.min()[a] - ray.origin[a]) / d;
    double t1 = (box.max()[a] - ray.origin[a]) / d;
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
    if (lo > hi) return false;
  }
  return true;
}

Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

}  // namespace

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> triangles,
                 std::vector<Vec3> explicit_normals)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int nv = static_cast<int>(vertices_.size());
  if (!explicit_normals.empty() && explicit_normals.size() != triangles_.size()) {
    throw Error(Errc::ValidationError, "mesh: normal count does not match triangle count", "mesh");
  }
  explicit_normals_ = !explicit_normals.empty();
  normals_.reserve(triangles_.size());
  for (std::size_t i = 0; i < triangles_.size(); ++i) {
    const std::string name = "triangle " + std::to_string(i);
    for (int idx : triangles_[i]) {
      if (idx < 0 || idx >= nv) {
        throw Error(Errc::ValidationError, "mesh: " + name + " has an index out of range", name);
      }
    }
    const Vec3 cross = (corner(i, 1) - corner(i, 0)).cross(corner(i, 2) - corner(i, 0));
    if (0.5 * cross.norm() <= kMinArea) {
      throw Error(Errc::ValidationError, "mesh: " + name + " is degenerate", name);
    }
    Vec3 n = cross.normalized();
    if (explicit_normals_) {
      const Vec3 given = explicit_normals[i].normalized();
      if (!given.allFinite() || std::abs(std::abs(given.dot(n)) - 1.0) > 1e-6) {
        throw Error(Errc::ValidationError,
                    "mesh: " + name + " normal is not perpendicular to the triangle", name);
      }
      if (given.dot(n) < 0) n = -n;
    }
    normals_.push_back(n);
  }
  order_.resize(triangles_.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * triangles_.size() / kLeafSize + 2);
  if (!triangles_.empty()) build(0, static_cast<int>(triangles_.size()));
}

int TriMesh::build(int first, int count) {
  Node node;
  Eigen::AlignedBox3d centroids;
  for (int i = first; i < first + count; ++i) {
    const int tri = order_[i];
    for (int k = 0; k < 3; ++k) node.box.extend(corner(tri, k));
    centroids.extend((corner(tri, 0) + corner(tri, 1) + corner(tri, 2)) / 3.0);
  }
  const int index = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (count <= kLeafSize) {
    nodes_[index].first = first;
    nodes_[index].count = count;
    return index;
  }
  int axis = 0;
  centroids.sizes().maxCoeff(&axis);
  const int mid = first + count / 2;
  std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                   [&](int a, int b) {
                     const double ca = corner(a, 0)[axis] + corner(a, 1)[axis] + corner(a, 2)[axis];
                     const double cb = corner(b, 0)[axis] + corner(b, 1)[axis] + corner(b, 2)[axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const int left = build(first, mid - first);
  const int right = build(mid, first + count - mid);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

// Möller-Trumbore, two-sided.
bool TriMesh::intersect(const Ray& ray, int tri, double& t) const {
  const Vec3& v0 = corner(tri, 0);
  const Vec3 e1 = corner(tri, 1) - v0;
  const Vec3 e2 = corner(tri, 2) - v0;
  const Vec3 p = ray.direction.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-14) return false;
  const double inv = 1.0 / det;
  const Vec3 s = ray.origin - v0;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 q = s.cross(e1);
  const double v = ray.direction.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  t = e2.dot(q) * inv;
  return t > kMinDistance;
}

std::optional<RayHit> TriMesh::ray_hit(const Ray& ray) const {
  if (nodes_.empty()) return std::nullopt;
  double best_t = std::numeric_limits<double>::infinity();
  int best_tri = -1;
  std::vector<int> stack{0};
  stack.reserve(64);
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (!ray_box(ray, node.box, best_t)) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        double t;
        const int tri = order_[i];
        if (intersect(ray, tri, t) && better(t, tri, best_t, best_tri)) {
          best_t = t;
          best_tri = tri;
        }
      }
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  if (best_tri < 0) return std::nullopt;
  return RayHit{ray.at(best_t), best_tri, best_t};
}

std::optional<RayHit> TriMesh::ray_hit_brute_force(const Ray& ray) const {
  double best_t = std::numeric_limits<double>::infinity();
  int best_tri = -1;
  for (int tri = 0; tri < static_cast<int>(triangles_.size()); ++tri) {
    double t;
    if (intersect(ray, tri, t) && better(t, tri, best_t, best_tri)) {
      best_t = t;
      best_tri = tri;
    }
  }
  if (best_tri < 0) return std::nullopt;
  return RayHit{ray.at(best_t), best_tri, best_t};
}

ClosestPoint TriMesh::closest_point(const Vec3& p) const {
  ClosestPoint best;
  best.distance = std::numeric_limits<double>::infinity();
  for (int tri = 0; tri < static_cast<int>(triangles_.size()); ++tri) {
    const Vec3 c = closest_on_triangle(p, corner(tri, 0), corner(tri, 1), corner(tri, 2));
    const double d = (c - p).norm();
    if (d < best.distance) best = {c, tri, d};
  }
  return best;
}

SurfaceFrame TriMesh::surface_frame(const Vec3& point, int triangle) const {
  if (triangle < 0 || triangle >= static_cast<int>(triangles_.size())) {
    throw Error(Errc::BadTriangle, "no triangle with id " + std::to_string(triangle),
                std::to_string(triangle));
  }
  const Vec3& n = normals_[triangle];
  if (std::abs((point - corner(triangle, 0)).dot(n)) > 1e-3) {
    throw Error(Errc::BadTriangle, "point is off the plane of triangle " + std::to_string(triangle),
                std::to_string(triangle));
  }
  const Vec3 t = (corner(triangle, 1) - corner(triangle, 0)).normalized();
  const Vec3 tangent = (t - t.dot(n) * n).normalized();
  return {n, tangent, n.cross(tangent)};
}

Eigen::AlignedBox3d TriMesh::bounds() const {
  Eigen::AlignedBox3d box;
  for (const auto& v : vertices_) box.extend(v);
  return box;
}

TriMesh parse_mesh_text(const std::string& text) {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3> normals;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool any_normal = false, any_plain = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    const std::string where = "mesh line " + std::to_string(lineno);
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) throw Error(Errc::ParseError, where + ": bad vertex", where);
      if (!v.allFinite()) throw Error(Errc::ParseError, where + ": non-finite vertex", where);
      vertices.push_back(v);
    } else if (tag == "t") {
      std::array<int, 3> t{};
      if (!(ls >> t[0] >> t[1] >> t[2])) throw Error(Errc::ParseError, where + ": bad triangle", where);
      Vec3 n;
      if (ls >> n.x()) {
        if (!(ls >> n.y() >> n.z())) throw Error(Errc::ParseError, where + ": bad normal", where);
        normals.push_back(n);
        any_normal = true;
      } else {
        any_plain = true;
      }
      triangles.push_back(t);
    } else {
      throw Error(Errc::ParseError, where + ": unknown record '" + tag + "'", where);
    }
    std::string rest;
    if (ls.clear(), ls >> rest) throw Error(Errc::ParseError, where + ": trailing tokens", where);
  }
  if (any_normal && any_plain) {
    throw Error(Errc::ParseError, "mesh: normals must be given for all triangles or none", "mesh");
  }
  return TriMesh(std::move(vertices), std::move(triangles), std::move(normals));
}

std::string mesh_to_text(const TriMesh& mesh) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "# laserguide mesh: " << mesh.vertices().size() << " vertices, " << mesh.size()
      << " triangles\n";
  for (const auto& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto& t = mesh.triangles()[i];
    out << "t " << t[0] << ' ' << t[1] << ' ' << t[2];
    if (mesh.has_explicit_normals()) {
      const auto& n = mesh.normals()[i];
      out << ' ' << n.x() << ' ' << n.y() << ' ' << n.z();
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace laserguide::workcell
