#include "laserguide/demo.hpp"

#include <cmath>
#include <cstdio>

namespace laserguide::demo {

using geom::Vec3;
using workcell::TargetGroup;
using workcell::TargetMark;

namespace {

constexpr double kHalfX = 2.0;
constexpr double kHalfY = 1.5;
constexpr double kWall = 1.2;
constexpr double kCrown = 0.3;

double top_height(double y) { return kWall + kCrown * std::cos(geom::kPi * y / (2.0 * kHalfY)); }

struct Builder {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  const Vec3 center{0.0, 0.0, 0.75};

  // grid(i, j) for i in [0, ni], j in [0, nj]; quads split along one diagonal,
  // winding chosen so normals point away from the box center
  template <typename F>
  void patch(int ni, int nj, F&& grid) {
    const int base = static_cast<int>(vertices.size());
    for (int j = 0; j <= nj; ++j) {
      for (int i = 0; i <= ni; ++i) vertices.push_back(grid(i, j));
    }
    auto id = [&](int i, int j) { return base + j * (ni + 1) + i; };
    for (int j = 0; j < nj; ++j) {
      for (int i = 0; i < ni; ++i) {
        add(id(i, j), id(i + 1, j), id(i + 1, j + 1));
        add(id(i, j), id(i + 1, j + 1), id(i, j + 1));
      }
    }
  }

  void add(int a, int b, int c) {
    const Vec3 n = (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a]);
    const Vec3 mid = (vertices[a] + vertices[b] + vertices[c]) / 3.0;
    if (n.dot(mid - center) < 0.0) std::swap(b, c);
    triangles.push_back({a, b, c});
  }
};

}  // namespace

workcell::TriMesh bedframe_mesh() {
  Builder b;
  const int nx = 8, ny = 12, nz = 3;
  b.patch(nx, ny, [&](int i, int j) {
    const double x = -kHalfX + 2.0 * kHalfX * i / nx;
    const double y = -kHalfY + 2.0 * kHalfY * j / ny;
    return Vec3(x, y, top_height(y));
  });
  for (double y : {-kHalfY, kHalfY}) {
    b.patch(nx, nz, [&](int i, int k) {
      return Vec3(-kHalfX + 2.0 * kHalfX * i / nx, y, kWall * k / nz);
    });
  }
  for (double x : {-kHalfX, kHalfX}) {
    b.patch(ny, nz, [&](int j, int k) {
      const double y = -kHalfY + 2.0 * kHalfY * j / ny;
      return Vec3(x, y, top_height(y) * k / nz);
    });
  }
  b.patch(nx, 6, [&](int i, int j) {
    return Vec3(-kHalfX + 2.0 * kHalfX * i / nx, -kHalfY + 2.0 * kHalfY * j / 6, 0.0);
  });
  return workcell::TriMesh(std::move(b.vertices), std::move(b.triangles));
}

workcell::AutoStationParams station_params() {
  workcell::AutoStationParams p;
  p.height = 1.55;
  return p;
}

namespace {

TargetMark make_target(const workcell::TriMesh& mesh, std::string id, TargetGroup group,
                       const Vec3& from, const Vec3& toward, const Vec3& along) {
  const auto hit = mesh.ray_hit(geom::Ray::make(from, toward));
  const Vec3 n = mesh.normals()[hit->triangle];
  TargetMark t;
  t.id = std::move(id);
  t.group = group;
  t.point = hit->point;
  t.direction = (along - along.dot(n) * n).normalized();
  return t;
}

std::string numbered(const char* prefix, int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%s-%02d", prefix, k);
  return buf;
}

}  // namespace

workcell::Workcell bedframe_workcell() {
  workcell::Workcell cell;
  cell.mesh = bedframe_mesh();
  const auto& mesh = cell.mesh;

  const double rows[3] = {-0.95, 0.05, 0.9};
  for (int k = 0; k < 17; ++k) {
    const double x = -1.6 + 3.2 * (k % 6) / 5.0;
    const double y = rows[k / 6];
    const Vec3 along = k % 2 == 0 ? Vec3::UnitX() : Vec3::UnitY();
    cell.targets.push_back(make_target(mesh, numbered("IN", k + 1), TargetGroup::Inner,
                                       {x, y, 3.0}, -Vec3::UnitZ(), along));
  }
  const Vec3 dirs[3] = {Vec3::UnitZ(), Vec3(1, 1, 1).normalized(), Vec3(1, 1, 0).normalized()};
  int k = 0;
  for (double side : {-1.0, 1.0}) {
    for (int i = 0; i < 10; ++i, ++k) {
      const double x = -1.7 + 3.4 * i / 9.0;
      const double z = i % 2 == 0 ? 0.35 : 0.75;
      const Vec3 along = i % 3 == 0 ? Vec3::UnitX() : dirs[i % 3];
      cell.targets.push_back(make_target(mesh, numbered("OUT", k + 1), TargetGroup::Outer,
                                         {x, side * 4.0, z}, {0, -side, 0}, along));
    }
  }
  for (double side : {-1.0, 1.0}) {
    for (int i = 0; i < 8; ++i, ++k) {
      const double y = -1.2 + 2.4 * i / 7.0;
      const double z = i % 2 == 0 ? 0.3 : 0.7;
      const Vec3 along = i % 2 == 0 ? Vec3::UnitY() : Vec3::UnitZ();
      cell.targets.push_back(make_target(mesh, numbered("OUT", k + 1), TargetGroup::Outer,
                                         {side * 4.0, y, z}, {-side, 0, 0}, along));
    }
  }

  cell.fixtures = {
      {"EXT-FL", {-1.8, -1.5, 0.1}}, {"EXT-FR", {1.8, -1.5, 0.1}}, {"EXT-BR", {1.8, 1.5, 0.1}},
      {"EXT-BL", {-1.8, 1.5, 0.1}},  {"EXT-L", {-2.0, 0.0, 0.9}},  {"EXT-R", {2.0, 0.0, 0.9}},
      {"INT-1", {-1.5, -1.0, top_height(-1.0)}}, {"INT-2", {1.5, -1.0, top_height(-1.0)}},
      {"INT-3", {1.5, 1.0, top_height(1.0)}},    {"INT-4", {-1.5, 1.0, top_height(1.0)}},
      {"INT-5", {0.0, 0.0, top_height(0.0)}},
  };
  cell.fixture_sets = {
      {"exterior", {"EXT-FL", "EXT-FR", "EXT-BR", "EXT-BL", "EXT-L", "EXT-R"}, TargetGroup::Outer},
      {"interior", {"INT-1", "INT-2", "INT-3", "INT-4", "INT-5"}, TargetGroup::Inner},
  };
  cell.candidate_stations = workcell::generate_stations(mesh, station_params());
  cell.validate();
  return cell;
}

optics::LaserRig cross_rig() {
  optics::LaserRig rig;
  optics::LaserDevice line;
  line.mount = geom::RigidTransform::from_translation({0.0, 0.0, 0.06});
  line.fan_normal = Vec3::UnitX();
  line.offset = {geom::deg2rad(0.4), geom::deg2rad(-0.25)};
  optics::LaserDevice cross = line;
  cross.fan_normal = Vec3::UnitY();
  cross.offset = {geom::deg2rad(-0.3), geom::deg2rad(0.2)};
  rig.devices = {line, cross};
  return rig;
}

}  // namespace laserguide::demo
