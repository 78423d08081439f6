#include <gtest/gtest.h>

#include <random>

#include "laserguide/demo.hpp"
#include "laserguide/error.hpp"
#include "laserguide/mesh.hpp"
#include "laserguide/workcell.hpp"
#include "support.hpp"

using namespace laserguide;
using geom::Vec3;
using workcell::TriMesh;

namespace {

const char* kBoxMesh = R"({
  "vertices": [[0,0,0],[1,0,0],[1,1,0],[0,1,0],[0,0,1],[1,0,1],[1,1,1],[0,1,1]],
  "triangles": [[0,2,1],[0,3,2],[4,5,6],[4,6,7],[0,1,5],[0,5,4],
                [3,7,6],[3,6,2],[0,4,7],[0,7,3],[1,2,6],[1,6,5]]
})";

std::string minimal_cell(const std::string& target_point = "[0.5, 0.5, 1.0]",
                         const std::string& direction = "[1, 0, 0]",
                         const std::string& fixtures =
                             R"([{"name":"A","point":[0,0,0]},{"name":"B","point":[1,0,0]},{"name":"C","point":[0,1,1]}])") {
  return std::string(R"({"version": 1, "mesh": )") + kBoxMesh + R"(,
    "targets": [{"id": "T1", "group": "outer", "point": )" + target_point + R"(, "direction": )" +
         direction + R"(}],
    "fixtures": )" + fixtures + R"(,
    "stations": [{"xyz": [3.0, 0.5, 0.0], "yaw_deg": 180}]})";
}

template <typename F>
Error expect_error(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected an Error";
  return Error(Errc::IoError, "none");
}

// Independent Moller-Trumbore over every triangle, two-sided, nearest first
// and lowest triangle id among exact ties.
std::optional<std::pair<int, double>> brute_hit(const TriMesh& mesh, const geom::Ray& ray) {
  std::optional<std::pair<int, double>> best;
  for (int i = 0; i < static_cast<int>(mesh.size()); ++i) {
    const Vec3 a = mesh.corner(i, 0), b = mesh.corner(i, 1), c = mesh.corner(i, 2);
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 p = ray.direction.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-14) continue;
    const Vec3 s = ray.origin - a;
    const double u = s.dot(p) / det;
    if (u < 0 || u > 1) continue;
    const Vec3 q = s.cross(e1);
    const double v = ray.direction.dot(q) / det;
    if (v < 0 || u + v > 1) continue;
    const double t = e2.dot(q) / det;
    if (t <= 1e-9) continue;
    if (!best || t < best->second) best = std::make_pair(i, t);
  }
  return best;
}

}  // namespace

TEST(LoadWorkcell, MinimalFileCounts) {
  const auto cell = workcell::parse_workcell(minimal_cell(), ".");
  EXPECT_EQ(cell.mesh.size(), 12u);
  EXPECT_EQ(cell.targets.size(), 1u);
  EXPECT_EQ(cell.fixtures.size(), 3u);
  EXPECT_EQ(cell.candidate_stations.size(), 1u);
  EXPECT_EQ(cell.fixture_sets.size(), 1u);
  EXPECT_EQ(cell.targets[0].tolerance_pos, 0.005);
}

TEST(LoadWorkcell, TargetOffSurfaceNamesTarget) {
  const auto e = expect_error([] { workcell::parse_workcell(minimal_cell("[0.5, 0.5, 1.02]"), "."); });
  EXPECT_EQ(e.code(), Errc::ValidationError);
  EXPECT_EQ(e.subject(), "T1");
}

TEST(LoadWorkcell, DirectionMustBeTangent) {
  const auto e = expect_error([] { workcell::parse_workcell(minimal_cell("[0.5, 0.5, 1.0]", "[1, 0, 0.01]"), "."); });
  EXPECT_EQ(e.code(), Errc::ValidationError);
  EXPECT_EQ(e.subject(), "T1");
}

TEST(LoadWorkcell, CollinearFixturesRejected) {
  const auto e = expect_error([] {
    workcell::parse_workcell(
        minimal_cell("[0.5, 0.5, 1.0]", "[1, 0, 0]",
                     R"([{"name":"A","point":[0,0,0]},{"name":"B","point":[1,0,0]},{"name":"C","point":[2,0,0]}])"),
        ".");
  });
  EXPECT_EQ(e.code(), Errc::ValidationError);
}

TEST(LoadWorkcell, MalformedTextIsParseError) {
  EXPECT_EQ(expect_error([] { workcell::parse_workcell("{\"version\": 1, ", "."); }).code(), Errc::ParseError);
  EXPECT_EQ(expect_error([] { workcell::parse_workcell("{\"version\": 2}", "."); }).code(), Errc::ParseError);
}

TEST(LoadWorkcell, DuplicateTargetIds) {
  auto text = minimal_cell();
  const auto pos = text.find("\"targets\": [");
  text.insert(pos + 12, R"({"id": "T1", "group": "outer", "point": [0.2, 0.2, 1.0], "direction": [0, 1, 0]},)");
  const auto e = expect_error([&] { workcell::parse_workcell(text, "."); });
  EXPECT_EQ(e.code(), Errc::ValidationError);
  EXPECT_EQ(e.subject(), "T1");
}

TEST(LoadWorkcell, DemoBedframeHas17InnerAnd36Outer) {
  const auto cell = demo::bedframe_workcell();
  int inner = 0, outer = 0;
  for (const auto& t : cell.targets) (t.group == workcell::TargetGroup::Inner ? inner : outer)++;
  EXPECT_EQ(cell.targets.size(), 53u);
  EXPECT_EQ(inner, 17);
  EXPECT_EQ(outer, 36);
}

TEST(LoadWorkcell, RoundTripIsStable) {
  const auto cell = demo::bedframe_workcell();
  const auto text = workcell::serialize_workcell(cell);
  const auto again = workcell::parse_workcell(text, ".");
  ASSERT_EQ(again.targets.size(), cell.targets.size());
  for (std::size_t i = 0; i < cell.targets.size(); ++i) {
    EXPECT_EQ(again.targets[i].id, cell.targets[i].id);
    EXPECT_EQ(again.targets[i].point, cell.targets[i].point);
    EXPECT_LE((again.targets[i].direction - cell.targets[i].direction).norm(), 1e-15);
  }
  ASSERT_EQ(again.candidate_stations.size(), cell.candidate_stations.size());
  for (std::size_t i = 0; i < cell.candidate_stations.size(); ++i) {
    EXPECT_LE((again.candidate_stations[i].translation - cell.candidate_stations[i].translation).norm(), 1e-12);
    EXPECT_LE(geom::angular_distance(again.candidate_stations[i].rotation, cell.candidate_stations[i].rotation),
              1e-12);
  }
  EXPECT_EQ(again.mesh.vertices(), cell.mesh.vertices());
  EXPECT_EQ(again.mesh.triangles(), cell.mesh.triangles());
}

TEST(Workcell, DigestTracksContent) {
  auto cell = demo::bedframe_workcell();
  const auto d0 = cell.digest();
  EXPECT_EQ(d0, demo::bedframe_workcell().digest());
  cell.targets[0].tolerance_pos = 0.004;
  EXPECT_NE(cell.digest(), d0);
}

TEST(Workcell, GeneratedStationsAreUprightRingFacingCenter) {
  const auto mesh = demo::bedframe_mesh();
  const auto p = demo::station_params();
  const auto stations = workcell::generate_stations(mesh, p);
  ASSERT_FALSE(stations.empty());
  const auto box = mesh.bounds();
  const Vec3 c = box.center();
  for (const auto& s : stations) {
    EXPECT_LE((s.rotation * Vec3::UnitZ() - Vec3::UnitZ()).norm(), 1e-12);
    EXPECT_NEAR(s.translation.z(), p.height, 1e-12);
    const double dx = std::max({box.min().x() - s.translation.x(), 0.0, s.translation.x() - box.max().x()});
    const double dy = std::max({box.min().y() - s.translation.y(), 0.0, s.translation.y() - box.max().y()});
    const double d = std::hypot(dx, dy);
    EXPECT_GE(d, p.min_offset - 1e-9);
    EXPECT_LE(d, p.max_offset + 1e-9);
    Vec3 to_center = c - s.translation;
    to_center.z() = 0;
    EXPECT_GT((s.rotation * Vec3::UnitX()).dot(to_center.normalized()), 1.0 - 1e-9);
  }
}

TEST(TriMesh, RejectsBadIndexAndDegenerateTriangle) {
  const std::vector<Vec3> v = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  EXPECT_THROW(TriMesh(v, {{0, 1, 3}}), Error);
  EXPECT_THROW(TriMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)}, {{0, 1, 2}}), Error);
}

TEST(RayHit, SquareStraightDown) {
  const TriMesh sq({Vec3(-1, -1, 0), Vec3(1, -1, 0), Vec3(1, 1, 0), Vec3(-1, 1, 0)}, {{0, 1, 2}, {0, 2, 3}});
  const auto hit = sq.ray_hit(geom::Ray::make(Vec3(0, 0, 2), Vec3(0, 0, -1)));
  ASSERT_TRUE(hit);
  EXPECT_LE(hit->point.norm(), 1e-15);
  EXPECT_DOUBLE_EQ(hit->distance, 2.0);
  EXPECT_FALSE(sq.ray_hit(geom::Ray::make(Vec3(0, 0, 2), Vec3(0, 0, 1))));
}

TEST(RayHit, MatchesBruteForceOnDemoMesh) {
  const auto mesh = demo::bedframe_mesh();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-5, 5);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 origin(u(rng), u(rng), u(rng) * 0.5 + 1.0);
    // Half the rays aim at a random point inside the box so most of them hit.
    const Vec3 aim = i % 2 ? Vec3(u(rng) * 0.4, u(rng) * 0.3, 0.6 + u(rng) * 0.1) : origin + testsupport::random_unit(rng);
    if ((aim - origin).norm() < 1e-9) continue;
    const auto ray = geom::Ray::make(origin, aim - origin);
    const auto got = mesh.ray_hit(ray);
    const auto ref = brute_hit(mesh, ray);
    ASSERT_EQ(got.has_value(), ref.has_value()) << "ray " << i;
    if (!got) continue;
    ++hits;
    EXPECT_NEAR(got->distance, ref->second, 1e-9);
    if (std::abs(got->distance - ref->second) > 1e-12) continue;
    if (got->triangle != ref->first) {
      // Only acceptable for a shared edge, where both distances agree.
      EXPECT_NEAR(got->distance, ref->second, 1e-12);
    }
    EXPECT_LE((got->point - ray.at(ref->second)).norm(), 1e-9);
    // The brute-force path in the library agrees exactly.
    const auto lib_brute = mesh.ray_hit_brute_force(ray);
    ASSERT_TRUE(lib_brute);
    EXPECT_EQ(lib_brute->triangle, got->triangle);
    EXPECT_EQ(lib_brute->distance, got->distance);
  }
  EXPECT_GT(hits, 400);
}

TEST(SurfaceFrame, AxisAlignedExamples) {
  const TriMesh flat({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {{0, 1, 2}});
  EXPECT_LE((flat.surface_frame(Vec3(0.2, 0.2, 0), 0).normal - Vec3::UnitZ()).norm(), 1e-15);
  const TriMesh wall({Vec3(0, 0, 0), Vec3(0, 0, 1), Vec3(1, 0, 0)}, {{0, 1, 2}});
  EXPECT_LE((wall.surface_frame(Vec3(0.2, 0, 0.2), 0).normal - Vec3::UnitY()).norm(), 1e-15);
  EXPECT_EQ(expect_error([&] { flat.surface_frame(Vec3::Zero(), 5); }).code(), Errc::BadTriangle);
}

TEST(SurfaceFrame, RandomTrianglesGiveRightHandedFrame) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 500; ++i) {
    const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)), c(u(rng), u(rng), u(rng));
    if ((b - a).cross(c - a).norm() < 1e-3) continue;
    const TriMesh m({a, b, c}, {{0, 1, 2}});
    const auto f = m.surface_frame((a + b + c) / 3.0, 0);
    EXPECT_NEAR(f.normal.dot((b - a).normalized()), 0.0, 1e-12);
    EXPECT_NEAR(f.normal.dot((c - a).normalized()), 0.0, 1e-12);
    EXPECT_GT(f.normal.dot((b - a).cross(c - a)), 0.0);
    EXPECT_LE((f.tangent.cross(f.bitangent) - f.normal).norm(), 1e-12);
  }
}

TEST(MeshText, RoundTripAndNormals) {
  const auto mesh = demo::bedframe_mesh();
  const auto back = workcell::parse_mesh_text(workcell::mesh_to_text(mesh));
  EXPECT_EQ(back.vertices(), mesh.vertices());
  EXPECT_EQ(back.triangles(), mesh.triangles());

  const auto withn = workcell::parse_mesh_text("# tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nt 0 1 2 0 0 -1\n");
  EXPECT_TRUE(withn.has_explicit_normals());
  EXPECT_LE((withn.surface_frame(Vec3(0.1, 0.1, 0), 0).normal + Vec3::UnitZ()).norm(), 1e-15);
}

TEST(MeshText, RejectsMalformedLines) {
  EXPECT_EQ(expect_error([] { workcell::parse_mesh_text("v 0 0\n"); }).code(), Errc::ParseError);
  EXPECT_EQ(expect_error([] { workcell::parse_mesh_text("q 1 2 3\n"); }).code(), Errc::ParseError);
  EXPECT_THROW(workcell::parse_mesh_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nt 0 1 7\n"), Error);
}

TEST(ClosestPoint, AboveBoxFace) {
  const auto cell = workcell::parse_workcell(minimal_cell(), ".");
  const auto cp = cell.mesh.closest_point(Vec3(0.3, 0.6, 1.25));
  EXPECT_NEAR(cp.distance, 0.25, 1e-12);
  EXPECT_LE((cp.point - Vec3(0.3, 0.6, 1.0)).norm(), 1e-12);
}
