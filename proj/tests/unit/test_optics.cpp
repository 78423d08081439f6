#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "laserguide/demo.hpp"
#include "laserguide/error.hpp"
#include "laserguide/optics.hpp"
#include "support.hpp"

using namespace laserguide;
using geom::deg2rad;
using geom::RigidTransform;
using geom::Vec3;
using optics::LaserDevice;
using testsupport::plane_mesh;
using workcell::TriMesh;

namespace {

// Ray/plane intersection written out directly.
Vec3 hit_plane(const geom::Ray& r, const Vec3& p, const Vec3& n) {
  const double t = (p - r.origin).dot(n) / r.direction.dot(n);
  return r.origin + t * r.direction;
}

workcell::TargetMark mark_at(const Vec3& p, const Vec3& d) {
  workcell::TargetMark m;
  m.id = "M";
  m.point = p;
  m.direction = d.normalized();
  return m;
}

// Tool pose putting the nominal beam of `dev` from `origin` through `target`.
RigidTransform aim_tool(const Vec3& origin, const Vec3& target, const Vec3& line,
                        const LaserDevice& dev) {
  return optics::tool_for_device(optics::aim_device(origin, target, line, dev, false), dev);
}

}  // namespace

TEST(BeamRay, IdentityFollowsDeviceZ) {
  const LaserDevice dev;
  const auto r = optics::beam_ray(RigidTransform{}, dev);
  EXPECT_LE(r.origin.norm(), 1e-15);
  EXPECT_LE((r.direction - Vec3::UnitZ()).norm(), 1e-15);
}

TEST(BeamRay, OneDegreePitchDisplacesSpotByTangent) {
  LaserDevice dev;
  dev.offset.pitch = deg2rad(1.0);
  const auto r = optics::beam_ray(RigidTransform{}, dev);
  const Vec3 spot = hit_plane(r, Vec3(0, 0, 2), Vec3::UnitZ());
  const double shift = (spot - Vec3(0, 0, 2)).norm();
  EXPECT_NEAR(shift, 2.0 * std::tan(deg2rad(1.0)), 1e-12);
  EXPECT_NEAR(shift, 0.0349, 1e-4);
}

TEST(BeamRay, CompensationRotationRestoresNominal) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-deg2rad(4.9), deg2rad(4.9));
  for (int k = 0; k < 100; ++k) {
    LaserDevice dev;
    dev.mount = testsupport::random_transform(rng, 0.1);
    dev.offset = {u(rng), u(rng)};
    LaserDevice nominal = dev;
    nominal.offset = {};
    const RigidTransform tool = testsupport::random_transform(rng);
    const RigidTransform comp = dev.mount *
                                RigidTransform::from_rotation(dev.offset.rotation().inverse()) *
                                geom::invert(dev.mount);
    const auto a = optics::beam_ray(tool * comp, dev);
    const auto b = optics::beam_ray(tool, nominal);
    EXPECT_LE((a.direction - b.direction).norm(), 1e-12);
    EXPECT_LE((a.origin - b.origin).norm(), 1e-12);
  }
}

TEST(BeamOffset, FiveDegreesIsImplausible) {
  EXPECT_NO_THROW((optics::BeamOffset{deg2rad(4.99), -deg2rad(4.99)}.validate()));
  try {
    optics::BeamOffset{0.0, deg2rad(5.0)}.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Implausible);
  }
}

TEST(ProjectMark, FloorExample) {
  const TriMesh floor = plane_mesh(Vec3::Zero(), Vec3::UnitZ());
  LaserDevice dev;
  dev.fan_normal = Vec3::UnitY();
  const RigidTransform tool{geom::rot_x(geom::kPi), Vec3(0, 0, 2)};
  const auto m = optics::project_mark(tool, dev, floor);
  EXPECT_LE(m.point.norm(), 1e-12);
  EXPECT_NEAR(std::abs(m.direction.x()), 1.0, 1e-12);
  EXPECT_NEAR(m.range, 2.0, 1e-12);
}

TEST(ProjectMark, BeyondRangeAndMiss) {
  LaserDevice dev;
  dev.fan_normal = Vec3::UnitY();
  const RigidTransform tool{geom::rot_x(geom::kPi), Vec3(0, 0, 12)};
  const TriMesh floor = plane_mesh(Vec3::Zero(), Vec3::UnitZ());
  try {
    optics::project_mark(tool, dev, floor);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OutOfRange);
  }
  try {
    optics::project_mark(RigidTransform{geom::Rotation{}, Vec3(0, 0, 2)}, dev, floor);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoHit);
  }
}

TEST(ProjectMark, DirectionLiesInBothPlanesOverDemoMesh) {
  const auto cell = demo::bedframe_workcell();
  const auto rig = demo::cross_rig();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-geom::kPi, geom::kPi), dist(2.5, 5.0), h(0.5, 2.5);
  int checked = 0;
  for (int k = 0; k < 400; ++k) {
    const double a = ang(rng), d = dist(rng);
    const Vec3 origin(d * std::cos(a), d * std::sin(a), h(rng));
    const Vec3 aim = Vec3(0, 0, 1.0) + 0.5 * testsupport::random_unit(rng);
    const Vec3 beam = (aim - origin).normalized();
    const RigidTransform dev_pose{geom::rotation_between(Vec3::UnitZ(), beam) *
                                      geom::Rotation::from_axis_angle(Vec3::UnitZ(), ang(rng)),
                                  origin};
    const auto& dev = rig.devices[k % rig.devices.size()];
    const RigidTransform tool = optics::tool_for_device(dev_pose, dev);
    try {
      const auto m = optics::project_mark(tool, dev, cell.mesh);
      const Vec3& tri_n = cell.mesh.normals()[m.triangle];
      EXPECT_LE(std::abs(m.direction.dot(tri_n)), 1e-9);
      EXPECT_LE(std::abs(m.direction.dot(optics::light_plane_normal(tool, dev))), 1e-9);
      EXPECT_NEAR(m.direction.norm(), 1.0, 1e-12);
      EXPECT_LE(cell.mesh.closest_point(m.point).distance, 1e-9);
      EXPECT_LE(m.range, dev.max_range);
      ++checked;
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == Errc::NoHit || e.code() == Errc::Grazing);
    }
  }
  EXPECT_GT(checked, 300);
}

TEST(AimDevice, NominalBeamHitsTargetWithLineInPlane) {
  const TriMesh wall = plane_mesh(Vec3(3, 0, 0), -Vec3::UnitX());
  LaserDevice dev;
  dev.offset = {deg2rad(0.7), deg2rad(-1.1)};
  const Vec3 target(3, 0.2, 0.4), line = Vec3(0, 1, 1).normalized();
  const RigidTransform tool = aim_tool(Vec3(0, 0, 0.3), target, line, dev);
  const auto m = optics::project_mark(tool, dev, wall);
  EXPECT_LE((m.point - target).norm(), 1e-12);
  EXPECT_LE(geom::line_angle(m.direction, line), 1e-9);
}

namespace {

std::vector<optics::Observation> observe(const LaserDevice& truth, const TriMesh& mesh,
                                         std::mt19937_64& rng, int count, double r0, double r1) {
  LaserDevice nominal = truth;
  nominal.offset = {};
  std::uniform_real_distribution<double> tilt(-0.3, 0.3);
  std::vector<optics::Observation> out;
  for (int i = 0; i < count; ++i) {
    const double range = count == 1 ? r0 : r0 + (r1 - r0) * i / (count - 1);
    const Vec3 target(0, tilt(rng), tilt(rng));
    const Vec3 origin = target + range * Vec3(-1, tilt(rng), tilt(rng)).normalized();
    const RigidTransform tool = aim_tool(origin, target, Vec3::UnitY(), nominal);
    const Vec3 nominal_point = hit_plane(optics::beam_ray(tool, nominal), Vec3::Zero(), -Vec3::UnitX());
    out.push_back({tool, nominal_point, optics::project_mark(tool, truth, mesh).point});
  }
  return out;
}

}  // namespace

TEST(Calibrate, RecoversKnownOffset) {
  const TriMesh wall = plane_mesh(Vec3::Zero(), -Vec3::UnitX());
  std::mt19937_64 rng(21);
  LaserDevice truth;
  truth.mount = RigidTransform{geom::rot_x(0.2), Vec3(0.03, 0, 0.06)};
  truth.offset = {deg2rad(0.8), deg2rad(-0.3)};
  const auto obs = observe(truth, wall, rng, 4, 1.0, 3.0);
  LaserDevice nominal = truth;
  nominal.offset = {};
  const auto fit = optics::calibrate_offset(obs, nominal, wall);
  EXPECT_NEAR(geom::rad2deg(fit.offset.pitch), 0.8, 0.01);
  EXPECT_NEAR(geom::rad2deg(fit.offset.yaw), -0.3, 0.01);
  EXPECT_LE(fit.rms, 1e-9);
}

TEST(Calibrate, ZeroOffsetFitsZero) {
  const TriMesh wall = plane_mesh(Vec3::Zero(), -Vec3::UnitX());
  std::mt19937_64 rng(22);
  const LaserDevice dev;
  const auto fit = optics::calibrate_offset(observe(dev, wall, rng, 4, 1.0, 3.0), dev, wall);
  EXPECT_LE(std::abs(fit.offset.pitch), 1e-9);
  EXPECT_LE(std::abs(fit.offset.yaw), 1e-9);
}

TEST(Calibrate, SingleObservationIsDegenerate) {
  const TriMesh wall = plane_mesh(Vec3::Zero(), -Vec3::UnitX());
  std::mt19937_64 rng(23);
  LaserDevice truth;
  truth.offset = {0.01, 0.0};
  try {
    optics::calibrate_offset(observe(truth, wall, rng, 1, 2.0, 2.0), LaserDevice{}, wall);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Degenerate);
  }
}

TEST(Calibrate, ResidualDoesNotGrowWithMoreObservations) {
  const TriMesh wall = plane_mesh(Vec3::Zero(), -Vec3::UnitX());
  std::mt19937_64 rng(24);
  LaserDevice truth;
  truth.offset = {deg2rad(-1.2), deg2rad(0.6)};
  const auto all = observe(truth, wall, rng, 8, 1.0, 4.0);
  double previous = 1.0;
  for (std::size_t n = 2; n <= all.size(); ++n) {
    const std::vector<optics::Observation> some(all.begin(), all.begin() + n);
    const auto fit = optics::calibrate_offset(some, LaserDevice{}, wall);
    EXPECT_LE(fit.rms, std::max(previous, 1e-12) + 1e-12);
    previous = fit.rms;
  }
}

TEST(Calibrate, CompensationClosureAtThreeMetres) {
  const TriMesh wall = plane_mesh(Vec3::Zero(), -Vec3::UnitX());
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> u(-deg2rad(4.5), deg2rad(4.5));
  for (int k = 0; k < 50; ++k) {
    LaserDevice truth;
    truth.offset = {u(rng), u(rng)};
    const auto fit = optics::calibrate_offset(observe(truth, wall, rng, 4, 1.0, 3.0), LaserDevice{}, wall);
    LaserDevice compensated;
    compensated.offset = fit.offset;
    const Vec3 target(0, 0.1, -0.2);
    const RigidTransform tool = aim_tool(target + Vec3(-3, 0.4, 0.2).normalized() * 3.0, target,
                                         Vec3::UnitZ(), compensated);
    const auto m = optics::project_mark(tool, truth, wall);
    EXPECT_LE((m.point - target).norm(), 1e-4);
  }
}

TEST(VerifyMark, ToleranceBoundaries) {
  const auto nominal = mark_at(Vec3(1, 2, 3), Vec3::UnitX());
  optics::ProjectedMark m{nominal.point, nominal.direction, 2.0, 0};
  auto c = optics::verify_mark(m, nominal);
  EXPECT_EQ(c.pos_err, 0.0);
  EXPECT_EQ(c.ang_err, 0.0);
  EXPECT_TRUE(c.pass);

  m.point = nominal.point + Vec3(0, 0.004, 0);
  c = optics::verify_mark(m, nominal);
  EXPECT_NEAR(c.pos_err, 0.004, 1e-12);
  EXPECT_TRUE(c.pass);

  m.point = nominal.point + Vec3(0, 0.006, 0);
  EXPECT_FALSE(optics::verify_mark(m, nominal).pass);

  m.point = nominal.point;
  m.direction = Vec3(std::cos(deg2rad(1.5)), std::sin(deg2rad(1.5)), 0);
  c = optics::verify_mark(m, nominal);
  EXPECT_NEAR(c.ang_err, deg2rad(1.5), 1e-12);
  EXPECT_FALSE(c.pass);
}

TEST(VerifyMark, DirectionSignDoesNotMatter) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 200; ++k) {
    const auto nominal = mark_at(Vec3::Zero(), testsupport::random_unit(rng));
    auto flipped = nominal;
    flipped.direction = -nominal.direction;
    const optics::ProjectedMark m{Vec3::Zero(), testsupport::random_unit(rng), 1.0, 0};
    const auto a = optics::verify_mark(m, nominal), b = optics::verify_mark(m, flipped);
    EXPECT_NEAR(a.ang_err, b.ang_err, 1e-12);
    EXPECT_LE(a.ang_err, geom::kPi / 2 + 1e-12);
  }
}

TEST(Rig, JsonRoundTrip) {
  const auto rig = demo::cross_rig();
  const auto back = optics::rig_from_json(optics::to_json(rig));
  ASSERT_EQ(back.devices.size(), rig.devices.size());
  for (std::size_t i = 0; i < rig.devices.size(); ++i) {
    EXPECT_NEAR(back.devices[i].offset.pitch, rig.devices[i].offset.pitch, 1e-12);
    EXPECT_NEAR(back.devices[i].offset.yaw, rig.devices[i].offset.yaw, 1e-12);
    EXPECT_LE((back.devices[i].fan_normal - rig.devices[i].fan_normal).norm(), 1e-12);
    EXPECT_LE((back.devices[i].mount.translation - rig.devices[i].mount.translation).norm(), 1e-12);
  }
  io::json bad = optics::to_json(rig);
  bad["devices"] = io::json::array();
  EXPECT_THROW(optics::rig_from_json(bad), Error);
}
