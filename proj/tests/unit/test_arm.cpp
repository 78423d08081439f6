#include <gtest/gtest.h>

#include <random>

#include "laserguide/arm.hpp"
#include "laserguide/error.hpp"
#include "support.hpp"

using namespace laserguide;
using arm::ArmModel;
using arm::JointVector;
using geom::Vec3;

namespace {

ArmModel planar_two_link() {
  ArmModel m = ArmModel::default_model();
  for (auto& j : m.joints) {
    j.axis = Vec3::UnitZ();
    j.origin = geom::RigidTransform::identity();
  }
  m.joints[1].origin = geom::RigidTransform::from_translation(Vec3(0.5, 0, 0));
  m.tool = geom::RigidTransform::from_translation(Vec3(0.4, 0, 0));
  m.home = JointVector::Zero();
  return m;
}

JointVector random_q(const ArmModel& m, std::mt19937_64& rng, double margin = 0.0) {
  JointVector q;
  for (int i = 0; i < arm::kJoints; ++i) {
    std::uniform_real_distribution<double> u(m.joints[i].lower + margin, m.joints[i].upper - margin);
    q[i] = u(rng);
  }
  return q;
}

// Homogeneous-matrix chain built directly from the joint table.
Eigen::Isometry3d naive_chain(const ArmModel& m, const JointVector& q) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (int i = 0; i < arm::kJoints; ++i) {
    Eigen::Isometry3d origin = Eigen::Isometry3d::Identity();
    origin.linear() = m.joints[i].origin.rotation.matrix();
    origin.translation() = m.joints[i].origin.translation;
    Eigen::Isometry3d joint = Eigen::Isometry3d::Identity();
    joint.linear() = Eigen::AngleAxisd(q[i], m.joints[i].axis.normalized()).toRotationMatrix();
    t = t * origin * joint;
  }
  Eigen::Isometry3d tool = Eigen::Isometry3d::Identity();
  tool.linear() = m.tool.rotation.matrix();
  tool.translation() = m.tool.translation;
  return t * tool;
}

}  // namespace

TEST(Fk, PlanarChainStraight) {
  const auto m = planar_two_link();
  const auto t = arm::fk(m, JointVector::Zero());
  EXPECT_LE((t.translation - Vec3(0.9, 0, 0)).norm(), 1e-15);
}

TEST(Fk, PlanarChainFirstJointQuarterTurn) {
  const auto m = planar_two_link();
  JointVector q = JointVector::Zero();
  q[0] = geom::deg2rad(90.0);
  EXPECT_LE((arm::fk(m, q).translation - Vec3(0, 0.9, 0)).norm(), 1e-15);
}

TEST(Fk, DefaultModelMatchesNaiveMatrixChain) {
  const auto m = ArmModel::default_model();
  std::mt19937_64 rng(21);
  for (int i = 0; i < 500; ++i) {
    const JointVector q = random_q(m, rng);
    const auto t = arm::fk(m, q);
    const auto ref = naive_chain(m, q);
    EXPECT_LE((t.translation - ref.translation()).norm(), 1e-12);
    EXPECT_LE((t.rotation.matrix() - ref.linear()).norm(), 1e-12);
  }
}

TEST(Fk, IsBitDeterministic) {
  const auto m = ArmModel::default_model();
  std::mt19937_64 rng(22);
  const JointVector q = random_q(m, rng);
  const auto a = arm::fk(m, q), b = arm::fk(m, q);
  EXPECT_EQ(a.translation, b.translation);
  EXPECT_EQ(a.rotation.quaternion().coeffs(), b.rotation.quaternion().coeffs());
}

TEST(Fk, RejectsOutOfLimitJoint) {
  const auto m = ArmModel::default_model();
  JointVector q = JointVector::Zero();
  q[3] = geom::deg2rad(171.0);
  try {
    arm::fk(m, q);
    FAIL() << "expected JointLimit";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::JointLimit);
  }
}

TEST(ArmModel, DefaultHorizontalReachIs900mm) {
  const auto m = ArmModel::default_model();
  JointVector q = JointVector::Zero();
  q[1] = geom::deg2rad(90.0);
  const auto p = arm::fk(m, q).translation;
  EXPECT_NEAR(std::hypot(p.x(), p.y()), 0.900, 1e-3);
  // No configuration reaches further horizontally.
  std::mt19937_64 rng(23);
  for (int i = 0; i < 2000; ++i) {
    const auto r = arm::fk(m, random_q(m, rng)).translation;
    EXPECT_LE(std::hypot(r.x(), r.y()), 0.900 + 1e-9);
  }
  EXPECT_DOUBLE_EQ(m.max_reach, 0.9);
  EXPECT_DOUBLE_EQ(m.payload_kg, 6.0);
}

TEST(ArmModel, ValidateRejectsInvertedLimits) {
  auto m = ArmModel::default_model();
  m.joints[2].lower = 1.0;
  m.joints[2].upper = 0.5;
  EXPECT_THROW(m.validate(), Error);
}

TEST(ArmModel, JsonRoundTrip) {
  const auto m = ArmModel::default_model();
  const auto back = arm::arm_from_json(arm::to_json(m));
  std::mt19937_64 rng(24);
  for (int i = 0; i < 50; ++i) {
    const JointVector q = random_q(m, rng);
    const auto a = arm::fk(m, q), b = arm::fk(back, q);
    EXPECT_LE((a.translation - b.translation).norm(), 1e-12);
    EXPECT_LE(geom::angular_distance(a.rotation, b.rotation), 1e-12);
  }
  EXPECT_LE((back.home - m.home).norm(), 1e-12);
}

TEST(Jacobian, MatchesFiniteDifferencesOfFk) {
  const auto m = ArmModel::default_model();
  std::mt19937_64 rng(25);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const JointVector q = random_q(m, rng, 0.01);
    const auto j = arm::jacobian(m, q);
    for (int i = 0; i < arm::kJoints; ++i) {
      JointVector qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const auto tp = arm::fk_unchecked(m, qp), tm = arm::fk_unchecked(m, qm);
      const Vec3 dv = (tp.translation - tm.translation) / (2 * h);
      const Eigen::AngleAxisd rel(tp.rotation.matrix() * tm.rotation.matrix().transpose());
      const Vec3 dw = rel.axis() * rel.angle() / (2 * h);
      for (int r = 0; r < 3; ++r) {
        EXPECT_NEAR(j(r, i), dv[r], 1e-6);
        EXPECT_NEAR(j(r + 3, i), dw[r], 1e-6);
      }
    }
  }
}

TEST(Ik, FixedPointReturnsImmediately) {
  const auto m = ArmModel::default_model();
  arm::IkStats stats;
  const auto q = arm::ik(m, arm::fk(m, m.home), m.home, {}, &stats);
  EXPECT_EQ(stats.attempts, 1);
  EXPECT_LE((arm::fk(m, q).translation - arm::fk(m, m.home).translation).norm(), 1e-4);
}

TEST(Ik, RecoversFkGeneratedTargets) {
  const auto m = ArmModel::default_model();
  std::mt19937_64 rng(26);
  int solved = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const JointVector qstar = random_q(m, rng);
    const auto target = arm::fk(m, qstar);
    arm::IkOptions opt;
    opt.rng_seed = 1000 + i;
    try {
      const auto q = arm::ik(m, target, random_q(m, rng), opt);
      ASSERT_TRUE(m.within_limits(q));
      const auto got = arm::fk(m, q);
      EXPECT_LE((got.translation - target.translation).norm(), 1e-4);
      EXPECT_LE(geom::angular_distance(got.rotation, target.rotation), 1e-3);
      ++solved;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::NoConvergence);
    }
  }
  EXPECT_GE(solved, n * 99 / 100);
}

TEST(Ik, BeyondReachDoesNotConverge) {
  const auto m = ArmModel::default_model();
  const geom::RigidTransform target{geom::Rotation{}, Vec3(1.2, 0, 0.135)};
  arm::IkOptions opt;
  opt.restarts = 3;
  try {
    arm::ik(m, target, m.home, opt);
    FAIL() << "expected NoConvergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoConvergence);
  }
}

TEST(Reachable, Examples) {
  const auto m = ArmModel::default_model();
  EXPECT_FALSE(arm::reachable(m, Vec3(0.95, 0, 0)));
  EXPECT_FALSE(arm::reachable(m, Vec3::Zero()));
  EXPECT_TRUE(arm::reachable(m, Vec3(0.5, 0, 0)));
  // A tool pointing straight down at that point is solvable.
  const geom::RigidTransform target{geom::rot_y(geom::kPi), Vec3(0.5, 0, 0)};
  const auto q = arm::ik(m, target, m.home);
  EXPECT_LE((arm::fk(m, q).translation - target.translation).norm(), 1e-4);
}

TEST(MoveDuration, SlowestJointDecides) {
  const auto m = ArmModel::default_model();
  JointVector a = JointVector::Zero(), b = JointVector::Zero();
  b[0] = geom::deg2rad(60.0);
  b[4] = geom::deg2rad(-90.0);
  EXPECT_NEAR(arm::move_duration(m, a, b), 1.5, 1e-12);
  EXPECT_NEAR(arm::move_duration(m, a, b, 0.5), 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(arm::move_duration(m, a, a), 0.0);
}
