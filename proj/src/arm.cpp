#include "laserguide/arm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "laserguide/error.hpp"

namespace laserguide::arm {

using geom::deg2rad;
using geom::Rotation;

ArmModel ArmModel::default_model() {
  ArmModel m;
  const double riser = 0.135, upper = 0.400, fore = 0.350, wrist = 0.150;
  const Vec3 axes[kJoints] = {Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitY(),
                              Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitZ()};
  const Vec3 offsets[kJoints] = {{0, 0, riser}, {0, 0, 0},    {0, 0, upper},
                                 {0, 0, fore},  {0, 0, 0},    {0, 0, wrist}};
  for (int i = 0; i < kJoints; ++i) {
    m.joints[i].axis = axes[i];
    m.joints[i].origin = RigidTransform::from_translation(offsets[i]);
  }
  m.home << 0.0, deg2rad(30.0), deg2rad(60.0), 0.0, deg2rad(45.0), 0.0;
  return m;
}

void ArmModel::validate() const {
  for (int i = 0; i < kJoints; ++i) {
    const auto& j = joints[i];
    const std::string name = "joint " + std::to_string(i + 1);
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) {
      throw Error(Errc::ValidationError, name + ": axis is not unit length", name);
    }
    if (!(j.lower < j.upper)) {
      throw Error(Errc::ValidationError, name + ": lower limit must be below upper", name);
    }
    if (!(j.max_speed > 0.0)) {
      throw Error(Errc::ValidationError, name + ": max speed must be positive", name);
    }
  }
  if (!(max_reach > 0.0) || min_reach < 0.0 || !(min_reach < max_reach)) {
    throw Error(Errc::ValidationError, "reach bounds must satisfy 0 <= min < max", "reach");
  }
  if (!within_limits(home)) throw Error(Errc::ValidationError, "home is outside limits", "home");
}

bool ArmModel::within_limits(const JointVector& q) const {
  for (int i = 0; i < kJoints; ++i) {
    if (!(q[i] >= joints[i].lower && q[i] <= joints[i].upper)) return false;
  }
  return true;
}

JointVector ArmModel::clamp(const JointVector& q) const {
  JointVector out;
  for (int i = 0; i < kJoints; ++i) out[i] = std::clamp(q[i], joints[i].lower, joints[i].upper);
  return out;
}

ToolPose fk_unchecked(const ArmModel& model, const JointVector& q) {
  RigidTransform t;
  for (int i = 0; i < kJoints; ++i) {
    const auto& j = model.joints[i];
    t = t * j.origin * RigidTransform::from_rotation(Rotation::from_axis_angle(j.axis, q[i]));
  }
  return t * model.tool;
}

ToolPose fk(const ArmModel& model, const JointVector& q) {
  for (int i = 0; i < kJoints; ++i) {
    if (!(q[i] >= model.joints[i].lower && q[i] <= model.joints[i].upper)) {
      throw Error(Errc::JointLimit, "joint " + std::to_string(i + 1) + " outside its limits",
                  std::to_string(i + 1));
    }
  }
  return fk_unchecked(model, q);
}

Jacobian jacobian(const ArmModel& model, const JointVector& q) {
  std::array<Vec3, kJoints> axes;
  std::array<Vec3, kJoints> origins;
  RigidTransform t;
  for (int i = 0; i < kJoints; ++i) {
    const auto& j = model.joints[i];
    t = t * j.origin;
    axes[i] = t.rotation * j.axis;
    origins[i] = t.translation;
    t = t * RigidTransform::from_rotation(Rotation::from_axis_angle(j.axis, q[i]));
  }
  const Vec3 tip = (t * model.tool).translation;
  Jacobian jac;
  for (int i = 0; i < kJoints; ++i) {
    jac.block<3, 1>(0, i) = axes[i].cross(tip - origins[i]);
    jac.block<3, 1>(3, i) = axes[i];
  }
  return jac;
}

Jacobian finite_difference_jacobian(const ArmModel& model, const JointVector& q, double step) {
  Jacobian jac;
  for (int i = 0; i < kJoints; ++i) {
    JointVector lo = q, hi = q;
    lo[i] -= step;
    hi[i] += step;
    const ToolPose a = fk_unchecked(model, lo);
    const ToolPose b = fk_unchecked(model, hi);
    jac.block<3, 1>(0, i) = (b.translation - a.translation) / (2.0 * step);
    jac.block<3, 1>(3, i) = (b.rotation * a.rotation.inverse()).log() / (2.0 * step);
  }
  return jac;
}

Eigen::Matrix<double, 6, 1> pose_error(const ToolPose& from, const ToolPose& to) {
  Eigen::Matrix<double, 6, 1> e;
  e.head<3>() = to.translation - from.translation;
  e.tail<3>() = (to.rotation * from.rotation.inverse()).log();
  return e;
}

namespace {

JointVector random_in_limits(const ArmModel& model, std::mt19937_64& rng) {
  JointVector q;
  for (int i = 0; i < kJoints; ++i) {
    std::uniform_real_distribution<double> dist(model.joints[i].lower, model.joints[i].upper);
    q[i] = dist(rng);
  }
  return q;
}

// Configurations that reach the same wrist center or tool orientation as q on
// a Z-Y-Y-Z-Y-Z arm: shoulder flip, elbow flip, wrist flip and their products.
std::vector<JointVector> branch_seeds(const ArmModel& model, const JointVector& q) {
  const double upper = model.joints[2].origin.translation.norm();
  const double fore =
      (model.joints[3].origin.translation + model.joints[4].origin.translation).norm();
  std::vector<JointVector> out;
  for (int mask = 1; mask < 8; ++mask) {
    JointVector v = q;
    if (mask & 1) {
      v[0] += M_PI;
      v[1] = -v[1];
      v[2] = -v[2];
    }
    if (mask & 2) {
      v[1] += 2.0 * std::atan2(fore * std::sin(v[2]), upper + fore * std::cos(v[2]));
      v[2] = -v[2];
    }
    if (mask & 4) {
      v[3] += M_PI;
      v[4] = -v[4];
      v[5] += M_PI;
    }
    for (int i = 0; i < kJoints; ++i) v[i] = std::remainder(v[i], 2.0 * M_PI);
    out.push_back(model.clamp(v));
  }
  return out;
}

}  // namespace

JointVector ik(const ArmModel& model, const ToolPose& target, const JointVector& seed,
               const IkOptions& options, IkStats* stats) {
  if (!target.translation.allFinite() || !target.rotation.quaternion().coeffs().allFinite()) {
    throw Error(Errc::NoConvergence, "target pose is not finite");
  }
  std::mt19937_64 rng(options.rng_seed);
  IkStats local;
  std::vector<JointVector> queued;  // branch seeds of the best attempt, used before random draws
  double best_err = std::numeric_limits<double>::infinity();

  for (int attempt = 0; attempt <= options.restarts; ++attempt) {
    JointVector q;
    if (attempt == 0) {
      q = model.clamp(seed);
    } else if (!queued.empty()) {
      q = queued.front();
      queued.erase(queued.begin());
    } else {
      q = random_in_limits(model, rng);
    }
    ++local.attempts;
    for (int it = 0; it < options.max_iterations; ++it) {
      const auto err = pose_error(fk_unchecked(model, q), target);
      if (err.head<3>().norm() < options.converge_tol &&
          err.tail<3>().norm() < options.converge_tol) {
        break;
      }
      ++local.iterations;
      const double lambda = std::min(options.damping, err.norm());
      const Jacobian jac = jacobian(model, q);
      const Eigen::Matrix<double, 6, 6> jjt =
          jac * jac.transpose() + lambda * lambda * Eigen::Matrix<double, 6, 6>::Identity();
      JointVector dq = jac.transpose() * jjt.ldlt().solve(err);
      for (int i = 0; i < kJoints; ++i) dq[i] = std::clamp(dq[i], -options.max_step, options.max_step);
      q = model.clamp(q + dq);
    }
    const auto err = pose_error(fk_unchecked(model, q), target);
    if (err.head<3>().norm() <= options.position_tol &&
        err.tail<3>().norm() <= options.orientation_tol) {
      if (stats) *stats = local;
      return q;
    }
    if (options.branch_seeds && err.norm() < best_err) {
      best_err = err.norm();
      queued = branch_seeds(model, q);
    }
  }
  if (stats) *stats = local;
  throw Error(Errc::NoConvergence, "ik did not converge after " +
                                       std::to_string(options.restarts + 1) + " attempts");
}

bool reachable(const ArmModel& model, const Vec3& p) {
  const double d = p.norm();
  return d <= model.max_reach && d >= model.min_reach;
}

double move_duration(const ArmModel& model, const JointVector& from, const JointVector& to,
                     double speed_fraction) {
  double t = 0.0;
  for (int i = 0; i < kJoints; ++i) {
    t = std::max(t, std::abs(to[i] - from[i]) / (speed_fraction * model.joints[i].max_speed));
  }
  return t;
}

io::json to_json(const ArmModel& model) {
  io::json joints = io::json::array();
  for (const auto& j : model.joints) {
    joints.push_back({{"axis", io::vec3_to_json(j.axis)},
                      {"origin", io::pose_to_json(j.origin, io::PoseStyle::RpyDegrees)},
                      {"limits_deg", {geom::rad2deg(j.lower), geom::rad2deg(j.upper)}},
                      {"max_speed_deg_s", geom::rad2deg(j.max_speed)}});
  }
  io::json home = io::json::array();
  for (int i = 0; i < kJoints; ++i) home.push_back(geom::rad2deg(model.home[i]));
  return {{"version", 1},
          {"joints", joints},
          {"tool", io::pose_to_json(model.tool, io::PoseStyle::RpyDegrees)},
          {"max_reach", model.max_reach},
          {"min_reach", model.min_reach},
          {"payload_kg", model.payload_kg},
          {"home_deg", home}};
}

ArmModel arm_from_json(const io::json& j) {
  const std::string what = "arm";
  if (io::get_or<int>(j, "version", 1, what) != 1) {
    throw Error(Errc::ParseError, "arm: unsupported version", what);
  }
  ArmModel m;
  const auto& joints = j.contains("joints") ? j["joints"] : io::json();
  if (!joints.is_array() || joints.size() != kJoints) {
    throw Error(Errc::ValidationError, "arm: exactly 6 joints are required", "joints");
  }
  for (int i = 0; i < kJoints; ++i) {
    const std::string jw = "arm.joints[" + std::to_string(i) + "]";
    const auto& jj = joints[i];
    auto& spec = m.joints[i];
    spec.axis = io::vec3_from_json(jj.value("axis", io::json()), jw + ".axis");
    if (jj.contains("origin")) spec.origin = io::pose_from_json(jj["origin"], jw + ".origin");
    if (jj.contains("limits_deg")) {
      const auto lim = io::get<std::vector<double>>(jj, "limits_deg", jw);
      if (lim.size() != 2) throw Error(Errc::ParseError, jw + ".limits_deg: need [lo, hi]", jw);
      spec.lower = geom::deg2rad(lim[0]);
      spec.upper = geom::deg2rad(lim[1]);
    }
    spec.max_speed = geom::deg2rad(io::get_or<double>(jj, "max_speed_deg_s", 60.0, jw));
  }
  if (j.contains("tool")) m.tool = io::pose_from_json(j["tool"], "arm.tool");
  m.max_reach = io::get_or<double>(j, "max_reach", m.max_reach, what);
  m.min_reach = io::get_or<double>(j, "min_reach", m.min_reach, what);
  m.payload_kg = io::get_or<double>(j, "payload_kg", m.payload_kg, what);
  if (j.contains("home_deg")) {
    const auto home = io::get<std::vector<double>>(j, "home_deg", what);
    if (home.size() != kJoints) throw Error(Errc::ValidationError, "arm: home needs 6 angles", "home");
    for (int i = 0; i < kJoints; ++i) m.home[i] = geom::deg2rad(home[i]);
  }
  m.validate();
  return m;
}

ArmModel load_arm(const std::string& path) {
  return arm_from_json(io::parse_json(io::read_text(path), path));
}

}  // namespace laserguide::arm
