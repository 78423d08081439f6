#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "laserguide/geom.hpp"
#include "laserguide/io.hpp"

namespace laserguide::arm {

using geom::RigidTransform;
using geom::Vec3;

inline constexpr int kJoints = 6;

using JointVector = Eigen::Matrix<double, kJoints, 1>;
using Jacobian = Eigen::Matrix<double, 6, kJoints>;

/// Tool frame pose in the robot base frame.
using ToolPose = RigidTransform;

struct JointSpec {
  Vec3 axis = Vec3::UnitZ();        // unit, in this joint's frame
  RigidTransform origin;            // parent joint frame -> this joint frame at q = 0
  double lower = -geom::deg2rad(170.0);
  double upper = geom::deg2rad(170.0);
  double max_speed = geom::deg2rad(60.0);  // rad/s
};

/// Serial 6R chain. Immutable once validated.
struct ArmModel {
  std::array<JointSpec, kJoints> joints;
  RigidTransform tool;    // flange -> tool
  double max_reach = 0.9; // m, from the base origin
  double min_reach = 0.15;
  double payload_kg = 6.0;  // metadata only
  JointVector home = JointVector::Zero();

  /// Anthropomorphic default: riser 0.135 m, upper arm 0.400 m, forearm 0.350 m,
  /// wrist stack 0.150 m. Stretched horizontally the flange sits 0.900 m out.
  static ArmModel default_model();

  /// Throws ValidationError naming the joint on a bad axis, limit or speed.
  void validate() const;

  bool within_limits(const JointVector& q) const;
  JointVector clamp(const JointVector& q) const;
};

/// Forward kinematics; throws JointLimit when q is outside the limits.
ToolPose fk(const ArmModel& model, const JointVector& q);

/// No limit check. Used inside the solvers.
ToolPose fk_unchecked(const ArmModel& model, const JointVector& q);

/// Geometric Jacobian of the tool frame in base coordinates: rows 0-2 linear
/// velocity of the tool origin, rows 3-5 angular velocity.
Jacobian jacobian(const ArmModel& model, const JointVector& q);

/// Central-difference Jacobian of fk; reference for tests and diagnostics.
Jacobian finite_difference_jacobian(const ArmModel& model, const JointVector& q,
                                    double step = 1e-6);

/// 6-vector pose error (position, rotation vector) taking `from` to `to`,
/// both in base coordinates.
Eigen::Matrix<double, 6, 1> pose_error(const ToolPose& from, const ToolPose& to);

struct IkOptions {
  double damping = 0.05;         // upper bound; shrinks with the residual
  int max_iterations = 200;
  int restarts = 10;
  double max_step = 0.2;        // rad per joint per iteration
  double position_tol = 1e-4;   // m
  double orientation_tol = 1e-3;  // rad
  double converge_tol = 1e-11;  // inner loop stops once both errors are below this
  bool branch_seeds = true;     // restart from flipped copies of the best attempt first
  std::uint64_t rng_seed = 1;
};

struct IkStats {
  int attempts = 0;
  int iterations = 0;
};

/// Damped least squares with restarts. Attempt 0 starts at `seed`. Restarts
/// first try shoulder/elbow/wrist flips of the best failed attempt, then
/// random in-limit draws from an RNG seeded with `options.rng_seed`.
/// Throws NoConvergence when no attempt meets the tolerances.
JointVector ik(const ArmModel& model, const ToolPose& target, const JointVector& seed,
               const IkOptions& options = {}, IkStats* stats = nullptr);

/// Cheap pre-filter: false outside [min_reach, max_reach] of the base origin.
bool reachable(const ArmModel& model, const Vec3& p);

/// Time for a joint move at `speed_fraction` of every joint's max speed; each
/// joint moves at constant speed, so the move ends when the slowest arrives.
double move_duration(const ArmModel& model, const JointVector& from, const JointVector& to,
                     double speed_fraction = 1.0);

io::json to_json(const ArmModel& model);
ArmModel arm_from_json(const io::json& j);
ArmModel load_arm(const std::string& path);

}  // namespace laserguide::arm
