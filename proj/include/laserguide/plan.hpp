#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "laserguide/arm.hpp"
#include "laserguide/io.hpp"
#include "laserguide/optics.hpp"
#include "laserguide/workcell.hpp"

namespace laserguide::plan {

using arm::ArmModel;
using arm::JointVector;
using geom::RigidTransform;
using geom::Vec3;
using optics::LaserRig;
using workcell::TargetMark;
using workcell::Workcell;

struct Station {
  int id = 0;  // index into the workcell's candidate stations
  RigidTransform base_pose;  // workcell frame
  std::vector<std::string> assigned_targets;
  std::string localization_set;
};

struct AimSolution {
  std::string target_id;
  int station_id = 0;
  int device = 0;
  JointVector q = JointVector::Zero();
  optics::ProjectedMark predicted;
  double pos_err = 0.0;
  double ang_err = 0.0;
};

struct Plan {
  std::vector<Station> stations;
  std::vector<AimSolution> solutions;  // execution order
  std::vector<std::string> uncovered;
  double estimated_cycle_s = 0.0;
  JointVector home = JointVector::Zero();
  double dwell_s = 30.0;
  double base_move_s = 120.0;
  std::uint64_t seed = 1;

  const Station* station(int id) const;
  /// Index of the first and one-past-last solution of the station running task `task`.
  std::pair<int, int> station_span(int task) const;
};

struct PlanOptions {
  std::uint64_t seed = 1;
  int device = 0;              // rig device used for aiming
  double min_beam = 0.5;       // m, closest working distance
  double standoff = 0.6;       // m, device origin distance from the shoulder
  double max_incidence = geom::deg2rad(75.0);  // beam to surface normal
  int shell_samples = 48;      // sight-line origins on the standoff sphere
  int aim_origins = 4;         // origins tried per roll sign (8 variants)
  int ik_seeds = 5;            // attempts per ik call
  double dwell_s = 30.0;       // operator mounts one tray
  double base_move_s = 120.0;  // relocating the mobile base
};

/// Shoulder (second joint origin) in the robot base frame at q = 0.
Vec3 shoulder_point(const ArmModel& arm);

/// Device-origin candidates on the standoff sphere around the shoulder, in the
/// workcell frame, for a base at `station`.
std::vector<Vec3> shell_points(const ArmModel& arm, const RigidTransform& station,
                               const PlanOptions& opt = {});

/// True iff the target lies inside the inflated reach sphere and some shell
/// point sees its front face unobstructed at a beam distance in
/// [min_beam, max_range].
bool coverage_filter(const Workcell& cell, const RigidTransform& station, const TargetMark& target,
                     const ArmModel& arm, const LaserRig& rig, const PlanOptions& opt = {});

/// Greedy unweighted set cover. covers[c][t] says candidate c covers target t.
struct CoverResult {
  std::vector<int> chosen;           // candidate indices in pick order
  std::vector<int> assignment;       // per target: candidate index or -1
  std::vector<int> uncovered;        // target indices
};
CoverResult greedy_cover(const std::vector<std::vector<bool>>& covers);

std::vector<std::vector<bool>> coverage_matrix(const Workcell& cell, const ArmModel& arm,
                                               const LaserRig& rig, const PlanOptions& opt = {});

CoverResult assign_stations(const Workcell& cell, const ArmModel& arm, const LaserRig& rig,
                            const PlanOptions& opt = {});

/// Aims `device` at the target from a base at `station`: builds goal tool
/// poses geometrically (origin on the standoff shell, roll putting the fan
/// plane through the target direction, beam offset compensated), solves ik
/// and re-projects. Throws NoSolution when every variant fails.
AimSolution solve_aim(const Workcell& cell, const RigidTransform& station, int station_id,
                      const TargetMark& target, const ArmModel& arm, const LaserRig& rig,
                      const JointVector& seed, const PlanOptions& opt = {});

/// Nearest-neighbour chain per station, starting at the target closest to the
/// station base; stations keep their order.
Plan order_tasks(const Plan& plan, const Workcell& cell);

/// Joint moves home -> first -> ... -> last at full speed, plus dwell per
/// target and a base move per station change.
double estimate_cycle(const Plan& plan, const ArmModel& arm, double dwell_s, double base_move_s);

/// Full pipeline: cover, aim (with re-planning to later covering stations),
/// fixture-set choice, ordering and cycle estimate.
Plan make_plan(const Workcell& cell, const ArmModel& arm, const LaserRig& rig,
               const PlanOptions& opt = {});

/// Fixture set for a station: the set tagged with the majority group of its
/// targets when one exists, otherwise the set closest on average to the base.
std::string choose_fixture_set(const Workcell& cell, const Station& station);

io::json to_json(const Plan& plan);
Plan plan_from_json(const io::json& j);
std::string serialize_plan(const Plan& plan);
Plan load_plan(const std::string& path);

}  // namespace laserguide::plan
