#pragma once

#include <string>
#include <vector>

#include "laserguide/geom.hpp"
#include "laserguide/io.hpp"
#include "laserguide/mesh.hpp"
#include "laserguide/workcell.hpp"

namespace laserguide::optics {

using geom::Ray;
using geom::RigidTransform;
using geom::Rotation;
using geom::Vec3;
using workcell::TriMesh;

inline constexpr double kMaxOffset = geom::deg2rad(5.0);

/// Angular error of the physical beam against the device's nominal +z axis.
struct BeamOffset {
  double pitch = 0.0;  // about device x
  double yaw = 0.0;    // about device y

  /// Device-frame rotation taking the nominal beam frame to the actual one:
  /// Ry(yaw) * Rx(pitch).
  Rotation rotation() const;
  /// Throws Implausible when either angle reaches kMaxOffset.
  void validate() const;
};

/// One fan-line emitter. The light plane contains the beam axis (device +z)
/// and has normal `fan_normal`; the whole plane is tilted by `offset`.
struct LaserDevice {
  RigidTransform mount;              // device frame in the tool frame
  Vec3 fan_normal = Vec3::UnitX();   // device frame, perpendicular to +z
  BeamOffset offset;
  double max_range = 10.0;           // m

  void validate() const;
  /// Unit vector in the light plane perpendicular to the nominal beam; marks
  /// are oriented toward this half of the fan.
  Vec3 fan_axis() const { return Vec3::UnitZ().cross(fan_normal); }
};

struct LaserRig {
  std::vector<LaserDevice> devices;
  void validate() const;
};

struct ProjectedMark {
  Vec3 point = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  double range = 0.0;
  int triangle = -1;
};

/// Device frame in the same frame as `tool`.
RigidTransform device_pose(const RigidTransform& tool, const LaserDevice& device);

/// Central ray of the device with its offset applied. `tool` and the result
/// share a frame (robot base or workcell).
Ray beam_ray(const RigidTransform& tool, const LaserDevice& device);

/// Normal of the emitted light plane, same frame as `tool`.
Vec3 light_plane_normal(const RigidTransform& tool, const LaserDevice& device);

/// Laser line on the mesh. `tool` must be in the mesh frame. Throws NoHit,
/// OutOfRange, or Grazing (light plane parallel to the hit triangle).
ProjectedMark project_mark(const RigidTransform& tool, const LaserDevice& device,
                           const TriMesh& mesh);

/// Device pose placing the beam origin at `origin`, the actual (offset) beam
/// through `target` and the light plane containing `line_direction`. With
/// `flip_roll` the fan is turned 180 degrees about the beam. Throws Grazing
/// when the beam is parallel to `line_direction`.
RigidTransform aim_device(const Vec3& origin, const Vec3& target, const Vec3& line_direction,
                          const LaserDevice& device, bool flip_roll);

/// Tool pose that puts the device at `device_pose_in_frame`.
RigidTransform tool_for_device(const RigidTransform& device_pose_in_frame, const LaserDevice& device);

struct Observation {
  RigidTransform tool;  // mesh frame
  Vec3 nominal_point = Vec3::Zero();
  Vec3 observed_point = Vec3::Zero();
};

struct CalibrationResult {
  BeamOffset offset;
  double rms = 0.0;  // m, reprojection
  int iterations = 0;
};

/// Gauss-Newton fit of pitch/yaw from zero. Each prediction intersects the
/// offset beam with the plane of the triangle nearest the observed point.
/// Throws Degenerate (fewer than 2 observations or rank-deficient normal
/// equations) and Implausible (fit beyond kMaxOffset).
CalibrationResult calibrate_offset(const std::vector<Observation>& observations,
                                   const LaserDevice& device, const TriMesh& mesh);

struct MarkCheck {
  double pos_err = 0.0;  // m
  double ang_err = 0.0;  // rad, line angle in [0, pi/2]
  bool pass = false;
};

MarkCheck verify_mark(const ProjectedMark& achieved, const workcell::TargetMark& nominal);

io::json to_json(const LaserRig& rig);
LaserRig rig_from_json(const io::json& j);
LaserRig load_rig(const std::string& path);

io::json observations_to_json(const std::vector<Observation>& obs, int device);
std::vector<Observation> observations_from_json(const io::json& j, int* device = nullptr);

}  // namespace laserguide::optics
