#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "laserguide/geom.hpp"
#include "laserguide/io.hpp"
#include "laserguide/mesh.hpp"

namespace laserguide::workcell {

using geom::RigidTransform;

enum class TargetGroup { Inner, Outer };

std::string_view group_name(TargetGroup g);

/// Placement of one cable tray: a point on the surface and the in-surface
/// direction the tray runs along.
struct TargetMark {
  std::string id;
  TargetGroup group = TargetGroup::Outer;
  Vec3 point = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  double tolerance_pos = 0.005;                  // m
  double tolerance_ang = geom::deg2rad(1.0);     // rad
};

struct Fixture {
  std::string name;
  Vec3 point = Vec3::Zero();
};

/// Named group of fixtures measured together from one base position.
struct FixtureSet {
  std::string name;
  std::vector<std::string> fixtures;
  std::optional<TargetGroup> group;  // which trays this set localizes for, if tagged
};

struct AutoStationParams {
  double grid = 0.5;        // m
  double min_offset = 1.0;  // m from the mesh footprint
  double max_offset = 2.5;
  double height = 0.9;      // arm base height above the floor
};

struct Workcell {
  TriMesh mesh;
  std::string mesh_file;  // empty when the mesh is inline
  std::vector<TargetMark> targets;
  std::vector<Fixture> fixtures;
  std::vector<FixtureSet> fixture_sets;
  std::vector<RigidTransform> candidate_stations;  // robot base poses in the workcell frame

  const TargetMark& target(const std::string& id) const;
  int target_index(const std::string& id) const;  // -1 when absent
  const Fixture* fixture(const std::string& name) const;

  /// Enforces every invariant; throws ValidationError naming the entity.
  void validate() const;

  /// FNV-1a of the canonical serialization; changes whenever the cell does.
  std::uint64_t digest() const;
};

/// Candidates on a `grid` lattice whose distance from the mesh's xy bounding
/// rectangle lies in [min_offset, max_offset], facing the footprint center.
std::vector<RigidTransform> generate_stations(const TriMesh& mesh, const AutoStationParams& p);

/// Base pose on the floor plane: position plus heading about +z.
RigidTransform station_pose(const Vec3& position, double yaw);
double station_yaw(const RigidTransform& pose);

/// `base_dir` resolves a relative mesh file reference.
Workcell parse_workcell(const std::string& text, const std::filesystem::path& base_dir);
Workcell load_workcell(const std::filesystem::path& path);

/// Inline mesh unless `reference_mesh` and the cell has a mesh file.
io::json workcell_to_json(const Workcell& cell, bool reference_mesh = false);
std::string serialize_workcell(const Workcell& cell, bool reference_mesh = false);

}  // namespace laserguide::workcell
