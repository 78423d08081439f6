#include "laserguide/workcell.hpp"

#include <cmath>
#include <set>

#include "laserguide/error.hpp"

namespace laserguide::workcell {

using io::json;

std::string_view group_name(TargetGroup g) { return g == TargetGroup::Inner ? "inner" : "outer"; }

const TargetMark& Workcell::target(const std::string& id) const {
  const int i = target_index(id);
  if (i < 0) throw Error(Errc::ValidationError, "unknown target " + id, id);
  return targets[i];
}

int Workcell::target_index(const std::string& id) const {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

const Fixture* Workcell::fixture(const std::string& name) const {
  for (const auto& f : fixtures) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

namespace {

void require_spread(const std::vector<Vec3>& points, const std::string& what) {
  if (points.size() < 3 || geom::collinearity_spread(points) <= 1e-6) {
    throw Error(Errc::ValidationError, what + ": need at least 3 non-collinear points", what);
  }
}

}  // namespace

void Workcell::validate() const {
  if (mesh.size() == 0) throw Error(Errc::ValidationError, "workcell: mesh is empty", "mesh");
  std::set<std::string> ids;
  for (const auto& t : targets) {
    if (t.id.empty()) throw Error(Errc::ValidationError, "target with empty id", "");
    if (!ids.insert(t.id).second) {
      throw Error(Errc::ValidationError, "duplicate target id " + t.id, t.id);
    }
    if (!(t.tolerance_pos > 0.0) || !(t.tolerance_ang > 0.0)) {
      throw Error(Errc::ValidationError, "target " + t.id + ": tolerances must be positive", t.id);
    }
    if (std::abs(t.direction.norm() - 1.0) > 1e-9) {
      throw Error(Errc::ValidationError, "target " + t.id + ": direction is not unit", t.id);
    }
    const ClosestPoint cp = mesh.closest_point(t.point);
    if (cp.distance > t.tolerance_pos) {
      throw Error(Errc::ValidationError,
                  "target " + t.id + " lies " + std::to_string(cp.distance * 1000.0) +
                      " mm off the surface",
                  t.id);
    }
    const Vec3& n = mesh.normals()[cp.triangle];
    if (std::abs(t.direction.dot(n)) > std::sin(1e-3)) {
      throw Error(Errc::ValidationError, "target " + t.id + ": direction is not tangent to the surface",
                  t.id);
    }
  }
  std::set<std::string> names;
  std::vector<Vec3> all;
  for (const auto& f : fixtures) {
    if (!names.insert(f.name).second) {
      throw Error(Errc::ValidationError, "duplicate fixture " + f.name, f.name);
    }
    all.push_back(f.point);
  }
  require_spread(all, "fixtures");
  for (const auto& set : fixture_sets) {
    std::vector<Vec3> pts;
    for (const auto& name : set.fixtures) {
      const Fixture* f = fixture(name);
      if (!f) {
        throw Error(Errc::ValidationError,
                    "fixture set " + set.name + " references unknown fixture " + name, set.name);
      }
      pts.push_back(f->point);
    }
    require_spread(pts, "fixture set " + set.name);
  }
  for (std::size_t i = 0; i < candidate_stations.size(); ++i) {
    const Vec3 up = candidate_stations[i].rotation * Vec3::UnitZ();
    if (geom::angle_between(up, Vec3::UnitZ()) > 1e-9) {
      throw Error(Errc::ValidationError, "station " + std::to_string(i) + " is not upright",
                  "station " + std::to_string(i));
    }
  }
}

std::uint64_t Workcell::digest() const { return io::fnv1a(serialize_workcell(*this, false)); }

RigidTransform station_pose(const Vec3& position, double yaw) {
  return {geom::rot_z(yaw), position};
}

double station_yaw(const RigidTransform& pose) {
  const Vec3 x = pose.rotation * Vec3::UnitX();
  return std::atan2(x.y(), x.x());
}

std::vector<RigidTransform> generate_stations(const TriMesh& mesh, const AutoStationParams& p) {
  const auto box = mesh.bounds();
  const double x0 = box.min().x(), x1 = box.max().x();
  const double y0 = box.min().y(), y1 = box.max().y();
  const Vec3 center = box.center();
  std::vector<RigidTransform> out;
  const int nx0 = static_cast<int>(std::floor((x0 - p.max_offset) / p.grid));
  const int nx1 = static_cast<int>(std::ceil((x1 + p.max_offset) / p.grid));
  const int ny0 = static_cast<int>(std::floor((y0 - p.max_offset) / p.grid));
  const int ny1 = static_cast<int>(std::ceil((y1 + p.max_offset) / p.grid));
  for (int iy = ny0; iy <= ny1; ++iy) {
    for (int ix = nx0; ix <= nx1; ++ix) {
      const double x = ix * p.grid, y = iy * p.grid;
      const double dx = std::max({x0 - x, 0.0, x - x1});
      const double dy = std::max({y0 - y, 0.0, y - y1});
      const double d = std::hypot(dx, dy);
      if (d < p.min_offset - 1e-9 || d > p.max_offset + 1e-9) continue;
      const double yaw = std::atan2(center.y() - y, center.x() - x);
      out.push_back(station_pose({x, y, p.height}, yaw));
    }
  }
  return out;
}

namespace {

TargetMark target_from_json(const json& j, std::size_t index) {
  const std::string what = "targets[" + std::to_string(index) + "]";
  TargetMark t;
  t.id = io::get<std::string>(j, "id", what);
  const auto group = io::get<std::string>(j, "group", what);
  if (group == "inner") {
    t.group = TargetGroup::Inner;
  } else if (group == "outer") {
    t.group = TargetGroup::Outer;
  } else {
    throw Error(Errc::ParseError, what + ": group must be inner or outer", t.id);
  }
  t.point = io::vec3_from_json(j.value("point", json()), what + ".point");
  const Vec3 d = io::vec3_from_json(j.value("direction", json()), what + ".direction");
  if (d.norm() < 1e-12) throw Error(Errc::ValidationError, what + ": zero direction", t.id);
  t.direction = d.normalized();
  t.tolerance_pos = io::get_or<double>(j, "tolerance_pos", t.tolerance_pos, what);
  if (j.contains("tolerance_ang_deg")) {
    t.tolerance_ang = geom::deg2rad(io::get<double>(j, "tolerance_ang_deg", what));
  }
  return t;
}

}  // namespace

Workcell parse_workcell(const std::string& text, const std::filesystem::path& base_dir) {
  const json j = io::parse_json(text, "workcell");
  if (!j.is_object()) throw Error(Errc::ParseError, "workcell: expected an object", "workcell");
  if (!j.contains("version") || !j["version"].is_number_integer() || j["version"].get<int>() != 1) {
    throw Error(Errc::ParseError, "workcell: missing or unsupported version (expected 1)", "version");
  }
  Workcell cell;
  const json mesh = j.value("mesh", json());
  if (mesh.contains("file")) {
    cell.mesh_file = io::get<std::string>(mesh, "file", "mesh");
    const auto path = base_dir / cell.mesh_file;
    cell.mesh = parse_mesh_text(io::read_text(path));
  } else if (mesh.contains("vertices") && mesh.contains("triangles")) {
    std::vector<Vec3> vertices;
    for (std::size_t i = 0; i < mesh["vertices"].size(); ++i) {
      vertices.push_back(io::vec3_from_json(mesh["vertices"][i], "mesh.vertices"));
    }
    std::vector<std::array<int, 3>> tris;
    try {
      for (const auto& t : mesh["triangles"]) tris.push_back(t.get<std::array<int, 3>>());
    } catch (const json::exception&) {
      throw Error(Errc::ParseError, "mesh.triangles: expected index triples", "mesh");
    }
    std::vector<Vec3> normals;
    if (mesh.contains("normals")) {
      for (const auto& n : mesh["normals"]) normals.push_back(io::vec3_from_json(n, "mesh.normals"));
    }
    cell.mesh = TriMesh(std::move(vertices), std::move(tris), std::move(normals));
  } else {
    throw Error(Errc::ParseError, "workcell: mesh needs a file or inline vertices/triangles", "mesh");
  }

  const json targets = j.value("targets", json::array());
  for (std::size_t i = 0; i < targets.size(); ++i) cell.targets.push_back(target_from_json(targets[i], i));

  for (const auto& f : j.value("fixtures", json::array())) {
    Fixture fx;
    fx.name = io::get<std::string>(f, "name", "fixtures");
    fx.point = io::vec3_from_json(f.value("point", json()), "fixture " + fx.name);
    cell.fixtures.push_back(fx);
  }
  for (const auto& s : j.value("fixture_sets", json::array())) {
    FixtureSet set;
    set.name = io::get<std::string>(s, "name", "fixture_sets");
    set.fixtures = io::get<std::vector<std::string>>(s, "fixtures", "fixture set " + set.name);
    if (s.contains("group")) {
      const auto g = io::get<std::string>(s, "group", "fixture set " + set.name);
      if (g != "inner" && g != "outer") {
        throw Error(Errc::ParseError, "fixture set " + set.name + ": group must be inner or outer",
                    set.name);
      }
      set.group = g == "inner" ? TargetGroup::Inner : TargetGroup::Outer;
    }
    cell.fixture_sets.push_back(set);
  }
  if (cell.fixture_sets.empty() && !cell.fixtures.empty()) {
    FixtureSet all{"all", {}, std::nullopt};
    for (const auto& f : cell.fixtures) all.fixtures.push_back(f.name);
    cell.fixture_sets.push_back(all);
  }

  if (j.contains("stations")) {
    const auto& st = j["stations"];
    for (std::size_t i = 0; i < st.size(); ++i) {
      const std::string what = "stations[" + std::to_string(i) + "]";
      const Vec3 xyz = io::vec3_from_json(st[i].value("xyz", json()), what + ".xyz");
      const double yaw = geom::deg2rad(io::get_or<double>(st[i], "yaw_deg", 0.0, what));
      cell.candidate_stations.push_back(station_pose(xyz, yaw));
    }
  } else {
    AutoStationParams p;
    if (j.contains("auto_stations")) {
      const auto& a = j["auto_stations"];
      p.grid = io::get_or<double>(a, "grid", p.grid, "auto_stations");
      p.min_offset = io::get_or<double>(a, "min_offset", p.min_offset, "auto_stations");
      p.max_offset = io::get_or<double>(a, "max_offset", p.max_offset, "auto_stations");
      p.height = io::get_or<double>(a, "height", p.height, "auto_stations");
    }
    if (!(p.grid > 0.0) || p.min_offset < 0.0 || p.max_offset < p.min_offset) {
      throw Error(Errc::ValidationError, "auto_stations: bad grid or offsets", "auto_stations");
    }
    cell.candidate_stations = generate_stations(cell.mesh, p);
  }
  cell.validate();
  return cell;
}

Workcell load_workcell(const std::filesystem::path& path) {
  return parse_workcell(io::read_text(path), path.parent_path());
}

json workcell_to_json(const Workcell& cell, bool reference_mesh) {
  json j;
  j["version"] = 1;
  if (reference_mesh && !cell.mesh_file.empty()) {
    j["mesh"] = {{"file", cell.mesh_file}};
  } else {
    json verts = json::array(), tris = json::array();
    for (const auto& v : cell.mesh.vertices()) verts.push_back(io::vec3_to_json(v));
    for (const auto& t : cell.mesh.triangles()) tris.push_back(t);
    j["mesh"] = {{"vertices", verts}, {"triangles", tris}};
    if (cell.mesh.has_explicit_normals()) {
      json normals = json::array();
      for (const auto& n : cell.mesh.normals()) normals.push_back(io::vec3_to_json(n));
      j["mesh"]["normals"] = normals;
    }
  }
  json targets = json::array();
  for (const auto& t : cell.targets) {
    targets.push_back({{"id", t.id},
                       {"group", group_name(t.group)},
                       {"point", io::vec3_to_json(t.point)},
                       {"direction", io::vec3_to_json(t.direction)},
                       {"tolerance_pos", t.tolerance_pos},
                       {"tolerance_ang_deg", geom::rad2deg(t.tolerance_ang)}});
  }
  j["targets"] = targets;
  json fixtures = json::array();
  for (const auto& f : cell.fixtures) fixtures.push_back({{"name", f.name}, {"point", io::vec3_to_json(f.point)}});
  j["fixtures"] = fixtures;
  json sets = json::array();
  for (const auto& s : cell.fixture_sets) {
    json js = {{"name", s.name}, {"fixtures", s.fixtures}};
    if (s.group) js["group"] = group_name(*s.group);
    sets.push_back(js);
  }
  j["fixture_sets"] = sets;
  json stations = json::array();
  for (const auto& s : cell.candidate_stations) {
    stations.push_back({{"xyz", io::vec3_to_json(s.translation)},
                        {"yaw_deg", geom::rad2deg(station_yaw(s))}});
  }
  j["stations"] = stations;
  return j;
}

std::string serialize_workcell(const Workcell& cell, bool reference_mesh) {
  return workcell_to_json(cell, reference_mesh).dump(2) + "\n";
}

}  // namespace laserguide::workcell
