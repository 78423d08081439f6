#include "laserguide/io.hpp"

#include <fstream>
#include <sstream>

#include "laserguide/error.hpp"

namespace laserguide::io {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string(), path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::filesystem::create_directories(dir);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string(), path.string());
    out << text;
    out.flush();
    if (!out) throw Error(Errc::IoError, "short write to " + tmp.string(), path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoError, "rename failed: " + ec.message(), path.string());
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, what + ": " + e.what(), what);
  }
}

json vec3_to_json(const geom::Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

geom::Vec3 vec3_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(Errc::ParseError, what + ": expected an array of 3 numbers", what);
  }
  geom::Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw Error(Errc::ParseError, what + ": non-numeric component", what);
    v[i] = j[i].get<double>();
  }
  if (!v.allFinite()) throw Error(Errc::ParseError, what + ": non-finite component", what);
  return v;
}

json pose_to_json(const geom::RigidTransform& t, PoseStyle style) {
  json j;
  j["xyz"] = vec3_to_json(t.translation);
  if (style == PoseStyle::RpyDegrees) {
    const geom::Vec3 rpy = t.rotation.rpy();
    j["rpy_deg"] = json::array(
        {geom::rad2deg(rpy.x()), geom::rad2deg(rpy.y()), geom::rad2deg(rpy.z())});
  } else {
    const auto& q = t.rotation.quaternion();
    j["quat"] = json::array({q.w(), q.x(), q.y(), q.z()});
  }
  return j;
}

geom::RigidTransform pose_from_json(const json& j, const std::string& what) {
  if (!j.is_object()) throw Error(Errc::ParseError, what + ": expected a pose object", what);
  geom::RigidTransform t;
  if (j.contains("xyz")) t.translation = vec3_from_json(j["xyz"], what + ".xyz");
  if (j.contains("quat")) {
    const auto& q = j["quat"];
    if (!q.is_array() || q.size() != 4) {
      throw Error(Errc::ParseError, what + ".quat: expected [w, x, y, z]", what);
    }
    Eigen::Quaterniond quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                            q[3].get<double>());
    if (quat.norm() < 1e-9) throw Error(Errc::ParseError, what + ".quat: zero quaternion", what);
    t.rotation = geom::Rotation::from_quaternion(quat);
  } else if (j.contains("rpy_deg")) {
    const geom::Vec3 rpy = vec3_from_json(j["rpy_deg"], what + ".rpy_deg");
    t.rotation = geom::Rotation::from_rpy(geom::deg2rad(rpy.x()), geom::deg2rad(rpy.y()),
                                          geom::deg2rad(rpy.z()));
  }
  return t;
}

template <typename T>
T get(const json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(Errc::ParseError, what + ": missing field '" + key + "'", what);
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::ParseError, what + ": field '" + key + "' has the wrong type", what);
  }
}

template double get<double>(const json&, const char*, const std::string&);
template int get<int>(const json&, const char*, const std::string&);
template bool get<bool>(const json&, const char*, const std::string&);
template std::string get<std::string>(const json&, const char*, const std::string&);
template std::int64_t get<std::int64_t>(const json&, const char*, const std::string&);
template std::uint64_t get<std::uint64_t>(const json&, const char*, const std::string&);
template std::vector<double> get<std::vector<double>>(const json&, const char*,
                                                       const std::string&);
template std::vector<std::string> get<std::vector<std::string>>(const json&, const char*,
                                                                 const std::string&);

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace laserguide::io
