#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "laserguide/geom.hpp"

namespace laserguide::io {

using nlohmann::json;

std::string read_text(const std::filesystem::path& path);

/// Writes through a sibling temp file and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// Parses JSON text, mapping syntax errors to Errc::ParseError.
json parse_json(const std::string& text, const std::string& what);

json vec3_to_json(const geom::Vec3& v);
geom::Vec3 vec3_from_json(const json& j, const std::string& what);

enum class PoseStyle { RpyDegrees, Quaternion };

/// {"xyz": [...], "rpy_deg": [...]} or {"xyz": [...], "quat": [w, x, y, z]}.
json pose_to_json(const geom::RigidTransform& t, PoseStyle style);
geom::RigidTransform pose_from_json(const json& j, const std::string& what);

/// Typed field access that reports the JSON path on failure.
template <typename T>
T get(const json& j, const char* key, const std::string& what);

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& what) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key, what);
}

std::uint64_t fnv1a(const std::string& text);

}  // namespace laserguide::io
