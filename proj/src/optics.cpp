#include "laserguide/optics.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "laserguide/error.hpp"

namespace laserguide::optics {

using io::json;

Rotation BeamOffset::rotation() const { return geom::rot_y(yaw) * geom::rot_x(pitch); }

void BeamOffset::validate() const {
  if (!(std::abs(pitch) < kMaxOffset) || !(std::abs(yaw) < kMaxOffset)) {
    throw Error(Errc::Implausible, "beam offset exceeds 5 degrees");
  }
}

void LaserDevice::validate() const {
  if (std::abs(fan_normal.norm() - 1.0) > 1e-9 || std::abs(fan_normal.z()) > 1e-9) {
    throw Error(Errc::ValidationError, "fan normal must be unit and perpendicular to device z",
                "fan_normal");
  }
  if (!(max_range >= 1.0 && max_range <= 20.0)) {
    throw Error(Errc::ValidationError, "max range must lie in [1, 20] m", "max_range");
  }
  offset.validate();
}

void LaserRig::validate() const {
  if (devices.empty() || devices.size() > 4) {
    throw Error(Errc::ValidationError, "a rig holds between 1 and 4 devices", "devices");
  }
  for (const auto& d : devices) d.validate();
}

RigidTransform device_pose(const RigidTransform& tool, const LaserDevice& device) {
  return tool * device.mount;
}

Ray beam_ray(const RigidTransform& tool, const LaserDevice& device) {
  const RigidTransform dev = device_pose(tool, device);
  return Ray::make(dev.translation, dev.rotation * (device.offset.rotation() * Vec3::UnitZ()));
}

Vec3 light_plane_normal(const RigidTransform& tool, const LaserDevice& device) {
  const RigidTransform dev = device_pose(tool, device);
  return (dev.rotation * (device.offset.rotation() * device.fan_normal)).normalized();
}

ProjectedMark project_mark(const RigidTransform& tool, const LaserDevice& device,
                           const TriMesh& mesh) {
  const Ray ray = beam_ray(tool, device);
  const auto hit = mesh.ray_hit(ray);
  if (!hit) throw Error(Errc::NoHit, "beam misses the surface");
  if (hit->distance > device.max_range) {
    throw Error(Errc::OutOfRange, "hit at " + std::to_string(hit->distance) +
                                      " m is beyond the device range");
  }
  const Vec3 plane_n = light_plane_normal(tool, device);
  const Vec3& tri_n = mesh.normals()[hit->triangle];
  Vec3 dir = plane_n.cross(tri_n);
  if (dir.norm() < 1e-9) throw Error(Errc::Grazing, "light plane is parallel to the surface");
  dir.normalize();
  const RigidTransform dev = device_pose(tool, device);
  const Vec3 fan = dev.rotation * (device.offset.rotation() * device.fan_axis());
  if (dir.dot(fan) < 0.0) dir = -dir;
  return {hit->point, dir, hit->distance, hit->triangle};
}

RigidTransform aim_device(const Vec3& origin, const Vec3& target, const Vec3& line_direction,
                          const LaserDevice& device, bool flip_roll) {
  const Vec3 beam = (target - origin).normalized();
  Vec3 plane_n = beam.cross(line_direction);
  if (plane_n.norm() < 1e-6) {
    throw Error(Errc::Grazing, "beam is parallel to the requested line direction");
  }
  plane_n.normalize();
  if (flip_roll) plane_n = -plane_n;
  const Rotation off = device.offset.rotation();
  const Vec3 a = off * Vec3::UnitZ();
  const Vec3 g = off * device.fan_normal;
  geom::Mat3 want, have;
  want << beam, plane_n, beam.cross(plane_n);
  have << a, g, a.cross(g);
  return {Rotation::from_matrix(want * have.transpose()), origin};
}

RigidTransform tool_for_device(const RigidTransform& device_pose_in_frame,
                               const LaserDevice& device) {
  return device_pose_in_frame * geom::invert(device.mount);
}

namespace {

struct PlaneObs {
  Vec3 plane_point;
  Vec3 plane_normal;
  Vec3 observed;
  RigidTransform tool;
};

Vec3 predict(const PlaneObs& o, const LaserDevice& base, double pitch, double yaw) {
  LaserDevice d = base;
  d.offset = {pitch, yaw};
  const Ray r = beam_ray(o.tool, d);
  const double denom = r.direction.dot(o.plane_normal);
  if (std::abs(denom) < 1e-12) throw Error(Errc::Degenerate, "beam parallel to observation plane");
  const double t = (o.plane_point - r.origin).dot(o.plane_normal) / denom;
  return r.at(t);
}

}  // namespace

CalibrationResult calibrate_offset(const std::vector<Observation>& observations,
                                   const LaserDevice& device, const TriMesh& mesh) {
  if (observations.size() < 2) {
    throw Error(Errc::Degenerate, "calibration needs at least two observations");
  }
  std::vector<PlaneObs> obs;
  obs.reserve(observations.size());
  for (const auto& o : observations) {
    const auto cp = mesh.closest_point(o.observed_point);
    obs.push_back({cp.point, mesh.normals()[cp.triangle], o.observed_point, o.tool});
  }
  const int rows = 3 * static_cast<int>(obs.size());
  const double h = 1e-6;
  auto residuals = [&](double p, double y) {
    Eigen::VectorXd r(rows);
    for (std::size_t k = 0; k < obs.size(); ++k) r.segment<3>(3 * k) = predict(obs[k], device, p, y) - obs[k].observed;
    return r;
  };

  CalibrationResult result;
  Eigen::Vector2d theta = Eigen::Vector2d::Zero();
  for (int it = 0; it < 50; ++it) {
    result.iterations = it + 1;
    const Eigen::VectorXd r = residuals(theta[0], theta[1]);
    Eigen::MatrixXd jac(rows, 2);
    jac.col(0) = (residuals(theta[0] + h, theta[1]) - residuals(theta[0] - h, theta[1])) / (2 * h);
    jac.col(1) = (residuals(theta[0], theta[1] + h) - residuals(theta[0], theta[1] - h)) / (2 * h);
    const Eigen::Matrix2d normal = jac.transpose() * jac;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(normal);
    if (eig.eigenvalues()[0] <= 1e-10 * std::max(1.0, eig.eigenvalues()[1])) {
      throw Error(Errc::Degenerate, "observations do not constrain both offset angles");
    }
    const Eigen::Vector2d step = normal.ldlt().solve(-jac.transpose() * r);
    theta += step;
    if (step.norm() < 1e-10) break;
  }
  result.offset = {theta[0], theta[1]};
  if (!(std::abs(theta[0]) < kMaxOffset) || !(std::abs(theta[1]) < kMaxOffset)) {
    throw Error(Errc::Implausible, "fitted offset exceeds 5 degrees");
  }
  const Eigen::VectorXd r = residuals(theta[0], theta[1]);
  result.rms = std::sqrt(r.squaredNorm() / static_cast<double>(obs.size()));
  return result;
}

MarkCheck verify_mark(const ProjectedMark& achieved, const workcell::TargetMark& nominal) {
  MarkCheck c;
  c.pos_err = (achieved.point - nominal.point).norm();
  c.ang_err = geom::line_angle(achieved.direction, nominal.direction);
  c.pass = c.pos_err <= nominal.tolerance_pos && c.ang_err <= nominal.tolerance_ang;
  return c;
}

json to_json(const LaserRig& rig) {
  json devices = json::array();
  for (const auto& d : rig.devices) {
    devices.push_back({{"mount", io::pose_to_json(d.mount, io::PoseStyle::RpyDegrees)},
                       {"fan_normal", io::vec3_to_json(d.fan_normal)},
                       {"offset_deg",
                        {{"pitch", geom::rad2deg(d.offset.pitch)}, {"yaw", geom::rad2deg(d.offset.yaw)}}},
                       {"max_range", d.max_range}});
  }
  return {{"version", 1}, {"devices", devices}};
}

LaserRig rig_from_json(const json& j) {
  if (io::get_or<int>(j, "version", 1, "rig") != 1) {
    throw Error(Errc::ParseError, "rig: unsupported version", "version");
  }
  LaserRig rig;
  const json devices = j.value("devices", json::array());
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const std::string what = "devices[" + std::to_string(i) + "]";
    const auto& d = devices[i];
    LaserDevice dev;
    if (d.contains("mount")) dev.mount = io::pose_from_json(d["mount"], what + ".mount");
    if (d.contains("fan_normal")) dev.fan_normal = io::vec3_from_json(d["fan_normal"], what + ".fan_normal");
    if (d.contains("offset_deg")) {
      dev.offset.pitch = geom::deg2rad(io::get_or<double>(d["offset_deg"], "pitch", 0.0, what));
      dev.offset.yaw = geom::deg2rad(io::get_or<double>(d["offset_deg"], "yaw", 0.0, what));
    }
    dev.max_range = io::get_or<double>(d, "max_range", dev.max_range, what);
    rig.devices.push_back(dev);
  }
  rig.validate();
  return rig;
}

LaserRig load_rig(const std::string& path) {
  return rig_from_json(io::parse_json(io::read_text(path), path));
}

json observations_to_json(const std::vector<Observation>& obs, int device) {
  json list = json::array();
  for (const auto& o : obs) {
    list.push_back({{"tool", io::pose_to_json(o.tool, io::PoseStyle::Quaternion)},
                    {"nominal", io::vec3_to_json(o.nominal_point)},
                    {"observed", io::vec3_to_json(o.observed_point)}});
  }
  return {{"version", 1}, {"device", device}, {"observations", list}};
}

std::vector<Observation> observations_from_json(const json& j, int* device) {
  if (device) *device = io::get_or<int>(j, "device", 0, "observations");
  std::vector<Observation> out;
  for (const auto& o : j.value("observations", json::array())) {
    Observation ob;
    ob.tool = io::pose_from_json(o.value("tool", json::object()), "observation.tool");
    ob.nominal_point = io::vec3_from_json(o.value("nominal", json()), "observation.nominal");
    ob.observed_point = io::vec3_from_json(o.value("observed", json()), "observation.observed");
    out.push_back(ob);
  }
  return out;
}

}  // namespace laserguide::optics
