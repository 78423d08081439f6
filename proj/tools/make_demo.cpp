// Writes the bundled demo inputs: bedframe mesh, workcell, arm, rigs, laser
// observations for calibration and one set of fixture measurements.
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "laserguide/arm.hpp"
#include "laserguide/demo.hpp"
#include "laserguide/io.hpp"
#include "laserguide/locate.hpp"
#include "laserguide/optics.hpp"
#include "laserguide/workcell.hpp"

using namespace laserguide;
namespace fs = std::filesystem;

namespace {

void put(const fs::path& p, const std::string& text) {
  io::write_text_atomic(p, text);
  std::cout << "wrote " << p.string() << "\n";
}

std::vector<optics::Observation> observations(const workcell::Workcell& cell, const optics::LaserDevice& truth) {
  optics::LaserDevice nominal = truth;
  nominal.offset = {};
  const char* ids[] = {"OUT-03", "OUT-14", "IN-08", "OUT-30"};
  const double dist[] = {1.2, 1.8, 2.4, 3.0};
  std::vector<optics::Observation> out;
  for (int k = 0; k < 4; ++k) {
    const auto& t = cell.target(ids[k]);
    const auto cp = cell.mesh.closest_point(t.point);
    const auto frame = cell.mesh.surface_frame(t.point, cp.triangle);
    const geom::Vec3 tilt = 0.25 * (k % 2 ? frame.tangent : frame.bitangent);
    const geom::Vec3 origin = t.point + dist[k] * (frame.normal + tilt).normalized();
    const auto dev_pose = optics::aim_device(origin, t.point, t.direction, nominal, false);
    const auto tool = optics::tool_for_device(dev_pose, nominal);
    optics::Observation o;
    o.tool = tool;
    o.nominal_point = optics::project_mark(tool, nominal, cell.mesh).point;
    o.observed_point = optics::project_mark(tool, truth, cell.mesh).point;
    out.push_back(o);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? argv[1] : "data/demo";
  fs::create_directories(dir);

  auto cell = demo::bedframe_workcell();
  cell.mesh_file = "bedframe.mesh";
  put(dir / "bedframe.mesh", workcell::mesh_to_text(cell.mesh));
  put(dir / "workcell.json", workcell::serialize_workcell(cell, true));
  put(dir / "arm.json", arm::to_json(arm::ArmModel::default_model()).dump(2) + "\n");

  const auto rig = demo::cross_rig();
  put(dir / "rig.json", optics::to_json(rig).dump(2) + "\n");
  auto nominal = rig;
  for (auto& d : nominal.devices) d.offset = {};
  put(dir / "rig.nominal.json", optics::to_json(nominal).dump(2) + "\n");
  for (std::size_t d = 0; d < rig.devices.size(); ++d) {
    const auto obs = observations(cell, rig.devices[d]);
    put(dir / ("observations.device" + std::to_string(d) + ".json"),
        optics::observations_to_json(obs, static_cast<int>(d)).dump(2) + "\n");
  }

  // A base parked near the first candidate station, measured with 0.5 mm noise.
  auto parked = cell.candidate_stations.front();
  parked.translation += geom::Vec3(0.05, -0.03, 0.0);
  parked.rotation = geom::rot_z(geom::deg2rad(0.5)) * parked.rotation;
  const auto m = locate::synthesize_measurements(cell, "exterior", parked, 0.0005, 1);
  put(dir / "measurements.exterior.json", locate::measurements_to_json(m, "exterior").dump(2) + "\n");
  return 0;
}
