#include "laserguide/plan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "laserguide/error.hpp"

namespace laserguide::plan {

using io::json;

const Station* Plan::station(int id) const {
  for (const auto& s : stations) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::pair<int, int> Plan::station_span(int task) const {
  const int n = static_cast<int>(solutions.size());
  if (task < 0 || task >= n) return {0, 0};
  const int sid = solutions[task].station_id;
  int lo = task, hi = task + 1;
  while (lo > 0 && solutions[lo - 1].station_id == sid) --lo;
  while (hi < n && solutions[hi].station_id == sid) ++hi;
  return {lo, hi};
}

Vec3 shoulder_point(const ArmModel& arm) {
  return (arm.joints[0].origin * arm.joints[1].origin).translation;
}

namespace {

// Fibonacci lattice on the unit sphere; deterministic and near-uniform.
std::vector<Vec3> sphere_directions(int n) {
  std::vector<Vec3> out;
  out.reserve(n);
  const double golden = geom::kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return out;
}

double max_range(const LaserRig& rig) {
  double r = 0.0;
  for (const auto& d : rig.devices) r = std::max(r, d.max_range);
  return r;
}

bool clear_sight(const workcell::TriMesh& mesh, const Vec3& origin, const Vec3& target,
                 const Vec3& normal, double min_d, double max_d, double max_incidence) {
  const Vec3 to_origin = origin - target;
  const double d = to_origin.norm();
  if (d < min_d || d > max_d) return false;
  if (normal.dot(to_origin) <= std::max(0.0, d * std::cos(max_incidence))) return false;
  const auto hit = mesh.ray_hit(geom::Ray::make(origin, target - origin));
  return hit && hit->distance >= d - 1e-6;
}

Vec3 target_normal(const Workcell& cell, const TargetMark& t) {
  return cell.mesh.normals()[cell.mesh.closest_point(t.point).triangle];
}

bool covers(const Workcell& cell, const RigidTransform& station, const TargetMark& target,
            const Vec3& normal, const std::vector<Vec3>& shell, const ArmModel& arm,
            const LaserRig& rig, const PlanOptions& opt) {
  const double range = max_range(rig);
  if ((target.point - station.translation).norm() > arm.max_reach + range) return false;
  for (const auto& o : shell) {
    if (clear_sight(cell.mesh, o, target.point, normal, opt.min_beam, range, opt.max_incidence)) return true;
  }
  return false;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = seed ^ 0x9E3779B97F4A7C15ULL;
  for (std::uint64_t v : {a, b, c}) {
    h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    h *= 0xBF58476D1CE4E5B9ULL;
  }
  return h;
}

}  // namespace

std::vector<Vec3> shell_points(const ArmModel& arm, const RigidTransform& station,
                               const PlanOptions& opt) {
  const Vec3 shoulder = shoulder_point(arm);
  std::vector<Vec3> out;
  for (const auto& dir : sphere_directions(opt.shell_samples)) {
    const Vec3 p = geom::apply(station, shoulder + opt.standoff * dir);
    if (p.z() > 0.05) out.push_back(p);  // stay above the floor
  }
  return out;
}

bool coverage_filter(const Workcell& cell, const RigidTransform& station, const TargetMark& target,
                     const ArmModel& arm, const LaserRig& rig, const PlanOptions& opt) {
  return covers(cell, station, target, target_normal(cell, target), shell_points(arm, station, opt),
                arm, rig, opt);
}

CoverResult greedy_cover(const std::vector<std::vector<bool>>& cover_sets) {
  CoverResult r;
  const std::size_t nt = cover_sets.empty() ? 0 : cover_sets.front().size();
  r.assignment.assign(nt, -1);
  std::vector<bool> done(nt, false);
  std::vector<bool> used(cover_sets.size(), false);
  while (true) {
    int best = -1;
    int best_gain = 0;
    for (std::size_t c = 0; c < cover_sets.size(); ++c) {
      if (used[c]) continue;
      int gain = 0;
      for (std::size_t t = 0; t < nt; ++t) gain += (!done[t] && cover_sets[c][t]) ? 1 : 0;
      if (gain > best_gain) {
        best_gain = gain;
        best = static_cast<int>(c);
      }
    }
    if (best < 0) break;
    used[best] = true;
    r.chosen.push_back(best);
    for (std::size_t t = 0; t < nt; ++t) {
      if (!done[t] && cover_sets[best][t]) {
        done[t] = true;
        r.assignment[t] = best;
      }
    }
  }
  for (std::size_t t = 0; t < nt; ++t) {
    if (!done[t]) r.uncovered.push_back(static_cast<int>(t));
  }
  return r;
}

std::vector<std::vector<bool>> coverage_matrix(const Workcell& cell, const ArmModel& arm,
                                               const LaserRig& rig, const PlanOptions& opt) {
  std::vector<Vec3> normals;
  for (const auto& t : cell.targets) normals.push_back(target_normal(cell, t));
  std::vector<std::vector<bool>> m(cell.candidate_stations.size(),
                                   std::vector<bool>(cell.targets.size(), false));
  for (std::size_t c = 0; c < cell.candidate_stations.size(); ++c) {
    const auto& station = cell.candidate_stations[c];
    const auto shell = shell_points(arm, station, opt);
    for (std::size_t t = 0; t < cell.targets.size(); ++t) {
      m[c][t] = covers(cell, station, cell.targets[t], normals[t], shell, arm, rig, opt);
    }
  }
  return m;
}

CoverResult assign_stations(const Workcell& cell, const ArmModel& arm, const LaserRig& rig,
                            const PlanOptions& opt) {
  return greedy_cover(coverage_matrix(cell, arm, rig, opt));
}

AimSolution solve_aim(const Workcell& cell, const RigidTransform& station, int station_id,
                      const TargetMark& target, const ArmModel& arm, const LaserRig& rig,
                      const JointVector& seed, const PlanOptions& opt) {
  if (opt.device < 0 || opt.device >= static_cast<int>(rig.devices.size())) {
    throw Error(Errc::NoSolution, "rig has no device " + std::to_string(opt.device), target.id);
  }
  const auto& device = rig.devices[opt.device];
  const Vec3 normal = target_normal(cell, target);
  const Vec3 shoulder = geom::apply(station, shoulder_point(arm));
  const Vec3 direct = shoulder + opt.standoff * (target.point - shoulder).normalized();

  std::vector<Vec3> origins;
  std::vector<Vec3> candidates{direct};
  auto shell = shell_points(arm, station, opt);
  std::stable_sort(shell.begin(), shell.end(), [&](const Vec3& a, const Vec3& b) {
    return (a - direct).norm() < (b - direct).norm();
  });
  candidates.insert(candidates.end(), shell.begin(), shell.end());
  for (const auto& o : candidates) {
    if (static_cast<int>(origins.size()) >= opt.aim_origins) break;
    if (clear_sight(cell.mesh, o, target.point, normal, opt.min_beam, device.max_range, opt.max_incidence)) {
      origins.push_back(o);
    }
  }

  const RigidTransform to_base = geom::invert(station);
  const std::uint64_t tindex = static_cast<std::uint64_t>(std::max(0, cell.target_index(target.id)));
  int variant = 0;
  for (const auto& origin : origins) {
    for (bool flip : {false, true}) {
      ++variant;
      RigidTransform dev_pose;
      try {
        dev_pose = optics::aim_device(origin, target.point, target.direction, device, flip);
      } catch (const Error&) {
        continue;
      }
      const RigidTransform goal = to_base * optics::tool_for_device(dev_pose, device);
      arm::IkOptions ik_opt;
      ik_opt.restarts = opt.ik_seeds - 1;
      ik_opt.rng_seed = mix_seed(opt.seed, static_cast<std::uint64_t>(station_id), tindex,
                                 static_cast<std::uint64_t>(variant));
      JointVector q;
      try {
        q = arm::ik(arm, goal, seed, ik_opt);
      } catch (const Error&) {
        continue;
      }
      try {
        const auto mark = optics::project_mark(station * arm::fk(arm, q), device, cell.mesh);
        const auto check = optics::verify_mark(mark, target);
        if (check.pass) {
          return {target.id, station_id, opt.device, q, mark, check.pos_err, check.ang_err};
        }
      } catch (const Error&) {
      }
    }
  }
  throw Error(Errc::NoSolution, "no aim solution for target " + target.id, target.id);
}

std::string choose_fixture_set(const Workcell& cell, const Station& station) {
  int inner = 0, outer = 0;
  for (const auto& id : station.assigned_targets) {
    (cell.target(id).group == workcell::TargetGroup::Inner ? inner : outer) += 1;
  }
  const auto majority = inner > outer ? workcell::TargetGroup::Inner : workcell::TargetGroup::Outer;
  for (const auto& set : cell.fixture_sets) {
    if (set.group && *set.group == majority) return set.name;
  }
  const RigidTransform& base = station.base_pose;
  std::string best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& set : cell.fixture_sets) {
    double sum = 0.0;
    for (const auto& name : set.fixtures) sum += (cell.fixture(name)->point - base.translation).norm();
    const double mean = sum / std::max<std::size_t>(1, set.fixtures.size());
    if (mean < best_d) {
      best_d = mean;
      best = set.name;
    }
  }
  return best;
}

Plan order_tasks(const Plan& plan, const Workcell& cell) {
  Plan out = plan;
  out.solutions.clear();
  for (auto& station : out.stations) {
    std::vector<const AimSolution*> pending;
    for (const auto& s : plan.solutions) {
      if (s.station_id == station.id) pending.push_back(&s);
    }
    station.assigned_targets.clear();
    Vec3 cursor = station.base_pose.translation;
    while (!pending.empty()) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < pending.size(); ++i) {
        const double d = (cell.target(pending[i]->target_id).point - cursor).norm();
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      const AimSolution* next = pending[best];
      pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best));
      cursor = cell.target(next->target_id).point;
      station.assigned_targets.push_back(next->target_id);
      out.solutions.push_back(*next);
    }
  }
  return out;
}

double estimate_cycle(const Plan& plan, const ArmModel& arm, double dwell_s, double base_move_s) {
  if (plan.solutions.empty()) return 0.0;
  double total = 0.0;
  JointVector at = plan.home;
  int stations = 0;
  int last_station = std::numeric_limits<int>::min();
  for (const auto& s : plan.solutions) {
    total += arm::move_duration(arm, at, s.q);
    at = s.q;
    if (s.station_id != last_station) {
      ++stations;
      last_station = s.station_id;
    }
  }
  total += dwell_s * static_cast<double>(plan.solutions.size());
  total += base_move_s * static_cast<double>(std::max(0, stations - 1));
  return total;
}

Plan make_plan(const Workcell& cell, const ArmModel& arm, const LaserRig& rig,
               const PlanOptions& opt) {
  const auto matrix = coverage_matrix(cell, arm, rig, opt);
  const CoverResult cover = greedy_cover(matrix);

  Plan plan;
  plan.home = arm.home;
  plan.seed = opt.seed;
  plan.dwell_s = opt.dwell_s;
  plan.base_move_s = opt.base_move_s;

  std::map<int, std::vector<AimSolution>> by_station;
  for (std::size_t t = 0; t < cell.targets.size(); ++t) {
    if (cover.assignment[t] < 0) {
      plan.uncovered.push_back(cell.targets[t].id);
      continue;
    }
    bool solved = false;
    // try the assigned station first, then later chosen stations that also cover it
    auto first = std::find(cover.chosen.begin(), cover.chosen.end(), cover.assignment[t]);
    for (auto it = first; it != cover.chosen.end() && !solved; ++it) {
      const int c = *it;
      if (!matrix[c][t]) continue;
      try {
        by_station[c].push_back(solve_aim(cell, cell.candidate_stations[c], c, cell.targets[t], arm,
                                          rig, arm.home, opt));
        solved = true;
      } catch (const Error& e) {
        if (e.code() != Errc::NoSolution) throw;
      }
    }
    if (!solved) plan.uncovered.push_back(cell.targets[t].id);
  }

  for (int c : cover.chosen) {
    auto it = by_station.find(c);
    if (it == by_station.end() || it->second.empty()) continue;
    Station st;
    st.id = c;
    st.base_pose = cell.candidate_stations[c];
    plan.stations.push_back(st);
    plan.solutions.insert(plan.solutions.end(), it->second.begin(), it->second.end());
  }
  plan = order_tasks(plan, cell);
  for (auto& st : plan.stations) st.localization_set = choose_fixture_set(cell, st);
  plan.estimated_cycle_s = estimate_cycle(plan, arm, opt.dwell_s, opt.base_move_s);
  return plan;
}

namespace {

json joints_json(const JointVector& q) {
  json a = json::array();
  for (int i = 0; i < arm::kJoints; ++i) a.push_back(q[i]);
  return a;
}

JointVector joints_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != arm::kJoints) {
    throw Error(Errc::ParseError, what + ": expected 6 joint values", what);
  }
  JointVector q;
  for (int i = 0; i < arm::kJoints; ++i) q[i] = j[i].get<double>();
  return q;
}

}  // namespace

json to_json(const Plan& plan) {
  json stations = json::array();
  for (const auto& s : plan.stations) {
    stations.push_back({{"id", s.id},
                        {"base_pose", io::pose_to_json(s.base_pose, io::PoseStyle::Quaternion)},
                        {"targets", s.assigned_targets},
                        {"localization_set", s.localization_set}});
  }
  json sols = json::array();
  for (const auto& s : plan.solutions) {
    sols.push_back({{"target", s.target_id},
                    {"station", s.station_id},
                    {"device", s.device},
                    {"q_rad", joints_json(s.q)},
                    {"predicted",
                     {{"point", io::vec3_to_json(s.predicted.point)},
                      {"direction", io::vec3_to_json(s.predicted.direction)},
                      {"range", s.predicted.range},
                      {"triangle", s.predicted.triangle}}},
                    {"pos_err", s.pos_err},
                    {"ang_err", s.ang_err}});
  }
  return {{"version", 1},
          {"seed", plan.seed},
          {"home_rad", joints_json(plan.home)},
          {"dwell_s", plan.dwell_s},
          {"base_move_s", plan.base_move_s},
          {"estimated_cycle_s", plan.estimated_cycle_s},
          {"stations", stations},
          {"solutions", sols},
          {"uncovered", plan.uncovered}};
}

Plan plan_from_json(const json& j) {
  if (io::get_or<int>(j, "version", 1, "plan") != 1) {
    throw Error(Errc::ParseError, "plan: unsupported version", "version");
  }
  Plan p;
  p.seed = io::get_or<std::uint64_t>(j, "seed", 1, "plan");
  if (j.contains("home_rad")) p.home = joints_from(j["home_rad"], "plan.home_rad");
  p.dwell_s = io::get_or<double>(j, "dwell_s", p.dwell_s, "plan");
  p.base_move_s = io::get_or<double>(j, "base_move_s", p.base_move_s, "plan");
  p.estimated_cycle_s = io::get_or<double>(j, "estimated_cycle_s", 0.0, "plan");
  for (const auto& s : j.value("stations", json::array())) {
    Station st;
    st.id = io::get<int>(s, "id", "plan.stations");
    st.base_pose = io::pose_from_json(s.value("base_pose", json::object()), "plan.stations.base_pose");
    st.assigned_targets = io::get_or<std::vector<std::string>>(s, "targets", {}, "plan.stations");
    st.localization_set = io::get_or<std::string>(s, "localization_set", "", "plan.stations");
    p.stations.push_back(st);
  }
  for (const auto& s : j.value("solutions", json::array())) {
    AimSolution a;
    a.target_id = io::get<std::string>(s, "target", "plan.solutions");
    a.station_id = io::get<int>(s, "station", "plan.solutions");
    a.device = io::get_or<int>(s, "device", 0, "plan.solutions");
    a.q = joints_from(s.value("q_rad", json()), "plan.solutions.q_rad");
    const json pred = s.value("predicted", json::object());
    a.predicted.point = io::vec3_from_json(pred.value("point", json()), "predicted.point");
    a.predicted.direction = io::vec3_from_json(pred.value("direction", json()), "predicted.direction");
    a.predicted.range = io::get_or<double>(pred, "range", 0.0, "predicted");
    a.predicted.triangle = io::get_or<int>(pred, "triangle", -1, "predicted");
    a.pos_err = io::get_or<double>(s, "pos_err", 0.0, "plan.solutions");
    a.ang_err = io::get_or<double>(s, "ang_err", 0.0, "plan.solutions");
    if (!p.station(a.station_id)) {
      throw Error(Errc::ValidationError, "solution references unknown station", a.target_id);
    }
    p.solutions.push_back(a);
  }
  p.uncovered = io::get_or<std::vector<std::string>>(j, "uncovered", {}, "plan");
  return p;
}

std::string serialize_plan(const Plan& plan) { return to_json(plan).dump(2) + "\n"; }

Plan load_plan(const std::string& path) {
  return plan_from_json(io::parse_json(io::read_text(path), path));
}

}  // namespace laserguide::plan
