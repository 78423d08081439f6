#include "laserguide/locate.hpp"

#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "laserguide/error.hpp"

namespace laserguide::locate {

using io::json;

LocalizationResult register_points(const Correspondences& c) {
  const std::size_t n = c.pairs.size();
  if (n < 3) throw Error(Errc::TooFewPoints, "rigid fit needs at least 3 point pairs");
  std::vector<Vec3> cell_pts;
  cell_pts.reserve(n);
  Vec3 mean_a = Vec3::Zero(), mean_b = Vec3::Zero();
  for (const auto& [a, b] : c.pairs) {
    if (!a.allFinite() || !b.allFinite()) throw Error(Errc::RankDeficient, "non-finite point");
    cell_pts.push_back(a);
    mean_a += a;
    mean_b += b;
  }
  if (geom::collinearity_spread(cell_pts) <= 1e-6) {
    throw Error(Errc::DegenerateGeometry, "workcell points are collinear");
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);

  geom::Mat3 cov = geom::Mat3::Zero();
  for (const auto& [a, b] : c.pairs) cov += (b - mean_b) * (a - mean_a).transpose();

  Eigen::JacobiSVD<geom::Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw Error(Errc::RankDeficient, "SVD failed");
  geom::Mat3 d = geom::Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const geom::Mat3 r = svd.matrixU() * d * svd.matrixV().transpose();
  if (!r.allFinite()) throw Error(Errc::RankDeficient, "rotation is not finite");

  LocalizationResult out;
  out.pose.rotation = geom::Rotation::from_matrix(r);
  out.pose.translation = mean_b - out.pose.rotation * mean_a;
  double sum = 0.0;
  for (const auto& [a, b] : c.pairs) {
    const double e = (geom::apply(out.pose, a) - b).norm();
    out.residuals.push_back(e);
    sum += e * e;
  }
  out.rms = std::sqrt(sum / static_cast<double>(n));
  return out;
}

LocalizationResult localize(const workcell::Workcell& cell, const std::vector<Measurement>& measured,
                            double accept_rms) {
  Correspondences c;
  std::vector<std::string> names;
  for (const auto& m : measured) {
    const auto* f = cell.fixture(m.fixture);
    if (!f) throw Error(Errc::UnknownFixture, "unknown fixture " + m.fixture, m.fixture);
    c.pairs.emplace_back(f->point, m.robot_point);
    names.push_back(m.fixture);
  }
  if (c.pairs.size() < 3) {
    throw Error(Errc::TooFewPoints, "localization needs at least 3 fixtures, got " +
                                        std::to_string(c.pairs.size()));
  }
  LocalizationResult r = register_points(c);
  r.names = names;
  r.workcell_digest = cell.digest();
  if (r.rms > accept_rms) {
    std::size_t worst = 0;
    for (std::size_t i = 1; i < r.residuals.size(); ++i) {
      if (r.residuals[i] > r.residuals[worst]) worst = i;
    }
    throw Error(Errc::ResidualTooHigh,
                "localization rms " + std::to_string(r.rms * 1000.0) + " mm exceeds threshold; worst fixture " +
                    names[worst],
                names[worst]);
  }
  return r;
}

std::vector<Measurement> synthesize_measurements(const workcell::Workcell& cell,
                                                 const std::string& set_name,
                                                 const RigidTransform& base_in_workcell,
                                                 double noise_sigma, std::uint64_t seed) {
  const workcell::FixtureSet* set = nullptr;
  for (const auto& s : cell.fixture_sets) {
    if (s.name == set_name) set = &s;
  }
  if (!set) throw Error(Errc::UnknownFixture, "unknown fixture set " + set_name, set_name);
  const RigidTransform to_robot = geom::invert(base_in_workcell);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
  std::vector<Measurement> out;
  for (const auto& name : set->fixtures) {
    Vec3 p = geom::apply(to_robot, cell.fixture(name)->point);
    if (noise_sigma > 0.0) p += Vec3(noise(rng), noise(rng), noise(rng));
    out.push_back({name, p});
  }
  return out;
}

json measurements_to_json(const std::vector<Measurement>& m, const std::string& set_name) {
  json points = json::array();
  for (const auto& x : m) points.push_back({{"fixture", x.fixture}, {"xyz", io::vec3_to_json(x.robot_point)}});
  return {{"version", 1}, {"fixture_set", set_name}, {"points", points}};
}

std::vector<Measurement> measurements_from_json(const json& j, std::string* set_name) {
  if (set_name) *set_name = io::get_or<std::string>(j, "fixture_set", "", "measurements");
  std::vector<Measurement> out;
  for (const auto& p : j.value("points", json::array())) {
    out.push_back({io::get<std::string>(p, "fixture", "measurements"),
                   io::vec3_from_json(p.value("xyz", json()), "measurements.xyz")});
  }
  return out;
}

json to_json(const LocalizationResult& r) {
  return {{"version", 1},
          {"pose", io::pose_to_json(r.pose, io::PoseStyle::Quaternion)},
          {"rms", r.rms},
          {"residuals", r.residuals},
          {"names", r.names},
          {"fixture_set", r.fixture_set},
          {"workcell_digest", r.workcell_digest}};
}

LocalizationResult localization_from_json(const json& j) {
  LocalizationResult r;
  r.pose = io::pose_from_json(j.value("pose", json::object()), "localization.pose");
  r.rms = io::get<double>(j, "rms", "localization");
  r.residuals = io::get_or<std::vector<double>>(j, "residuals", {}, "localization");
  r.names = io::get_or<std::vector<std::string>>(j, "names", {}, "localization");
  r.fixture_set = io::get_or<std::string>(j, "fixture_set", "", "localization");
  r.workcell_digest = io::get_or<std::uint64_t>(j, "workcell_digest", 0, "localization");
  return r;
}

}  // namespace laserguide::locate
