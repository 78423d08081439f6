#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "laserguide/geom.hpp"
#include "laserguide/io.hpp"
#include "laserguide/workcell.hpp"

namespace laserguide::locate {

using geom::RigidTransform;
using geom::Vec3;

enum class Source { Fixture, Marker };

struct Correspondences {
  std::vector<std::pair<Vec3, Vec3>> pairs;  // (workcell point, robot-frame point)
  Source source = Source::Fixture;
};

struct LocalizationResult {
  RigidTransform pose;  // workcell frame expressed in the robot base frame
  double rms = 0.0;     // m
  std::vector<double> residuals;
  std::vector<std::string> names;  // fixture names, parallel to residuals (may be empty)
  std::string fixture_set;
  std::uint64_t workcell_digest = 0;

  /// Robot base pose in the workcell frame.
  RigidTransform base_in_workcell() const { return geom::invert(pose); }
};

/// Least-squares rigid fit robot ≈ pose · workcell from the SVD of the
/// cross-covariance, with a determinant correction so the rotation is always
/// proper. Throws TooFewPoints (< 3 pairs), DegenerateGeometry (collinear
/// workcell points) and RankDeficient (non-finite input or SVD failure).
LocalizationResult register_points(const Correspondences& c);

inline constexpr double kDefaultAcceptRms = 0.002;

struct Measurement {
  std::string fixture;
  Vec3 robot_point = Vec3::Zero();
};

/// Fits the pose from named fixture measurements. Throws UnknownFixture,
/// TooFewPoints, or ResidualTooHigh (subject = fixture with the largest
/// residual) when rms exceeds `accept_rms`.
LocalizationResult localize(const workcell::Workcell& cell, const std::vector<Measurement>& measured,
                            double accept_rms = kDefaultAcceptRms);

/// Measurements a robot at `base_in_workcell` would take of the fixtures in
/// `set_name`, with optional isotropic Gaussian noise.
std::vector<Measurement> synthesize_measurements(const workcell::Workcell& cell,
                                                 const std::string& set_name,
                                                 const RigidTransform& base_in_workcell,
                                                 double noise_sigma = 0.0, std::uint64_t seed = 1);

io::json measurements_to_json(const std::vector<Measurement>& m, const std::string& set_name);
std::vector<Measurement> measurements_from_json(const io::json& j, std::string* set_name = nullptr);

io::json to_json(const LocalizationResult& r);
LocalizationResult localization_from_json(const io::json& j);

}  // namespace laserguide::locate
