#include "laserguide/error.hpp"

namespace laserguide {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::JointLimit: return "joint-limit";
    case Errc::NoConvergence: return "no-convergence";
    case Errc::ParseError: return "parse-error";
    case Errc::ValidationError: return "validation-error";
    case Errc::BadTriangle: return "bad-triangle";
    case Errc::NoHit: return "no-hit";
    case Errc::OutOfRange: return "out-of-range";
    case Errc::Grazing: return "grazing";
    case Errc::Degenerate: return "degenerate";
    case Errc::Implausible: return "implausible";
    case Errc::DegenerateGeometry: return "degenerate-geometry";
    case Errc::RankDeficient: return "rank-deficient";
    case Errc::UnknownFixture: return "unknown-fixture";
    case Errc::TooFewPoints: return "too-few-points";
    case Errc::ResidualTooHigh: return "residual-too-high";
    case Errc::NoSolution: return "no-solution";
    case Errc::MalformedMessage: return "malformed-message";
    case Errc::UnknownType: return "unknown-type";
    case Errc::BadArity: return "bad-arity";
    case Errc::TwinDisconnected: return "twin-disconnected";
    case Errc::TwinRejected: return "twin-rejected";
    case Errc::LocalizationStale: return "localization-stale";
    case Errc::IoError: return "io-error";
  }
  return "unknown";
}

}  // namespace laserguide
