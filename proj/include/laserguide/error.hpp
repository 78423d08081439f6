#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace laserguide {

enum class Errc {
  JointLimit,
  NoConvergence,
  ParseError,
  ValidationError,
  BadTriangle,
  NoHit,
  OutOfRange,
  Grazing,
  Degenerate,
  Implausible,
  DegenerateGeometry,
  RankDeficient,
  UnknownFixture,
  TooFewPoints,
  ResidualTooHigh,
  NoSolution,
  MalformedMessage,
  UnknownType,
  BadArity,
  TwinDisconnected,
  TwinRejected,
  LocalizationStale,
  IoError,
};

/// Stable lower-case identifier used on the diagnostic stream.
std::string_view errc_name(Errc code) noexcept;

/// All library failures are reported with this exception. `subject` names the
/// offending entity (target id, fixture name, joint index) when there is one.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::string subject = {})
      : std::runtime_error(message), code_(code), subject_(std::move(subject)) {}

  Errc code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  Errc code_;
  std::string subject_;
};

}  // namespace laserguide
