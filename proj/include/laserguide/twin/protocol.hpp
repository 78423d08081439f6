#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "laserguide/arm.hpp"
#include "laserguide/error.hpp"

/// Line protocol between the sequencer and a robot controller (or the
/// emulator). One JSON object per line; see docs/protocol.md.
namespace laserguide::twin {

using arm::JointVector;

inline constexpr std::string_view kProtocolVersion = "1";
inline constexpr std::size_t kMaxLineBytes = 65536;

enum class MsgType { Hello, MoveJ, GetPos, Pos, Ack, Err, Laser, State, Halt };

std::string_view type_name(MsgType t);
std::optional<MsgType> type_from_name(std::string_view name);

struct Hello {
  std::string version{kProtocolVersion};
  bool operator==(const Hello&) const = default;
};
struct MoveJ {
  JointVector q = JointVector::Zero();
  double speed = 1.0;  // fraction of max joint speed, (0, 1]
  bool operator==(const MoveJ& o) const { return q == o.q && speed == o.speed; }
};
struct GetPos {
  bool operator==(const GetPos&) const = default;
};
struct Pos {
  JointVector q = JointVector::Zero();
  bool operator==(const Pos& o) const { return q == o.q; }
};
struct Ack {
  std::optional<std::string> version;  // HELLO replies
  std::optional<double> eta;           // MOVEJ replies: seconds until arrival
  bool operator==(const Ack&) const = default;
};
struct Err {
  std::string code;  // busy, joint-limit, bad-arity, bad-speed, bad-device, ...
  std::string text;
  bool operator==(const Err&) const = default;
};
struct Laser {
  int device = 0;
  bool on = false;
  bool operator==(const Laser&) const = default;
};
/// Request: advance the simulated clock by `advance` seconds (sim-time
/// emulators only; 0 just queries). Reply: the controller status.
struct State {
  bool reply = false;
  double advance = 0.0;
  bool moving = false;
  double clock = 0.0;
  double last_arrival = 0.0;
  std::vector<bool> lasers;
  bool operator==(const State&) const = default;
};
struct Halt {
  bool operator==(const Halt&) const = default;
};

using Payload = std::variant<Hello, MoveJ, GetPos, Pos, Ack, Err, Laser, State, Halt>;

struct TwinMessage {
  std::int64_t id = 0;
  Payload payload;

  MsgType type() const { return static_cast<MsgType>(payload.index()); }
  bool operator==(const TwinMessage&) const = default;
};

/// HELLO, MOVEJ, GETPOS, LASER, HALT, and STATE without the reply flag.
bool is_request(const TwinMessage& m);

/// One line, without the trailing newline.
std::string encode(const TwinMessage& m);

struct DecodeError {
  Errc code = Errc::MalformedMessage;  // MalformedMessage, UnknownType or BadArity
  std::string message;
  std::optional<std::int64_t> id;  // when the line carried a usable id
};

using DecodeResult = std::variant<TwinMessage, DecodeError>;

/// Never throws; trailing '\r' / '\n' are ignored.
DecodeResult decode(std::string_view line);

}  // namespace laserguide::twin
