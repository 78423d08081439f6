#include "laserguide/twin/protocol.hpp"

#include <array>
#include <cmath>

#include <nlohmann/json.hpp>

namespace laserguide::twin {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 9> kNames = {"HELLO", "MOVEJ", "GETPOS", "POS", "ACK",
                                                     "ERR",   "LASER", "STATE",  "HALT"};

ojson joints(const JointVector& q) {
  ojson a = ojson::array();
  for (int i = 0; i < arm::kJoints; ++i) a.push_back(q[i]);
  return a;
}

struct Fail {
  DecodeError error;
};

const ojson& field(const ojson& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Fail{{Errc::MalformedMessage, std::string("missing field ") + key, {}}};
  return *it;
}

double number(const ojson& j, const char* key) {
  const ojson& v = field(j, key);
  if (!v.is_number()) throw Fail{{Errc::MalformedMessage, std::string(key) + " is not a number", {}}};
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Fail{{Errc::MalformedMessage, std::string(key) + " is not finite", {}}};
  return d;
}

bool boolean(const ojson& j, const char* key) {
  const ojson& v = field(j, key);
  if (!v.is_boolean()) throw Fail{{Errc::MalformedMessage, std::string(key) + " is not a boolean", {}}};
  return v.get<bool>();
}

std::string text(const ojson& j, const char* key) {
  const ojson& v = field(j, key);
  if (!v.is_string()) throw Fail{{Errc::MalformedMessage, std::string(key) + " is not a string", {}}};
  return v.get<std::string>();
}

JointVector joint_field(const ojson& j, const char* key) {
  const ojson& v = field(j, key);
  if (!v.is_array()) throw Fail{{Errc::MalformedMessage, std::string(key) + " is not an array", {}}};
  if (v.size() != arm::kJoints) {
    throw Fail{{Errc::BadArity, "expected 6 joints, got " + std::to_string(v.size()), {}}};
  }
  JointVector q;
  for (int i = 0; i < arm::kJoints; ++i) {
    if (!v[i].is_number()) throw Fail{{Errc::MalformedMessage, "joint value is not a number", {}}};
    q[i] = v[i].get<double>();
    if (!std::isfinite(q[i])) throw Fail{{Errc::MalformedMessage, "joint value is not finite", {}}};
  }
  return q;
}

}  // namespace

std::string_view type_name(MsgType t) { return kNames[static_cast<std::size_t>(t)]; }

std::optional<MsgType> type_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<MsgType>(i);
  }
  return std::nullopt;
}

bool is_request(const TwinMessage& m) {
  switch (m.type()) {
    case MsgType::State:
      return !std::get<State>(m.payload).reply;
    case MsgType::Hello:
    case MsgType::MoveJ:
    case MsgType::GetPos:
    case MsgType::Laser:
    case MsgType::Halt:
      return true;
    default:
      return false;
  }
}

std::string encode(const TwinMessage& m) {
  ojson j;
  j["type"] = type_name(m.type());
  j["id"] = m.id;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Hello>) {
          j["version"] = p.version;
        } else if constexpr (std::is_same_v<T, MoveJ>) {
          j["q"] = joints(p.q);
          j["speed"] = p.speed;
        } else if constexpr (std::is_same_v<T, Pos>) {
          j["q"] = joints(p.q);
        } else if constexpr (std::is_same_v<T, Ack>) {
          if (p.version) j["version"] = *p.version;
          if (p.eta) j["eta"] = *p.eta;
        } else if constexpr (std::is_same_v<T, Err>) {
          j["code"] = p.code;
          j["text"] = p.text;
        } else if constexpr (std::is_same_v<T, Laser>) {
          j["device"] = p.device;
          j["on"] = p.on;
        } else if constexpr (std::is_same_v<T, State>) {
          if (p.reply) {
            j["reply"] = true;
            j["moving"] = p.moving;
            j["clock"] = p.clock;
            j["last_arrival"] = p.last_arrival;
            ojson lasers = ojson::array();
            for (bool b : p.lasers) lasers.push_back(b);
            j["lasers"] = lasers;
          } else {
            j["advance"] = p.advance;
          }
        }
      },
      m.payload);
  return j.dump();
}

DecodeResult decode(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  if (line.size() > kMaxLineBytes) return DecodeError{Errc::MalformedMessage, "line too long", {}};
  const ojson j = ojson::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return DecodeError{Errc::MalformedMessage, "not a JSON object", {}};
  }
  std::optional<std::int64_t> id;
  try {
    const ojson& jid = field(j, "id");
    if (!jid.is_number_integer() || (jid.is_number_unsigned() && jid.get<std::uint64_t>() > INT64_MAX)) {
      throw Fail{{Errc::MalformedMessage, "id is not an integer", {}}};
    }
    id = jid.get<std::int64_t>();
    if (*id < 0) throw Fail{{Errc::MalformedMessage, "id is negative", {}}};
    const ojson& jt = field(j, "type");
    if (!jt.is_string()) throw Fail{{Errc::MalformedMessage, "type is not a string", {}}};
    const auto type = type_from_name(jt.get<std::string>());
    if (!type) throw Fail{{Errc::UnknownType, "unknown message type", {}}};

    TwinMessage m;
    m.id = *id;
    switch (*type) {
      case MsgType::Hello:
        m.payload = Hello{text(j, "version")};
        break;
      case MsgType::MoveJ: {
        MoveJ mv{joint_field(j, "q"), number(j, "speed")};
        m.payload = mv;
        break;
      }
      case MsgType::GetPos:
        m.payload = GetPos{};
        break;
      case MsgType::Pos:
        m.payload = Pos{joint_field(j, "q")};
        break;
      case MsgType::Ack: {
        Ack a;
        if (j.contains("version")) a.version = text(j, "version");
        if (j.contains("eta")) a.eta = number(j, "eta");
        m.payload = a;
        break;
      }
      case MsgType::Err:
        m.payload = Err{text(j, "code"), text(j, "text")};
        break;
      case MsgType::Laser: {
        const ojson& d = field(j, "device");
        if (!d.is_number_integer() || d.get<std::int64_t>() < 0 || d.get<std::int64_t>() > 1000) {
          throw Fail{{Errc::MalformedMessage, "device is not a small non-negative integer", {}}};
        }
        m.payload = Laser{d.get<int>(), boolean(j, "on")};
        break;
      }
      case MsgType::State: {
        State s;
        if (j.contains("reply")) {
          s.reply = boolean(j, "reply");
        }
        if (s.reply) {
          s.moving = boolean(j, "moving");
          s.clock = number(j, "clock");
          s.last_arrival = number(j, "last_arrival");
          const ojson& l = field(j, "lasers");
          if (!l.is_array()) throw Fail{{Errc::MalformedMessage, "lasers is not an array", {}}};
          for (const auto& b : l) {
            if (!b.is_boolean()) throw Fail{{Errc::MalformedMessage, "laser flag is not a boolean", {}}};
            s.lasers.push_back(b.get<bool>());
          }
        } else {
          s.advance = number(j, "advance");
          if (s.advance < 0.0) throw Fail{{Errc::MalformedMessage, "advance is negative", {}}};
        }
        m.payload = s;
        break;
      }
      case MsgType::Halt:
        m.payload = Halt{};
        break;
    }
    return m;
  } catch (Fail& f) {
    f.error.id = id;
    return f.error;
  } catch (const std::exception& e) {
    return DecodeError{Errc::MalformedMessage, e.what(), id};
  }
}

}  // namespace laserguide::twin
