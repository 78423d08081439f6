#include "laserguide/twin/program.hpp"

#include <sstream>
#include <thread>

#include "laserguide/error.hpp"

namespace laserguide::twin {

std::vector<TwinMessage> export_program(const plan::Plan& plan) {
  std::vector<TwinMessage> out;
  std::int64_t id = 1;
  out.push_back({id++, Hello{}});
  for (const auto& s : plan.solutions) {
    out.push_back({id++, MoveJ{s.q, 1.0}});
    out.push_back({id++, Laser{s.device, true}});
    out.push_back({id++, Laser{s.device, false}});
  }
  return out;
}

std::string program_text(const std::vector<TwinMessage>& program) {
  std::string text;
  for (const auto& m : program) text += encode(m) + "\n";
  return text;
}

std::vector<TwinMessage> parse_program(const std::string& text) {
  std::vector<TwinMessage> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto decoded = decode(line);
    if (auto* err = std::get_if<DecodeError>(&decoded)) {
      throw Error(Errc::MalformedMessage, "program line " + std::to_string(lineno) + ": " + err->message,
                  std::to_string(lineno));
    }
    out.push_back(std::get<TwinMessage>(decoded));
  }
  return out;
}

std::vector<TwinMessage> replay_program(TwinClient& client, const std::vector<TwinMessage>& program,
                                        bool sim_time, double tick) {
  std::vector<TwinMessage> replies;
  for (const auto& m : program) {
    replies.push_back(client.call(m.payload));
    if (m.type() != MsgType::MoveJ) continue;
    while (true) {
      State q;
      q.advance = sim_time ? tick : 0.0;
      const auto r = client.call(q);
      if (!std::get<State>(r.payload).moving) break;
      if (!sim_time) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  return replies;
}

}  // namespace laserguide::twin
