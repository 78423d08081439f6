#pragma once

#include <string>
#include <vector>

#include "laserguide/plan.hpp"
#include "laserguide/twin/protocol.hpp"
#include "laserguide/twin/transport.hpp"

namespace laserguide::twin {

/// Replayable controller program for a plan: HELLO, then per task MOVEJ,
/// LASER on, LASER off. Ids run from 1.
std::vector<TwinMessage> export_program(const plan::Plan& plan);
std::string program_text(const std::vector<TwinMessage>& program);
/// Throws MalformedMessage naming the offending line.
std::vector<TwinMessage> parse_program(const std::string& text);

/// Sends every request in order, waiting for each MOVEJ to finish (sim-time
/// emulators are advanced in `tick` steps). Returns the replies.
std::vector<TwinMessage> replay_program(TwinClient& client, const std::vector<TwinMessage>& program,
                                        bool sim_time, double tick = 0.1);

}  // namespace laserguide::twin
