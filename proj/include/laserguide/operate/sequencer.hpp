#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "laserguide/plan.hpp"
#include "laserguide/twin/protocol.hpp"

namespace laserguide::operate {

enum class Phase { Idle, Localizing, AtStation, Projecting, Moving, Stopped, Done };
inline constexpr int kPhaseCount = 7;

enum class OperatorCommand { Next, Prev, Restart, Stop };
inline constexpr int kCommandCount = 4;

/// Internal run events (not operator input).
enum class RunEvent { Begin, Localized, Depart, Arrived };

std::string_view phase_name(Phase p);
std::optional<Phase> phase_from_name(std::string_view s);
std::string_view command_name(OperatorCommand c);
std::optional<OperatorCommand> command_from_name(std::string_view s);
std::string_view event_name(RunEvent e);
std::optional<RunEvent> event_from_name(std::string_view s);

struct SequencerState {
  Phase phase = Phase::Idle;
  int task = 0;           // in [0, task count]; the task being approached, shown or resumed
  int station = -1;       // station id of `task`, -1 before the run starts
  bool laser_on = false;  // only while PROJECTING
  int laser_device = 0;
  std::string last_event = "init";
  Phase resume = Phase::Idle;  // phase interrupted by STOP

  bool operator==(const SequencerState&) const = default;
};

struct Transition {
  SequencerState state;
  std::vector<twin::Payload> emit;  // in send order; ids are assigned by the link
};

/// Total over every phase and command; invalid combinations are no-ops that
/// only change `last_event`.
Transition apply_command(const SequencerState& s, OperatorCommand cmd, const plan::Plan& plan);

/// Begin: IDLE -> LOCALIZING (or DONE for an empty plan). Localized:
/// LOCALIZING -> AT_STATION. Depart: AT_STATION -> MOVING with a MOVEJ.
/// Arrived: MOVING -> PROJECTING with laser on. Anything else is a no-op.
Transition apply_event(const SequencerState& s, RunEvent e, const plan::Plan& plan);

}  // namespace laserguide::operate
