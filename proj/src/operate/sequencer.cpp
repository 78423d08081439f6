#include "laserguide/operate/sequencer.hpp"

#include <array>

namespace laserguide::operate {

namespace {

constexpr std::array<std::string_view, kPhaseCount> kPhaseNames = {
    "IDLE", "LOCALIZING", "AT_STATION", "PROJECTING", "MOVING", "STOPPED", "DONE"};
constexpr std::array<std::string_view, kCommandCount> kCommandNames = {"NEXT", "PREV", "RESTART",
                                                                       "STOP"};
constexpr std::array<std::string_view, 4> kEventNames = {"begin", "localized", "depart", "arrived"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
  for (auto& c : out) if (c == '_') c = '-';
  return out;
}

Transition noop(SequencerState s, OperatorCommand cmd) {
  s.last_event = "noop-" + lower(command_name(cmd)) + "-" + lower(phase_name(s.phase));
  return {s, {}};
}

twin::Payload laser_off(const SequencerState& s) { return twin::Laser{s.laser_device, false}; }

twin::Payload move_to(const plan::Plan& plan, int task) {
  return twin::MoveJ{plan.solutions[task].q, 1.0};
}

Transition stop(SequencerState s) {
  Transition t;
  t.emit = {laser_off(s), twin::Halt{}};
  if (s.phase != Phase::Stopped) s.resume = s.phase;
  s.phase = Phase::Stopped;
  s.laser_on = false;
  s.last_event = "stop";
  t.state = s;
  return t;
}

Transition start_move(SequencerState s, const plan::Plan& plan, int task, std::string event,
                      bool laser_was_on) {
  Transition t;
  if (laser_was_on) t.emit.push_back(laser_off(s));
  t.emit.push_back(move_to(plan, task));
  s.phase = Phase::Moving;
  s.task = task;
  s.station = plan.solutions[task].station_id;
  s.laser_on = false;
  s.last_event = std::move(event);
  t.state = s;
  return t;
}

Transition from_projecting(SequencerState s, OperatorCommand cmd, const plan::Plan& plan) {
  const int n = static_cast<int>(plan.solutions.size());
  const auto [first, last] = plan.station_span(s.task);
  (void)last;
  switch (cmd) {
    case OperatorCommand::Next: {
      const int next = s.task + 1;
      if (next >= n) {
        Transition t{{}, {laser_off(s)}};
        s.phase = Phase::Done;
        s.task = n;
        s.laser_on = false;
        s.last_event = "done";
        t.state = s;
        return t;
      }
      if (plan.solutions[next].station_id != s.station) {
        Transition t{{}, {laser_off(s)}};
        s.phase = Phase::Localizing;
        s.task = next;
        s.station = plan.solutions[next].station_id;
        s.laser_on = false;
        s.last_event = "next-station";
        t.state = s;
        return t;
      }
      return start_move(s, plan, next, "next", true);
    }
    case OperatorCommand::Prev:
      if (s.task == first) {
        s.last_event = "noop-prev-at-first";
        return {s, {}};
      }
      return start_move(s, plan, s.task - 1, "prev", true);
    case OperatorCommand::Restart:
      return start_move(s, plan, first, "restart", true);
    case OperatorCommand::Stop:
      return stop(s);
  }
  return {s, {}};
}

Transition from_stopped(SequencerState s, OperatorCommand cmd, const plan::Plan& plan) {
  if (cmd == OperatorCommand::Stop) return stop(s);
  if (cmd != OperatorCommand::Next) return noop(s, cmd);
  switch (s.resume) {
    case Phase::Projecting:
    case Phase::Moving:
    case Phase::AtStation:
      return start_move(s, plan, s.task, "resume", false);
    default:
      s.phase = s.resume;
      s.last_event = "resume";
      return {s, {}};
  }
}

}  // namespace

std::string_view phase_name(Phase p) { return kPhaseNames[static_cast<int>(p)]; }

std::optional<Phase> phase_from_name(std::string_view s) {
  for (int i = 0; i < kPhaseCount; ++i) {
    if (kPhaseNames[i] == s) return static_cast<Phase>(i);
  }
  return std::nullopt;
}

std::string_view command_name(OperatorCommand c) { return kCommandNames[static_cast<int>(c)]; }

std::optional<OperatorCommand> command_from_name(std::string_view s) {
  for (int i = 0; i < kCommandCount; ++i) {
    if (kCommandNames[i] == s) return static_cast<OperatorCommand>(i);
  }
  return std::nullopt;
}

std::string_view event_name(RunEvent e) { return kEventNames[static_cast<int>(e)]; }

std::optional<RunEvent> event_from_name(std::string_view s) {
  for (int i = 0; i < 4; ++i) {
    if (kEventNames[i] == s) return static_cast<RunEvent>(i);
  }
  return std::nullopt;
}

Transition apply_command(const SequencerState& s, OperatorCommand cmd, const plan::Plan& plan) {
  if (cmd == OperatorCommand::Stop) return stop(s);
  switch (s.phase) {
    case Phase::Projecting:
      return from_projecting(s, cmd, plan);
    case Phase::Stopped:
      return from_stopped(s, cmd, plan);
    default:
      return noop(s, cmd);
  }
}

Transition apply_event(const SequencerState& s, RunEvent e, const plan::Plan& plan) {
  SequencerState out = s;
  const int n = static_cast<int>(plan.solutions.size());
  out.last_event = std::string("noop-") + std::string(event_name(e));
  switch (e) {
    case RunEvent::Begin:
      if (s.phase != Phase::Idle) return {out, {}};
      if (n == 0) {
        out.phase = Phase::Done;
        out.task = 0;
      } else {
        out.phase = Phase::Localizing;
        out.task = 0;
        out.station = plan.solutions[0].station_id;
      }
      out.last_event = "begin";
      return {out, {}};
    case RunEvent::Localized:
      if (s.phase != Phase::Localizing) return {out, {}};
      out.phase = Phase::AtStation;
      out.last_event = "localized";
      return {out, {}};
    case RunEvent::Depart:
      if (s.phase != Phase::AtStation) return {out, {}};
      return start_move(s, plan, s.task, "depart", false);
    case RunEvent::Arrived: {
      if (s.phase != Phase::Moving) return {out, {}};
      out.phase = Phase::Projecting;
      out.laser_on = true;
      out.laser_device = plan.solutions[s.task].device;
      out.last_event = "arrived";
      return {out, {twin::Laser{out.laser_device, true}}};
    }
  }
  return {out, {}};
}

}  // namespace laserguide::operate
