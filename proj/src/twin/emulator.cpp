#include "laserguide/twin/emulator.hpp"

#include <cmath>

namespace laserguide::twin {

EmulatorState emulator_step(EmulatorState s, double dt) {
  if (!(dt > 0.0)) return s;
  if (s.moving) {
    bool arrived = true;
    for (int i = 0; i < arm::kJoints; ++i) {
      const double remaining = s.goal[i] - s.q[i];
      const double reach = s.rate[i] * dt;
      if (std::abs(remaining) <= reach) {
        s.q[i] = s.goal[i];
      } else {
        s.q[i] += std::copysign(reach, remaining);
        arrived = false;
      }
    }
    if (arrived) s.moving = false;
  }
  s.clock += dt;
  return s;
}

Emulator::Emulator(arm::ArmModel arm, ClockMode mode, int laser_count, JointVector start)
    : arm_(std::move(arm)), mode_(mode), last_sync_(std::chrono::steady_clock::now()) {
  state_.q = arm_.clamp(start);
  state_.goal = state_.q;
  state_.lasers.assign(static_cast<std::size_t>(laser_count), false);
}

void Emulator::sync_wall_clock() {
  if (mode_ != ClockMode::Wall) return;
  const auto now = std::chrono::steady_clock::now();
  const double dt = std::chrono::duration<double>(now - last_sync_).count();
  last_sync_ = now;
  if (dt > 0.0) state_ = emulator_step(state_, dt);
}

EmulatorState Emulator::snapshot() {
  std::lock_guard lock(mutex_);
  sync_wall_clock();
  return state_;
}

TwinMessage Emulator::reject(const DecodeError& error) {
  std::string code = "malformed";
  if (error.code == Errc::BadArity) code = "bad-arity";
  if (error.code == Errc::UnknownType) code = "unknown-type";
  return {error.id.value_or(0), Err{code, error.message}};
}

TwinMessage Emulator::handle(const TwinMessage& request) {
  std::lock_guard lock(mutex_);
  sync_wall_clock();
  return dispatch(request);
}

TwinMessage Emulator::dispatch(const TwinMessage& req) {
  const auto id = req.id;
  auto err = [&](const char* code, std::string text) { return TwinMessage{id, Err{code, std::move(text)}}; };

  switch (req.type()) {
    case MsgType::Hello:
      return {id, Ack{std::string(kProtocolVersion), std::nullopt}};
    case MsgType::MoveJ: {
      const auto& mv = std::get<MoveJ>(req.payload);
      if (state_.moving) return err("busy", "a move is in progress");
      if (!(mv.speed > 0.0 && mv.speed <= 1.0)) return err("bad-speed", "speed must lie in (0, 1]");
      if (!arm_.within_limits(mv.q)) return err("joint-limit", "goal outside joint limits");
      const double eta = arm::move_duration(arm_, state_.q, mv.q, mv.speed);
      state_.goal = mv.q;
      for (int i = 0; i < arm::kJoints; ++i) state_.rate[i] = mv.speed * arm_.joints[i].max_speed;
      state_.moving = state_.goal != state_.q;
      state_.last_arrival = state_.clock + eta;
      return {id, Ack{std::nullopt, eta}};
    }
    case MsgType::GetPos:
      return {id, Pos{state_.q}};
    case MsgType::Laser: {
      const auto& l = std::get<Laser>(req.payload);
      if (l.device < 0 || l.device >= static_cast<int>(state_.lasers.size())) {
        return err("bad-device", "no laser " + std::to_string(l.device));
      }
      state_.lasers[static_cast<std::size_t>(l.device)] = l.on;
      return {id, Ack{}};
    }
    case MsgType::State: {
      const auto& s = std::get<State>(req.payload);
      if (s.reply) return err("unexpected", "STATE replies are not requests");
      if (s.advance > 0.0) {
        if (mode_ != ClockMode::Sim) return err("sim-only", "advance needs a sim-time emulator");
        state_ = emulator_step(state_, s.advance);
      }
      State r;
      r.reply = true;
      r.moving = state_.moving;
      r.clock = state_.clock;
      r.last_arrival = state_.last_arrival;
      r.lasers = state_.lasers;
      return {id, r};
    }
    case MsgType::Halt:
      state_.goal = state_.q;
      state_.moving = false;
      return {id, Ack{}};
    case MsgType::Pos:
    case MsgType::Ack:
    case MsgType::Err:
      return err("unexpected", std::string(type_name(req.type())) + " is a reply type");
  }
  return err("unexpected", "unhandled message");
}

}  // namespace laserguide::twin
