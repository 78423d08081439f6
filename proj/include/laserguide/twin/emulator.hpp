#pragma once

#include <chrono>
#include <mutex>
#include <vector>

#include "laserguide/arm.hpp"
#include "laserguide/twin/protocol.hpp"

namespace laserguide::twin {

struct EmulatorState {
  JointVector q = JointVector::Zero();
  JointVector goal = JointVector::Zero();
  JointVector rate = JointVector::Zero();  // rad/s per joint for the current move
  bool moving = false;
  std::vector<bool> lasers;
  double clock = 0.0;          // s
  double last_arrival = 0.0;   // closed-form arrival time of the latest move
};

/// Advances every joint toward its goal at its constant rate, clamping at the
/// goal. `moving` clears once all joints have arrived. `dt` must be positive.
EmulatorState emulator_step(EmulatorState state, double dt);

enum class ClockMode { Wall, Sim };

/// Controller logic without transport: one request in, one reply out.
/// Thread-safe; snapshots are copies.
class Emulator {
 public:
  Emulator(arm::ArmModel arm, ClockMode mode, int laser_count = 4,
           JointVector start = JointVector::Zero());

  TwinMessage handle(const TwinMessage& request);
  /// Reply for a line that failed to decode.
  TwinMessage reject(const DecodeError& error);

  EmulatorState snapshot();
  ClockMode mode() const { return mode_; }
  const arm::ArmModel& arm() const { return arm_; }

 private:
  void sync_wall_clock();
  TwinMessage dispatch(const TwinMessage& request);

  arm::ArmModel arm_;
  ClockMode mode_;
  std::mutex mutex_;
  EmulatorState state_;
  std::chrono::steady_clock::time_point last_sync_;
};

}  // namespace laserguide::twin
