#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "laserguide/arm.hpp"
#include "laserguide/locate.hpp"
#include "laserguide/operate/report.hpp"
#include "laserguide/operate/sequencer.hpp"
#include "laserguide/optics.hpp"
#include "laserguide/plan.hpp"
#include "laserguide/twin/transport.hpp"
#include "laserguide/workcell.hpp"

namespace laserguide::operate {

/// Multi-producer queue; the run loop is the only consumer.
class CommandQueue {
 public:
  void push(OperatorCommand c);
  std::optional<OperatorCommand> pop(std::chrono::milliseconds wait);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<OperatorCommand> queue_;
};

/// What a command source sees each time the run asks it for input.
struct SourceView {
  SequencerState state;
  double clock = 0.0;        // controller clock, s
  double phase_since = 0.0;  // clock when the current phase was entered
};

class CommandSource {
 public:
  virtual ~CommandSource() = default;
  /// May block up to `wait` for input.
  virtual std::optional<OperatorCommand> next(const SourceView& v, std::chrono::milliseconds wait) = 0;
  /// Clock time at which the source will act without outside input, if known.
  virtual std::optional<double> wake_at(const SourceView&) const { return std::nullopt; }
};

/// NEXT once a mark has been shown for `dwell_s`, optionally preceded by
/// scripted steps that fire when the run first reaches their phase.
class ScriptedSource : public CommandSource {
 public:
  struct Step {
    Phase when;
    OperatorCommand command;
  };
  explicit ScriptedSource(double dwell_s, std::vector<Step> steps = {})
      : dwell_s_(dwell_s), steps_(steps.begin(), steps.end()) {}
  std::optional<OperatorCommand> next(const SourceView& v, std::chrono::milliseconds wait) override;
  std::optional<double> wake_at(const SourceView& v) const override;

 private:
  double dwell_s_;
  std::deque<Step> steps_;
};

/// Commands pushed by other threads (console, key reader, tests).
class QueueSource : public CommandSource {
 public:
  explicit QueueSource(CommandQueue& queue) : queue_(queue) {}
  std::optional<OperatorCommand> next(const SourceView&, std::chrono::milliseconds wait) override {
    return queue_.pop(wait);
  }

 private:
  CommandQueue& queue_;
};

/// Append-only, tab-separated: seq, clock, kind (cmd|evt|send|note), name,
/// then phase, task and last event after the transition. send and note lines
/// carry the wire line or free text instead.
class EventLog {
 public:
  EventLog() = default;
  /// Also appends every line to `path`.
  explicit EventLog(const std::string& path);
  void transition(double clock, const std::string& kind, std::string_view name, const SequencerState& s);
  void sent(double clock, const std::string& line);
  void note(double clock, const std::string& text);
  std::vector<std::string> lines() const;

 private:
  void append(std::string line);
  mutable std::mutex mutex_;
  std::vector<std::string> lines_;
  std::ofstream file_;
};

/// Re-applies the cmd/evt lines of a log to a fresh sequencer and checks each
/// logged post-state. Throws ValidationError on the first mismatch.
SequencerState replay_log(const std::vector<std::string>& lines, const plan::Plan& plan);

enum class TaskStatus { Pending, Active, Done, Failed };
std::string_view status_name(TaskStatus s);

/// Immutable view published after every transition.
struct RunSnapshot {
  SequencerState state;
  double clock = 0.0;
  std::vector<TaskStatus> tasks;
  std::optional<optics::ProjectedMark> mark;  // current projected mark, workcell frame
  std::map<int, geom::RigidTransform> localized_bases;  // station id -> base in workcell
  bool connected = true;
};

/// Localization for a station about to be worked. May throw.
using Localizer = std::function<locate::LocalizationResult(const plan::Station&)>;

struct RunOptions {
  bool sim_time = true;
  double tick = 0.25;  // s, largest single clock advance while moving or waiting
  double idle_timeout_s = std::numeric_limits<double>::infinity();  // per waiting phase
  bool reaim = true;   // re-solve aims when the localized base differs from the plan
  double reaim_threshold = 1e-6;  // m / rad
  double reaim_incidence = geom::deg2rad(80.0);  // looser than planning so small parking errors still aim
  plan::PlanOptions plan_options;
  EventLog* log = nullptr;
  std::function<void(const RunSnapshot&)> observer;
};

struct RunContext {
  const workcell::Workcell& cell;
  const arm::ArmModel& arm;
  const optics::LaserRig& rig;
};

/// Drives the plan over the link. Throws LocalizationStale when a
/// localization was computed against a different workcell. A lost link or an
/// idle timeout returns a partial report (complete = false).
RunReport run(const plan::Plan& plan, const RunContext& ctx, twin::TwinClient& client,
              const Localizer& localizer, CommandSource& source, const RunOptions& opt = {});

/// Localizer that synthesizes fixture measurements for a base parked at the
/// planned pose plus a seeded random offset (uniform within `position_var` per
/// horizontal axis and `yaw_var` in yaw), with Gaussian noise.
Localizer synthetic_localizer(const workcell::Workcell& cell, double position_var, double yaw_var,
                              double noise_sigma, std::uint64_t seed);

}  // namespace laserguide::operate
