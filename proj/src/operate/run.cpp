#include "laserguide/operate/run.hpp"
#include <algorithm>

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <thread>

#include "laserguide/error.hpp"

namespace laserguide::operate {

// ---- CommandQueue ----------------------------------------------------------

void CommandQueue::push(OperatorCommand c) {
  {
    std::lock_guard lock(mutex_);
    queue_.push_back(c);
  }
  cv_.notify_one();
}

std::optional<OperatorCommand> CommandQueue::pop(std::chrono::milliseconds wait) {
  std::unique_lock lock(mutex_);
  if (!cv_.wait_for(lock, wait, [&] { return !queue_.empty(); })) return std::nullopt;
  const auto c = queue_.front();
  queue_.pop_front();
  return c;
}

std::size_t CommandQueue::size() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

// ---- ScriptedSource --------------------------------------------------------

std::optional<OperatorCommand> ScriptedSource::next(const SourceView& v, std::chrono::milliseconds) {
  if (!steps_.empty() && steps_.front().when == v.state.phase) {
    const auto c = steps_.front().command;
    steps_.pop_front();
    return c;
  }
  if (v.state.phase == Phase::Projecting && v.clock >= v.phase_since + dwell_s_) return OperatorCommand::Next;
  return std::nullopt;
}

std::optional<double> ScriptedSource::wake_at(const SourceView& v) const {
  if (v.state.phase == Phase::Projecting) return v.phase_since + dwell_s_;
  return std::nullopt;
}

// ---- EventLog --------------------------------------------------------------

EventLog::EventLog(const std::string& path) : file_(path, std::ios::app) {
  if (!file_) throw Error(Errc::IoError, "cannot open event log " + path, path);
}

void EventLog::append(std::string line) {
  std::lock_guard lock(mutex_);
  line = std::to_string(lines_.size()) + "\t" + line;
  if (file_.is_open()) file_ << line << '\n' << std::flush;
  lines_.push_back(std::move(line));
}

namespace {
std::string clock_text(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", t);
  return buf;
}
}  // namespace

void EventLog::transition(double clock, const std::string& kind, std::string_view name,
                          const SequencerState& s) {
  append(clock_text(clock) + "\t" + kind + "\t" + std::string(name) + "\t" +
         std::string(phase_name(s.phase)) + "\t" + std::to_string(s.task) + "\t" + s.last_event);
}

void EventLog::sent(double clock, const std::string& line) {
  append(clock_text(clock) + "\tsend\t" + line);
}

void EventLog::note(double clock, const std::string& text) {
  append(clock_text(clock) + "\tnote\t" + text);
}

std::vector<std::string> EventLog::lines() const {
  std::lock_guard lock(mutex_);
  return lines_;
}

SequencerState replay_log(const std::vector<std::string>& lines, const plan::Plan& plan) {
  SequencerState s;
  for (const auto& line : lines) {
    std::vector<std::string> f;
    std::stringstream in(line);
    std::string part;
    while (std::getline(in, part, '\t')) f.push_back(part);
    if (f.size() < 3) throw Error(Errc::ValidationError, "short log line: " + line);
    if (f[2] == "send" || f[2] == "note") continue;
    if (f.size() != 7) throw Error(Errc::ValidationError, "bad log line: " + line);
    if (f[2] == "cmd") {
      const auto c = command_from_name(f[3]);
      if (!c) throw Error(Errc::ValidationError, "unknown command in log: " + f[3]);
      s = apply_command(s, *c, plan).state;
    } else if (f[2] == "evt") {
      const auto e = event_from_name(f[3]);
      if (!e) throw Error(Errc::ValidationError, "unknown event in log: " + f[3]);
      s = apply_event(s, *e, plan).state;
    } else {
      throw Error(Errc::ValidationError, "unknown log kind: " + f[2]);
    }
    if (phase_name(s.phase) != f[4] || std::to_string(s.task) != f[5] || s.last_event != f[6]) {
      throw Error(Errc::ValidationError, "replay diverges at: " + line);
    }
  }
  return s;
}

std::string_view status_name(TaskStatus s) {
  switch (s) {
    case TaskStatus::Pending: return "pending";
    case TaskStatus::Active: return "active";
    case TaskStatus::Done: return "done";
    case TaskStatus::Failed: return "failed";
  }
  return "pending";
}

// ---- run -------------------------------------------------------------------

namespace {

struct Achieved {
  std::optional<optics::ProjectedMark> mark;
  optics::MarkCheck check;
};

class Runner {
 public:
  Runner(const plan::Plan& plan, const RunContext& ctx, twin::TwinClient& client,
         const Localizer& localizer, CommandSource& source, const RunOptions& opt)
      : live_(plan), ctx_(ctx), client_(client), localizer_(localizer), source_(source), opt_(opt) {
    const auto n = live_.solutions.size();
    q_.resize(n);
    checks_.resize(n);
  }

  RunReport execute() {
    RunReport report;
    try {
      const auto hello = client_.call(twin::Hello{});
      const auto* ack = std::get_if<twin::Ack>(&hello.payload);
      if (!ack || ack->version != std::string(twin::kProtocolVersion)) {
        throw Error(Errc::TwinRejected, "controller protocol version mismatch");
      }
      refresh_clock(0.0);
      start_clock_ = clock_;
      apply(apply_event(state_, RunEvent::Begin, live_), "evt", event_name(RunEvent::Begin));
      loop();
      report.complete = true;
    } catch (const Error& e) {
      if (e.code() != Errc::TwinDisconnected) throw;
      report.complete = false;
      report.abort_reason = std::string(errc_name(e.code())) + ": " + e.what();
      connected_ = false;
      publish();
    }
    if (!idle_reason_.empty()) {
      report.complete = false;
      report.abort_reason = idle_reason_;
    }
    build_rows(report);
    report.summary = summarize(report.rows, clock_ - start_clock_);
    return report;
  }

 private:
  void loop() {
    while (state_.phase != Phase::Done) {
      const bool waiting = state_.phase == Phase::Projecting || state_.phase == Phase::Stopped ||
                           state_.phase == Phase::Idle;
      const auto wait = waiting && !opt_.sim_time ? std::chrono::milliseconds(50)
                                                  : std::chrono::milliseconds(0);
      if (const auto cmd = source_.next(view(), wait)) {
        apply(apply_command(state_, *cmd, live_), "cmd", command_name(*cmd));
        continue;
      }
      switch (state_.phase) {
        case Phase::Localizing:
          localize_station();
          apply(apply_event(state_, RunEvent::Localized, live_), "evt", event_name(RunEvent::Localized));
          break;
        case Phase::AtStation:
          apply(apply_event(state_, RunEvent::Depart, live_), "evt", event_name(RunEvent::Depart));
          break;
        case Phase::Moving:
          step_motion();
          break;
        default:
          if (!idle_wait()) return;
          break;
      }
    }
  }

  SourceView view() const { return {state_, clock_, phase_since_}; }

  void apply(const Transition& t, const char* kind, std::string_view name) {
    const Phase before = state_.phase;
    const int task_before = state_.task;
    for (const auto& p : t.emit) send(p);
    state_ = t.state;
    if (state_.phase != before || state_.task != task_before) phase_since_ = clock_;
    if (opt_.log) opt_.log->transition(clock_, kind, name, state_);
    publish();
  }

  void send(const twin::Payload& p) {
    const auto reply = client_.call(p);
    if (opt_.log) opt_.log->sent(clock_, twin::encode({client_.last_id(), p}));
    if (const auto* ack = std::get_if<twin::Ack>(&reply.payload); ack && ack->eta) {
      arrival_ = clock_ + *ack->eta;
    }
  }

  twin::State refresh_clock(double advance) {
    twin::State q;
    q.advance = advance;
    const auto r = client_.call(q);
    const auto st = std::get<twin::State>(r.payload);
    clock_ = st.clock;
    return st;
  }

  void step_motion() {
    double adv = 0.0;
    if (opt_.sim_time) {
      const double remaining = arrival_ - clock_;
      adv = remaining > opt_.tick ? opt_.tick : std::max(remaining, 0.0) + 1e-9;
    }
    const auto st = refresh_clock(adv);
    if (st.moving) {
      if (!opt_.sim_time) std::this_thread::sleep_for(std::chrono::milliseconds(10));
      return;
    }
    const auto pos = client_.call(twin::GetPos{});
    const auto& q = std::get<twin::Pos>(pos.payload).q;
    const int task = state_.task;
    q_[task] = q;
    checks_[task] = achieve(task, q);
    apply(apply_event(state_, RunEvent::Arrived, live_), "evt", event_name(RunEvent::Arrived));
  }

  /// False when the idle timeout expired.
  bool idle_wait() {
    if (clock_ - phase_since_ >= opt_.idle_timeout_s) {
      idle_reason_ = "idle-timeout: no command for " + clock_text(clock_ - phase_since_) + " s in " +
                     std::string(phase_name(state_.phase));
      return false;
    }
    if (!opt_.sim_time) {
      refresh_clock(0.0);
      return true;
    }
    double target = clock_ + opt_.tick;
    if (const auto wake = source_.wake_at(view())) target = std::max(*wake, clock_);
    target = std::min(target, phase_since_ + opt_.idle_timeout_s);
    refresh_clock(std::max(target - clock_, 1e-9));
    return true;
  }

  void localize_station() {
    const int sid = state_.station;
    if (localized_.count(sid)) return;
    if (!localized_.empty() && opt_.sim_time) refresh_clock(live_.base_move_s);
    const auto* station = live_.station(sid);
    if (!station) throw Error(Errc::ValidationError, "plan has no station " + std::to_string(sid));
    auto loc = localizer_(*station);
    if (loc.workcell_digest != ctx_.cell.digest()) {
      throw Error(Errc::LocalizationStale, "localization was computed for a different workcell",
                  loc.fixture_set);
    }
    const auto base = loc.base_in_workcell();
    localized_[sid] = loc;
    const auto delta = geom::compose(geom::invert(station->base_pose), base);
    const bool moved = delta.translation.norm() > opt_.reaim_threshold ||
                       delta.rotation.angle() > opt_.reaim_threshold;
    if (opt_.reaim && moved) reaim(sid, base);
    for (auto& s : live_.stations) {
      if (s.id == sid) s.base_pose = base;
    }
  }

  void reaim(int sid, const geom::RigidTransform& base) {
    auto popt = opt_.plan_options;
    popt.max_incidence = std::max(popt.max_incidence, opt_.reaim_incidence);
    arm::JointVector seed = live_.home;
    for (auto& sol : live_.solutions) {
      if (sol.station_id != sid) continue;
      popt.device = sol.device;
      try {
        const auto& target = ctx_.cell.target(sol.target_id);
        sol = plan::solve_aim(ctx_.cell, base, sid, target, ctx_.arm, ctx_.rig, seed, popt);
        if (opt_.log) opt_.log->note(clock_, "reaim " + sol.target_id);
      } catch (const Error& e) {
        if (e.code() != Errc::NoSolution) throw;
        if (opt_.log) opt_.log->note(clock_, "reaim-failed " + sol.target_id);
      }
      seed = sol.q;
    }
  }

  Achieved achieve(int task, const arm::JointVector& q) const {
    Achieved a;
    const auto& sol = live_.solutions[task];
    const auto& loc = localized_.at(sol.station_id);
    const auto tool = geom::compose(geom::invert(loc.pose), arm::fk_unchecked(ctx_.arm, q));
    try {
      a.mark = optics::project_mark(tool, ctx_.rig.devices.at(sol.device), ctx_.cell.mesh);
      a.check = optics::verify_mark(*a.mark, ctx_.cell.target(sol.target_id));
    } catch (const Error&) {
      a.mark.reset();
    }
    return a;
  }

  void publish() {
    if (!opt_.observer) return;
    RunSnapshot snap;
    snap.state = state_;
    snap.clock = clock_;
    snap.connected = connected_;
    const int n = static_cast<int>(live_.solutions.size());
    snap.tasks.assign(n, TaskStatus::Pending);
    for (int i = 0; i < n; ++i) {
      if (checks_[i]) snap.tasks[i] = checks_[i]->mark && checks_[i]->check.pass ? TaskStatus::Done
                                                                                 : TaskStatus::Failed;
    }
    if (state_.task < n && (state_.phase == Phase::Projecting || state_.phase == Phase::Moving)) {
      snap.tasks[state_.task] = TaskStatus::Active;
    }
    if (state_.phase == Phase::Projecting && state_.task < n && checks_[state_.task]) {
      snap.mark = checks_[state_.task]->mark;
    }
    for (const auto& s : live_.stations) {
      if (localized_.count(s.id)) snap.localized_bases[s.id] = s.base_pose;
    }
    opt_.observer(snap);
  }

  void build_rows(RunReport& report) const {
    const int n = static_cast<int>(live_.solutions.size());
    for (int i = 0; i < n; ++i) {
      if (!report.complete && !checks_[i]) continue;
      const auto& target = ctx_.cell.target(live_.solutions[i].target_id);
      ReportRow row;
      row.id = target.id;
      row.nominal_point = target.point;
      row.nominal_direction = target.direction;
      if (checks_[i] && checks_[i]->mark) {
        row.projected = true;
        row.achieved_point = checks_[i]->mark->point;
        row.achieved_direction = checks_[i]->mark->direction;
        row.pos_err = checks_[i]->check.pos_err;
        row.ang_err = checks_[i]->check.ang_err;
        row.pass = checks_[i]->check.pass;
      }
      report.rows.push_back(std::move(row));
    }
  }

  plan::Plan live_;
  const RunContext& ctx_;
  twin::TwinClient& client_;
  const Localizer& localizer_;
  CommandSource& source_;
  const RunOptions& opt_;

  SequencerState state_;
  double clock_ = 0.0;
  double start_clock_ = 0.0;
  double phase_since_ = 0.0;
  double arrival_ = 0.0;
  bool connected_ = true;
  std::string idle_reason_;
  std::map<int, locate::LocalizationResult> localized_;
  std::vector<std::optional<arm::JointVector>> q_;
  std::vector<std::optional<Achieved>> checks_;
};

}  // namespace

RunReport run(const plan::Plan& plan, const RunContext& ctx, twin::TwinClient& client,
              const Localizer& localizer, CommandSource& source, const RunOptions& opt) {
  if (plan.solutions.empty()) throw Error(Errc::ValidationError, "plan has no solutions");
  Runner r(plan, ctx, client, localizer, source, opt);
  return r.execute();
}

Localizer synthetic_localizer(const workcell::Workcell& cell, double position_var, double yaw_var,
                              double noise_sigma, std::uint64_t seed) {
  return [&cell, position_var, yaw_var, noise_sigma, seed](const plan::Station& station) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(station.id));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto parked = station.base_pose;
    parked.translation.x() += position_var * u(rng);
    parked.translation.y() += position_var * u(rng);
    parked.rotation = geom::rot_z(yaw_var * u(rng)) * parked.rotation;
    const auto meas = locate::synthesize_measurements(cell, station.localization_set, parked,
                                                      noise_sigma, rng());
    return locate::localize(cell, meas);
  };
}

}  // namespace laserguide::operate
