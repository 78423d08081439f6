#include "laserguide/cli.hpp"

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "laserguide/arm.hpp"
#include "laserguide/error.hpp"
#include "laserguide/io.hpp"
#include "laserguide/locate.hpp"
#include "laserguide/operate/console_service.hpp"
#include "laserguide/operate/run.hpp"
#include "laserguide/optics.hpp"
#include "laserguide/plan.hpp"
#include "laserguide/twin/emulator.hpp"
#include "laserguide/twin/program.hpp"
#include "laserguide/twin/transport.hpp"
#include "laserguide/workcell.hpp"

namespace laserguide::cli {

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::ParseError:
    case Errc::ValidationError:
    case Errc::BadTriangle:
    case Errc::UnknownFixture:
    case Errc::TooFewPoints:
    case Errc::DegenerateGeometry:
    case Errc::RankDeficient:
    case Errc::ResidualTooHigh:
    case Errc::Implausible:
    case Errc::Degenerate:
    case Errc::LocalizationStale:
    case Errc::JointLimit:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

void diag(const std::string& level, const std::string& code, const std::string& message) {
  std::string flat = message;
  for (auto& ch : flat) if (ch == '\n') ch = ' ';
  std::cerr << level << ": " << code << ": " << flat << std::endl;
}

struct Common {
  std::string workcell;
  std::string arm;
  std::string rig;
  std::uint64_t seed = 1;
  std::string out_dir;
  double tol_pos_mm = 0.0;
  double tol_ang_deg = 0.0;
};

fs::path output_path(const Common& c, const std::string& explicit_path, const std::string& default_name) {
  if (!explicit_path.empty()) return explicit_path;
  fs::path dir = c.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("LASERGUIDE_OUT_DIR");
    dir = env && *env ? fs::path(env) : fs::path(".");
  }
  fs::create_directories(dir);
  return dir / default_name;
}

workcell::Workcell load_cell(const Common& c) {
  auto cell = workcell::load_workcell(c.workcell);
  if (c.tol_pos_mm > 0.0 || c.tol_ang_deg > 0.0) {
    for (auto& t : cell.targets) {
      if (c.tol_pos_mm > 0.0) t.tolerance_pos = c.tol_pos_mm * 1e-3;
      if (c.tol_ang_deg > 0.0) t.tolerance_ang = geom::deg2rad(c.tol_ang_deg);
    }
    cell.validate();
  }
  return cell;
}

arm::ArmModel load_arm_or_default(const Common& c) {
  return c.arm.empty() ? arm::ArmModel::default_model() : arm::load_arm(c.arm);
}

void check_plan_against(const plan::Plan& p, const workcell::Workcell& cell) {
  for (const auto& s : p.solutions) {
    if (cell.target_index(s.target_id) < 0) {
      throw Error(Errc::ValidationError, "plan references unknown target " + s.target_id, s.target_id);
    }
    if (!p.station(s.station_id)) {
      throw Error(Errc::ValidationError, "plan references unknown station " + std::to_string(s.station_id));
    }
  }
}

void write_out(const fs::path& path, const std::string& text) {
  io::write_text_atomic(path, text);
  std::cout << "wrote " << path.string() << "\n";
}

void add_common(CLI::App* sub, Common& c, bool need_cell, bool need_arm, bool need_rig) {
  auto* w = sub->add_option("--workcell", c.workcell, "workcell file (JSON)");
  if (need_cell) w->required();
  w->check(CLI::ExistingFile);
  auto* a = sub->add_option("--arm", c.arm, "arm model file (JSON); built-in model when omitted");
  a->check(CLI::ExistingFile);
  (void)need_arm;
  auto* r = sub->add_option("--rig", c.rig, "laser rig file (JSON)");
  if (need_rig) r->required();
  r->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
  sub->add_option("--out-dir", c.out_dir,
                  "directory for default output files (else $LASERGUIDE_OUT_DIR, else .)");
  sub->add_option("--tol-pos-mm", c.tol_pos_mm, "override every target's position tolerance (mm)");
  sub->add_option("--tol-ang-deg", c.tol_ang_deg, "override every target's angle tolerance (deg)");
}

// ---- subcommands -----------------------------------------------------------

struct ValidateArgs {
  std::string plan;
  std::string measurements;
  std::string observations;
};

int cmd_validate(const Common& c, const ValidateArgs& a) {
  const auto cell = load_cell(c);
  std::cout << "workcell ok: " << cell.mesh.size() << " triangles, " << cell.targets.size() << " targets, "
            << cell.fixtures.size() << " fixtures, " << cell.candidate_stations.size()
            << " candidate stations\n";
  const auto arm = load_arm_or_default(c);
  arm.validate();
  std::cout << "arm ok: reach " << arm.max_reach << " m, payload " << arm.payload_kg << " kg\n";
  if (!c.rig.empty()) {
    const auto rig = optics::load_rig(c.rig);
    std::cout << "rig ok: " << rig.devices.size() << " devices\n";
  }
  if (!a.plan.empty()) {
    const auto p = plan::load_plan(a.plan);
    check_plan_against(p, cell);
    std::cout << "plan ok: " << p.stations.size() << " stations, " << p.solutions.size() << " solutions\n";
  }
  if (!a.measurements.empty()) {
    const auto m = locate::measurements_from_json(io::parse_json(io::read_text(a.measurements), a.measurements));
    for (const auto& x : m) {
      if (!cell.fixture(x.fixture)) {
        throw Error(Errc::UnknownFixture, "measurement names unknown fixture " + x.fixture, x.fixture);
      }
    }
    std::cout << "measurements ok: " << m.size() << " points\n";
  }
  if (!a.observations.empty()) {
    const auto o = optics::observations_from_json(io::parse_json(io::read_text(a.observations), a.observations));
    std::cout << "observations ok: " << o.size() << "\n";
  }
  return kExitOk;
}

struct CalibrateArgs {
  std::vector<std::string> observations;
  std::string out;
};

int cmd_calibrate(const Common& c, const CalibrateArgs& a) {
  const auto cell = load_cell(c);
  auto rig = optics::load_rig(c.rig);
  for (const auto& path : a.observations) {
    int device = 0;
    const auto obs = optics::observations_from_json(io::parse_json(io::read_text(path), path), &device);
    if (device < 0 || device >= static_cast<int>(rig.devices.size())) {
      throw Error(Errc::ValidationError, path + ": device " + std::to_string(device) + " not in rig");
    }
    const auto fit = optics::calibrate_offset(obs, rig.devices[device], cell.mesh);
    rig.devices[device].offset = fit.offset;
    std::printf("device %d: pitch %.5f deg, yaw %.5f deg, rms %.3f mm, %d iterations\n", device,
                geom::rad2deg(fit.offset.pitch), geom::rad2deg(fit.offset.yaw), fit.rms * 1e3,
                fit.iterations);
  }
  rig.validate();
  write_out(output_path(c, a.out, "rig.calibrated.json"), optics::to_json(rig).dump(2) + "\n");
  return kExitOk;
}

struct LocalizeArgs {
  std::string measurements;
  double accept_rms_mm = locate::kDefaultAcceptRms * 1e3;
  std::string out;
};

int cmd_localize(const Common& c, const LocalizeArgs& a) {
  const auto cell = load_cell(c);
  std::string set_name;
  const auto m = locate::measurements_from_json(io::parse_json(io::read_text(a.measurements), a.measurements),
                                                &set_name);
  auto r = locate::localize(cell, m, a.accept_rms_mm * 1e-3);
  if (r.fixture_set.empty()) r.fixture_set = set_name;
  const auto base = r.base_in_workcell();
  std::printf("rms %.3f mm over %zu fixtures; base at (%.4f, %.4f, %.4f), yaw %.3f deg\n", r.rms * 1e3,
              r.residuals.size(), base.translation.x(), base.translation.y(), base.translation.z(),
              geom::rad2deg(workcell::station_yaw(base)));
  write_out(output_path(c, a.out, "localization.json"), locate::to_json(r).dump(2) + "\n");
  return kExitOk;
}

struct PlanArgs {
  int device = 0;
  double dwell_s = 30.0;
  double base_move_s = 120.0;
  std::string out;
};

int cmd_plan(const Common& c, const PlanArgs& a) {
  const auto cell = load_cell(c);
  const auto arm = load_arm_or_default(c);
  const auto rig = optics::load_rig(c.rig);
  plan::PlanOptions opt;
  opt.seed = c.seed;
  opt.device = a.device;
  opt.dwell_s = a.dwell_s;
  opt.base_move_s = a.base_move_s;
  const auto p = plan::make_plan(cell, arm, rig, opt);
  std::printf("stations %zu, solutions %zu, uncovered %zu, estimated cycle %.1f s\n", p.stations.size(),
              p.solutions.size(), p.uncovered.size(), p.estimated_cycle_s);
  for (const auto& u : p.uncovered) diag("warning", "uncovered", u);
  write_out(output_path(c, a.out, "plan.json"), plan::serialize_plan(p));
  return kExitOk;
}

struct ExportArgs {
  std::string plan;
  std::string out;
};

int cmd_export(const Common& c, const ExportArgs& a) {
  const auto p = plan::load_plan(a.plan);
  const auto program = twin::export_program(p);
  write_out(output_path(c, a.out, "program.jsonl"), twin::program_text(program));
  return kExitOk;
}

struct ServeArgs {
  std::string listen = "127.0.0.1:7070";
  std::string clock = "wall";
  double duration_s = 0.0;
  int lasers = 4;
};

int cmd_serve(const Common& c, const ServeArgs& a) {
  const auto arm = load_arm_or_default(c);
  const auto ep = twin::parse_endpoint(a.listen);
  twin::Emulator emu(arm, a.clock == "sim" ? twin::ClockMode::Sim : twin::ClockMode::Wall, a.lasers, arm.home);
  twin::TwinServer server(emu, ep);
  server.start();
  std::cout << "listening on " << ep.host << ":" << server.port() << " (" << a.clock << " clock)" << std::endl;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto t0 = std::chrono::steady_clock::now();
  while (!g_interrupted) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (a.duration_s > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >= a.duration_s) {
      break;
    }
  }
  server.stop();
  std::cout << "served " << server.connections_served() << " connection(s)" << std::endl;
  return kExitOk;
}

struct RunArgs {
  std::string plan;
  std::string twin = "127.0.0.1:7070";
  std::string script = "none";
  double dwell_s = -1.0;
  std::string clock = "sim";
  std::vector<std::string> localizations;
  double parking_var_mm = 100.0;
  double yaw_var_deg = 1.0;
  double noise_mm = 0.5;
  double idle_timeout_s = 0.0;
  std::string console;
  std::string console_dir;
  std::string out;
  std::string table_out;
  std::string log_out;
};

/// Operator input from several producers, consumed one command at a time;
/// queued commands win over the script.
class MergedSource : public operate::CommandSource {
 public:
  MergedSource(operate::CommandQueue& q, operate::CommandSource* script) : queue_(q), script_(script) {}
  std::optional<operate::OperatorCommand> next(const operate::SourceView& v,
                                               std::chrono::milliseconds wait) override {
    if (auto c = queue_.pop(script_ ? std::chrono::milliseconds(0) : wait)) return c;
    return script_ ? script_->next(v, wait) : std::nullopt;
  }
  std::optional<double> wake_at(const operate::SourceView& v) const override {
    return script_ ? script_->wake_at(v) : std::nullopt;
  }

 private:
  operate::CommandQueue& queue_;
  operate::CommandSource* script_;
};

// Owns a share of the queue: the thread is detached and may outlive the run.
void read_keys(std::shared_ptr<operate::CommandQueue> queue) {
  std::string line;
  while (std::getline(std::cin, line)) {
    std::string w;
    for (char ch : line) if (!std::isspace(static_cast<unsigned char>(ch))) w += static_cast<char>(std::toupper(ch));
    std::optional<operate::OperatorCommand> c = operate::command_from_name(w);
    if (w == "N") c = operate::OperatorCommand::Next;
    if (w == "P") c = operate::OperatorCommand::Prev;
    if (w == "R") c = operate::OperatorCommand::Restart;
    if (w == "S") c = operate::OperatorCommand::Stop;
    if (c) queue->push(*c);
    else if (!w.empty()) diag("warning", "unknown-command", line);
  }
}

int cmd_run(const Common& c, const RunArgs& a) {
  const auto cell = load_cell(c);
  const auto arm = load_arm_or_default(c);
  const auto rig = optics::load_rig(c.rig);
  const auto p = plan::load_plan(a.plan);
  check_plan_against(p, cell);

  operate::Localizer localizer;
  std::vector<locate::LocalizationResult> given;
  for (const auto& path : a.localizations) {
    given.push_back(locate::localization_from_json(io::parse_json(io::read_text(path), path)));
  }
  if (!given.empty()) {
    if (given.size() != p.stations.size()) {
      throw Error(Errc::ValidationError, "need one --localization per plan station (" +
                                             std::to_string(p.stations.size()) + ")");
    }
    localizer = [&given, &p](const plan::Station& s) {
      for (std::size_t i = 0; i < p.stations.size(); ++i) {
        if (p.stations[i].id == s.id) return given[i];
      }
      throw Error(Errc::ValidationError, "no localization for station " + std::to_string(s.id));
    };
  } else {
    localizer = operate::synthetic_localizer(cell, a.parking_var_mm * 1e-3, geom::deg2rad(a.yaw_var_deg),
                                             a.noise_mm * 1e-3, c.seed);
  }

  const auto log_path = output_path(c, a.log_out, "events.log");
  io::write_text_atomic(log_path, "");
  operate::EventLog log(log_path.string());

  auto queue = std::make_shared<operate::CommandQueue>();
  std::unique_ptr<operate::CommandSource> script;
  if (a.script == "next-on-arrival") {
    script = std::make_unique<operate::ScriptedSource>(a.dwell_s >= 0.0 ? a.dwell_s
                                                       : a.clock == "sim" ? p.dwell_s : 1.0);
  }
  MergedSource source(*queue, script.get());

  std::unique_ptr<operate::ConsoleService> console;
  operate::RunOptions opt;
  opt.sim_time = a.clock == "sim";
  opt.log = &log;
  opt.plan_options.seed = c.seed;
  if (a.idle_timeout_s > 0.0) opt.idle_timeout_s = a.idle_timeout_s;
  if (!a.console.empty()) {
    console = std::make_unique<operate::ConsoleService>(*queue, twin::parse_endpoint(a.console), a.console_dir);
    console->start();
    std::cerr << "info: console: serving on port " << console->port() << std::endl;
    opt.observer = [&](const operate::RunSnapshot& snap) {
      console->publish(operate::state_document(p, cell, snap));
    };
  }

  twin::TwinClient client(twin::parse_endpoint(a.twin));
  if (!script && a.console.empty()) {
    std::thread(read_keys, queue).detach();
    std::cerr << "info: keys: commands: type n, p, r or s and press enter\n";
  }
  const operate::RunContext ctx{cell, arm, rig};
  const auto report = operate::run(p, ctx, client, localizer, source, opt);
  write_out(output_path(c, a.out, "report.json"), operate::write_report(report, operate::ReportFormat::Structured));
  write_out(output_path(c, a.table_out, "report.txt"), operate::write_report(report, operate::ReportFormat::Table));
  std::printf("rows %d, pass %d, max pos_err %.3f mm, max ang_err %.4f deg, time %.1f s\n", report.summary.rows,
              report.summary.pass_count, report.summary.max_pos_err * 1e3,
              geom::rad2deg(report.summary.max_ang_err), report.summary.total_time_s);
  if (console) console->stop();
  if (!report.complete) {
    diag("error", "run-incomplete", report.abort_reason);
    return kExitRuntime;
  }
  return kExitOk;
}

struct ReportArgs {
  std::string in;
  std::string format = "table";
  std::string out;
};

int cmd_report(const Common&, const ReportArgs& a) {
  const auto r = operate::parse_report(io::read_text(a.in));
  const auto text =
      operate::write_report(r, a.format == "table" ? operate::ReportFormat::Table : operate::ReportFormat::Structured);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_out(a.out, text);
  }
  return kExitOk;
}

struct SynthArgs {
  std::string set;
  std::vector<double> base;  // x y z yaw_deg
  double noise_mm = 0.0;
  std::string out;
};

int cmd_synthesize(const Common& c, const SynthArgs& a) {
  const auto cell = load_cell(c);
  if (a.base.size() != 4) throw Error(Errc::ValidationError, "--base needs x y z yaw_deg");
  const auto base = workcell::station_pose(geom::Vec3(a.base[0], a.base[1], a.base[2]), geom::deg2rad(a.base[3]));
  const auto m = locate::synthesize_measurements(cell, a.set, base, a.noise_mm * 1e-3, c.seed);
  write_out(output_path(c, a.out, "measurements.json"), locate::measurements_to_json(m, a.set).dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"laserguide: laser-projection assembly guidance (plan, twin, run, report)", "laserguide"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  Common common;

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Load and check input files; prints a summary per file");
  add_common(validate, common, true, false, false);
  validate->add_option("--plan", va.plan, "plan file to cross-check against the workcell")->check(CLI::ExistingFile);
  validate->add_option("--measurements", va.measurements, "fixture measurements file")->check(CLI::ExistingFile);
  validate->add_option("--observations", va.observations, "laser observations file")->check(CLI::ExistingFile);

  CalibrateArgs ca;
  auto* calibrate = app.add_subcommand(
      "calibrate", "Fit laser boresight offsets from observation files; writes the updated rig (rig.calibrated.json)");
  add_common(calibrate, common, true, false, true);
  calibrate->add_option("--observations", ca.observations, "observation file(s), one per device")->required()
      ->check(CLI::ExistingFile);
  calibrate->add_option("--out", ca.out, "output rig file");

  LocalizeArgs la;
  auto* localize = app.add_subcommand(
      "localize", "Fit the workcell pose in the robot base frame from fixture measurements (localization.json)");
  add_common(localize, common, true, false, false);
  localize->add_option("--measurements", la.measurements, "fixture measurements file")->required()
      ->check(CLI::ExistingFile);
  localize->add_option("--accept-rms-mm", la.accept_rms_mm, "largest accepted rms residual (mm)")
      ->capture_default_str();
  localize->add_option("--out", la.out, "output localization file");

  PlanArgs pa;
  auto* planc = app.add_subcommand(
      "plan", "Choose base stations, solve aim poses and estimate cycle time; reads workcell, arm, rig (plan.json)");
  add_common(planc, common, true, true, true);
  planc->add_option("--device", pa.device, "rig device used for aiming")->capture_default_str();
  planc->add_option("--dwell", pa.dwell_s, "seconds per target in the cycle estimate")->capture_default_str();
  planc->add_option("--base-move", pa.base_move_s, "seconds per station change in the cycle estimate")
      ->capture_default_str();
  planc->add_option("--out", pa.out, "output plan file");

  ExportArgs ea;
  auto* exportc = app.add_subcommand(
      "export-program", "Turn a plan into a replayable controller program, one protocol line per step (program.jsonl)");
  add_common(exportc, common, false, false, false);
  exportc->add_option("--plan", ea.plan, "plan file")->required()->check(CLI::ExistingFile);
  exportc->add_option("--out", ea.out, "output program file");

  ServeArgs sa;
  auto* serve = app.add_subcommand("serve-emulator",
                                   "Serve the controller emulator on a TCP port until interrupted; reads the arm model");
  add_common(serve, common, false, false, false);
  serve->add_option("--listen", sa.listen, "host:port to bind (port 0 picks one)")->capture_default_str();
  serve->add_option("--clock", sa.clock, "wall: real time; sim: time advances only on STATE requests")
      ->check(CLI::IsMember({"sim", "wall"}))
      ->capture_default_str();
  serve->add_option("--duration", sa.duration_s, "exit after this many seconds (0 = run until interrupted)");
  serve->add_option("--lasers", sa.lasers, "laser channels")->capture_default_str();

  RunArgs ra;
  auto* runc = app.add_subcommand(
      "run", "Execute a plan against a controller endpoint; writes report.json, report.txt and events.log");
  add_common(runc, common, true, true, true);
  runc->add_option("--plan", ra.plan, "plan file")->required()->check(CLI::ExistingFile);
  runc->add_option("--twin", ra.twin, "controller host:port")->capture_default_str();
  runc->add_option("--script", ra.script, "command source: next-on-arrival, or none for keys/console")
      ->check(CLI::IsMember({"none", "next-on-arrival"}))
      ->capture_default_str();
  runc->add_option("--dwell", ra.dwell_s, "scripted seconds per mark (default: plan dwell in sim, 1 s on wall)");
  runc->add_option("--clock", ra.clock, "controller clock: sim (drive it with STATE) or wall")
      ->check(CLI::IsMember({"sim", "wall"}))
      ->capture_default_str();
  runc->add_option("--localization", ra.localizations,
                   "localization file per station in plan order (default: synthesized measurements)")
      ->check(CLI::ExistingFile);
  runc->add_option("--parking-var-mm", ra.parking_var_mm, "synthetic parking variation per axis (mm)")
      ->capture_default_str();
  runc->add_option("--yaw-var-deg", ra.yaw_var_deg, "synthetic parking yaw variation (deg)")->capture_default_str();
  runc->add_option("--noise-mm", ra.noise_mm, "synthetic measurement noise sigma (mm)")->capture_default_str();
  runc->add_option("--idle-timeout", ra.idle_timeout_s, "abort after this many clock seconds without a command");
  runc->add_option("--console", ra.console, "also serve the operator console on host:port");
  runc->add_option("--console-dir", ra.console_dir, "static console files to serve at /");
  runc->add_option("--out", ra.out, "structured report file");
  runc->add_option("--table-out", ra.table_out, "table report file");
  runc->add_option("--log", ra.log_out, "event log file");

  ReportArgs rpa;
  auto* reportc = app.add_subcommand("report", "Render a structured run report as a table or re-serialize it");
  add_common(reportc, common, false, false, false);
  reportc->add_option("--in", rpa.in, "structured report file")->required()->check(CLI::ExistingFile);
  reportc->add_option("--format", rpa.format, "table or structured")
      ->check(CLI::IsMember({"table", "structured"}))
      ->capture_default_str();
  reportc->add_option("--out", rpa.out, "output file (default stdout)");

  SynthArgs ya;
  auto* synth = app.add_subcommand(
      "synthesize-measurements", "Simulate fixture measurements for a base pose; reads the workcell (measurements.json)");
  add_common(synth, common, true, false, false);
  synth->add_option("--set", ya.set, "fixture set name")->required();
  synth->add_option("--base", ya.base, "base pose: x y z yaw_deg")->expected(4)->required();
  synth->add_option("--noise-mm", ya.noise_mm, "Gaussian noise sigma (mm)")->capture_default_str();
  synth->add_option("--out", ya.out, "output measurements file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  } catch (const CLI::ParseError& e) {
    diag("error", "usage", e.what());
    return kExitValidation;
  }

  try {
    if (validate->parsed()) return cmd_validate(common, va);
    if (calibrate->parsed()) return cmd_calibrate(common, ca);
    if (localize->parsed()) return cmd_localize(common, la);
    if (planc->parsed()) return cmd_plan(common, pa);
    if (exportc->parsed()) return cmd_export(common, ea);
    if (serve->parsed()) return cmd_serve(common, sa);
    if (runc->parsed()) return cmd_run(common, ra);
    if (reportc->parsed()) return cmd_report(common, rpa);
    if (synth->parsed()) return cmd_synthesize(common, ya);
  } catch (const Error& e) {
    std::string msg = e.what();
    if (!e.subject().empty() && msg.find(e.subject()) == std::string::npos) msg += " [" + e.subject() + "]";
    diag("error", std::string(errc_name(e.code())), msg);
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    diag("error", "internal", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace laserguide::cli
