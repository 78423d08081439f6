#include "laserguide/operate/console_service.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "laserguide/error.hpp"

namespace laserguide::operate {

namespace {

io::json xy(const geom::Vec3& v) { return io::json::array({v.x(), v.y()}); }

constexpr double kFootprintHalf = 0.3;  // m, drawn base size

}  // namespace

io::json state_document(const plan::Plan& plan, const workcell::Workcell& cell, const RunSnapshot& snap) {
  const auto& s = snap.state;
  const int n = static_cast<int>(plan.solutions.size());
  io::json doc;
  doc["api_version"] = kConsoleApiVersion;
  doc["phase"] = std::string(phase_name(s.phase));
  doc["task_index"] = s.task;
  doc["task_count"] = n;
  doc["current_task"] = s.task < n ? io::json(plan.solutions[s.task].target_id) : io::json(nullptr);
  doc["station"] = s.station >= 0 ? io::json(s.station) : io::json(nullptr);
  doc["laser_on"] = s.laser_on;
  doc["last_event"] = s.last_event;
  doc["clock"] = snap.clock;
  doc["connected"] = snap.connected;

  io::json tasks = io::json::array();
  for (int i = 0; i < n; ++i) {
    const auto status = i < static_cast<int>(snap.tasks.size()) ? snap.tasks[i] : TaskStatus::Pending;
    tasks.push_back({{"index", i},
                     {"id", plan.solutions[i].target_id},
                     {"station", plan.solutions[i].station_id},
                     {"status", std::string(status_name(status))}});
  }
  doc["tasks"] = tasks;

  io::json stations = io::json::array();
  for (const auto& st : plan.stations) {
    auto pose = st.base_pose;
    if (auto it = snap.localized_bases.find(st.id); it != snap.localized_bases.end()) pose = it->second;
    const double yaw = workcell::station_yaw(pose);
    io::json footprint = io::json::array();
    for (const auto& [a, b] : {std::pair{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}) {
      const geom::Vec3 corner = geom::apply(pose, geom::Vec3(a * kFootprintHalf, b * kFootprintHalf, 0.0));
      footprint.push_back(xy(corner));
    }
    stations.push_back({{"id", st.id},
                        {"position", xy(pose.translation)},
                        {"yaw_deg", geom::rad2deg(yaw)},
                        {"footprint", footprint},
                        {"active", st.id == s.station}});
  }
  doc["stations"] = stations;

  const auto box = cell.mesh.bounds();
  doc["bedframe"] = {{"min", xy(box.min())}, {"max", xy(box.max())}};

  if (snap.mark) {
    geom::Vec3 d = snap.mark->direction;
    d.z() = 0.0;
    const double len = d.norm();
    doc["mark"] = {{"point", xy(snap.mark->point)},
                   {"direction", len > 1e-9 ? xy(d / len) : io::json::array({0.0, 0.0})}};
  } else {
    doc["mark"] = nullptr;
  }
  return doc;
}

struct ConsoleService::Impl {
  CommandQueue& queue;
  twin::Endpoint endpoint;
  std::string static_dir;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  mutable std::mutex mutex;
  std::condition_variable cv;
  io::json doc;
  std::uint64_t seq = 0;
  bool stopping = false;
  std::vector<Received> received;

  Impl(CommandQueue& q, twin::Endpoint ep, std::string dir)
      : queue(q), endpoint(std::move(ep)), static_dir(std::move(dir)) {
    doc = {{"api_version", kConsoleApiVersion}, {"phase", "IDLE"}, {"task_index", 0},
           {"task_count", 0}, {"tasks", io::json::array()}, {"stations", io::json::array()},
           {"mark", nullptr}, {"connected", true}};
  }

  io::json current() const {
    io::json d = doc;
    d["seq"] = seq;
    d["commands_received"] = received.size();
    return d;
  }

  static void send_json(httplib::Response& res, int status, const io::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  void handle_command(const httplib::Request& req, httplib::Response& res) {
    io::json body;
    try {
      body = io::json::parse(req.body);
    } catch (const io::json::exception&) {
      send_json(res, 400, {{"error", "malformed"}, {"message", "body is not JSON"}});
      return;
    }
    if (!body.is_object() || !body.contains("command") || !body["command"].is_string()) {
      send_json(res, 400, {{"error", "malformed"}, {"message", "missing string field 'command'"}});
      return;
    }
    const auto name = body["command"].get<std::string>();
    const auto cmd = command_from_name(name);
    if (!cmd) {
      send_json(res, 400, {{"error", "unknown-command"},
                           {"message", "command must be NEXT, PREV, RESTART or STOP, got '" + name + "'"}});
      return;
    }
    std::optional<double> ts;
    if (body.contains("client_ts") && body["client_ts"].is_number()) ts = body["client_ts"].get<double>();
    std::uint64_t n;
    {
      std::lock_guard lock(mutex);
      n = received.size() + 1;
      received.push_back({*cmd, ts, n});
      queue.push(*cmd);
    }
    cv.notify_all();
    send_json(res, 200, {{"accepted", true}, {"command", name}, {"seq", n}});
  }

  void handle_events(httplib::Response& res) {
    res.set_header("Cache-Control", "no-cache");
    auto last = std::make_shared<std::uint64_t>(UINT64_MAX);
    res.set_chunked_content_provider(
        "text/event-stream", [this, last](std::size_t, httplib::DataSink& sink) {
          std::unique_lock lock(mutex);
          cv.wait_for(lock, std::chrono::seconds(1), [&] { return stopping || seq != *last; });
          if (stopping) {
            lock.unlock();
            sink.done();
            return true;
          }
          if (seq == *last) {
            lock.unlock();
            static constexpr char kKeepAlive[] = ": keepalive\n\n";
            return sink.write(kKeepAlive, sizeof kKeepAlive - 1);
          }
          *last = seq;
          const std::string msg = "event: state\ndata: " + current().dump() + "\n\n";
          lock.unlock();
          return sink.write(msg.data(), msg.size());
        });
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Get("/api/state", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(mutex);
      send_json(res, 200, current());
    });
    server.Post("/api/command",
                [this](const httplib::Request& req, httplib::Response& res) { handle_command(req, res); });
    server.Options("/api/command", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
    server.Get("/api/events", [this](const httplib::Request&, httplib::Response& res) { handle_events(res); });
    if (!static_dir.empty() && std::filesystem::is_directory(static_dir)) {
      server.set_mount_point("/", static_dir);
    }
  }
};

ConsoleService::ConsoleService(CommandQueue& queue, twin::Endpoint endpoint, std::string static_dir)
    : impl_(std::make_unique<Impl>(queue, std::move(endpoint), std::move(static_dir))) {}

ConsoleService::~ConsoleService() { stop(); }

void ConsoleService::start() {
  auto& im = *impl_;
  im.routes();
  if (im.endpoint.port == 0) {
    im.port = im.server.bind_to_any_port(im.endpoint.host);
    if (im.port <= 0) throw Error(Errc::IoError, "cannot bind console service on " + im.endpoint.host);
  } else {
    if (!im.server.bind_to_port(im.endpoint.host, im.endpoint.port)) {
      throw Error(Errc::IoError, "cannot bind console service on port " + std::to_string(im.endpoint.port));
    }
    im.port = im.endpoint.port;
  }
  im.thread = std::thread([&im] { im.server.listen_after_bind(); });
  im.server.wait_until_ready();
}

void ConsoleService::stop() {
  if (!impl_ || !impl_->thread.joinable()) return;
  {
    std::lock_guard lock(impl_->mutex);
    impl_->stopping = true;
  }
  impl_->cv.notify_all();
  impl_->server.stop();
  impl_->thread.join();
}

int ConsoleService::port() const { return impl_->port; }

void ConsoleService::publish(io::json doc) {
  {
    std::lock_guard lock(impl_->mutex);
    impl_->doc = std::move(doc);
    ++impl_->seq;
  }
  impl_->cv.notify_all();
}

io::json ConsoleService::state() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->current();
}

std::vector<ConsoleService::Received> ConsoleService::received() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->received;
}

}  // namespace laserguide::operate
