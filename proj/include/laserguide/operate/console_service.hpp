#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "laserguide/io.hpp"
#include "laserguide/operate/run.hpp"
#include "laserguide/twin/transport.hpp"

namespace laserguide::operate {

inline constexpr const char* kConsoleApiVersion = "1";

/// State document for the operator console (schema in docs/console-api.md).
/// `seq` and `commands_received` are filled in by the service.
io::json state_document(const plan::Plan& plan, const workcell::Workcell& cell, const RunSnapshot& snap);

/// HTTP front end for a run: GET /api/state, POST /api/command,
/// GET /api/events (server-sent events), static files from `static_dir`.
/// Accepted commands go to `queue`.
class ConsoleService {
 public:
  struct Received {
    OperatorCommand command;
    std::optional<double> client_ts;
    std::uint64_t seq;  // 1-based arrival order
  };

  ConsoleService(CommandQueue& queue, twin::Endpoint endpoint, std::string static_dir = "");
  ~ConsoleService();
  ConsoleService(const ConsoleService&) = delete;
  ConsoleService& operator=(const ConsoleService&) = delete;

  /// Throws IoError when the port cannot be bound.
  void start();
  void stop();
  int port() const;

  void publish(io::json doc);
  io::json state() const;
  std::vector<Received> received() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace laserguide::operate
