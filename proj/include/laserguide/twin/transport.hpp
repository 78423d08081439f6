#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "laserguide/twin/emulator.hpp"
#include "laserguide/twin/protocol.hpp"

namespace laserguide::twin {

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 0;
};

/// "host:port" or ":port". Throws ParseError.
Endpoint parse_endpoint(const std::string& text);

enum class Direction { In, Out };

struct TranscriptEntry {
  Direction direction;
  std::string line;
};

/// Owns a connected stream socket and splits the byte stream into lines.
class LineSocket {
 public:
  LineSocket() = default;
  explicit LineSocket(int fd) : fd_(fd) {}
  ~LineSocket();
  LineSocket(LineSocket&& other) noexcept;
  LineSocket& operator=(LineSocket&& other) noexcept;
  LineSocket(const LineSocket&) = delete;
  LineSocket& operator=(const LineSocket&) = delete;

  static LineSocket connect(const Endpoint& ep, std::chrono::milliseconds timeout);

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  void close();

  /// Appends '\n'. Returns false once the peer is gone.
  bool write_line(const std::string& line);
  /// Next complete line without its newline; nullopt on EOF, error or timeout.
  /// `timed_out` distinguishes a timeout from a closed stream.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout, bool* timed_out = nullptr);
  /// Reads whatever is available without blocking and returns complete lines.
  /// Sets `closed` when the peer hung up.
  std::vector<std::string> drain_lines(bool& closed);

 private:
  std::optional<std::string> pop_line();
  int fd_ = -1;
  std::string buffer_;
};

/// Serves one controller connection at a time on a background thread. A
/// second client is told ERR busy and disconnected.
class TwinServer {
 public:
  TwinServer(Emulator& emulator, Endpoint endpoint);
  ~TwinServer();
  TwinServer(const TwinServer&) = delete;
  TwinServer& operator=(const TwinServer&) = delete;

  /// Binds and starts the accept loop; throws IoError when the endpoint is taken.
  void start();
  void stop();
  /// Bound port (useful when started with port 0).
  int port() const { return bound_port_; }

  void record_transcript(bool on);
  std::vector<TranscriptEntry> transcript() const;
  int connections_served() const { return served_.load(); }

 private:
  void loop();
  void handle_lines(LineSocket& client);
  void record(Direction d, const std::string& line);

  Emulator& emulator_;
  Endpoint endpoint_;
  int listen_fd_ = -1;
  int wake_pipe_[2] = {-1, -1};
  int bound_port_ = 0;
  std::thread thread_;
  std::atomic<bool> running_{false};
  std::atomic<int> served_{0};
  mutable std::mutex transcript_mutex_;
  bool recording_ = false;
  std::vector<TranscriptEntry> transcript_;
};

/// Blocking request/reply client. Ids increase by one per request, and each
/// reply must carry the id of the request it answers.
class TwinClient {
 public:
  explicit TwinClient(const Endpoint& endpoint,
                      std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

  /// Throws TwinDisconnected on a dead link or timeout, MalformedMessage on an
  /// undecodable or mismatched reply.
  TwinMessage request(const Payload& payload);

  /// Sends a raw line and returns the raw reply line (for protocol tests).
  std::string request_raw(const std::string& line);

  /// request() that also throws TwinRejected on an ERR reply.
  TwinMessage call(const Payload& payload);

  void record_transcript(bool on) { recording_ = on; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
  std::int64_t last_id() const { return next_id_ - 1; }

 private:
  LineSocket socket_;
  std::chrono::milliseconds timeout_;
  std::int64_t next_id_ = 1;
  bool recording_ = false;
  std::vector<TranscriptEntry> transcript_;
};

}  // namespace laserguide::twin
