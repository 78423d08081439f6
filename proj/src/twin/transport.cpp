#include "laserguide/twin/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "laserguide/error.hpp"

namespace laserguide::twin {

using namespace std::chrono_literals;

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw Error(Errc::ParseError, "endpoint must be host:port", text);
  Endpoint ep;
  if (colon > 0) ep.host = text.substr(0, colon);
  try {
    std::size_t used = 0;
    ep.port = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(Errc::ParseError, "bad port in endpoint " + text, text);
  }
  if (ep.port < 0 || ep.port > 65535) throw Error(Errc::ParseError, "port out of range", text);
  return ep;
}

LineSocket::~LineSocket() { close(); }

LineSocket::LineSocket(LineSocket&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), buffer_(std::move(other.buffer_)) {}

LineSocket& LineSocket::operator=(LineSocket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
    buffer_ = std::move(other.buffer_);
  }
  return *this;
}

void LineSocket::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  buffer_.clear();
}

LineSocket LineSocket::connect(const Endpoint& ep, std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  if (getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res) != 0 || !res) {
    throw Error(Errc::TwinDisconnected, "cannot resolve " + ep.host, ep.host);
  }
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  int fd = -1;
  while (true) {
    fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0) break;
    if (fd >= 0) ::close(fd);
    fd = -1;
    if (std::chrono::steady_clock::now() >= deadline) break;
    std::this_thread::sleep_for(20ms);
  }
  freeaddrinfo(res);
  if (fd < 0) {
    throw Error(Errc::TwinDisconnected, "cannot connect to " + ep.host + ":" + port, ep.host);
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return LineSocket(fd);
}

bool LineSocket::write_line(const std::string& line) {
  if (fd_ < 0) return false;
  std::string out = line;
  out.push_back('\n');
  std::size_t sent = 0;
  while (sent < out.size()) {
    const ssize_t n = ::send(fd_, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

std::optional<std::string> LineSocket::pop_line() {
  const auto nl = buffer_.find('\n');
  if (nl == std::string::npos) return std::nullopt;
  std::string line = buffer_.substr(0, nl);
  buffer_.erase(0, nl + 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::optional<std::string> LineSocket::read_line(std::chrono::milliseconds timeout, bool* timed_out) {
  if (timed_out) *timed_out = false;
  if (auto line = pop_line()) return line;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  char chunk[4096];
  while (fd_ >= 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      if (timed_out) *timed_out = true;
      return std::nullopt;
    }
    pollfd p{fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(left.count()));
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) return std::nullopt;
    if (r == 0) continue;
    const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return std::nullopt;
    buffer_.append(chunk, static_cast<std::size_t>(n));
    if (auto line = pop_line()) return line;
    if (buffer_.size() > kMaxLineBytes) return std::nullopt;
  }
  return std::nullopt;
}

std::vector<std::string> LineSocket::drain_lines(bool& closed) {
  closed = false;
  char chunk[4096];
  while (fd_ >= 0) {
    const ssize_t n = ::recv(fd_, chunk, sizeof chunk, MSG_DONTWAIT);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) break;
    if (n <= 0) {
      closed = true;
      break;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
  std::vector<std::string> lines;
  while (auto line = pop_line()) lines.push_back(std::move(*line));
  if (buffer_.size() > kMaxLineBytes) {
    // unterminated garbage: hand it over as one line so it gets rejected
    lines.push_back(std::move(buffer_));
    buffer_.clear();
  }
  return lines;
}

TwinServer::TwinServer(Emulator& emulator, Endpoint endpoint)
    : emulator_(emulator), endpoint_(std::move(endpoint)) {}

TwinServer::~TwinServer() { stop(); }

void TwinServer::start() {
  if (running_) return;
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(Errc::IoError, "socket() failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(endpoint_.port));
  if (::inet_pton(AF_INET, endpoint_.host == "localhost" ? "127.0.0.1" : endpoint_.host.c_str(),
                  &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw Error(Errc::IoError, "bad listen address " + endpoint_.host, endpoint_.host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 4) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(Errc::IoError, "cannot listen on port " + std::to_string(endpoint_.port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  bound_port_ = ntohs(addr.sin_port);
  if (::pipe(wake_pipe_) != 0) throw Error(Errc::IoError, "pipe() failed");
  running_ = true;
  thread_ = std::thread([this] { loop(); });
}

void TwinServer::stop() {
  if (!running_.exchange(false)) return;
  const char c = 'x';
  [[maybe_unused]] auto n = ::write(wake_pipe_[1], &c, 1);
  if (thread_.joinable()) thread_.join();
  ::close(listen_fd_);
  ::close(wake_pipe_[0]);
  ::close(wake_pipe_[1]);
  listen_fd_ = wake_pipe_[0] = wake_pipe_[1] = -1;
}

void TwinServer::record_transcript(bool on) {
  std::lock_guard lock(transcript_mutex_);
  recording_ = on;
}

std::vector<TranscriptEntry> TwinServer::transcript() const {
  std::lock_guard lock(transcript_mutex_);
  return transcript_;
}

void TwinServer::record(Direction d, const std::string& line) {
  std::lock_guard lock(transcript_mutex_);
  if (recording_) transcript_.push_back({d, line});
}

void TwinServer::handle_lines(LineSocket& client) {
  bool closed = false;
  for (const auto& line : client.drain_lines(closed)) {
    record(Direction::In, line);
    const DecodeResult decoded = decode(line);
    TwinMessage reply;
    if (const auto* err = std::get_if<DecodeError>(&decoded)) {
      reply = emulator_.reject(*err);
    } else {
      const auto& msg = std::get<TwinMessage>(decoded);
      reply = is_request(msg) ? emulator_.handle(msg)
                              : TwinMessage{msg.id, Err{"unexpected", "not a request"}};
    }
    const std::string out = encode(reply);
    record(Direction::Out, out);
    if (!client.write_line(out)) {
      closed = true;
      break;
    }
  }
  if (closed) client.close();
}

void TwinServer::loop() {
  LineSocket client;
  while (running_) {
    pollfd fds[3] = {{wake_pipe_[0], POLLIN, 0}, {listen_fd_, POLLIN, 0}, {client.fd(), POLLIN, 0}};
    const nfds_t count = client.valid() ? 3 : 2;
    const int r = ::poll(fds, count, 200);
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) break;
    if (fds[0].revents) break;
    if (fds[1].revents & POLLIN) {
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd >= 0) {
        LineSocket incoming(fd);
        if (client.valid()) {
          incoming.write_line(encode({0, Err{"busy", "controller already connected"}}));
        } else {
          int one = 1;
          ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
          client = std::move(incoming);
          ++served_;
        }
      }
    }
    if (count == 3 && (fds[2].revents & (POLLIN | POLLHUP | POLLERR))) handle_lines(client);
  }
}

TwinClient::TwinClient(const Endpoint& endpoint, std::chrono::milliseconds timeout)
    : socket_(LineSocket::connect(endpoint, timeout)), timeout_(timeout) {}

TwinMessage TwinClient::request(const Payload& payload) {
  TwinMessage msg{next_id_++, payload};
  const std::string line = encode(msg);
  if (recording_) transcript_.push_back({Direction::Out, line});
  if (!socket_.write_line(line)) throw Error(Errc::TwinDisconnected, "link closed while sending");
  bool timed_out = false;
  const auto reply_line = socket_.read_line(timeout_, &timed_out);
  if (!reply_line) {
    throw Error(Errc::TwinDisconnected, timed_out ? "no reply before timeout" : "link closed");
  }
  if (recording_) transcript_.push_back({Direction::In, *reply_line});
  const DecodeResult decoded = decode(*reply_line);
  if (const auto* err = std::get_if<DecodeError>(&decoded)) {
    throw Error(Errc::MalformedMessage, "bad reply: " + err->message);
  }
  const auto& reply = std::get<TwinMessage>(decoded);
  if (reply.id != msg.id) {
    if (const auto* e = std::get_if<Err>(&reply.payload)) {
      throw Error(Errc::TwinRejected, e->code + ": " + e->text, e->code);
    }
    throw Error(Errc::MalformedMessage, "reply id " + std::to_string(reply.id) +
                                            " does not match request " + std::to_string(msg.id));
  }
  return reply;
}

TwinMessage TwinClient::call(const Payload& payload) {
  TwinMessage reply = request(payload);
  if (const auto* e = std::get_if<Err>(&reply.payload)) {
    throw Error(Errc::TwinRejected, e->code + ": " + e->text, e->code);
  }
  return reply;
}

std::string TwinClient::request_raw(const std::string& line) {
  if (!socket_.write_line(line)) throw Error(Errc::TwinDisconnected, "link closed while sending");
  const auto reply = socket_.read_line(timeout_);
  if (!reply) throw Error(Errc::TwinDisconnected, "no reply");
  return *reply;
}

}  // namespace laserguide::twin
