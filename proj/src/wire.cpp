#include "dynbo/wire.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <json.hpp>
#include <regex>

#include "dynbo/errors.hpp"

namespace dynbo {

using json = nlohmann::json;

namespace {

std::string decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string quoted(const std::string& s) { return json(s).dump(); }

json parse_record(const std::string& line) {
  json doc = json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("type") || !doc["type"].is_string())
    throw ProtocolError("malformed record from scoring service: " + line);
  return doc;
}

void expect_id(const json& doc, long id) {
  if (!doc.contains("id") || !doc["id"].is_number_integer() || doc["id"].get<long>() != id)
    throw ProtocolError("response id does not echo request " + std::to_string(id));
}

void raise_if_error(const json& doc) {
  if (doc["type"] == "error") {
    const std::string msg = doc.contains("message") && doc["message"].is_string() ? doc["message"].get<std::string>()
                                                                                   : std::string("unspecified");
    throw RemoteError("scoring service error: " + msg);
  }
}

}  // namespace

FdChannel::FdChannel(int read_fd, int write_fd, pid_t child) : read_fd_(read_fd), write_fd_(write_fd), child_(child) {}

FdChannel::~FdChannel() {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
  if (child_ > 0) {
    int status = 0;
    // Closing stdin is the shutdown signal; give the child a moment before forcing it.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(child_, &status, WNOHANG) != 0) return;
      ::usleep(10000);
    }
    ::kill(child_, SIGTERM);
    ::waitpid(child_, &status, 0);
  }
}

void FdChannel::write_line(const std::string& line) {
  std::string data = line;
  data.push_back('\n');
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::send(write_fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) n = ::write(write_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EPIPE || errno == ECONNRESET) throw ConnectionClosedError("scoring service closed the connection");
      throw OracleError(std::string("write to scoring service failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string FdChannel::read_line(std::chrono::milliseconds timeout) {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + timeout;
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
    if (left.count() <= 0) throw TimeoutError("scoring service did not answer in time");
    pollfd pfd{read_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw OracleError(std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) throw TimeoutError("scoring service did not answer in time");
    char chunk[4096];
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      if (errno == ECONNRESET) throw ConnectionClosedError("scoring service reset the connection");
      throw OracleError(std::string("read from scoring service failed: ") + std::strerror(errno));
    }
    if (n == 0) throw ConnectionClosedError("scoring service closed the connection");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0)
    throw OracleError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ConnectionClosedError("cannot connect to " + host + ":" + service);
  return std::make_unique<FdChannel>(fd, fd);
}

std::unique_ptr<LineChannel> spawn_stdio(const std::string& command) {
  int to_child[2], from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw OracleError("pipe failed");
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw OracleError("pipe failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw OracleError("fork failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<FdChannel>(from_child[0], to_child[1], pid);
}

std::unique_ptr<LineChannel> open_endpoint(const std::string& endpoint) {
  static const std::regex host_port(R"(^([A-Za-z0-9_.\-]+|\[[0-9A-Fa-f:]+\]):([0-9]{1,5})$)");
  std::smatch m;
  if (std::regex_match(endpoint, m, host_port)) {
    std::string host = m[1];
    if (host.front() == '[') host = host.substr(1, host.size() - 2);
    return connect_tcp(host, std::stoi(m[2]));
  }
  return spawn_stdio(endpoint);
}

std::string encode_hello() { return R"({"type":"hello","version":)" + std::to_string(kProtocolVersion) + "}"; }

std::string encode_score_request(const ScoreRequest& r) {
  return R"({"type":"score","id":)" + std::to_string(r.id) + R"(,"frame":)" + quoted(r.frame) + R"(,"cx":)" +
         decimal(r.cx) + R"(,"cy":)" + decimal(r.cy) + R"(,"w":)" + decimal(r.w) + R"(,"h":)" + decimal(r.h) +
         R"(,"scale":)" + decimal(r.scale) + "}";
}

std::string encode_exemplar(long id, const std::string& frame, const BoundingBox& box) {
  return R"({"type":"exemplar","id":)" + std::to_string(id) + R"(,"frame":)" + quoted(frame) + R"(,"cx":)" +
         decimal(box.cx) + R"(,"cy":)" + decimal(box.cy) + R"(,"w":)" + decimal(box.width) + R"(,"h":)" +
         decimal(box.height) + "}";
}

WireClient::WireClient(std::unique_ptr<LineChannel> channel, std::chrono::milliseconds timeout)
    : channel_(std::move(channel)), timeout_(timeout) {
  if (!channel_) throw InvalidArgument("WireClient needs a channel");
}

ScoreRange WireClient::handshake() {
  channel_->write_line(encode_hello());
  json doc;
  try {
    doc = parse_record(channel_->read_line(timeout_));
  } catch (const ProtocolError& e) {
    throw HandshakeError(e.what());
  }
  if (doc["type"] != "hello") throw HandshakeError("expected a hello record from the scoring service");
  if (!doc.contains("version") || !doc["version"].is_number_integer() || doc["version"].get<int>() != kProtocolVersion)
    throw HandshakeError("scoring service protocol version mismatch");
  if (!doc.contains("score_lo") || !doc.contains("score_hi") || !doc["score_lo"].is_number() ||
      !doc["score_hi"].is_number())
    throw HandshakeError("hello record lacks the score range");
  ScoreRange r{doc["score_lo"].get<double>(), doc["score_hi"].get<double>()};
  if (!(r.hi > r.lo) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
    throw HandshakeError("scoring service advertised an invalid score range");
  range_ = r;
  ready_ = true;
  return r;
}

void WireClient::set_exemplar(const std::string& frame, const BoundingBox& box) {
  if (!ready_) throw ProtocolError("handshake must complete before the exemplar is sent");
  const long id = next_id_++;
  channel_->write_line(encode_exemplar(id, frame, box));
  const json doc = parse_record(channel_->read_line(timeout_));
  raise_if_error(doc);
  if (doc["type"] != "ack" && doc["type"] != "exemplar") throw ProtocolError("expected an exemplar acknowledgement");
  expect_id(doc, id);
}

double WireClient::query(const ScoreRequest& request) {
  if (!ready_) throw ProtocolError("handshake must complete before scoring");
  channel_->write_line(encode_score_request(request));
  const json doc = parse_record(channel_->read_line(timeout_));
  raise_if_error(doc);
  if (doc["type"] != "score") throw ProtocolError("expected a score record");
  expect_id(doc, request.id);
  if (!doc.contains("value") || !doc["value"].is_number()) throw ProtocolError("score record lacks a numeric value");
  const double v = doc["value"].get<double>();
  if (!std::isfinite(v) || v < range_.lo || v > range_.hi)
    throw ProtocolError("score " + std::to_string(v) + " outside the advertised range");
  return v;
}

double WireClient::score(const std::string& frame, const BoundingBox& box, double scale) {
  return query(ScoreRequest{next_id_++, frame, box.cx, box.cy, box.width, box.height, scale});
}

ExternalOracle::ExternalOracle(std::unique_ptr<WireClient> client) : client_(std::move(client)) {
  if (!client_) throw InvalidArgument("ExternalOracle needs a client");
  if (!client_->ready()) client_->handshake();
}

void ExternalOracle::set_exemplar(const Frame& frame, const BoundingBox& box) {
  client_->set_exemplar(frame.path, box);
}

double ExternalOracle::do_score(const Frame& frame, const BoundingBox& box, double scale) {
  return client_->score(frame.path, box, scale);
}

}  // namespace dynbo
