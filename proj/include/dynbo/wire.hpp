#pragma once

#include <sys/types.h>

#include <chrono>
#include <memory>
#include <string>

#include "dynbo/geometry.hpp"
#include "dynbo/similarity.hpp"

namespace dynbo {

// Newline-delimited JSON protocol spoken with the external scoring service.
//
//   -> {"type":"hello","version":1}
//   <- {"type":"hello","version":1,"score_lo":-1.0,"score_hi":1.0}
//   -> {"type":"exemplar","id":0,"frame":"f.jpg","cx":..,"cy":..,"w":..,"h":..}
//   <- {"type":"ack","id":0}
//   -> {"type":"score","id":1,"frame":"f.jpg","cx":..,"cy":..,"w":..,"h":..,"scale":1.05}
//   <- {"type":"score","id":1,"value":0.42}   or   {"type":"error","id":1,"message":".."}

inline constexpr int kProtocolVersion = 1;

/// Bidirectional line channel. One outstanding request at a time.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(const std::string& line) = 0;
  // Throws TimeoutError or ConnectionClosedError.
  virtual std::string read_line(std::chrono::milliseconds timeout) = 0;
};

/// Channel over a pair of file descriptors (a socket may use the same fd
/// twice). Owns the descriptors and, if given, the child process.
class FdChannel final : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd, pid_t child = -1);
  ~FdChannel() override;
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;

  void write_line(const std::string& line) override;
  std::string read_line(std::chrono::milliseconds timeout) override;

 private:
  int read_fd_;
  int write_fd_;
  pid_t child_;
  std::string buffer_;
};

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, int port);
// Runs `command` under /bin/sh and talks to its stdin/stdout.
std::unique_ptr<LineChannel> spawn_stdio(const std::string& command);
// "host:port" connects over TCP; anything else is treated as a stdio command.
std::unique_ptr<LineChannel> open_endpoint(const std::string& endpoint);

struct ScoreRequest {
  long id = 0;
  std::string frame;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double scale = 1.0;
};

std::string encode_hello();
std::string encode_score_request(const ScoreRequest& request);
std::string encode_exemplar(long id, const std::string& frame, const BoundingBox& box);

class WireClient {
 public:
  explicit WireClient(std::unique_ptr<LineChannel> channel,
                      std::chrono::milliseconds timeout = std::chrono::seconds(5));

  // Throws HandshakeError on a version mismatch or a malformed reply.
  ScoreRange handshake();
  void set_exemplar(const std::string& frame, const BoundingBox& box);
  double query(const ScoreRequest& request);
  double score(const std::string& frame, const BoundingBox& box, double scale);

  bool ready() const { return ready_; }
  const ScoreRange& range() const { return range_; }

 private:
  std::unique_ptr<LineChannel> channel_;
  std::chrono::milliseconds timeout_;
  ScoreRange range_;
  bool ready_ = false;
  long next_id_ = 0;
};

/// Oracle backed by the external service; the exemplar is registered with an
/// `exemplar` record when set_exemplar is called.
class ExternalOracle final : public SimilarityOracle {
 public:
  explicit ExternalOracle(std::unique_ptr<WireClient> client);

  ScoreRange range() const override { return client_->range(); }
  void set_exemplar(const Frame& frame, const BoundingBox& box) override;

 protected:
  double do_score(const Frame& frame, const BoundingBox& box, double scale) override;

 private:
  std::unique_ptr<WireClient> client_;
};

}  // namespace dynbo
