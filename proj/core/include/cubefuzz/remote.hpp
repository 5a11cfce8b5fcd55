#pragma once

#include <atomic>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cubefuzz/model.hpp"
#include "cubefuzz/oracle.hpp"
#include "cubefuzz/types.hpp"

namespace cubefuzz {

struct remote_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct remote_timeout_error : remote_error {
  using remote_error::remote_error;
};
struct remote_protocol_error : remote_error {
  using remote_error::remote_error;
};
struct remote_connection_error : remote_error {
  using remote_error::remote_error;
};

struct RemoteOracleConfig {
  enum class Transport { Tcp, Subprocess };

  Transport transport = Transport::Tcp;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::string command;  // shell command line for subprocess transport
  std::uint64_t timeout_ms = 5000;

  void validate() const;
};

/// Newline-delimited JSON client. One connection, ids strictly increasing.
class RemoteOracleClient {
 public:
  explicit RemoteOracleClient(const RemoteOracleConfig& cfg);
  ~RemoteOracleClient();

  RemoteOracleClient(const RemoteOracleClient&) = delete;
  RemoteOracleClient& operator=(const RemoteOracleClient&) = delete;

  std::vector<ScoreVector> query(const std::vector<Image>& xs);

 private:
  std::string read_line();
  void write_all(const std::string& data);

  RemoteOracleConfig cfg_;
  int read_fd_ = -1;
  int write_fd_ = -1;
  long child_pid_ = -1;
  std::uint64_t next_id_ = 1;
  std::string buffer_;
};

/// Backend adapter; shapes incoming flat score rows into ScoreVectors.
/// `shape` is attached to nothing — images travel as flat rows.
ScoreOracle::Backend remote_backend(std::shared_ptr<RemoteOracleClient> client);

/// One request line in, one response line out, until EOF. Used for the
/// subprocess transport and directly testable with string streams.
void serve_oracle_stream(const FeedForwardModel& model, std::istream& in, std::ostream& out);

/// Serves connections one at a time until `stop` becomes true. Returns the
/// bound port (useful with port 0). `ready` flips once the socket listens.
std::uint16_t serve_oracle_tcp(const FeedForwardModel& model, std::uint16_t port,
                               std::atomic<bool>& stop, std::atomic<std::uint16_t>* ready = nullptr);

}  // namespace cubefuzz
