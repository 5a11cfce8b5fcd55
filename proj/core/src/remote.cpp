#include "cubefuzz/remote.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <json.hpp>

namespace cubefuzz {

using nlohmann::json;

void RemoteOracleConfig::validate() const {
  if (timeout_ms == 0) throw std::invalid_argument("remote timeout must be positive");
  if (transport == Transport::Tcp) {
    if (host.empty()) throw std::invalid_argument("tcp transport needs a host");
    if (port == 0) throw std::invalid_argument("tcp transport needs a port");
  } else {
    if (command.empty()) throw std::invalid_argument("subprocess transport needs a command");
  }
}

namespace {

void wait_readable(int fd, std::uint64_t timeout_ms) {
  struct pollfd p{};
  p.fd = fd;
  p.events = POLLIN;
  int rc = ::poll(&p, 1, static_cast<int>(timeout_ms));
  if (rc == 0) throw remote_timeout_error("remote oracle timed out waiting for response");
  if (rc < 0) throw remote_connection_error(std::string("poll failed: ") + std::strerror(errno));
}

int connect_tcp(const std::string& host, std::uint16_t port, std::uint64_t timeout_ms) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw remote_connection_error("cannot create socket");

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw remote_connection_error("cannot parse host address: " + host);
  }

  int flags = ::fcntl(fd, F_GETFL, 0);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  if (rc < 0 && errno != EINPROGRESS) {
    ::close(fd);
    throw remote_connection_error(std::string("connect failed: ") + std::strerror(errno));
  }
  if (rc < 0) {
    struct pollfd p{};
    p.fd = fd;
    p.events = POLLOUT;
    int prc = ::poll(&p, 1, static_cast<int>(timeout_ms));
    if (prc <= 0) {
      ::close(fd);
      throw remote_timeout_error("remote oracle connect timed out");
    }
    int err = 0;
    socklen_t len = sizeof(err);
    ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) {
      ::close(fd);
      throw remote_connection_error(std::string("connect failed: ") + std::strerror(err));
    }
  }
  ::fcntl(fd, F_SETFL, flags);
  return fd;
}

}  // namespace

RemoteOracleClient::RemoteOracleClient(const RemoteOracleConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  if (cfg_.transport == RemoteOracleConfig::Transport::Tcp) {
    int fd = connect_tcp(cfg_.host, cfg_.port, cfg_.timeout_ms);
    read_fd_ = fd;
    write_fd_ = fd;
  } else {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
      throw remote_connection_error("cannot create pipes");
    pid_t pid = ::fork();
    if (pid < 0) throw remote_connection_error("cannot fork oracle subprocess");
    if (pid == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", cfg_.command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    child_pid_ = pid;
  }
  ::signal(SIGPIPE, SIG_IGN);
}

RemoteOracleClient::~RemoteOracleClient() {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
  if (child_pid_ > 0) {
    int status = 0;
    ::waitpid(static_cast<pid_t>(child_pid_), &status, 0);
  }
}

void RemoteOracleClient::write_all(const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    ssize_t n = ::write(write_fd_, data.data() + sent, data.size() - sent);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      throw remote_connection_error("connection lost while sending request");
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::string RemoteOracleClient::read_line() {
  while (true) {
    std::size_t nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    wait_readable(read_fd_, cfg_.timeout_ms);
    char chunk[4096];
    ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
    if (n == 0) throw remote_connection_error("connection closed mid-response");
    if (n < 0) {
      if (errno == EINTR) continue;
      throw remote_connection_error(std::string("read failed: ") + std::strerror(errno));
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::vector<ScoreVector> RemoteOracleClient::query(const std::vector<Image>& xs) {
  if (xs.empty()) return {};
  std::uint64_t id = next_id_++;
  json req;
  req["id"] = id;
  json inputs = json::array();
  for (const Image& x : xs) inputs.push_back(x.data);
  req["inputs"] = std::move(inputs);
  write_all(req.dump() + "\n");

  std::string line = read_line();
  json resp;
  try {
    resp = json::parse(line);
  } catch (const json::exception& e) {
    throw remote_protocol_error(std::string("malformed response: ") + e.what());
  }
  if (!resp.is_object() || !resp.contains("id") || !resp.contains("scores"))
    throw remote_protocol_error("response missing id or scores");
  if (resp["id"].get<std::uint64_t>() != id)
    throw remote_protocol_error("response id does not match request");
  std::vector<ScoreVector> out;
  try {
    out = resp["scores"].get<std::vector<ScoreVector>>();
  } catch (const json::exception& e) {
    throw remote_protocol_error(std::string("malformed scores: ") + e.what());
  }
  if (out.size() != xs.size())
    throw remote_protocol_error("response score count does not match input count");
  return out;
}

ScoreOracle::Backend remote_backend(std::shared_ptr<RemoteOracleClient> client) {
  return [client](const std::vector<Image>& xs) { return client->query(xs); };
}

void serve_oracle_stream(const FeedForwardModel& model, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json req = json::parse(line);
    auto inputs = req.at("inputs").get<std::vector<std::vector<double>>>();
    json scores = json::array();
    for (const auto& row : inputs) scores.push_back(model.evaluate_flat(row));
    json resp;
    resp["id"] = req.at("id");
    resp["scores"] = std::move(scores);
    out << resp.dump() << "\n" << std::flush;
  }
}

namespace {

void serve_connection(const FeedForwardModel& model, int fd, std::atomic<bool>& stop) {
  std::string buffer;
  char chunk[4096];
  while (!stop.load()) {
    struct pollfd p{};
    p.fd = fd;
    p.events = POLLIN;
    int rc = ::poll(&p, 1, 200);
    if (rc == 0) continue;
    if (rc < 0) break;
    ssize_t n = ::read(fd, chunk, sizeof(chunk));
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (line.empty()) continue;
      std::string reply;
      try {
        json req = json::parse(line);
        auto inputs = req.at("inputs").get<std::vector<std::vector<double>>>();
        json scores = json::array();
        for (const auto& row : inputs) scores.push_back(model.evaluate_flat(row));
        json resp;
        resp["id"] = req.at("id");
        resp["scores"] = std::move(scores);
        reply = resp.dump() + "\n";
      } catch (const std::exception&) {
        return;  // drop the connection on a malformed request
      }
      std::size_t sent = 0;
      while (sent < reply.size()) {
        ssize_t w = ::write(fd, reply.data() + sent, reply.size() - sent);
        if (w <= 0) return;
        sent += static_cast<std::size_t>(w);
      }
    }
  }
}

}  // namespace

std::uint16_t serve_oracle_tcp(const FeedForwardModel& model, std::uint16_t port,
                               std::atomic<bool>& stop, std::atomic<std::uint16_t>* ready) {
  ::signal(SIGPIPE, SIG_IGN);
  int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw remote_connection_error("cannot create listening socket");
  int yes = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(listener);
    throw remote_connection_error(std::string("cannot bind: ") + std::strerror(errno));
  }
  if (::listen(listener, 8) != 0) {
    ::close(listener);
    throw remote_connection_error("cannot listen");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  std::uint16_t bound = ntohs(addr.sin_port);
  if (ready) ready->store(bound);

  while (!stop.load()) {
    struct pollfd p{};
    p.fd = listener;
    p.events = POLLIN;
    int rc = ::poll(&p, 1, 200);
    if (rc <= 0) continue;
    int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) continue;
    serve_connection(model, fd, stop);
    ::close(fd);
  }
  ::close(listener);
  return bound;
}

}  // namespace cubefuzz
