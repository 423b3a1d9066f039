#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "proxilab/service.hpp"
#include "proxilab/wire.hpp"

namespace proxilab::wire {

inline constexpr const char* kDefaultBind = "127.0.0.1:7878";

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7878;

  /// "host:port"; throws std::invalid_argument.
  static Endpoint parse(const std::string& text);
  std::string str() const;
};

/// TCP front-end for a Service: one thread per connection, one response line
/// per request line. Binds in the constructor and serves until stop().
class Server {
 public:
  Server(service::Service& svc, const Endpoint& bind);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Actual bound port (useful when binding port 0).
  std::uint16_t port() const { return port_; }
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

 private:
  void accept_loop();
  void serve_connection(int fd);

  service::Service& svc_;
  int listen_fd_ = -1;
  int wake_pipe_[2] = {-1, -1};
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex conn_mu_;
  std::set<int> conn_fds_;
  std::vector<std::thread> workers_;
};

/// Blocking request/response connection. A lost connection is re-opened once
/// and the request re-sent unchanged.
class Client {
 public:
  explicit Client(const Endpoint& ep);
  ~Client();

  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  Response call(const Request& req);
  /// Sends a raw line and returns the raw response line (without newline).
  std::string call_raw(const std::string& line);

 private:
  void connect_socket();
  void close_socket();
  std::string exchange(const std::string& line);

  Endpoint ep_;
  int fd_ = -1;
  std::string buffer_;
};

// --- finder-facing clients --------------------------------------------------

/// What the attacker sees: one searchChatsNearby call from `pos` at `ts`.
class NearbyClient {
 public:
  virtual ~NearbyClient() = default;
  virtual Response search(const geo::GeoPoint& pos, double ts) = 0;
};

/// In-process client bound to one account.
class LocalClient final : public NearbyClient {
 public:
  LocalClient(service::Service& svc, std::string account)
      : svc_(svc), account_(std::move(account)) {}
  Response search(const geo::GeoPoint& pos, double ts) override;

 private:
  service::Service& svc_;
  std::string account_;
};

/// Networked client bound to one account.
class TcpClient final : public NearbyClient {
 public:
  TcpClient(const Endpoint& ep, std::string account)
      : client_(ep), account_(std::move(account)) {}
  Response search(const geo::GeoPoint& pos, double ts) override;

 private:
  Client client_;
  std::string account_;
};

}  // namespace proxilab::wire
