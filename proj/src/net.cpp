#include "proxilab/net.hpp"

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

namespace proxilab::wire {

namespace {

constexpr std::size_t kMaxLine = 1 << 20;

bool send_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

enum class ReadStatus { Line, Eof, TooLong };

// Reads one '\n'-terminated line into `line`, keeping leftovers in `buf`.
ReadStatus read_line(int fd, std::string& buf, std::string& line) {
  for (;;) {
    const auto nl = buf.find('\n');
    if (nl != std::string::npos) {
      line = buf.substr(0, nl);
      buf.erase(0, nl + 1);
      return ReadStatus::Line;
    }
    if (buf.size() > kMaxLine) {
      buf.clear();
      return ReadStatus::TooLong;
    }
    char chunk[4096];
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return ReadStatus::Eof;
    buf.append(chunk, static_cast<std::size_t>(n));
  }
}

sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    throw TransportError("cannot resolve host '" + ep.host + "'");
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

}  // namespace

Endpoint Endpoint::parse(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw std::invalid_argument("endpoint must be host:port, got '" + text + "'");
  }
  Endpoint ep;
  ep.host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  std::size_t used = 0;
  unsigned long p = 0;
  try {
    p = std::stoul(port, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != port.size() || p > 65535) {
    throw std::invalid_argument("invalid port in '" + text + "'");
  }
  ep.port = static_cast<std::uint16_t>(p);
  return ep;
}

std::string Endpoint::str() const { return host + ":" + std::to_string(port); }

// --- server -----------------------------------------------------------------

Server::Server(service::Service& svc, const Endpoint& bind) : svc_(svc) {
  const sockaddr_in addr = resolve(bind);
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw TransportError("socket(): " + std::string(std::strerror(errno)));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(listen_fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 128) != 0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    throw TransportError("cannot bind " + bind.str() + ": " + err);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
  if (::pipe(wake_pipe_) != 0) {
    ::close(listen_fd_);
    throw TransportError("pipe(): " + std::string(std::strerror(errno)));
  }
  acceptor_ = std::thread([this] { accept_loop(); });
}

Server::~Server() { stop(); }

void Server::accept_loop() {
  for (;;) {
    pollfd fds[2] = {{listen_fd_, POLLIN, 0}, {wake_pipe_[0], POLLIN, 0}};
    if (::poll(fds, 2, -1) < 0) {
      if (errno == EINTR) continue;
      return;
    }
    if (stopping_ || (fds[1].revents & POLLIN)) return;
    if (!(fds[0].revents & POLLIN)) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::lock_guard lock(conn_mu_);
    if (stopping_) {
      ::close(fd);
      return;
    }
    conn_fds_.insert(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void Server::serve_connection(int fd) {
  std::string buf;
  std::string line;
  for (;;) {
    const ReadStatus st = read_line(fd, buf, line);
    if (st == ReadStatus::Eof) break;
    const Response resp = st == ReadStatus::TooLong ? Response::error("BAD_REQUEST", 0.0)
                                                    : handle_line(svc_, line);
    if (!send_all(fd, encode(resp))) break;
  }
  std::lock_guard lock(conn_mu_);
  if (conn_fds_.erase(fd) > 0) ::close(fd);
}

void Server::stop() {
  if (stopping_.exchange(true)) return;
  if (wake_pipe_[1] >= 0) {
    const char c = 'x';
    [[maybe_unused]] auto n = ::write(wake_pipe_[1], &c, 1);
  }
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(conn_mu_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  for (int& fd : wake_pipe_) {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
  listen_fd_ = -1;
}

void Server::wait() {
  pollfd pfd{wake_pipe_[0], POLLIN, 0};
  while (!stopping_) {
    ::poll(&pfd, 1, 200);
  }
}

// --- client -----------------------------------------------------------------

Client::Client(const Endpoint& ep) : ep_(ep) { connect_socket(); }

Client::~Client() { close_socket(); }

void Client::connect_socket() {
  const sockaddr_in addr = resolve(ep_);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError("socket(): " + std::string(std::strerror(errno)));
  if (::connect(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string err = std::strerror(errno);
    close_socket();
    throw TransportError("cannot connect to " + ep_.str() + ": " + err);
  }
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  buffer_.clear();
}

void Client::close_socket() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

std::string Client::exchange(const std::string& line) {
  std::string reply;
  if (fd_ >= 0 && send_all(fd_, line) &&
      read_line(fd_, buffer_, reply) == ReadStatus::Line) {
    return reply;
  }
  // One reconnect; the simulated service answers a replayed request identically.
  close_socket();
  connect_socket();
  if (!send_all(fd_, line) || read_line(fd_, buffer_, reply) != ReadStatus::Line) {
    close_socket();
    throw TransportError("connection lost to " + ep_.str());
  }
  return reply;
}

std::string Client::call_raw(const std::string& line) {
  std::string msg = line;
  if (msg.empty() || msg.back() != '\n') msg.push_back('\n');
  return exchange(msg);
}

Response Client::call(const Request& req) { return decode_response(exchange(encode(req))); }

Response LocalClient::search(const geo::GeoPoint& pos, double ts) {
  return to_response(svc_.search_chats_nearby(account_, pos, ts));
}

Response TcpClient::search(const geo::GeoPoint& pos, double ts) {
  Request req;
  req.account = account_;
  req.lat = pos.lat;
  req.lon = pos.lon;
  req.ts = ts;
  return client_.call(req);
}

}  // namespace proxilab::wire
