#include "sparseid/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <stdexcept>

#include "sparseid/errors.hpp"

namespace sparseid::net {

namespace {

// Reads exactly n bytes. Returns false on orderly EOF before the first byte.
bool read_exact(int fd, std::uint8_t* buf, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, buf + got, n - got, 0);
    if (r == 0) {
      if (got == 0) return false;
      throw ProtocolError("connection closed mid-frame");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("recv: ") + std::strerror(errno));
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

void write_all(int fd, std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t r = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("send: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(r);
  }
}

std::optional<wire::Frame> read_frame_from(int fd) {
  std::array<std::uint8_t, wire::kHeaderSize> header{};
  if (!read_exact(fd, header.data(), header.size())) return std::nullopt;
  const auto h = wire::decode_header(header);
  wire::Frame frame{h.type, std::vector<std::uint8_t>(h.payload_length)};
  if (h.payload_length > 0 && !read_exact(fd, frame.payload.data(), frame.payload.size())) {
    throw ProtocolError("connection closed mid-frame");
  }
  return frame;
}

sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  const std::string host = ep.host.empty() || ep.host == "localhost" ? "127.0.0.1" : ep.host;
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
      throw std::invalid_argument("cannot resolve host " + ep.host);
    }
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    ::freeaddrinfo(res);
  }
  return addr;
}

}  // namespace

Endpoint Endpoint::parse(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("endpoint must be host:port, got " + text);
  Endpoint ep;
  if (colon > 0) ep.host = text.substr(0, colon);
  const int port = std::stoi(text.substr(colon + 1));
  if (port < 0 || port > 65535) throw std::invalid_argument("port out of range in " + text);
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

TcpServer::TcpServer(const wire::Service& service, const Endpoint& bind) : service_(service) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = resolve(bind);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 64) != 0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    throw std::runtime_error("cannot listen on " + bind.str() + ": " + err);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::start() {
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void TcpServer::stop() {
  if (listen_fd_ < 0) return;
  running_ = false;
  ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
  std::list<Worker> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.thread.join();
}

void TcpServer::reap_finished() {
  for (auto it = workers_.begin(); it != workers_.end();) {
    if (it->done) {
      it->thread.join();
      it = workers_.erase(it);
    } else {
      ++it;
    }
  }
}

void TcpServer::wait() {
  if (acceptor_.joinable()) acceptor_.join();
}

void TcpServer::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lock(mu_);
    if (!running_) {
      ::close(fd);
      break;
    }
    reap_finished();
    open_fds_.push_back(fd);
    auto& worker = workers_.emplace_back();
    worker.thread = std::thread([this, fd, &worker] {
      serve_connection(fd);
      worker.done = true;
    });
  }
}

void TcpServer::serve_connection(int fd) {
  try {
    for (;;) {
      std::array<std::uint8_t, wire::kHeaderSize> header{};
      if (!read_exact(fd, header.data(), header.size())) break;
      wire::FrameHeader h;
      try {
        h = wire::decode_header(header);
      } catch (const ProtocolError& e) {
        const bool version = std::string_view(e.what()).starts_with("version");
        write_all(fd, wire::error_frame(version ? wire::ErrorCode::kVersion : wire::ErrorCode::kProtocol,
                                        e.what()));
        break;
      }
      wire::Frame frame{h.type, std::vector<std::uint8_t>(h.payload_length)};
      if (h.payload_length > 0 && !read_exact(fd, frame.payload.data(), frame.payload.size())) break;
      bool close = false;
      write_all(fd, service_.handle(frame, close));
      if (close) break;
    }
  } catch (const std::exception&) {
    // Peer vanished or sent a truncated frame; drop the connection.
  }
  std::lock_guard lock(mu_);
  open_fds_.erase(std::remove(open_fds_.begin(), open_fds_.end(), fd), open_fds_.end());
  ::close(fd);
}

Connection::Connection(const Endpoint& endpoint) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  sockaddr_in addr = resolve(endpoint);
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw std::runtime_error("cannot connect to " + endpoint.str() + ": " + err);
  }
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

Connection::~Connection() {
  if (fd_ >= 0) ::close(fd_);
}

void Connection::send_bytes(std::span<const std::uint8_t> bytes) { write_all(fd_, bytes); }

std::optional<wire::Frame> Connection::read_frame() { return read_frame_from(fd_); }

wire::Frame Connection::roundtrip(std::span<const std::uint8_t> request) {
  send_bytes(request);
  auto frame = read_frame();
  if (!frame) throw ProtocolError("server closed the connection");
  return std::move(*frame);
}

}  // namespace sparseid::net

namespace sparseid {

namespace {

[[noreturn]] void rethrow_error(const wire::Frame& frame) {
  const auto err = wire::decode_error(frame.payload);
  switch (err.code) {
    case wire::ErrorCode::kAuthorization: throw AuthorizationError(err.message);
    case wire::ErrorCode::kInvalidArgument: throw std::invalid_argument(err.message);
    case wire::ErrorCode::kProtocol:
    case wire::ErrorCode::kVersion: throw ProtocolError(err.message);
    default: throw std::runtime_error("server error: " + err.message);
  }
}

wire::Frame expect(wire::Frame frame, wire::MsgType type) {
  if (frame.type == wire::MsgType::kError) rethrow_error(frame);
  if (frame.type != type) throw ProtocolError("unexpected response message type");
  return frame;
}

}  // namespace

IdentifyResult local_identify(const ClientConfig& cfg, const PublicSearcher& searcher,
                              const LayeredCodebooks& layers, const RefinementThresholds& thresholds,
                              const Eigen::Ref<const Eigen::VectorXd>& y, Rng& rng) {
  const auto& bundle = searcher.bundle();
  const TernaryCode query = client_query(y, bundle.transform, cfg.sparsity, cfg.noise_count, bundle.selection, rng);
  const CandidateList public_list = searcher.search(query, cfg.rule);
  PrivateQuery pq{y, cfg.auth_level, public_list.indices};
  return IdentifyResult{wire::to_response(public_list), wire::to_response(private_refine(layers, pq, thresholds))};
}

wire::PublicResponse remote_public_search(const net::Endpoint& public_server, const TernaryCode& query,
                                          const ListRule& rule) {
  net::Connection conn(public_server);
  const std::uint32_t gamma = rule.kind == ListRule::Kind::kTopGamma ? rule.gamma : 0;
  auto frame = expect(conn.roundtrip(wire::encode(wire::PublicQuery{query, rule.kind, gamma})),
                      wire::MsgType::kRespPublic);
  return wire::decode_public_response(frame.payload);
}

IdentifyResult remote_identify(const ClientConfig& cfg, const Transform& w1,
                               std::span<const std::uint32_t> selection,
                               const net::Endpoint& public_server, const net::Endpoint& private_server,
                               const Eigen::Ref<const Eigen::VectorXd>& y, Rng& rng) {
  if (cfg.auth_level > 255) throw AuthorizationError("authorization level does not fit the wire format");
  const TernaryCode query = client_query(y, w1, cfg.sparsity, cfg.noise_count, selection, rng);
  IdentifyResult result;
  result.public_list = remote_public_search(public_server, query, cfg.rule);

  wire::PrivateQueryMsg pq;
  pq.auth_level = static_cast<std::uint8_t>(cfg.auth_level);
  pq.y = y;
  for (const auto& entry : result.public_list.entries) pq.public_list.push_back(entry.first);
  net::Connection conn(private_server);
  auto frame = expect(conn.roundtrip(wire::encode(pq)), wire::MsgType::kRespPrivate);
  result.private_lists = wire::decode_private_response(frame.payload);
  return result;
}

}  // namespace sparseid
