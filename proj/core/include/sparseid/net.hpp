#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include "sparseid/pipeline.hpp"
#include "sparseid/protocol.hpp"

namespace sparseid::net {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// "host:port" or ":port".
  static Endpoint parse(const std::string& text);
  std::string str() const { return host + ":" + std::to_string(port); }
};

/// Thread-per-connection TCP server driving a wire::Service. The service
/// must outlive the server and is only used through its const interface.
class TcpServer {
 public:
  TcpServer(const wire::Service& service, const Endpoint& bind);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  /// Port actually bound (useful when binding port 0).
  std::uint16_t port() const { return port_; }
  void start();
  void stop();
  /// Blocks until stop() is called from another thread or a signal handler path.
  void wait();

 private:
  void accept_loop();
  void serve_connection(int fd);

  const wire::Service& service_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mu_;
  struct Worker {
    std::thread thread;
    std::atomic<bool> done{false};
  };
  void reap_finished();

  std::list<Worker> workers_;
  std::vector<int> open_fds_;
};

/// Blocking client connection.
class Connection {
 public:
  explicit Connection(const Endpoint& endpoint);
  ~Connection();
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  void send_bytes(std::span<const std::uint8_t> bytes);
  /// Reads one frame; nullopt on orderly close by the peer.
  std::optional<wire::Frame> read_frame();
  /// send_bytes + read_frame; throws ProtocolError if the peer closes.
  wire::Frame roundtrip(std::span<const std::uint8_t> request);

 private:
  int fd_ = -1;
};

}  // namespace sparseid::net

namespace sparseid {

struct ClientConfig {
  std::size_t sparsity = 16;     // S_x
  std::size_t noise_count = 0;   // S_nq
  ListRule rule = ListRule::top_gamma(10);
  std::size_t auth_level = 1;
};

/// Both lists in their wire representation, so the local and networked
/// paths compare byte for byte.
struct IdentifyResult {
  wire::PublicResponse public_list;
  wire::PrivateResponse private_lists;
  friend bool operator==(const IdentifyResult&, const IdentifyResult&) = default;
};

/// client_query -> public_search -> private_refine, all in process.
/// For the threshold rule the searcher uses cfg.rule's sim_min / dis_max.
IdentifyResult local_identify(const ClientConfig& cfg, const PublicSearcher& searcher,
                              const LayeredCodebooks& layers, const RefinementThresholds& thresholds,
                              const Eigen::Ref<const Eigen::VectorXd>& y, Rng& rng);

/// The same flow against running public and private servers. Error frames
/// are rethrown as ProtocolError, AuthorizationError or std::invalid_argument.
IdentifyResult remote_identify(const ClientConfig& cfg, const Transform& w1,
                               std::span<const std::uint32_t> selection,
                               const net::Endpoint& public_server, const net::Endpoint& private_server,
                               const Eigen::Ref<const Eigen::VectorXd>& y, Rng& rng);

/// Sends a public query only.
wire::PublicResponse remote_public_search(const net::Endpoint& public_server, const TernaryCode& query,
                                          const ListRule& rule);

}  // namespace sparseid
