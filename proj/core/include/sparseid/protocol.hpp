#pragma once

// Length-prefixed binary protocol between client, public server and private
// server. Frame layout (little-endian):
//
//   "STID" | u8 version=1 | u8 msg_type | u32 payload_length | payload
//
// Payloads:
//   0x01 QUERY_PUBLIC   u32 L_p, packed ternary code, u8 rule, u32 gamma
//   0x02 RESP_PUBLIC    u32 count, count x (u32 index, f32 nu)
//   0x03 QUERY_PRIVATE  u8 auth_k, u32 N, N x f64 y, u32 count, count x u32 index
//   0x04 RESP_PRIVATE   u8 levels, per level: u32 count, count x (u32 index, f64 distance)
//   0x7F ERROR          u8 code, utf-8 message

#include <array>
#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sparseid/pipeline.hpp"
#include "sparseid/search.hpp"
#include "sparseid/ternary.hpp"

namespace sparseid::wire {

inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 10;
inline constexpr std::uint32_t kMaxPayload = 64u << 20;

enum class MsgType : std::uint8_t {
  kQueryPublic = 0x01,
  kRespPublic = 0x02,
  kQueryPrivate = 0x03,
  kRespPrivate = 0x04,
  kError = 0x7F,
};

enum class ErrorCode : std::uint8_t {
  kProtocol = 1,
  kVersion = 2,
  kAuthorization = 3,
  kInvalidArgument = 4,
  kInternal = 5,
};

struct FrameHeader {
  MsgType type{};
  std::uint32_t payload_length = 0;
};

struct Frame {
  MsgType type{};
  std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_frame(MsgType type, std::span<const std::uint8_t> payload);

/// Validates magic, version, message type and the 64 MiB payload cap.
/// Throws ProtocolError; a version mismatch message starts with "version".
FrameHeader decode_header(std::span<const std::uint8_t, kHeaderSize> header);

/// Parses one complete frame (header + exact payload).
Frame decode_frame(std::span<const std::uint8_t> bytes);

struct PublicQuery {
  TernaryCode code;
  ListRule::Kind rule = ListRule::Kind::kTopGamma;
  std::uint32_t gamma = 10;
};

struct PublicResponse {
  std::vector<std::pair<std::uint32_t, float>> entries;
  friend bool operator==(const PublicResponse&, const PublicResponse&) = default;
};

struct PrivateQueryMsg {
  std::uint8_t auth_level = 1;
  Eigen::VectorXd y;
  std::vector<std::uint32_t> public_list;
};

struct PrivateResponse {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> levels;
  friend bool operator==(const PrivateResponse&, const PrivateResponse&) = default;
};

struct ErrorMsg {
  ErrorCode code = ErrorCode::kInternal;
  std::string message;
};

std::vector<std::uint8_t> encode(const PublicQuery& msg);
std::vector<std::uint8_t> encode(const PublicResponse& msg);
std::vector<std::uint8_t> encode(const PrivateQueryMsg& msg);
std::vector<std::uint8_t> encode(const PrivateResponse& msg);
std::vector<std::uint8_t> encode(const ErrorMsg& msg);

// Payload decoders; throw ProtocolError on any malformed payload.
PublicQuery decode_public_query(std::span<const std::uint8_t> payload);
PublicResponse decode_public_response(std::span<const std::uint8_t> payload);
PrivateQueryMsg decode_private_query(std::span<const std::uint8_t> payload);
PrivateResponse decode_private_response(std::span<const std::uint8_t> payload);
ErrorMsg decode_error(std::span<const std::uint8_t> payload);

PublicResponse to_response(const CandidateList& list);
PrivateResponse to_response(const std::vector<CandidateList>& levels);

/// Request handler: takes a decoded frame, returns a complete response frame.
/// `close` is set when the connection must be dropped after replying.
class Service {
 public:
  virtual ~Service() = default;
  virtual std::vector<std::uint8_t> handle(const Frame& request, bool& close) const = 0;
};

/// Public server logic over a PublicSearcher. The threshold rule uses the
/// server-configured (sim_min, dis_max); the gamma field is ignored for it.
class PublicService final : public Service {
 public:
  PublicService(PublicSearcher searcher, std::uint32_t sim_min = 0, std::uint32_t dis_max = 0);
  std::vector<std::uint8_t> handle(const Frame& request, bool& close) const override;
  const PublicSearcher& searcher() const { return searcher_; }

 private:
  PublicSearcher searcher_;
  std::uint32_t sim_min_;
  std::uint32_t dis_max_;
};

/// Private server logic. `allowed_levels` empty means every level 1..K.
class PrivateService final : public Service {
 public:
  PrivateService(LayeredCodebooks layers, RefinementThresholds thresholds,
                 std::set<std::size_t> allowed_levels = {});
  std::vector<std::uint8_t> handle(const Frame& request, bool& close) const override;
  const LayeredCodebooks& layers() const { return layers_; }

 private:
  LayeredCodebooks layers_;
  RefinementThresholds thresholds_;
  std::set<std::size_t> allowed_;
};

std::vector<std::uint8_t> error_frame(ErrorCode code, const std::string& message);

}  // namespace sparseid::wire
