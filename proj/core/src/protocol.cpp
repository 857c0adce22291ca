#include "sparseid/protocol.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "sparseid/bytes.hpp"
#include "sparseid/errors.hpp"
#include "sparseid/formats.hpp"

namespace sparseid::wire {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'I', 'D'};

bool known_type(std::uint8_t t) {
  return t == 0x01 || t == 0x02 || t == 0x03 || t == 0x04 || t == 0x7F;
}

// Runs a payload parser and converts truncation or trailing bytes into
// ProtocolError.
template <typename Fn>
auto parse(std::span<const std::uint8_t> payload, const char* what, Fn&& fn) {
  try {
    ByteReader in(payload);
    auto out = fn(in);
    if (!in.done()) throw ProtocolError(std::string(what) + ": trailing bytes");
    return out;
  } catch (const FormatError& e) {
    throw ProtocolError(std::string(what) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ProtocolError(std::string(what) + ": " + e.what());
  }
}

void require_room(const ByteReader& in, std::uint64_t count, std::uint64_t unit, const char* what) {
  if (count * unit > in.remaining()) throw ProtocolError(std::string(what) + ": count exceeds payload");
}

}  // namespace

std::vector<std::uint8_t> encode_frame(MsgType type, std::span<const std::uint8_t> payload) {
  if (payload.size() > kMaxPayload) throw ProtocolError("payload exceeds 64 MiB");
  ByteWriter out;
  out.tag(std::string_view(kMagic, 4));
  out.u8(kVersion);
  out.u8(static_cast<std::uint8_t>(type));
  out.u32(static_cast<std::uint32_t>(payload.size()));
  out.raw(payload);
  return out.take();
}

FrameHeader decode_header(std::span<const std::uint8_t, kHeaderSize> header) {
  if (std::memcmp(header.data(), kMagic, 4) != 0) throw ProtocolError("bad frame magic");
  if (header[4] != kVersion) {
    throw ProtocolError("version mismatch: got " + std::to_string(header[4]));
  }
  if (!known_type(header[5])) throw ProtocolError("unknown message type " + std::to_string(header[5]));
  ByteReader in(header.subspan<6, 4>());
  const auto length = in.u32();
  if (length > kMaxPayload) {
    throw ProtocolError("declared payload length " + std::to_string(length) + " exceeds 64 MiB");
  }
  return FrameHeader{static_cast<MsgType>(header[5]), length};
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) throw ProtocolError("truncated frame header");
  const auto header = decode_header(bytes.first<kHeaderSize>());
  if (bytes.size() - kHeaderSize != header.payload_length) {
    throw ProtocolError("frame length does not match declared payload length");
  }
  auto payload = bytes.subspan(kHeaderSize);
  return Frame{header.type, {payload.begin(), payload.end()}};
}

std::vector<std::uint8_t> encode(const PublicQuery& msg) {
  ByteWriter out;
  out.u32(static_cast<std::uint32_t>(msg.code.size()));
  pack_code(msg.code, out);
  out.u8(static_cast<std::uint8_t>(msg.rule));
  out.u32(msg.gamma);
  return encode_frame(MsgType::kQueryPublic, out.bytes());
}

std::vector<std::uint8_t> encode(const PublicResponse& msg) {
  ByteWriter out;
  out.u32(static_cast<std::uint32_t>(msg.entries.size()));
  for (const auto& [index, nu] : msg.entries) {
    out.u32(index);
    out.f32(nu);
  }
  return encode_frame(MsgType::kRespPublic, out.bytes());
}

std::vector<std::uint8_t> encode(const PrivateQueryMsg& msg) {
  ByteWriter out;
  out.u8(msg.auth_level);
  out.u32(static_cast<std::uint32_t>(msg.y.size()));
  for (Eigen::Index i = 0; i < msg.y.size(); ++i) out.f64(msg.y[i]);
  out.u32(static_cast<std::uint32_t>(msg.public_list.size()));
  for (auto id : msg.public_list) out.u32(id);
  return encode_frame(MsgType::kQueryPrivate, out.bytes());
}

std::vector<std::uint8_t> encode(const PrivateResponse& msg) {
  if (msg.levels.size() > 255) throw std::invalid_argument("too many refinement levels for the wire");
  ByteWriter out;
  out.u8(static_cast<std::uint8_t>(msg.levels.size()));
  for (const auto& level : msg.levels) {
    out.u32(static_cast<std::uint32_t>(level.size()));
    for (const auto& [index, distance] : level) {
      out.u32(index);
      out.f64(distance);
    }
  }
  return encode_frame(MsgType::kRespPrivate, out.bytes());
}

std::vector<std::uint8_t> encode(const ErrorMsg& msg) {
  ByteWriter out;
  out.u8(static_cast<std::uint8_t>(msg.code));
  out.tag(msg.message);
  return encode_frame(MsgType::kError, out.bytes());
}

std::vector<std::uint8_t> error_frame(ErrorCode code, const std::string& message) {
  return encode(ErrorMsg{code, message});
}

PublicQuery decode_public_query(std::span<const std::uint8_t> payload) {
  return parse(payload, "QUERY_PUBLIC", [](ByteReader& in) {
    PublicQuery q;
    const auto length = in.u32();
    if (length == 0) throw ProtocolError("QUERY_PUBLIC: zero code length");
    require_room(in, packed_code_bytes(length), 1, "QUERY_PUBLIC");
    q.code = unpack_code(in, length);
    const auto rule = in.u8();
    if (rule > 1) throw ProtocolError("QUERY_PUBLIC: unknown list rule " + std::to_string(rule));
    q.rule = static_cast<ListRule::Kind>(rule);
    q.gamma = in.u32();
    return q;
  });
}

PublicResponse decode_public_response(std::span<const std::uint8_t> payload) {
  return parse(payload, "RESP_PUBLIC", [](ByteReader& in) {
    PublicResponse r;
    const auto count = in.u32();
    require_room(in, count, 8, "RESP_PUBLIC");
    r.entries.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      const auto index = in.u32();
      r.entries.emplace_back(index, in.f32());
    }
    return r;
  });
}

PrivateQueryMsg decode_private_query(std::span<const std::uint8_t> payload) {
  return parse(payload, "QUERY_PRIVATE", [](ByteReader& in) {
    PrivateQueryMsg q;
    q.auth_level = in.u8();
    const auto n = in.u32();
    require_room(in, n, 8, "QUERY_PRIVATE");
    q.y.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) q.y[i] = in.f64();
    const auto count = in.u32();
    require_room(in, count, 4, "QUERY_PRIVATE");
    q.public_list.resize(count);
    for (auto& id : q.public_list) id = in.u32();
    return q;
  });
}

PrivateResponse decode_private_response(std::span<const std::uint8_t> payload) {
  return parse(payload, "RESP_PRIVATE", [](ByteReader& in) {
    PrivateResponse r;
    const auto levels = in.u8();
    r.levels.resize(levels);
    for (auto& level : r.levels) {
      const auto count = in.u32();
      require_room(in, count, 12, "RESP_PRIVATE");
      level.reserve(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        const auto index = in.u32();
        level.emplace_back(index, in.f64());
      }
    }
    return r;
  });
}

ErrorMsg decode_error(std::span<const std::uint8_t> payload) {
  return parse(payload, "ERROR", [](ByteReader& in) {
    ErrorMsg e;
    e.code = static_cast<ErrorCode>(in.u8());
    auto rest = in.take(in.remaining());
    e.message.assign(rest.begin(), rest.end());
    return e;
  });
}

PublicResponse to_response(const CandidateList& list) {
  PublicResponse r;
  r.entries.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    r.entries.emplace_back(list.indices[i], static_cast<float>(list.scores[i]));
  }
  return r;
}

PrivateResponse to_response(const std::vector<CandidateList>& levels) {
  PrivateResponse r;
  for (const auto& list : levels) {
    auto& level = r.levels.emplace_back();
    for (std::size_t i = 0; i < list.size(); ++i) level.emplace_back(list.indices[i], list.scores[i]);
  }
  return r;
}

PublicService::PublicService(PublicSearcher searcher, std::uint32_t sim_min, std::uint32_t dis_max)
    : searcher_(std::move(searcher)), sim_min_(sim_min), dis_max_(dis_max) {}

std::vector<std::uint8_t> PublicService::handle(const Frame& request, bool& close) const {
  close = false;
  if (request.type != MsgType::kQueryPublic) {
    close = true;
    return error_frame(ErrorCode::kProtocol, "public server accepts QUERY_PUBLIC only");
  }
  try {
    const auto q = decode_public_query(request.payload);
    const ListRule rule = q.rule == ListRule::Kind::kTopGamma ? ListRule::top_gamma(q.gamma)
                                                              : ListRule::threshold(sim_min_, dis_max_);
    return encode(to_response(searcher_.search(q.code, rule)));
  } catch (const ProtocolError& e) {
    close = true;
    return error_frame(ErrorCode::kProtocol, e.what());
  } catch (const std::invalid_argument& e) {
    return error_frame(ErrorCode::kInvalidArgument, e.what());
  } catch (const std::exception& e) {
    return error_frame(ErrorCode::kInternal, e.what());
  }
}

PrivateService::PrivateService(LayeredCodebooks layers, RefinementThresholds thresholds,
                               std::set<std::size_t> allowed_levels)
    : layers_(std::move(layers)), thresholds_(std::move(thresholds)), allowed_(std::move(allowed_levels)) {}

std::vector<std::uint8_t> PrivateService::handle(const Frame& request, bool& close) const {
  close = false;
  if (request.type != MsgType::kQueryPrivate) {
    close = true;
    return error_frame(ErrorCode::kProtocol, "private server accepts QUERY_PRIVATE only");
  }
  try {
    auto q = decode_private_query(request.payload);
    if (!allowed_.empty() && !allowed_.contains(q.auth_level)) {
      throw AuthorizationError("authorization level " + std::to_string(q.auth_level) + " not in allow-list");
    }
    PrivateQuery query{std::move(q.y), q.auth_level, std::move(q.public_list)};
    return encode(to_response(private_refine(layers_, query, thresholds_)));
  } catch (const ProtocolError& e) {
    close = true;
    return error_frame(ErrorCode::kProtocol, e.what());
  } catch (const AuthorizationError& e) {
    return error_frame(ErrorCode::kAuthorization, e.what());
  } catch (const std::invalid_argument& e) {
    return error_frame(ErrorCode::kInvalidArgument, e.what());
  } catch (const std::out_of_range& e) {
    return error_frame(ErrorCode::kInvalidArgument, e.what());
  } catch (const std::exception& e) {
    return error_frame(ErrorCode::kInternal, e.what());
  }
}

}  // namespace sparseid::wire
