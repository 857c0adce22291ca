#pragma once

// On-disk asset formats. All integers and floats are little-endian.
//
//   STTF  transform:  "STTF" u8 version=1, u32 L, u32 N, L*N f64 row-major
//   STCB  codebook:   "STCB" u8 version=1, u8 layer_index, u32 L, u32 M, u32 S,
//                     f64 gain, then M codes packed 2 bits per entry
//   STSL  selection:  "STSL" u32 L, u32 L_p, L_p u32 indices (0-based)
//
// Packed ternary codes: entry j sits in byte j/4 at bit offset 2*(j%4);
// 00 = 0, 01 = +1, 10 = -1, 11 is rejected. Each code is padded to a byte
// boundary.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sparseid/ambiguize.hpp"
#include "sparseid/bytes.hpp"
#include "sparseid/layered.hpp"
#include "sparseid/ternary.hpp"
#include "sparseid/transform.hpp"

namespace sparseid {

inline constexpr std::uint8_t kFormatVersion = 1;

std::size_t packed_code_bytes(std::size_t length);
void pack_code(const TernaryCode& code, ByteWriter& out);
/// Throws FormatError on the reserved 11 pattern or nonzero padding bits.
TernaryCode unpack_code(ByteReader& in, std::size_t length);

struct CodebookFile {
  std::uint8_t layer_index = 0;  // 0 = public bundle, 1..K = private layers
  std::uint32_t length = 0;
  std::uint32_t sparsity = 0;
  double gain = 0.0;
  Codebook codes;
};

std::vector<std::uint8_t> serialize_transform(const Transform& t);
Transform deserialize_transform(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> serialize_codebook(const CodebookFile& cb);
CodebookFile deserialize_codebook(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> serialize_selection(std::span<const std::uint32_t> selection,
                                              std::uint32_t full_length);
/// Returns the selection; `full_length` receives L.
std::vector<std::uint32_t> deserialize_selection(std::span<const std::uint8_t> bytes,
                                                 std::uint32_t& full_length);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// layer_<i>.stcb + layer_<i>.sttf for i = 1..K.
void save_layers(const std::filesystem::path& dir, const LayeredCodebooks& cb);
LayeredCodebooks load_layers(const std::filesystem::path& dir);

/// public.stcb + public.sttf + public.stsl.
void save_public(const std::filesystem::path& dir, const PublicBundle& bundle);
PublicBundle load_public(const std::filesystem::path& dir);

}  // namespace sparseid
