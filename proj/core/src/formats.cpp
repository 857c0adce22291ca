#include "sparseid/formats.hpp"

#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

namespace sparseid {

namespace fs = std::filesystem;

std::size_t packed_code_bytes(std::size_t length) { return (length + 3) / 4; }

void pack_code(const TernaryCode& code, ByteWriter& out) {
  const auto entries = code.entries();
  for (std::size_t base = 0; base < entries.size(); base += 4) {
    std::uint8_t byte = 0;
    for (std::size_t j = 0; j < 4 && base + j < entries.size(); ++j) {
      const std::int8_t e = entries[base + j];
      const std::uint8_t bits = e > 0 ? 0b01 : (e < 0 ? 0b10 : 0b00);
      byte = static_cast<std::uint8_t>(byte | (bits << (2 * j)));
    }
    out.u8(byte);
  }
}

TernaryCode unpack_code(ByteReader& in, std::size_t length) {
  const auto bytes = in.take(packed_code_bytes(length));
  std::vector<std::int8_t> entries(length);
  for (std::size_t b = 0; b < bytes.size(); ++b) {
    for (std::size_t j = 0; j < 4; ++j) {
      const auto bits = static_cast<std::uint8_t>((bytes[b] >> (2 * j)) & 0b11);
      const std::size_t pos = 4 * b + j;
      if (pos >= length) {
        if (bits != 0) throw FormatError("nonzero padding bits in packed code");
        continue;
      }
      switch (bits) {
        case 0b00: entries[pos] = 0; break;
        case 0b01: entries[pos] = 1; break;
        case 0b10: entries[pos] = -1; break;
        default: throw FormatError("invalid ternary symbol 11 at position " + std::to_string(pos));
      }
    }
  }
  return TernaryCode(std::move(entries));
}

namespace {

void expect_version(ByteReader& in, const char* what) {
  const auto version = in.u8();
  if (version != kFormatVersion) {
    throw FormatError(std::string(what) + ": unsupported version " + std::to_string(version));
  }
}

void expect_end(const ByteReader& in, const char* what) {
  if (!in.done()) throw FormatError(std::string(what) + ": trailing bytes");
}

}  // namespace

std::vector<std::uint8_t> serialize_transform(const Transform& t) {
  ByteWriter out;
  out.tag("STTF");
  out.u8(kFormatVersion);
  out.u32(static_cast<std::uint32_t>(t.rows()));
  out.u32(static_cast<std::uint32_t>(t.cols()));
  const auto& m = t.matrix();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.f64(m(r, c));
  }
  return out.take();
}

Transform deserialize_transform(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_tag("STTF");
  expect_version(in, "STTF");
  const auto rows = in.u32();
  const auto cols = in.u32();
  if (rows == 0 || cols == 0) throw FormatError("STTF: empty transform");
  if (in.remaining() != std::size_t{rows} * cols * 8) throw FormatError("STTF: payload size mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in.f64();
  }
  if (!m.allFinite()) throw FormatError("STTF: non-finite entries");
  return Transform::from_matrix(std::move(m));
}

std::vector<std::uint8_t> serialize_codebook(const CodebookFile& cb) {
  ByteWriter out;
  out.tag("STCB");
  out.u8(kFormatVersion);
  out.u8(cb.layer_index);
  out.u32(cb.length);
  out.u32(static_cast<std::uint32_t>(cb.codes.size()));
  out.u32(cb.sparsity);
  out.f64(cb.gain);
  for (const auto& code : cb.codes) {
    if (code.size() != cb.length) throw std::invalid_argument("STCB: code length mismatch");
    pack_code(code, out);
  }
  return out.take();
}

CodebookFile deserialize_codebook(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_tag("STCB");
  expect_version(in, "STCB");
  CodebookFile cb;
  cb.layer_index = in.u8();
  cb.length = in.u32();
  const auto items = in.u32();
  cb.sparsity = in.u32();
  cb.gain = in.f64();
  if (in.remaining() != std::size_t{items} * packed_code_bytes(cb.length)) {
    throw FormatError("STCB: payload size mismatch");
  }
  cb.codes.reserve(items);
  for (std::uint32_t m = 0; m < items; ++m) cb.codes.push_back(unpack_code(in, cb.length));
  expect_end(in, "STCB");
  return cb;
}

std::vector<std::uint8_t> serialize_selection(std::span<const std::uint32_t> selection,
                                              std::uint32_t full_length) {
  ByteWriter out;
  out.tag("STSL");
  out.u32(full_length);
  out.u32(static_cast<std::uint32_t>(selection.size()));
  for (auto idx : selection) out.u32(idx);
  return out.take();
}

std::vector<std::uint32_t> deserialize_selection(std::span<const std::uint8_t> bytes,
                                                 std::uint32_t& full_length) {
  ByteReader in(bytes);
  in.expect_tag("STSL");
  full_length = in.u32();
  const auto count = in.u32();
  if (count == 0 || count > full_length) throw FormatError("STSL: L_p outside [1, L]");
  if (in.remaining() != std::size_t{count} * 4) throw FormatError("STSL: payload size mismatch");
  std::vector<std::uint32_t> selection(count);
  for (auto& idx : selection) {
    idx = in.u32();
    if (idx >= full_length) throw FormatError("STSL: index out of range");
  }
  for (std::size_t j = 1; j < selection.size(); ++j) {
    if (selection[j] <= selection[j - 1]) throw FormatError("STSL: indices not strictly ascending");
  }
  return selection;
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

namespace {

fs::path layer_path(const fs::path& dir, std::size_t i, const char* ext) {
  return dir / ("layer_" + std::to_string(i) + ext);
}

}  // namespace

void save_layers(const fs::path& dir, const LayeredCodebooks& cb) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < cb.depth(); ++i) {
    const auto& layer = cb.layer(i);
    CodebookFile file{static_cast<std::uint8_t>(i + 1), static_cast<std::uint32_t>(cb.code_length()),
                      static_cast<std::uint32_t>(layer.sparsity), layer.gain, layer.codes};
    write_file(layer_path(dir, i + 1, ".stcb"), serialize_codebook(file));
    write_file(layer_path(dir, i + 1, ".sttf"), serialize_transform(layer.transform));
  }
}

LayeredCodebooks load_layers(const fs::path& dir) {
  std::vector<Layer> layers;
  for (std::size_t i = 1; fs::exists(layer_path(dir, i, ".stcb")); ++i) {
    auto file = deserialize_codebook(read_file(layer_path(dir, i, ".stcb")));
    if (file.layer_index != i) throw FormatError("STCB: layer index does not match file name");
    auto transform = deserialize_transform(read_file(layer_path(dir, i, ".sttf")));
    if (transform.rows() != file.length) throw FormatError("STCB/STTF length mismatch");
    layers.push_back(Layer{std::move(transform), std::move(file.codes), file.sparsity, file.gain});
  }
  if (layers.empty()) throw FormatError("no layer_1.stcb in " + dir.string());
  return LayeredCodebooks(std::move(layers), {});
}

void save_public(const fs::path& dir, const PublicBundle& bundle) {
  fs::create_directories(dir);
  CodebookFile file{0, static_cast<std::uint32_t>(bundle.public_length()),
                    static_cast<std::uint32_t>(bundle.sparsity), 0.0, bundle.codes};
  write_file(dir / "public.stcb", serialize_codebook(file));
  write_file(dir / "public.sttf", serialize_transform(bundle.transform));
  write_file(dir / "public.stsl",
             serialize_selection(bundle.selection, static_cast<std::uint32_t>(bundle.full_length())));
}

PublicBundle load_public(const fs::path& dir) {
  auto file = deserialize_codebook(read_file(dir / "public.stcb"));
  auto transform = deserialize_transform(read_file(dir / "public.sttf"));
  std::uint32_t full_length = 0;
  auto selection = deserialize_selection(read_file(dir / "public.stsl"), full_length);
  if (full_length != transform.rows()) throw FormatError("STSL length does not match transform");
  if (selection.size() != file.length) throw FormatError("STSL size does not match public code length");
  return PublicBundle{std::move(file.codes), std::move(transform), std::move(selection), file.sparsity};
}

}  // namespace sparseid
