#include "sparseid/ambiguize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sparseid {

TernaryCode ambiguize_code(const TernaryCode& code, std::size_t noise_count, Rng& rng) {
  const std::size_t co_support = code.size() - code.support_size();
  if (noise_count > co_support) {
    throw std::invalid_argument("ambiguization noise " + std::to_string(noise_count) +
                                " exceeds co-support size " + std::to_string(co_support));
  }
  std::vector<std::int8_t> entries(code.entries().begin(), code.entries().end());
  if (noise_count == 0) return TernaryCode(std::move(entries));

  std::vector<std::uint32_t> zeros;
  zeros.reserve(co_support);
  for (std::size_t l = 0; l < entries.size(); ++l) {
    if (entries[l] == 0) zeros.push_back(static_cast<std::uint32_t>(l));
  }
  // Partial Fisher-Yates: the first noise_count slots become a uniform sample.
  for (std::size_t i = 0; i < noise_count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(zeros.size() - i));
    std::swap(zeros[i], zeros[j]);
    entries[zeros[i]] = static_cast<std::int8_t>(rng.sign());
  }
  return TernaryCode(std::move(entries));
}

TernaryCode ambiguize_query(const TernaryCode& query, std::size_t noise_count, Rng& rng) {
  return ambiguize_code(query, noise_count, rng);
}

TernaryCode select_subspace(const TernaryCode& code, std::span<const std::uint32_t> selection) {
  std::vector<std::int8_t> out(selection.size());
  for (std::size_t j = 0; j < selection.size(); ++j) {
    if (selection[j] >= code.size()) {
      throw std::out_of_range("selection index " + std::to_string(selection[j]) +
                              " outside code of length " + std::to_string(code.size()));
    }
    out[j] = code[selection[j]];
  }
  return TernaryCode(std::move(out));
}

std::vector<std::uint32_t> draw_selection(std::size_t length, std::size_t selected,
                                          std::uint64_t seed) {
  if (selected < 1 || selected > length) {
    throw std::invalid_argument("public length must lie in [1, L]");
  }
  std::vector<std::uint32_t> perm(length);
  std::iota(perm.begin(), perm.end(), 0u);
  if (selected == length) return perm;
  Rng rng(seed);
  for (std::size_t i = 0; i < selected; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(length - i));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(selected);
  std::sort(perm.begin(), perm.end());
  return perm;
}

PublicBundle ambiguize_codebook(const Codebook& codes, const AmbiguizationConfig& cfg,
                                const Transform& transform, std::size_t sparsity) {
  const std::size_t length = transform.rows();
  const std::size_t public_length = cfg.public_length == 0 ? length : cfg.public_length;
  PublicBundle bundle{Codebook{}, transform, draw_selection(length, public_length, cfg.permutation_seed),
                      sparsity};
  bundle.codes.reserve(codes.size());
  for (std::size_t m = 0; m < codes.size(); ++m) {
    if (codes[m].size() != length) throw std::invalid_argument("codebook length does not match transform");
    Rng rng = Rng::derive(cfg.rng_seed, {m});
    bundle.codes.push_back(select_subspace(ambiguize_code(codes[m], cfg.noise_count, rng), bundle.selection));
  }
  return bundle;
}

double PublicBundle::rate() const {
  if (codes.empty()) return 0.0;
  double support = 0.0;
  for (const auto& c : codes) support += static_cast<double>(c.support_size());
  const auto mean = static_cast<std::size_t>(std::lround(support / static_cast<double>(codes.size())));
  return code_rate(public_length(), std::min(mean, public_length()));
}

std::size_t noise_count_for(double fraction, std::size_t length, std::size_t sparsity) {
  if (sparsity > length) throw std::invalid_argument("sparsity exceeds length");
  if (!(fraction >= 0.0)) throw std::invalid_argument("noise fraction must be non-negative");
  const std::size_t co_support = length - sparsity;
  const double raw = std::ceil(fraction * static_cast<double>(co_support) - 1e-9);
  return std::min(co_support, static_cast<std::size_t>(std::max(0.0, raw)));
}

}  // namespace sparseid
