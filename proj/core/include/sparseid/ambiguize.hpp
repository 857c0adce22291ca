#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sparseid/rng.hpp"
#include "sparseid/ternary.hpp"
#include "sparseid/transform.hpp"

namespace sparseid {

struct AmbiguizationConfig {
  std::size_t noise_count = 0;   // S_n, nonzeros added to each code's co-support
  std::size_t public_length = 0; // L_p; 0 means L (no subspace selection)
  std::uint64_t permutation_seed = 11;
  std::uint64_t rng_seed = 13;
};

/// What the public server receives from the owner.
struct PublicBundle {
  Codebook codes;                      // M ambiguized codes of length L_p
  Transform transform;                 // shared W_1
  std::vector<std::uint32_t> selection;  // ascending coordinate subset of [L], size L_p
  std::size_t sparsity = 0;            // S_x of the underlying clean codes

  std::size_t public_length() const { return selection.size(); }
  std::size_t full_length() const { return transform.rows(); }
  /// code_rate of a code with the mean public support over L_p coordinates.
  double rate() const;
};

/// Fills `noise_count` zero positions of `code`, chosen uniformly without
/// replacement, with independent fair +-1 values. The true support is untouched.
/// Throws std::invalid_argument if noise_count exceeds the co-support size.
TernaryCode ambiguize_code(const TernaryCode& code, std::size_t noise_count, Rng& rng);

/// Client-side ambiguization; same contract as ambiguize_code.
TernaryCode ambiguize_query(const TernaryCode& query, std::size_t noise_count, Rng& rng);

/// output[j] = code[selection[j]]. Throws std::out_of_range on a bad index.
TernaryCode select_subspace(const TernaryCode& code, std::span<const std::uint32_t> selection);

/// Uniformly random subset of [length] of the given size, sorted ascending.
std::vector<std::uint32_t> draw_selection(std::size_t length, std::size_t selected,
                                          std::uint64_t seed);

/// Per-item ambiguization followed by one shared subspace selection.
/// Item m draws its noise from Rng::derive(rng_seed, {m}), so the result is
/// reproducible and independent of processing order.
PublicBundle ambiguize_codebook(const Codebook& codes, const AmbiguizationConfig& cfg,
                                const Transform& transform, std::size_t sparsity);

/// ceil(fraction * (L - S)), clamped to [0, L - S].
std::size_t noise_count_for(double fraction, std::size_t length, std::size_t sparsity);

}  // namespace sparseid
