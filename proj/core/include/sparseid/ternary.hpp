#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sparseid {

/// A length-L vector over {-1, 0, +1}.
///
/// Immutable after construction; the support size is cached and always
/// matches the number of nonzero entries.
class TernaryCode {
 public:
  TernaryCode() = default;
  /// All-zero code of the given length.
  explicit TernaryCode(std::size_t length);
  /// Throws std::invalid_argument if any entry lies outside {-1, 0, +1}.
  explicit TernaryCode(std::vector<std::int8_t> entries);

  std::size_t size() const { return entries_.size(); }
  std::size_t support_size() const { return support_; }
  std::int8_t operator[](std::size_t i) const { return entries_[i]; }
  std::span<const std::int8_t> entries() const { return entries_; }

  TernaryCode negated() const;
  Eigen::VectorXd to_real() const;

  friend bool operator==(const TernaryCode&, const TernaryCode&) = default;

 private:
  std::vector<std::int8_t> entries_;
  std::size_t support_ = 0;
};

using Codebook = std::vector<TernaryCode>;

/// Keeps the `sparsity` largest-magnitude entries of `f` and zeroes the rest.
/// Equal magnitudes at the cutoff go to the lowest index.
/// Throws std::invalid_argument if sparsity > f.size() or f has a non-finite entry.
Eigen::VectorXd hard_threshold(const Eigen::Ref<const Eigen::VectorXd>& f, std::size_t sparsity);

/// sign(hard_threshold(f, sparsity)) with sign(0) = 0.
TernaryCode ternarize(const Eigen::Ref<const Eigen::VectorXd>& f, std::size_t sparsity);

/// Bits per dimension of an S-sparse ternary code of length L:
/// (1/L) * log2(C(L, S) * 2^S). Evaluated through lgamma so large L is safe.
double code_rate(std::size_t length, std::size_t sparsity);

}  // namespace sparseid
