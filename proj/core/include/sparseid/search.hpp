#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sparseid/ternary.hpp"

namespace sparseid {

/// Support-intersection scores between two ternary codes.
struct ScorePair {
  std::uint32_t sim = 0;  // positions where both are nonzero with equal sign
  std::uint32_t dis = 0;  // positions where both are nonzero with opposite sign

  /// sim / (sim + dis), 0 when there is no shared support.
  double nu() const {
    const auto total = sim + dis;
    return total == 0 ? 0.0 : static_cast<double>(sim) / static_cast<double>(total);
  }
  friend bool operator==(const ScorePair&, const ScorePair&) = default;
};

/// Throws std::invalid_argument on length mismatch.
ScorePair score(const TernaryCode& u, const TernaryCode& b);

/// Brute-force scores of `query` against every code.
std::vector<ScorePair> score_all(const Codebook& codes, const TernaryCode& query);

/// Strict ranking order: nu desc, then sim desc, then index asc.
/// nu is compared exactly by cross-multiplication.
bool ranks_before(const ScorePair& a, std::uint32_t ia, const ScorePair& b, std::uint32_t ib);

enum class ListStage : std::uint8_t { kPublic, kPrivate };

struct ListRule {
  enum class Kind : std::uint8_t { kTopGamma = 0, kThreshold = 1 };
  Kind kind = Kind::kTopGamma;
  std::uint32_t gamma = 10;
  std::uint32_t sim_min = 0;
  std::uint32_t dis_max = 0;

  static ListRule top_gamma(std::uint32_t gamma) { return {Kind::kTopGamma, gamma, 0, 0}; }
  static ListRule threshold(std::uint32_t sim_min, std::uint32_t dis_max) {
    return {Kind::kThreshold, 0, sim_min, dis_max};
  }
};

/// Ordered candidate ids with parallel scores. Public lists carry nu in
/// descending order; private lists carry distances in ascending order.
struct CandidateList {
  std::vector<std::uint32_t> indices;
  std::vector<double> scores;
  ListStage stage = ListStage::kPublic;
  std::size_t level = 0;  // 0 for public, k for private level k
  ListRule rule;
  bool truncated = false;  // gamma exceeded M and every item was returned

  std::size_t size() const { return indices.size(); }
  bool contains(std::uint32_t id) const;
};

/// Ranks precomputed scores. gamma must be >= 1; gamma > M returns all M
/// with `truncated` set.
CandidateList rank_top_gamma(std::span<const ScorePair> scores, std::uint32_t gamma);
CandidateList rank_threshold(std::span<const ScorePair> scores, std::uint32_t sim_min,
                             std::uint32_t dis_max);
CandidateList rank_by_rule(std::span<const ScorePair> scores, const ListRule& rule);

CandidateList top_gamma(const Codebook& codes, const TernaryCode& query, std::uint32_t gamma);
CandidateList threshold_list(const Codebook& codes, const TernaryCode& query,
                             std::uint32_t sim_min, std::uint32_t dis_max);

/// Signed posting lists: for each position l and sign s, the ascending ids of
/// codes with entry s at l.
class InvertedIndex {
 public:
  explicit InvertedIndex(const Codebook& codes);

  std::size_t code_length() const { return length_; }
  std::size_t items() const { return items_; }
  std::size_t total_postings() const;
  std::span<const std::uint32_t> postings(std::size_t position, int sign) const;

  /// Equal to score_all over the indexed codebook.
  std::vector<ScorePair> query(const TernaryCode& query) const;

 private:
  std::size_t length_ = 0;
  std::size_t items_ = 0;
  std::vector<std::vector<std::uint32_t>> lists_;  // 2 * position + (sign < 0)
};

InvertedIndex build_index(const Codebook& codes);
std::vector<ScorePair> query_index(const InvertedIndex& index, const TernaryCode& query);

}  // namespace sparseid
