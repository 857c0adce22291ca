#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sparseid/ambiguize.hpp"
#include "sparseid/layered.hpp"
#include "sparseid/rng.hpp"
#include "sparseid/search.hpp"

namespace sparseid {

/// Everything the owner produces offline: the public bundle for the
/// untrusted server and the K private codebooks.
struct OwnerAssets {
  PublicBundle public_bundle;
  LayeredCodebooks layers;
  AmbiguizationConfig ambiguization;
};

/// Layer 1 is learned on X and ambiguized for the public server; layers
/// 2..K refine the residual chain.
OwnerAssets owner_prepare(const Eigen::Ref<const Eigen::MatrixXd>& data,
                          const std::vector<LayerSpec>& specs, const AmbiguizationConfig& amb,
                          GainMode gain_mode = GainMode::kLeastSquares);

/// b_p = select(ambiguize(ternarize(W_1 y, S_x), S_nq), selection).
TernaryCode client_query(const Eigen::Ref<const Eigen::VectorXd>& y, const Transform& w1,
                         std::size_t sparsity, std::size_t noise_count,
                         std::span<const std::uint32_t> selection, Rng& rng);

/// Public server state: the bundle plus its inverted index.
class PublicSearcher {
 public:
  explicit PublicSearcher(PublicBundle bundle);

  const PublicBundle& bundle() const { return bundle_; }
  const InvertedIndex& index() const { return index_; }

  /// Throws std::invalid_argument if the query length differs from L_p.
  CandidateList search(const TernaryCode& query, const ListRule& rule) const;

 private:
  PublicBundle bundle_;
  InvertedIndex index_;
};

CandidateList public_search(const PublicSearcher& searcher, const TernaryCode& query,
                            const ListRule& rule);

struct RefinementThresholds {
  enum class Metric : std::uint8_t { kSquared, kEuclidean };
  enum class Mode : std::uint8_t { kBudget, kTopCount };

  Mode mode = Mode::kBudget;
  Metric metric = Metric::kSquared;
  /// Per-level budget gamma_{s_k}; item kept when dist <= gamma * N.
  /// Levels beyond the vector are unbounded.
  std::vector<double> budgets;
  /// Per-level count of nearest candidates kept in kTopCount mode.
  std::vector<std::size_t> top_counts;

  static RefinementThresholds unlimited() { return {}; }
};

struct PrivateQuery {
  Eigen::VectorXd y;
  std::size_t auth_level = 1;
  std::vector<std::uint32_t> public_list;
};

/// Level k filters level k-1 (level 1 filters the public list) by the
/// distance from y to the k-layer reconstruction. Returns lists 1..auth,
/// each sorted by ascending distance, ties by index. Only layers 1..auth
/// are read. Throws AuthorizationError if auth is outside [1, K].
std::vector<CandidateList> private_refine(const LayeredCodebooks& layers, const PrivateQuery& query,
                                          const RefinementThresholds& thresholds);

/// Top-1 of the deepest returned list, or nullopt when it is empty.
std::optional<std::uint32_t> final_decision(const std::vector<CandidateList>& levels);

}  // namespace sparseid
