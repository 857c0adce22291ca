#include "sparseid/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

#include "sparseid/errors.hpp"

namespace sparseid {

OwnerAssets owner_prepare(const Eigen::Ref<const Eigen::MatrixXd>& data,
                          const std::vector<LayerSpec>& specs, const AmbiguizationConfig& amb,
                          GainMode gain_mode) {
  LayeredCodebooks layers = build_layers(data, specs, gain_mode);
  const auto& first = layers.layer(0);
  PublicBundle bundle = ambiguize_codebook(first.codes, amb, first.transform, first.sparsity);
  return OwnerAssets{std::move(bundle), std::move(layers), amb};
}

TernaryCode client_query(const Eigen::Ref<const Eigen::VectorXd>& y, const Transform& w1,
                         std::size_t sparsity, std::size_t noise_count,
                         std::span<const std::uint32_t> selection, Rng& rng) {
  const TernaryCode clean = encode(y, w1, sparsity);
  return select_subspace(ambiguize_query(clean, noise_count, rng), selection);
}

PublicSearcher::PublicSearcher(PublicBundle bundle)
    : bundle_(std::move(bundle)), index_(bundle_.codes) {}

CandidateList PublicSearcher::search(const TernaryCode& query, const ListRule& rule) const {
  if (query.size() != bundle_.public_length()) {
    throw std::invalid_argument("public query length " + std::to_string(query.size()) +
                                " does not match L_p = " + std::to_string(bundle_.public_length()));
  }
  return rank_by_rule(index_.query(query), rule);
}

CandidateList public_search(const PublicSearcher& searcher, const TernaryCode& query,
                            const ListRule& rule) {
  return searcher.search(query, rule);
}

std::vector<CandidateList> private_refine(const LayeredCodebooks& layers, const PrivateQuery& query,
                                          const RefinementThresholds& thresholds) {
  const std::size_t depth = layers.depth();
  if (query.auth_level < 1 || query.auth_level > depth) {
    throw AuthorizationError("authorization level " + std::to_string(query.auth_level) +
                             " outside [1, " + std::to_string(depth) + "]");
  }
  if (static_cast<std::size_t>(query.y.size()) != layers.dimension()) {
    throw std::invalid_argument("private query has dimension " + std::to_string(query.y.size()) +
                                ", expected " + std::to_string(layers.dimension()));
  }
  if (!query.y.allFinite()) throw std::invalid_argument("private query is not finite");
  for (auto id : query.public_list) {
    if (id >= layers.items()) throw std::out_of_range("public list index " + std::to_string(id) + " out of range");
  }

  // Surviving candidates with their running k-layer reconstructions.
  std::vector<std::uint32_t> survivors = query.public_list;
  std::sort(survivors.begin(), survivors.end());
  survivors.erase(std::unique(survivors.begin(), survivors.end()), survivors.end());
  std::vector<Eigen::VectorXd> recon(survivors.size(),
                                     Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layers.dimension())));

  const double n = static_cast<double>(layers.dimension());
  std::vector<CandidateList> out;
  out.reserve(query.auth_level);
  for (std::size_t level = 1; level <= query.auth_level; ++level) {
    const Layer& layer = layers.layer(level - 1);
    std::vector<std::pair<double, std::size_t>> ranked;  // (distance, slot in survivors)
    ranked.reserve(survivors.size());
    for (std::size_t s = 0; s < survivors.size(); ++s) {
      recon[s] += decode(layer.codes[survivors[s]], layer.transform, layer.gain);
      const double sq = (query.y - recon[s]).squaredNorm();
      const double dist = thresholds.metric == RefinementThresholds::Metric::kSquared ? sq : std::sqrt(sq);
      if (thresholds.mode == RefinementThresholds::Mode::kBudget && level <= thresholds.budgets.size() &&
          !(dist <= thresholds.budgets[level - 1] * n)) {
        continue;
      }
      ranked.emplace_back(dist, s);
    }
    std::sort(ranked.begin(), ranked.end(), [&survivors](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : survivors[a.second] < survivors[b.second];
    });
    if (thresholds.mode == RefinementThresholds::Mode::kTopCount && level <= thresholds.top_counts.size()) {
      ranked.resize(std::min(ranked.size(), thresholds.top_counts[level - 1]));
    }

    CandidateList list;
    list.stage = ListStage::kPrivate;
    list.level = level;
    std::vector<std::uint32_t> next_survivors;
    std::vector<Eigen::VectorXd> next_recon;
    for (const auto& [dist, slot] : ranked) {
      list.indices.push_back(survivors[slot]);
      list.scores.push_back(dist);
    }
    // Keep the next level's working set in ascending id order.
    std::vector<std::size_t> slots;
    slots.reserve(ranked.size());
    for (const auto& entry : ranked) slots.push_back(entry.second);
    std::sort(slots.begin(), slots.end());
    for (auto slot : slots) {
      next_survivors.push_back(survivors[slot]);
      next_recon.push_back(std::move(recon[slot]));
    }
    survivors = std::move(next_survivors);
    recon = std::move(next_recon);
    out.push_back(std::move(list));
  }
  return out;
}

std::optional<std::uint32_t> final_decision(const std::vector<CandidateList>& levels) {
  if (levels.empty() || levels.back().indices.empty()) return std::nullopt;
  return levels.back().indices.front();
}

}  // namespace sparseid
