#include "sparseid/search.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sparseid {

ScorePair score(const TernaryCode& u, const TernaryCode& b) {
  if (u.size() != b.size()) {
    throw std::invalid_argument("score: code lengths differ (" + std::to_string(u.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  ScorePair out;
  const auto ue = u.entries();
  const auto be = b.entries();
  for (std::size_t l = 0; l < ue.size(); ++l) {
    const int product = ue[l] * be[l];
    out.sim += product > 0;
    out.dis += product < 0;
  }
  return out;
}

std::vector<ScorePair> score_all(const Codebook& codes, const TernaryCode& query) {
  std::vector<ScorePair> out;
  out.reserve(codes.size());
  for (const auto& code : codes) out.push_back(score(code, query));
  return out;
}

bool ranks_before(const ScorePair& a, std::uint32_t ia, const ScorePair& b, std::uint32_t ib) {
  // nu_a > nu_b  <=>  sim_a * (sim_b + dis_b) > sim_b * (sim_a + dis_a), with 0/0 := 0.
  const std::uint64_t lhs = std::uint64_t{a.sim} * (b.sim + b.dis);
  const std::uint64_t rhs = std::uint64_t{b.sim} * (a.sim + a.dis);
  if (lhs != rhs) return lhs > rhs;
  if (a.sim != b.sim) return a.sim > b.sim;
  return ia < ib;
}

bool CandidateList::contains(std::uint32_t id) const {
  return std::find(indices.begin(), indices.end(), id) != indices.end();
}

namespace {

CandidateList finish_public(std::span<const ScorePair> scores, std::vector<std::uint32_t> order,
                            const ListRule& rule) {
  CandidateList list;
  list.stage = ListStage::kPublic;
  list.rule = rule;
  list.scores.reserve(order.size());
  for (auto id : order) list.scores.push_back(scores[id].nu());
  list.indices = std::move(order);
  return list;
}

}  // namespace

CandidateList rank_top_gamma(std::span<const ScorePair> scores, std::uint32_t gamma) {
  if (gamma < 1) throw std::invalid_argument("top_gamma: gamma must be >= 1");
  std::vector<std::uint32_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0u);
  auto before = [&scores](std::uint32_t a, std::uint32_t b) {
    return ranks_before(scores[a], a, scores[b], b);
  };
  const bool truncated = gamma > scores.size();
  const std::size_t keep = std::min<std::size_t>(gamma, scores.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), before);
  order.resize(keep);
  auto list = finish_public(scores, std::move(order), ListRule::top_gamma(gamma));
  list.truncated = truncated;
  return list;
}

CandidateList rank_threshold(std::span<const ScorePair> scores, std::uint32_t sim_min,
                             std::uint32_t dis_max) {
  std::vector<std::uint32_t> order;
  for (std::uint32_t m = 0; m < scores.size(); ++m) {
    if (scores[m].sim >= sim_min && scores[m].dis <= dis_max) order.push_back(m);
  }
  std::sort(order.begin(), order.end(), [&scores](std::uint32_t a, std::uint32_t b) {
    return ranks_before(scores[a], a, scores[b], b);
  });
  return finish_public(scores, std::move(order), ListRule::threshold(sim_min, dis_max));
}

CandidateList rank_by_rule(std::span<const ScorePair> scores, const ListRule& rule) {
  switch (rule.kind) {
    case ListRule::Kind::kTopGamma:
      return rank_top_gamma(scores, rule.gamma);
    case ListRule::Kind::kThreshold:
      return rank_threshold(scores, rule.sim_min, rule.dis_max);
  }
  throw std::invalid_argument("unknown list rule");
}

CandidateList top_gamma(const Codebook& codes, const TernaryCode& query, std::uint32_t gamma) {
  return rank_top_gamma(score_all(codes, query), gamma);
}

CandidateList threshold_list(const Codebook& codes, const TernaryCode& query,
                             std::uint32_t sim_min, std::uint32_t dis_max) {
  return rank_threshold(score_all(codes, query), sim_min, dis_max);
}

InvertedIndex::InvertedIndex(const Codebook& codes)
    : length_(codes.empty() ? 0 : codes.front().size()), items_(codes.size()), lists_(2 * length_) {
  for (std::uint32_t m = 0; m < codes.size(); ++m) {
    const auto& code = codes[m];
    if (code.size() != length_) throw std::invalid_argument("build_index: mixed code lengths");
    const auto entries = code.entries();
    for (std::size_t l = 0; l < length_; ++l) {
      if (entries[l] != 0) lists_[2 * l + (entries[l] < 0)].push_back(m);
    }
  }
}

std::size_t InvertedIndex::total_postings() const {
  std::size_t total = 0;
  for (const auto& list : lists_) total += list.size();
  return total;
}

std::span<const std::uint32_t> InvertedIndex::postings(std::size_t position, int sign) const {
  if (position >= length_ || sign == 0) throw std::out_of_range("postings: bad position or sign");
  return lists_[2 * position + (sign < 0)];
}

std::vector<ScorePair> InvertedIndex::query(const TernaryCode& query) const {
  if (items_ > 0 && query.size() != length_) {
    throw std::invalid_argument("query_index: query length " + std::to_string(query.size()) +
                                " does not match index length " + std::to_string(length_));
  }
  std::vector<ScorePair> out(items_);
  const auto entries = query.entries();
  for (std::size_t l = 0; l < length_; ++l) {
    if (entries[l] == 0) continue;
    const bool negative = entries[l] < 0;
    for (auto m : lists_[2 * l + negative]) ++out[m].sim;
    for (auto m : lists_[2 * l + !negative]) ++out[m].dis;
  }
  return out;
}

InvertedIndex build_index(const Codebook& codes) { return InvertedIndex(codes); }

std::vector<ScorePair> query_index(const InvertedIndex& index, const TernaryCode& query) {
  return index.query(query);
}

}  // namespace sparseid
