#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "helpers.hpp"
#include "oracles.hpp"
#include "sparseid/search.hpp"

using namespace sparseid;
using testing_util::code;

namespace {

Codebook random_codebook(std::size_t items, std::size_t length, Rng& rng) {
  Codebook codes;
  for (std::size_t m = 0; m < items; ++m) codes.push_back(testing_util::random_code(length, rng.below(length + 1), rng));
  return codes;
}

}  // namespace

TEST_SUITE("similarity_search") {

TEST_CASE("score examples") {
  const auto u = code({1, 0, -1, 1});
  CHECK(score(u, code({1, -1, -1, 0})) == ScorePair{2, 0});
  CHECK(score(u, code({1, -1, -1, 0})).nu() == 1.0);
  CHECK(score(u, code({-1, 1, 0, 0})) == ScorePair{0, 1});
  CHECK(score(u, code({-1, 1, 0, 0})).nu() == 0.0);
  CHECK(score(u, u) == ScorePair{3, 0});
  CHECK(score(u, TernaryCode(4)).nu() == 0.0);
  CHECK_THROWS_AS(score(u, TernaryCode(3)), std::invalid_argument);
}

TEST_CASE("score identities over random pairs") {
  Rng rng(1);
  for (int t = 0; t < 20000; ++t) {
    const std::size_t length = 1 + rng.below(48);
    const auto u = testing_util::random_code(length, rng.below(length + 1), rng);
    const auto b = testing_util::random_code(length, rng.below(length + 1), rng);
    const auto p = score(u, b);
    CHECK(p == oracle::score(u, b));
    CHECK(p == score(b, u));
    const auto n = score(u, b.negated());
    CHECK(n.sim == p.dis);
    CHECK(n.dis == p.sim);
    CHECK(p.sim + p.dis <= std::min(u.support_size(), b.support_size()));
    CHECK(p.nu() >= 0.0);
    CHECK(p.nu() <= 1.0);
  }
}

TEST_CASE("top_gamma matches the full-sort oracle") {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const Codebook codes = random_codebook(100, 24, rng);
    const auto q = testing_util::random_code(24, 1 + rng.below(24), rng);
    const auto order = oracle::full_rank(score_all(codes, q));
    const std::uint32_t gamma = 1 + static_cast<std::uint32_t>(rng.below(100));
    const auto list = top_gamma(codes, q, gamma);
    REQUIRE(list.size() == gamma);
    CHECK(std::equal(list.indices.begin(), list.indices.end(), order.begin()));
    CHECK(!list.truncated);
    for (std::size_t i = 1; i < list.scores.size(); ++i) CHECK(list.scores[i] <= list.scores[i - 1]);
  }
}

TEST_CASE("top_gamma edge cases") {
  Rng rng(3);
  const Codebook codes = random_codebook(30, 16, rng);
  const auto q = testing_util::random_code(16, 4, rng);

  auto all = top_gamma(codes, q, 30).indices;
  std::sort(all.begin(), all.end());
  std::vector<std::uint32_t> iota(30);
  std::iota(iota.begin(), iota.end(), 0u);
  CHECK(all == iota);

  const auto over = top_gamma(codes, q, 50);
  CHECK(over.size() == 30);
  CHECK(over.truncated);

  CHECK_THROWS_AS(top_gamma(codes, q, 0), std::invalid_argument);

  Codebook with_q = codes;
  with_q[17] = q;
  CHECK(top_gamma(with_q, q, 1).indices.front() == 17);
}

TEST_CASE("threshold_list examples and oracle") {
  Rng rng(4);
  const Codebook codes = random_codebook(80, 20, rng);
  const auto q = testing_util::random_code(20, 6, rng);
  CHECK(threshold_list(codes, q, 0, 20).size() == 80);
  CHECK(threshold_list(codes, q, 21, 20).size() == 0);

  for (std::uint32_t sim_min = 0; sim_min < 5; ++sim_min) {
    for (std::uint32_t dis_max = 0; dis_max < 4; ++dis_max) {
      const auto list = threshold_list(codes, q, sim_min, dis_max);
      std::vector<std::uint32_t> want;
      for (std::uint32_t m = 0; m < codes.size(); ++m) {
        const auto p = oracle::score(codes[m], q);
        if (p.sim >= sim_min && p.dis <= dis_max) want.push_back(m);
      }
      auto got = list.indices;
      std::sort(got.begin(), got.end());
      CHECK(got == want);
    }
  }
}

TEST_CASE("inverted index equals brute force") {
  Rng rng(5);
  const Codebook codes = random_codebook(1000, 64, rng);
  const InvertedIndex index = build_index(codes);
  CHECK(index.items() == 1000);
  CHECK(index.code_length() == 64);
  std::size_t total = 0;
  for (const auto& c : codes) total += c.support_size();
  CHECK(index.total_postings() == total);
  for (int t = 0; t < 100; ++t) {
    const auto q = testing_util::random_code(64, rng.below(65), rng);
    CHECK(query_index(index, q) == score_all(codes, q));
  }
  const auto zero = index.query(TernaryCode(64));
  CHECK(std::all_of(zero.begin(), zero.end(), [](const ScorePair& p) { return p == ScorePair{}; }));
}

TEST_CASE("single posting index scores only the listed item") {
  Codebook codes(5, TernaryCode(8));
  codes[3] = code({0, 0, 1, 0, 0, 0, 0, 0});
  const InvertedIndex index(codes);
  CHECK(index.postings(2, +1).size() == 1);
  CHECK(index.postings(2, -1).empty());
  const auto s = index.query(code({1, 1, 1, 1, 1, 1, 1, 1}));
  for (std::size_t m = 0; m < 5; ++m) CHECK((s[m] == ScorePair{}) == (m != 3));
  CHECK(s[3] == ScorePair{1, 0});
}

TEST_CASE("ranks_before orders by nu, then sim, then index") {
  CHECK(ranks_before({2, 0}, 5, {3, 1}, 0));    // 1 > 0.75
  CHECK(ranks_before({4, 0}, 5, {2, 0}, 0));    // equal nu, more sim
  CHECK(ranks_before({2, 2}, 1, {2, 2}, 4));    // full tie, lower index
  CHECK(!ranks_before({1, 1}, 0, {1, 0}, 9));
  CHECK(ranks_before({0, 0}, 0, {0, 3}, 1));    // both nu = 0, equal sim
}

}  // TEST_SUITE
