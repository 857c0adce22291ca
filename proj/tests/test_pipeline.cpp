#include <doctest.h>

#include <algorithm>
#include <set>

#include "helpers.hpp"
#include "sparseid/errors.hpp"
#include "sparseid/experiments.hpp"
#include "sparseid/pipeline.hpp"

using namespace sparseid;

namespace {

OwnerAssets small_assets(std::uint64_t seed, std::size_t depth = 3, std::size_t noise = 8, std::size_t lp = 0) {
  const Eigen::MatrixXd x = bench::gen_database(200, 24, seed);
  LearningConfig base;
  base.max_iterations = 5;
  base.seed = seed;
  return owner_prepare(x, uniform_layer_specs(depth, 4, base), {noise, lp, seed + 1, seed + 2});
}

std::set<std::uint32_t> as_set(const std::vector<std::uint32_t>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_SUITE("id_pipeline") {

TEST_CASE("owner_prepare without noise publishes the layer-1 codebook") {
  const auto assets = small_assets(1, 1, 0);
  CHECK(assets.public_bundle.codes == assets.layers.layer(0).codes);
  CHECK(assets.public_bundle.transform.matrix() == assets.layers.layer(0).transform.matrix());
}

TEST_CASE("owner_prepare with a square 256-dimensional transform") {
  const Eigen::MatrixXd x = bench::gen_database(60, 256, 3);
  LearningConfig base;
  base.max_iterations = 2;
  const auto assets = owner_prepare(x, uniform_layer_specs(1, 26, base), {noise_count_for(0.5, 256, 26), 200, 1, 2});
  CHECK(assets.layers.code_length() == 256);
  CHECK(assets.public_bundle.public_length() == 200);
  for (const auto& c : assets.public_bundle.codes) CHECK(c.size() == 200);
}

TEST_CASE("client_query") {
  const auto assets = small_assets(2, 1, 0);
  const auto& bundle = assets.public_bundle;
  const Eigen::MatrixXd x = bench::gen_database(200, 24, 2);
  Rng rng(1);

  SUBCASE("noiseless query reproduces the stored code") {
    for (std::size_t m : {0u, 50u, 199u}) {
      CHECK(client_query(x.col(static_cast<Eigen::Index>(m)), bundle.transform, 4, 0, bundle.selection, rng) ==
            bundle.codes[m]);
    }
  }
  SUBCASE("maximal query noise fills the whole code") {
    const auto b = client_query(x.col(3), bundle.transform, 4, 20, bundle.selection, rng);
    CHECK(b.support_size() == 24);
  }
  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(client_query(Eigen::VectorXd::Zero(5), bundle.transform, 4, 0, bundle.selection, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("public search finds a noiseless item and respects gamma") {
  const auto assets = small_assets(3, 1, 0);
  const PublicSearcher searcher(assets.public_bundle);
  const Eigen::MatrixXd x = bench::gen_database(200, 24, 3);
  Rng rng(2);
  for (std::uint32_t m = 0; m < 200; m += 13) {
    const auto b = client_query(x.col(m), assets.public_bundle.transform, 4, 0, assets.public_bundle.selection, rng);
    for (std::uint32_t gamma : {1u, 5u}) {
      const auto list = public_search(searcher, b, ListRule::top_gamma(gamma));
      CHECK(list.size() <= gamma);
      CHECK(list.contains(m));
    }
  }
  CHECK_THROWS_AS(searcher.search(TernaryCode(7), ListRule::top_gamma(3)), std::invalid_argument);
}

TEST_CASE("private_refine contract") {
  const auto assets = small_assets(4);
  const PublicSearcher searcher(assets.public_bundle);
  const Eigen::MatrixXd x = bench::gen_database(200, 24, 4);
  Rng rng(3);
  const Eigen::VectorXd y = bench::gen_query(x.col(9), 10.0, rng);
  const auto b = client_query(y, assets.public_bundle.transform, 4, 5, assets.public_bundle.selection, rng);
  const auto pub = searcher.search(b, ListRule::top_gamma(20));

  CHECK_THROWS_AS(private_refine(assets.layers, {y, 0, pub.indices}, {}), AuthorizationError);
  CHECK_THROWS_AS(private_refine(assets.layers, {y, 4, pub.indices}, {}), AuthorizationError);
  CHECK(private_refine(assets.layers, {y, 1, pub.indices}, {}).size() == 1);

  const auto unlimited = private_refine(assets.layers, {y, 3, pub.indices}, RefinementThresholds::unlimited());
  REQUIRE(unlimited.size() == 3);
  for (const auto& level : unlimited) {
    CHECK(as_set(level.indices) == as_set(pub.indices));
    CHECK(std::is_sorted(level.scores.begin(), level.scores.end()));
  }
  // Distances are to the level-k reconstruction.
  const auto& l2 = unlimited[1];
  for (std::size_t i = 0; i < l2.size(); ++i) {
    CHECK(l2.scores[i] == doctest::Approx((y - assets.layers.reconstruct_item(l2.indices[i], 2)).squaredNorm()));
  }
  CHECK(final_decision(unlimited) == unlimited.back().indices.front());
  CHECK(!final_decision({}).has_value());
}

TEST_CASE("nesting holds on random instances") {
  for (std::uint64_t inst = 0; inst < 20; ++inst) {
    const auto assets = small_assets(100 + inst);
    const PublicSearcher searcher(assets.public_bundle);
    const Eigen::MatrixXd x = bench::gen_database(200, 24, 100 + inst);
    Rng rng(inst);
    const auto m = static_cast<Eigen::Index>(rng.below(200));
    const Eigen::VectorXd y = bench::gen_query(x.col(m), 3.0, rng);
    const auto b = client_query(y, assets.public_bundle.transform, 4, 5, assets.public_bundle.selection, rng);
    const auto pub = searcher.search(b, ListRule::top_gamma(30));

    RefinementThresholds budget;
    budget.budgets = {1.5, 1.2, 1.0};
    RefinementThresholds euclid = budget;
    euclid.metric = RefinementThresholds::Metric::kEuclidean;
    euclid.budgets = {0.4, 0.3, 0.25};
    RefinementThresholds top;
    top.mode = RefinementThresholds::Mode::kTopCount;
    top.top_counts = {10, 4, 1};
    for (const auto& th : {budget, euclid, top}) {
      const auto levels = private_refine(assets.layers, {y, 3, pub.indices}, th);
      auto outer = as_set(pub.indices);
      for (const auto& level : levels) {
        const auto inner = as_set(level.indices);
        CHECK(std::includes(outer.begin(), outer.end(), inner.begin(), inner.end()));
        outer = inner;
      }
    }
    CHECK(private_refine(assets.layers, {y, 3, pub.indices}, top).back().size() <= 1);
  }
}

TEST_CASE("budget thresholds scale with N") {
  const auto assets = small_assets(5);
  const Eigen::MatrixXd x = bench::gen_database(200, 24, 5);
  const Eigen::VectorXd y = x.col(0);
  std::vector<std::uint32_t> all(200);
  for (std::uint32_t i = 0; i < 200; ++i) all[i] = i;
  RefinementThresholds th;
  th.budgets = {0.8};
  const auto levels = private_refine(assets.layers, {y, 2, all}, th);
  for (double d : levels[0].scores) CHECK(d <= 0.8 * 24);
  for (std::uint32_t i = 0; i < 200; ++i) {
    const double d = (y - assets.layers.reconstruct_item(i, 1)).squaredNorm();
    CHECK(levels[0].contains(i) == (d <= 0.8 * 24));
  }
}

TEST_CASE("responses ignore layers above the authorization level") {
  const auto assets = small_assets(6);
  std::vector<Layer> corrupted = assets.layers.layers();
  Rng rng(1);
  for (auto& c : corrupted[2].codes) c = testing_util::random_code(c.size(), 4, rng);
  corrupted[2].gain = 17.0;
  const LayeredCodebooks bad(corrupted, assets.layers.residual_history());

  const Eigen::MatrixXd x = bench::gen_database(200, 24, 6);
  std::vector<std::uint32_t> list(200);
  for (std::uint32_t i = 0; i < 200; ++i) list[i] = i;
  for (std::size_t auth : {1u, 2u}) {
    const auto a = private_refine(assets.layers, {x.col(7), auth, list}, {});
    const auto b = private_refine(bad, {x.col(7), auth, list}, {});
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].indices == b[k].indices);
      CHECK(a[k].scores == b[k].scores);
    }
  }
}

TEST_CASE("SNR convention") {
  CHECK(bench::noise_variance(0.0) == 1.0);
  CHECK(bench::noise_variance(10.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(bench::noise_variance(bench::kNoNoise) == 0.0);
}

}  // TEST_SUITE
