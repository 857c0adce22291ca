#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "helpers.hpp"
#include "oracles.hpp"
#include "sparseid/rng.hpp"
#include "sparseid/ternary.hpp"
#include "sparseid/transform.hpp"

using namespace sparseid;
using testing_util::code;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_SUITE("stc_core") {

TEST_CASE("hard_threshold keeps the S largest magnitudes") {
  CHECK(hard_threshold(vec({3, -1, 0.5, -2}), 2) == vec({3, 0, 0, -2}));
  CHECK(hard_threshold(vec({3, -1, 0.5, -2}), 0) == Eigen::VectorXd::Zero(4));
  CHECK(hard_threshold(vec({1, -4}), 2) == vec({1, -4}));
}

TEST_CASE("hard_threshold ties go to the lowest index") {
  CHECK(hard_threshold(vec({1, -1, 1, -1}), 2) == vec({1, -1, 0, 0}));
  CHECK(hard_threshold(vec({0.5, 2, -2, 2}), 1) == vec({0, 2, 0, 0}));
}

TEST_CASE("hard_threshold rejects bad input") {
  CHECK_THROWS_AS(hard_threshold(vec({1, 2}), 3), std::invalid_argument);
  CHECK_THROWS_AS(hard_threshold(vec({1, std::numeric_limits<double>::quiet_NaN()}), 1), std::invalid_argument);
  CHECK_THROWS_AS(hard_threshold(vec({std::numeric_limits<double>::infinity(), 0}), 1), std::invalid_argument);
}

TEST_CASE("ternarize examples") {
  CHECK(ternarize(vec({3, -1, 0.5, -2}), 2) == code({1, 0, 0, -1}));
  CHECK(ternarize(vec({0, 0, 0, 0}), 3) == code({0, 0, 0, 0}));
  CHECK(ternarize(vec({-0.1}), 1) == code({-1}));
}

TEST_CASE("ternarize matches the sort oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t length = 1 + rng.below(64);
    const std::size_t s = rng.below(length + 1);
    Eigen::VectorXd f = testing_util::gaussian_vector(length, rng);
    // Force ties and exact zeros on some trials.
    if (trial % 3 == 0) f = f.array().round();
    REQUIRE(ternarize(f, s).entries().size() == length);
    const auto got = ternarize(f, s);
    const auto want = oracle::ternarize(f, s);
    CHECK(std::equal(want.begin(), want.end(), got.entries().begin()));
  }
}

TEST_CASE("ternarize properties") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t length = 2 + rng.below(40);
    const std::size_t s = 1 + rng.below(length);
    const Eigen::VectorXd f = testing_util::gaussian_vector(length, rng);
    const TernaryCode u = ternarize(f, s);
    CHECK(u.support_size() == s);
    // Idempotent on its own output, invariant to positive scaling,
    // antisymmetric under negation.
    CHECK(ternarize(u.to_real(), s) == u);
    CHECK(ternarize(3.5 * f, s) == u);
    CHECK(ternarize(-f, s) == u.negated());
  }
}

TEST_CASE("TernaryCode validates entries") {
  CHECK_THROWS_AS(TernaryCode(std::vector<std::int8_t>{0, 2}), std::invalid_argument);
  const TernaryCode z(5);
  CHECK(z.size() == 5);
  CHECK(z.support_size() == 0);
  CHECK(code({1, 0, -1}).support_size() == 2);
}

TEST_CASE("code_rate examples") {
  CHECK(code_rate(4, 1) == doctest::Approx(0.75).epsilon(1e-15));
  for (std::size_t l : {1u, 7u, 64u, 300u}) {
    CHECK(code_rate(l, 0) == 0.0);
    CHECK(code_rate(l, l) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(code_rate(4, 5), std::invalid_argument);
  CHECK_THROWS_AS(code_rate(0, 0), std::invalid_argument);
}

TEST_CASE("code_rate matches the big-integer oracle") {
  double worst = 0.0;
  for (std::size_t l = 1; l <= 64; ++l) {
    for (std::size_t s = 0; s <= l; ++s) {
      const double want = oracle::code_rate(l, s);
      const double got = code_rate(l, s);
      const double err = want == 0.0 ? std::abs(got) : std::abs(got - want) / want;
      worst = std::max(worst, err);
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("encode with identity reduces to ternarize") {
  const Transform id = Transform::identity(4);
  CHECK(encode(vec({3, -1, 0.5, -2}), id, 2) == code({1, 0, 0, -1}));
  CHECK(encode(Eigen::VectorXd::Zero(4), id, 2) == TernaryCode(4));
}

TEST_CASE("encode support equals S for random orthonormal transforms") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Transform w = Transform::orthonormal(random_orthonormal(24, 24, 100 + trial));
    const Eigen::VectorXd x = testing_util::gaussian_vector(24, rng);
    const std::size_t s = 1 + rng.below(24);
    const TernaryCode u = encode(x, w, s);
    CHECK(u.support_size() == s);
    const auto want = oracle::ternarize(w.matrix() * x, s);
    CHECK(std::equal(want.begin(), want.end(), u.entries().begin()));
  }
}

TEST_CASE("decode examples") {
  const Transform id = Transform::identity(3);
  CHECK(decode(code({1, 0, -1}), id, 1.0) == vec({1, 0, -1}));
  CHECK(decode(code({1, 1, -1}), id, 0.0) == Eigen::VectorXd::Zero(3));
  CHECK(decode(TernaryCode(3), id, 2.0) == Eigen::VectorXd::Zero(3));
}

TEST_CASE("least-squares decode never exceeds the signal energy") {
  Rng rng(11);
  const Transform w = Transform::orthonormal(random_orthonormal(32, 32, 5));
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd x = testing_util::gaussian_vector(32, rng);
    const TernaryCode u = encode(x, w, 1 + rng.below(32));
    const Eigen::VectorXd unscaled = decode(u, w, 1.0);
    const double alpha = fit_gain(x, unscaled);
    CHECK((x - decode(u, w, alpha)).squaredNorm() <= x.squaredNorm() + 1e-12);
  }
}

TEST_CASE("fit_gain examples") {
  CHECK(fit_gain(vec({2, 0}), vec({1, 0})) == doctest::Approx(2.0));
  CHECK(fit_gain(vec({2, 0}), vec({0, 0})) == 0.0);
  CHECK(fit_gain(vec({1, 1}), vec({1, -1})) == doctest::Approx(0.0));
}

TEST_CASE("transform pseudo-inverse policies") {
  const Transform q = Transform::from_matrix(random_orthonormal(8, 8, 1));
  CHECK(q.policy() == PinvPolicy::kTransposeIfOrthonormal);
  CHECK((q.pinv() - q.matrix().transpose()).norm() == 0.0);

  Eigen::MatrixXd g = testing_util::gaussian(6, 8, 2);
  const Transform t = Transform::from_matrix(g);
  CHECK(t.policy() == PinvPolicy::kSvdCutoff);
  // Moore-Penrose: W W+ W = W.
  CHECK((g * t.pinv() * g - g).norm() < 1e-9);
  CHECK_THROWS_AS(Transform::orthonormal(g), std::invalid_argument);

  // Rank-deficient input: singular directions below the cutoff are dropped.
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(3, 3);
  r(0, 0) = 2;
  const Transform rt = Transform::general(r);
  CHECK(rt.pinv()(0, 0) == doctest::Approx(0.5));
  CHECK(rt.pinv().cwiseAbs().sum() == doctest::Approx(0.5));
}

TEST_CASE("random_orthonormal is seeded and orthonormal") {
  const auto a = random_orthonormal(10, 16, 9);
  CHECK(has_orthonormal_rows(a));
  CHECK(a == random_orthonormal(10, 16, 9));
  CHECK(a != random_orthonormal(10, 16, 10));
}

TEST_CASE("learn_transform objective never increases") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Eigen::MatrixXd x = testing_util::gaussian(16, 256, seed);
    LearningConfig cfg;
    cfg.sparsity = 4;
    cfg.max_iterations = 25;
    cfg.seed = seed;
    const auto learned = learn_transform(x, cfg);
    REQUIRE(!learned.objective.empty());
    for (std::size_t i = 1; i < learned.objective.size(); ++i) {
      CHECK(learned.objective[i] <= learned.objective[i - 1]);
    }
    CHECK(has_orthonormal_rows(learned.transform.matrix()));
    CHECK(sparse_coding_objective(x, learned.transform.matrix(), 4) ==
          doctest::Approx(learned.objective.back()).epsilon(1e-9));
  }
}

TEST_CASE("learn_transform aligns a single column with an axis") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(6, 1);
  x(0, 0) = 1.0;
  LearningConfig cfg;
  cfg.sparsity = 1;
  cfg.seed = 4;
  CHECK(learn_transform(x, cfg).objective.back() < 1e-10);
}

TEST_CASE("learn_transform beats a random orthonormal baseline") {
  const Eigen::MatrixXd x = testing_util::gaussian(16, 512, 77);
  LearningConfig cfg;
  cfg.sparsity = 4;
  cfg.seed = 5;
  const double learned = learn_transform(x, cfg).objective.back();
  CHECK(learned <= sparse_coding_objective(x, random_orthonormal(16, 16, 999), 4));
}

TEST_CASE("learn_transform validates shapes") {
  const Eigen::MatrixXd x = testing_util::gaussian(4, 10, 1);
  LearningConfig cfg;
  cfg.rows = 5;
  CHECK_THROWS_AS(learn_transform(x, cfg), std::invalid_argument);
  cfg.rows = 0;
  cfg.sparsity = 5;
  CHECK_THROWS_AS(learn_transform(x, cfg), std::invalid_argument);
}

}  // TEST_SUITE
