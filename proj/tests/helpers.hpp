#pragma once
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "sparseid/rng.hpp"
#include "sparseid/ternary.hpp"

namespace testing_util {

inline Eigen::MatrixXd gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  sparseid::Rng rng(seed);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
  return m;
}

inline Eigen::VectorXd gaussian_vector(std::size_t n, sparseid::Rng& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return v;
}

// Uniformly random code of the given length and support size.
inline sparseid::TernaryCode random_code(std::size_t length, std::size_t support, sparseid::Rng& rng) {
  std::vector<std::uint32_t> pos(length);
  for (std::uint32_t i = 0; i < length; ++i) pos[i] = i;
  std::vector<std::int8_t> e(length, 0);
  for (std::size_t k = 0; k < support; ++k) {
    const auto j = k + rng.below(length - k);
    std::swap(pos[k], pos[j]);
    e[pos[k]] = static_cast<std::int8_t>(rng.sign());
  }
  return sparseid::TernaryCode(std::move(e));
}

inline sparseid::TernaryCode code(std::initializer_list<int> v) {
  std::vector<std::int8_t> e;
  for (int x : v) e.push_back(static_cast<std::int8_t>(x));
  return sparseid::TernaryCode(std::move(e));
}

}  // namespace testing_util
