#include "sparseid/ternary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sparseid {

TernaryCode::TernaryCode(std::size_t length) : entries_(length, 0) {}

TernaryCode::TernaryCode(std::vector<std::int8_t> entries) : entries_(std::move(entries)) {
  for (auto e : entries_) {
    if (e < -1 || e > 1) {
      throw std::invalid_argument("ternary entry out of {-1,0,+1}: " + std::to_string(e));
    }
    if (e != 0) ++support_;
  }
}

TernaryCode TernaryCode::negated() const {
  std::vector<std::int8_t> out(entries_.size());
  std::transform(entries_.begin(), entries_.end(), out.begin(),
                 [](std::int8_t e) { return static_cast<std::int8_t>(-e); });
  return TernaryCode(std::move(out));
}

Eigen::VectorXd TernaryCode::to_real() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(entries_.size()));
  for (std::size_t i = 0; i < entries_.size(); ++i) v[static_cast<Eigen::Index>(i)] = entries_[i];
  return v;
}

namespace {

// Indices of the `sparsity` entries kept by the hard threshold, in
// (magnitude desc, index asc) order.
std::vector<Eigen::Index> kept_indices(const Eigen::Ref<const Eigen::VectorXd>& f,
                                       std::size_t sparsity) {
  const auto length = static_cast<std::size_t>(f.size());
  if (sparsity > length) {
    throw std::invalid_argument("sparsity " + std::to_string(sparsity) +
                                " exceeds code length " + std::to_string(length));
  }
  if (!f.allFinite()) throw std::invalid_argument("hard_threshold: non-finite input");

  std::vector<Eigen::Index> order(length);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto before = [&f](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(f[a]);
    const double mb = std::abs(f[b]);
    return ma != mb ? ma > mb : a < b;
  };
  if (sparsity < length) {
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(sparsity),
                     order.end(), before);
  }
  order.resize(sparsity);
  return order;
}

}  // namespace

Eigen::VectorXd hard_threshold(const Eigen::Ref<const Eigen::VectorXd>& f, std::size_t sparsity) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(f.size());
  for (auto i : kept_indices(f, sparsity)) out[i] = f[i];
  return out;
}

TernaryCode ternarize(const Eigen::Ref<const Eigen::VectorXd>& f, std::size_t sparsity) {
  std::vector<std::int8_t> entries(static_cast<std::size_t>(f.size()), 0);
  for (auto i : kept_indices(f, sparsity)) {
    const double v = f[i];
    entries[static_cast<std::size_t>(i)] = static_cast<std::int8_t>((v > 0.0) - (v < 0.0));
  }
  return TernaryCode(std::move(entries));
}

double code_rate(std::size_t length, std::size_t sparsity) {
  if (length == 0) throw std::invalid_argument("code_rate: zero length");
  if (sparsity > length) throw std::invalid_argument("code_rate: sparsity exceeds length");
  if (sparsity == 0) return 0.0;
  const double l = static_cast<double>(length);
  const double s = static_cast<double>(sparsity);
  const double log_binom = std::lgamma(l + 1.0) - std::lgamma(s + 1.0) - std::lgamma(l - s + 1.0);
  return (log_binom / std::numbers::ln2 + s) / l;
}

}  // namespace sparseid
