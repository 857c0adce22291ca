#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "sparseid/errors.hpp"
#include "sparseid/rng.hpp"
#include "sparseid/transform.hpp"

namespace sparseid {

namespace {

// Column-wise hard threshold of F; returns the discarded energy ||F - A||_F^2.
double sparse_code_step(const Eigen::MatrixXd& projected, std::size_t sparsity,
                        Eigen::MatrixXd& codes) {
  codes.resize(projected.rows(), projected.cols());
  for (Eigen::Index m = 0; m < projected.cols(); ++m) {
    codes.col(m) = hard_threshold(projected.col(m), sparsity);
  }
  return (projected - codes).squaredNorm();
}

// argmin over orthonormal-rows W of ||W X - A||_F: W = U V^T from SVD(A X^T).
Eigen::MatrixXd procrustes_update(const Eigen::MatrixXd& codes,
                                  const Eigen::Ref<const Eigen::MatrixXd>& data) {
  const Eigen::MatrixXd cross = codes * data.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericError("SVD failed in transform update");
  return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace

Eigen::MatrixXd random_orthonormal(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  if (rows == 0 || cols == 0 || rows > cols) {
    throw std::invalid_argument("random_orthonormal: need 1 <= rows <= cols");
  }
  Rng rng(seed);
  const auto n = static_cast<Eigen::Index>(cols);
  const auto l = static_cast<Eigen::Index>(rows);
  Eigen::MatrixXd gaussian(n, l);
  for (Eigen::Index j = 0; j < l; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) gaussian(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, l);
  // Fix the sign ambiguity of QR so the result depends only on the seed.
  const Eigen::MatrixXd r = qr.matrixQR().topRows(l).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < l; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q.transpose();
}

double sparse_coding_objective(const Eigen::Ref<const Eigen::MatrixXd>& data,
                               const Eigen::MatrixXd& w, std::size_t sparsity) {
  Eigen::MatrixXd codes;
  return sparse_code_step(w * data, sparsity, codes);
}

LearnedTransform learn_transform(const Eigen::Ref<const Eigen::MatrixXd>& data,
                                 const LearningConfig& cfg) {
  if (data.cols() < 1 || data.rows() < 1) throw std::invalid_argument("learn_transform: empty data");
  if (cfg.max_iterations < 1) throw std::invalid_argument("learn_transform: max_iterations must be >= 1");
  if (!(cfg.convergence_tol > 0.0)) throw std::invalid_argument("learn_transform: convergence_tol must be > 0");
  if (!data.allFinite()) throw std::invalid_argument("learn_transform: non-finite data");
  const std::size_t rows = cfg.rows == 0 ? static_cast<std::size_t>(data.rows()) : cfg.rows;
  if (cfg.sparsity > rows) throw std::invalid_argument("learn_transform: sparsity exceeds L");

  Eigen::MatrixXd w = random_orthonormal(rows, static_cast<std::size_t>(data.rows()), cfg.seed);
  Eigen::MatrixXd codes;
  double objective = sparse_code_step(w * data, cfg.sparsity, codes);
  std::vector<double> history{objective};

  Eigen::MatrixXd next_codes;
  for (std::size_t it = 0; it < cfg.max_iterations && objective > 0.0; ++it) {
    Eigen::MatrixXd next_w = procrustes_update(codes, data);
    const double next_objective = sparse_code_step(next_w * data, cfg.sparsity, next_codes);
    if (!std::isfinite(next_objective)) throw NumericError("learn_transform: non-finite objective");
    // Both half-steps are exact minimisers, so an increase can only be
    // floating-point noise at a fixed point.
    if (next_objective > objective) break;
    const double relative_change = (objective - next_objective) / objective;
    w = std::move(next_w);
    codes.swap(next_codes);
    objective = next_objective;
    history.push_back(objective);
    if (relative_change < cfg.convergence_tol) break;
  }

  return LearnedTransform{Transform::orthonormal(std::move(w)), std::move(codes), std::move(history)};
}

}  // namespace sparseid
