#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "sparseid/ternary.hpp"

namespace sparseid {

enum class PinvPolicy : std::uint8_t {
  kTransposeIfOrthonormal,  // W^+ = W^T, rows verified orthonormal at construction
  kSvdCutoff,               // SVD with singular values below 1e-10 * sigma_max dropped
};

/// An L x N linear map together with its pseudo-inverse.
class Transform {
 public:
  static constexpr double kOrthonormalTol = 1e-8;
  static constexpr double kSvdRelativeCutoff = 1e-10;

  /// Throws std::invalid_argument unless W W^T = I_L within kOrthonormalTol.
  static Transform orthonormal(Eigen::MatrixXd matrix);
  /// Pseudo-inverse by truncated SVD. Throws NumericError if no singular
  /// value survives the cutoff (e.g. the zero matrix).
  static Transform general(Eigen::MatrixXd matrix);
  /// Picks the orthonormal fast path when the rows qualify, SVD otherwise.
  static Transform from_matrix(Eigen::MatrixXd matrix);
  static Transform identity(std::size_t n);

  std::size_t rows() const { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(matrix_.cols()); }
  PinvPolicy policy() const { return policy_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Eigen::MatrixXd& pinv() const { return pinv_; }

 private:
  Transform(Eigen::MatrixXd matrix, Eigen::MatrixXd pinv, PinvPolicy policy)
      : matrix_(std::move(matrix)), pinv_(std::move(pinv)), policy_(policy) {}

  Eigen::MatrixXd matrix_;
  Eigen::MatrixXd pinv_;
  PinvPolicy policy_;
};

bool has_orthonormal_rows(const Eigen::MatrixXd& m, double tol = Transform::kOrthonormalTol);

/// ternarize(W x, sparsity). Throws std::invalid_argument on dimension mismatch.
TernaryCode encode(const Eigen::Ref<const Eigen::VectorXd>& x, const Transform& w,
                   std::size_t sparsity);

/// Encodes every column of `data` (N x M).
Codebook encode_columns(const Eigen::Ref<const Eigen::MatrixXd>& data, const Transform& w,
                        std::size_t sparsity);

/// gain * W^+ u.
Eigen::VectorXd decode(const TernaryCode& code, const Transform& w, double gain);

/// W^+ [u_1 ... u_M] without gain, N x M.
Eigen::MatrixXd decode_columns(const Codebook& codes, const Transform& w);

/// Least-squares scale <target, unscaled> / ||unscaled||^2, 0 when unscaled is zero.
/// Works on vectors and (element-wise) on matrices of equal shape.
double fit_gain(const Eigen::Ref<const Eigen::MatrixXd>& target,
                const Eigen::Ref<const Eigen::MatrixXd>& unscaled);

struct LearningConfig {
  std::size_t rows = 0;  // L; 0 means square (L = N)
  std::size_t sparsity = 1;
  std::size_t max_iterations = 30;
  double convergence_tol = 1e-6;
  std::uint64_t seed = 1;
};

struct LearnedTransform {
  Transform transform;
  Eigen::MatrixXd sparse_codes;   // L x M, column m = hard_threshold(W x_m, S)
  std::vector<double> objective;  // ||W X - A||_F^2 after each sparse-coding step
};

/// Random orthonormal-rows L x N matrix from the QR factor of a seeded
/// Gaussian matrix.
Eigen::MatrixXd random_orthonormal(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// Alternating minimisation of ||W X - A||_F^2 over S-sparse A and
/// orthonormal-rows W (sparse coding by hard thresholding, transform update
/// by orthogonal Procrustes). The recorded objective never increases.
LearnedTransform learn_transform(const Eigen::Ref<const Eigen::MatrixXd>& data,
                                 const LearningConfig& cfg);

/// ||W X - H_S(W X)||_F^2 for a fixed transform.
double sparse_coding_objective(const Eigen::Ref<const Eigen::MatrixXd>& data,
                               const Eigen::MatrixXd& w, std::size_t sparsity);

}  // namespace sparseid
