#include "sparseid/transform.hpp"

#include <Eigen/SVD>
#include <stdexcept>
#include <string>

#include "sparseid/errors.hpp"

namespace sparseid {

bool has_orthonormal_rows(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() == 0 || m.cols() == 0 || m.rows() > m.cols()) return false;
  const Eigen::MatrixXd gram = m * m.transpose();
  return (gram - Eigen::MatrixXd::Identity(m.rows(), m.rows())).cwiseAbs().maxCoeff() <= tol;
}

Transform Transform::orthonormal(Eigen::MatrixXd matrix) {
  if (!has_orthonormal_rows(matrix)) {
    throw std::invalid_argument("transform rows are not orthonormal within tolerance");
  }
  Eigen::MatrixXd pinv = matrix.transpose();
  return Transform(std::move(matrix), std::move(pinv), PinvPolicy::kTransposeIfOrthonormal);
}

Transform Transform::general(Eigen::MatrixXd matrix) {
  if (matrix.rows() == 0 || matrix.cols() == 0) {
    throw std::invalid_argument("transform must be at least 1x1");
  }
  if (!matrix.allFinite()) throw std::invalid_argument("transform has non-finite entries");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericError("SVD of transform failed");
  const auto& sigma = svd.singularValues();
  const double cutoff = kSvdRelativeCutoff * sigma.maxCoeff();
  Eigen::VectorXd inv_sigma = Eigen::VectorXd::Zero(sigma.size());
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma[i] > cutoff && sigma[i] > 0.0) {
      inv_sigma[i] = 1.0 / sigma[i];
      ++kept;
    }
  }
  if (kept == 0) throw NumericError("pseudo-inverse: all singular values below cutoff");
  Eigen::MatrixXd pinv = svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().transpose();
  return Transform(std::move(matrix), std::move(pinv), PinvPolicy::kSvdCutoff);
}

Transform Transform::from_matrix(Eigen::MatrixXd matrix) {
  if (has_orthonormal_rows(matrix)) return orthonormal(std::move(matrix));
  return general(std::move(matrix));
}

Transform Transform::identity(std::size_t n) {
  const auto dim = static_cast<Eigen::Index>(n);
  return orthonormal(Eigen::MatrixXd::Identity(dim, dim));
}

TernaryCode encode(const Eigen::Ref<const Eigen::VectorXd>& x, const Transform& w,
                   std::size_t sparsity) {
  if (static_cast<std::size_t>(x.size()) != w.cols()) {
    throw std::invalid_argument("encode: input has dimension " + std::to_string(x.size()) +
                                ", transform expects " + std::to_string(w.cols()));
  }
  const Eigen::VectorXd f = w.matrix() * x;
  return ternarize(f, sparsity);
}

Codebook encode_columns(const Eigen::Ref<const Eigen::MatrixXd>& data, const Transform& w,
                        std::size_t sparsity) {
  if (static_cast<std::size_t>(data.rows()) != w.cols()) {
    throw std::invalid_argument("encode_columns: dimension mismatch");
  }
  const Eigen::MatrixXd projected = w.matrix() * data;
  Codebook out;
  out.reserve(static_cast<std::size_t>(data.cols()));
  for (Eigen::Index m = 0; m < projected.cols(); ++m) {
    out.push_back(ternarize(projected.col(m), sparsity));
  }
  return out;
}

Eigen::VectorXd decode(const TernaryCode& code, const Transform& w, double gain) {
  if (code.size() != w.rows()) {
    throw std::invalid_argument("decode: code length " + std::to_string(code.size()) +
                                " does not match transform rows " + std::to_string(w.rows()));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(w.cols()));
  if (gain == 0.0) return out;
  const auto entries = code.entries();
  for (std::size_t l = 0; l < entries.size(); ++l) {
    if (entries[l] > 0) {
      out += w.pinv().col(static_cast<Eigen::Index>(l));
    } else if (entries[l] < 0) {
      out -= w.pinv().col(static_cast<Eigen::Index>(l));
    }
  }
  return gain * out;
}

Eigen::MatrixXd decode_columns(const Codebook& codes, const Transform& w) {
  Eigen::MatrixXd dense(static_cast<Eigen::Index>(w.rows()), static_cast<Eigen::Index>(codes.size()));
  for (std::size_t m = 0; m < codes.size(); ++m) {
    if (codes[m].size() != w.rows()) throw std::invalid_argument("decode_columns: code length mismatch");
    dense.col(static_cast<Eigen::Index>(m)) = codes[m].to_real();
  }
  return w.pinv() * dense;
}

double fit_gain(const Eigen::Ref<const Eigen::MatrixXd>& target,
                const Eigen::Ref<const Eigen::MatrixXd>& unscaled) {
  if (target.rows() != unscaled.rows() || target.cols() != unscaled.cols()) {
    throw std::invalid_argument("fit_gain: shape mismatch");
  }
  const double energy = unscaled.squaredNorm();
  if (energy == 0.0) return 0.0;
  return target.cwiseProduct(unscaled).sum() / energy;
}

}  // namespace sparseid
