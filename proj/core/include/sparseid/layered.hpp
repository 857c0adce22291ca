#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sparseid/ternary.hpp"
#include "sparseid/transform.hpp"

namespace sparseid {

enum class GainMode : std::uint8_t {
  kLeastSquares,  // one fitted scalar per layer
  kUnit,          // alpha = 1, plain W^+ u reconstruction
};

struct LayerSpec {
  std::size_t sparsity = 1;
  LearningConfig learning;
  /// Skip learning and use this transform for the layer.
  std::optional<Transform> fixed_transform;
};

struct Layer {
  Transform transform;
  Codebook codes;
  std::size_t sparsity = 0;
  double gain = 1.0;
};

/// K stacked ternary codebooks over successive residuals.
class LayeredCodebooks {
 public:
  LayeredCodebooks(std::vector<Layer> layers, std::vector<double> residual_history);

  std::size_t depth() const { return layers_.size(); }
  std::size_t code_length() const { return layers_.front().transform.rows(); }
  std::size_t dimension() const { return layers_.front().transform.cols(); }
  std::size_t items() const { return layers_.front().codes.size(); }

  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  const std::vector<Layer>& layers() const { return layers_; }
  /// ||R^[i]||_F for i = 1..K, as recorded during build_layers. Empty when
  /// the codebooks were loaded from disk.
  const std::vector<double>& residual_history() const { return residual_history_; }

  /// Sum over layers 1..level of gain_i * W_i^+ u_i(m).
  Eigen::VectorXd reconstruct_item(std::size_t item, std::size_t level) const;

  /// All items at the given level, N x M.
  Eigen::MatrixXd reconstruct_all(std::size_t level) const;

 private:
  std::vector<Layer> layers_;
  std::vector<double> residual_history_;
};

/// Successive refinement: layer 1 is trained on X, layer i+1 on the residual
/// left by layers 1..i. With GainMode::kLeastSquares the residual norms are
/// non-increasing.
LayeredCodebooks build_layers(const Eigen::Ref<const Eigen::MatrixXd>& data,
                              const std::vector<LayerSpec>& specs,
                              GainMode gain_mode = GainMode::kLeastSquares);

/// Runs the learned layers (transforms and gains fixed) on new data and
/// returns the residual Frobenius norm after each layer.
std::vector<double> residual_norms(const LayeredCodebooks& cb, const Eigen::Ref<const Eigen::MatrixXd>& data);

/// code_rate(L, S_i) for each layer.
std::vector<double> layer_rates(const LayeredCodebooks& cb);

/// K equal-sparsity specs with seeds base_seed + i (i = 1..K).
std::vector<LayerSpec> uniform_layer_specs(std::size_t depth, std::size_t sparsity,
                                           const LearningConfig& base);

}  // namespace sparseid
