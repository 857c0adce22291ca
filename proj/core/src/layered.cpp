#include "sparseid/layered.hpp"

#include <stdexcept>
#include <string>

namespace sparseid {

LayeredCodebooks::LayeredCodebooks(std::vector<Layer> layers, std::vector<double> residual_history)
    : layers_(std::move(layers)), residual_history_(std::move(residual_history)) {
  if (layers_.empty()) throw std::invalid_argument("layered codebooks need at least one layer");
  const auto& first = layers_.front();
  for (const auto& layer : layers_) {
    if (layer.transform.rows() != first.transform.rows() ||
        layer.transform.cols() != first.transform.cols()) {
      throw std::invalid_argument("all layers must share L and N");
    }
    if (layer.codes.size() != first.codes.size()) {
      throw std::invalid_argument("all layers must hold the same number of items");
    }
    for (const auto& code : layer.codes) {
      if (code.size() != first.transform.rows()) {
        throw std::invalid_argument("code length does not match transform rows");
      }
    }
  }
}

Eigen::VectorXd LayeredCodebooks::reconstruct_item(std::size_t item, std::size_t level) const {
  if (level < 1 || level > depth()) {
    throw std::out_of_range("reconstruction level " + std::to_string(level) + " outside [1, " +
                            std::to_string(depth()) + "]");
  }
  if (item >= items()) throw std::out_of_range("item index " + std::to_string(item) + " out of range");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension()));
  for (std::size_t i = 0; i < level; ++i) {
    const auto& layer = layers_[i];
    out += decode(layer.codes[item], layer.transform, layer.gain);
  }
  return out;
}

Eigen::MatrixXd LayeredCodebooks::reconstruct_all(std::size_t level) const {
  if (level < 1 || level > depth()) throw std::out_of_range("reconstruction level out of range");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dimension()),
                                              static_cast<Eigen::Index>(items()));
  for (std::size_t i = 0; i < level; ++i) {
    out += layers_[i].gain * decode_columns(layers_[i].codes, layers_[i].transform);
  }
  return out;
}

LayeredCodebooks build_layers(const Eigen::Ref<const Eigen::MatrixXd>& data,
                              const std::vector<LayerSpec>& specs, GainMode gain_mode) {
  if (specs.empty()) throw std::invalid_argument("build_layers: no layer specs");
  if (!data.allFinite()) throw std::invalid_argument("build_layers: non-finite data");

  Eigen::MatrixXd residual = data;
  std::vector<Layer> layers;
  std::vector<double> history;
  layers.reserve(specs.size());
  for (const auto& spec : specs) {
    Transform transform = spec.fixed_transform
                              ? *spec.fixed_transform
                              : [&] {
                                  LearningConfig cfg = spec.learning;
                                  cfg.sparsity = spec.sparsity;
                                  return learn_transform(residual, cfg).transform;
                                }();
    Codebook codes = encode_columns(residual, transform, spec.sparsity);
    const Eigen::MatrixXd unscaled = decode_columns(codes, transform);
    const double gain = gain_mode == GainMode::kLeastSquares ? fit_gain(residual, unscaled) : 1.0;
    residual -= gain * unscaled;
    history.push_back(residual.norm());
    layers.push_back(Layer{std::move(transform), std::move(codes), spec.sparsity, gain});
  }
  return LayeredCodebooks(std::move(layers), std::move(history));
}

std::vector<double> residual_norms(const LayeredCodebooks& cb, const Eigen::Ref<const Eigen::MatrixXd>& data) {
  if (static_cast<std::size_t>(data.rows()) != cb.dimension()) {
    throw std::invalid_argument("residual_norms: data dimension does not match the layers");
  }
  Eigen::MatrixXd residual = data;
  std::vector<double> norms;
  norms.reserve(cb.depth());
  for (const auto& layer : cb.layers()) {
    const Codebook codes = encode_columns(residual, layer.transform, layer.sparsity);
    residual -= layer.gain * decode_columns(codes, layer.transform);
    norms.push_back(residual.norm());
  }
  return norms;
}

std::vector<double> layer_rates(const LayeredCodebooks& cb) {
  std::vector<double> rates;
  rates.reserve(cb.depth());
  for (const auto& layer : cb.layers()) rates.push_back(code_rate(cb.code_length(), layer.sparsity));
  return rates;
}

std::vector<LayerSpec> uniform_layer_specs(std::size_t depth, std::size_t sparsity,
                                           const LearningConfig& base) {
  std::vector<LayerSpec> specs(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    specs[i].sparsity = sparsity;
    specs[i].learning = base;
    specs[i].learning.sparsity = sparsity;
    specs[i].learning.seed = base.seed + i + 1;
  }
  return specs;
}

}  // namespace sparseid
