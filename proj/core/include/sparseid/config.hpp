#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sparseid/ambiguize.hpp"
#include "sparseid/layered.hpp"
#include "sparseid/net.hpp"
#include "sparseid/pipeline.hpp"
#include "sparseid/search.hpp"

namespace sparseid {

/// Declarative configuration for `sparseid prepare | serve-* | query | identify`.
/// Unset seeds derive from the master `seed`, so one `--seed` override
/// reseeds the whole deployment.
struct PipelineConfig {
  std::uint64_t seed = 1;

  // Database: synthetic N(0, I) unless a CSV (one item per row) is given.
  std::size_t items = 10000;
  std::size_t dimension = 128;
  std::optional<std::filesystem::path> data_csv;
  std::optional<std::uint64_t> data_seed;

  std::size_t depth = 3;
  std::size_t sparsity = 16;                // S_x, also the default S_i
  std::vector<std::size_t> layer_sparsity;  // overrides per layer when non-empty
  GainMode gain_mode = GainMode::kLeastSquares;
  std::size_t max_iterations = 30;
  double convergence_tol = 1e-6;
  std::optional<std::uint64_t> learning_seed;

  double owner_noise_fraction = 0.5;        // S_ns = ceil(f * (L - S_x))
  std::optional<std::size_t> owner_noise_count;
  double query_noise_fraction = 0.25;       // S_nq = ceil(f * (L - S_x))
  std::optional<std::size_t> query_noise_count;
  std::size_t public_length = 0;            // L_p, 0 = L
  std::optional<std::uint64_t> permutation_seed;
  std::optional<std::uint64_t> ambiguization_seed;

  ListRule public_rule = ListRule::top_gamma(10);
  RefinementThresholds thresholds;
  std::set<std::size_t> allowed_levels;     // empty = all
  std::optional<std::filesystem::path> allow_list;

  std::size_t auth_level = 1;
  std::optional<std::uint64_t> client_seed;

  net::Endpoint public_endpoint{"127.0.0.1", 7401};
  net::Endpoint private_endpoint{"127.0.0.1", 7402};
  std::filesystem::path assets_dir = "assets";

  std::uint64_t effective_data_seed() const { return data_seed.value_or(seed); }
  std::uint64_t effective_learning_seed() const { return learning_seed.value_or(seed + 100); }
  std::uint64_t effective_permutation_seed() const { return permutation_seed.value_or(seed + 200); }
  std::uint64_t effective_ambiguization_seed() const { return ambiguization_seed.value_or(seed + 300); }
  std::uint64_t effective_client_seed() const { return client_seed.value_or(seed + 400); }

  std::size_t code_length() const { return dimension; }
  std::size_t owner_noise() const;
  std::size_t query_noise() const;
  std::vector<LayerSpec> layer_specs() const;
  AmbiguizationConfig ambiguization() const;
  ClientConfig client() const;
  /// allowed_levels merged with the allow-list file, if any.
  std::set<std::size_t> resolved_allowed_levels() const;
};

/// Throws std::invalid_argument on unknown keys, bad types or invalid values.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig parse_pipeline_config(const std::string& json_text);

/// The configured database as an N x M matrix: the CSV (one item per row)
/// when given, otherwise N(0, I) samples from the data seed.
Eigen::MatrixXd load_database(const PipelineConfig& cfg);

/// One level per line; '#' starts a comment.
std::set<std::size_t> read_allow_list(const std::filesystem::path& path);

}  // namespace sparseid
