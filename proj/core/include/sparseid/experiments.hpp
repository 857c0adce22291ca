#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sparseid/ambiguize.hpp"
#include "sparseid/layered.hpp"
#include "sparseid/rng.hpp"

namespace sparseid::bench {

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct ExperimentConfig {
  std::size_t items = 10000;
  std::size_t dimension = 128;
  std::size_t code_length = 0;  // 0 = square transform
  std::vector<double> sparsity_ratios{0.02, 0.05, 0.1, 0.2, 0.3, 0.5};
  std::vector<double> snr_db{0.0, 3.0, 10.0};  // kNoNoise for a noiseless run
  double owner_noise_fraction = 0.5;
  double query_noise_fraction = 0.25;
  std::size_t public_length = 0;
  std::size_t depth = 3;
  std::uint32_t gamma = 10;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::size_t max_iterations = 20;
  double convergence_tol = 1e-5;

  // Similarity curves.
  std::vector<double> sim_sparsity_ratios{0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 0.9};

  // Distortion-rate.
  std::size_t dr_items = 2000;
  std::vector<double> dr_sparsity_ratios{0.01, 0.02, 0.05, 0.1, 0.2};
  std::vector<double> dr_noise_fractions{0.0, 0.25, 0.5};

  // Leakage ordering.
  std::size_t leakage_batches = 20;
  std::size_t leakage_items = 1000;
  double leakage_sparsity_ratio = 0.125;

  std::size_t length() const { return code_length == 0 ? dimension : code_length; }
};

/// Throws std::invalid_argument on unknown keys or invalid values.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);

/// N x M matrix of i.i.d. N(0, 1) entries, column m drawn from stream (seed, m).
Eigen::MatrixXd gen_database(std::size_t items, std::size_t dimension, std::uint64_t seed);

/// sigma_z^2 = 10^(-SNR/10); 0 for kNoNoise.
double noise_variance(double snr_db);

/// x + z with z ~ N(0, sigma_z^2 I).
Eigen::VectorXd gen_query(const Eigen::Ref<const Eigen::VectorXd>& x, double snr_db, Rng& rng);

/// Shannon distortion-rate function of an i.i.d. Gaussian source, sigma^2 2^(-2R).
double shannon_dr(double rate, double variance);

/// Wilson 95% score interval for hits / trials.
struct Interval {
  double low = 0.0;
  double high = 1.0;
};
Interval wilson_interval(std::size_t hits, std::size_t trials);

/// Sparsity for a ratio: round(ratio * L) clamped to [1, L].
std::size_t sparsity_for_ratio(double ratio, std::size_t length);

struct PidRow {
  std::string stage;  // "public", "public_top1" or "private"
  std::size_t level = 0;
  double snr_db = 0.0;
  double sparsity_ratio = 0.0;
  std::size_t sparsity = 0;
  double rate = 0.0;
  std::size_t hits = 0;
  std::size_t trials = 0;
  double pid = 0.0;
  Interval ci;
};

struct SimRow {
  std::string series;  // "clean" or "ambiguized"
  double snr_db = 0.0;
  double sparsity_ratio = 0.0;
  std::size_t sparsity = 0;
  double rate = 0.0;
  double mean_sim = 0.0;
  double mean_dis = 0.0;
  double mean_nu = 0.0;
  double min_nu = 0.0;
  double max_nu = 0.0;
  std::size_t trials = 0;
};

struct DrRow {
  std::string series;  // "private" or "public"
  std::size_t level = 0;
  double noise_fraction = 0.0;
  double sparsity_ratio = 0.0;
  std::size_t sparsity = 0;
  double rate = 0.0;  // cumulative clean-code rate
  double public_rate = 0.0;
  double distortion = 0.0;        // on held-out data from the same source
  double train_distortion = 0.0;  // on the data the layers were learned from
  double shannon = 0.0;
};

struct LeakageRow {
  std::size_t batch = 0;
  double public_mse = 0.0;
  double level1_mse = 0.0;
  double deepest_mse = 0.0;
  bool ordered = false;
};

/// Monte-Carlo identification: public membership in the top-gamma list,
/// public top-1, and private top-1 at every level. Trial t uses the same
/// item, noise direction and query ambiguization at every SNR.
std::vector<PidRow> run_pid_experiment(const ExperimentConfig& cfg);

/// Mean normalized similarity of matched (item, noisy query) pairs.
std::vector<SimRow> run_similarity_curves(const ExperimentConfig& cfg);

/// Layered-codec and public-codebook distortion against the Shannon bound.
std::vector<DrRow> run_dr_experiment(const ExperimentConfig& cfg);

/// Reconstruction MSE ordering public >= level 1 >= level K per batch.
std::vector<LeakageRow> run_leakage_ordering(const ExperimentConfig& cfg);

/// Best-gain reconstruction an observer of the public bundle can form:
/// codes embedded back into L coordinates, alpha fitted against `data`.
Eigen::MatrixXd public_reconstruction(const PublicBundle& bundle,
                                      const Eigen::Ref<const Eigen::MatrixXd>& data);

/// Per-dimension MSE ||X - Y||_F^2 / (N M).
double mean_squared_error(const Eigen::Ref<const Eigen::MatrixXd>& x,
                          const Eigen::Ref<const Eigen::MatrixXd>& y);

void write_csv(std::ostream& out, const std::vector<PidRow>& rows);
void write_csv(std::ostream& out, const std::vector<SimRow>& rows);
void write_csv(std::ostream& out, const std::vector<DrRow>& rows);
void write_csv(std::ostream& out, const std::vector<LeakageRow>& rows);

/// Shortest round-trip decimal; "inf" for infinities.
std::string format_double(double v);

// Trend checks used by `sparseid bench --assert` and the acceptance suite.
// Each returns one message per violation; empty means the trend holds.
std::vector<std::string> check_pid_snr_monotone(const std::vector<PidRow>& rows);
std::vector<std::string> check_private_beats_public(const std::vector<PidRow>& rows);
std::vector<std::string> check_similarity(const std::vector<SimRow>& rows);
std::vector<std::string> check_shannon_bound(const std::vector<DrRow>& rows);
std::vector<std::string> check_low_rate_gap(const std::vector<DrRow>& rows, double max_rate, double factor);
std::vector<std::string> check_leakage(const std::vector<LeakageRow>& rows);

/// Matplotlib script that plots the CSV written next to it.
std::string plot_script(const std::string& experiment, const std::string& csv_name);

}  // namespace sparseid::bench
