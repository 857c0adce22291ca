#include "sparseid/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sparseid/experiments.hpp"

namespace sparseid {

namespace {

using nlohmann::json;

// Rejects keys outside `allowed` so typos in config files surface early.
void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw std::invalid_argument(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(where + "." + key + ": " + e.what());
  }
}

template <typename T>
void read(const json& obj, const char* key, std::optional<T>& out, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  T value{};
  read(obj, key, value, where);
  out = value;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// SNR entries may be numbers, "inf" or null for the noiseless sentinel.
double snr_value(const json& v) {
  if (v.is_null()) return bench::kNoNoise;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "Infinity" || s == "none") return bench::kNoNoise;
    throw std::invalid_argument("snr_db: unrecognised value '" + s + "'");
  }
  return v.get<double>();
}

}  // namespace

std::size_t PipelineConfig::owner_noise() const {
  return owner_noise_count.value_or(noise_count_for(owner_noise_fraction, code_length(), sparsity));
}

std::size_t PipelineConfig::query_noise() const {
  return query_noise_count.value_or(noise_count_for(query_noise_fraction, code_length(), sparsity));
}

std::vector<LayerSpec> PipelineConfig::layer_specs() const {
  LearningConfig base;
  base.max_iterations = max_iterations;
  base.convergence_tol = convergence_tol;
  base.seed = effective_learning_seed();
  auto specs = uniform_layer_specs(depth, sparsity, base);
  for (std::size_t i = 0; i < layer_sparsity.size() && i < specs.size(); ++i) {
    specs[i].sparsity = layer_sparsity[i];
    specs[i].learning.sparsity = layer_sparsity[i];
  }
  return specs;
}

AmbiguizationConfig PipelineConfig::ambiguization() const {
  return AmbiguizationConfig{owner_noise(), public_length, effective_permutation_seed(),
                             effective_ambiguization_seed()};
}

ClientConfig PipelineConfig::client() const {
  const std::size_t first_sparsity = layer_sparsity.empty() ? sparsity : layer_sparsity.front();
  return ClientConfig{first_sparsity, query_noise(), public_rule, auth_level};
}

std::set<std::size_t> PipelineConfig::resolved_allowed_levels() const {
  auto levels = allowed_levels;
  if (allow_list) {
    auto extra = read_allow_list(*allow_list);
    levels.insert(extra.begin(), extra.end());
  }
  return levels;
}

std::set<std::size_t> read_allow_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open allow-list " + path.string());
  std::set<std::size_t> levels;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    long long level = 0;
    if (!(ss >> level)) continue;
    if (level < 1) throw std::invalid_argument("allow-list levels must be >= 1");
    levels.insert(static_cast<std::size_t>(level));
  }
  return levels;
}

Eigen::MatrixXd load_database(const PipelineConfig& cfg) {
  if (!cfg.data_csv) return bench::gen_database(cfg.items, cfg.dimension, cfg.effective_data_seed());
  std::ifstream in(*cfg.data_csv);
  if (!in) throw std::invalid_argument("cannot open data file " + cfg.data_csv->string());
  std::vector<double> values;
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t fields = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc{} || !std::isfinite(v)) {
        throw std::invalid_argument(cfg.data_csv->string() + ":" + std::to_string(rows + 1) + ": bad number");
      }
      values.push_back(v);
      ++fields;
      p = res.ptr;
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p < end && *p == ',') ++p;
    }
    if (fields != cfg.dimension) {
      throw std::invalid_argument(cfg.data_csv->string() + ":" + std::to_string(rows + 1) + ": expected " +
                                  std::to_string(cfg.dimension) + " values, got " + std::to_string(fields));
    }
    ++rows;
  }
  if (rows == 0) throw std::invalid_argument("data file " + cfg.data_csv->string() + " is empty");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>>(
      values.data(), static_cast<Eigen::Index>(cfg.dimension), static_cast<Eigen::Index>(rows));
}

PipelineConfig parse_pipeline_config(const std::string& json_text) {
  const json root = parse_text(json_text);
  check_keys(root, {"seed", "data", "layers", "learning", "ambiguization", "public_search",
                    "private_refinement", "client", "endpoints", "assets_dir"},
             "config");
  PipelineConfig cfg;
  read(root, "seed", cfg.seed, "config");

  if (root.contains("data")) {
    const auto& d = root["data"];
    check_keys(d, {"items", "dimension", "seed", "csv"}, "data");
    read(d, "items", cfg.items, "data");
    read(d, "dimension", cfg.dimension, "data");
    read(d, "seed", cfg.data_seed, "data");
    std::optional<std::string> csv;
    read(d, "csv", csv, "data");
    if (csv) cfg.data_csv = *csv;
  }
  if (root.contains("layers")) {
    const auto& l = root["layers"];
    check_keys(l, {"depth", "sparsity", "sparsities", "gain"}, "layers");
    read(l, "depth", cfg.depth, "layers");
    read(l, "sparsity", cfg.sparsity, "layers");
    read(l, "sparsities", cfg.layer_sparsity, "layers");
    std::string gain = "least_squares";
    read(l, "gain", gain, "layers");
    if (gain == "least_squares") cfg.gain_mode = GainMode::kLeastSquares;
    else if (gain == "unit") cfg.gain_mode = GainMode::kUnit;
    else throw std::invalid_argument("layers.gain must be 'least_squares' or 'unit'");
  }
  if (root.contains("learning")) {
    const auto& l = root["learning"];
    check_keys(l, {"max_iterations", "convergence_tol", "seed"}, "learning");
    read(l, "max_iterations", cfg.max_iterations, "learning");
    read(l, "convergence_tol", cfg.convergence_tol, "learning");
    read(l, "seed", cfg.learning_seed, "learning");
  }
  if (root.contains("ambiguization")) {
    const auto& a = root["ambiguization"];
    check_keys(a, {"owner_noise_fraction", "owner_noise_count", "query_noise_fraction", "query_noise_count",
                   "public_length", "permutation_seed", "rng_seed"},
               "ambiguization");
    read(a, "owner_noise_fraction", cfg.owner_noise_fraction, "ambiguization");
    read(a, "owner_noise_count", cfg.owner_noise_count, "ambiguization");
    read(a, "query_noise_fraction", cfg.query_noise_fraction, "ambiguization");
    read(a, "query_noise_count", cfg.query_noise_count, "ambiguization");
    read(a, "public_length", cfg.public_length, "ambiguization");
    read(a, "permutation_seed", cfg.permutation_seed, "ambiguization");
    read(a, "rng_seed", cfg.ambiguization_seed, "ambiguization");
  }
  if (root.contains("public_search")) {
    const auto& p = root["public_search"];
    check_keys(p, {"rule", "gamma", "sim_min", "dis_max"}, "public_search");
    std::string rule = "top_gamma";
    std::uint32_t gamma = 10, sim_min = 0, dis_max = 0;
    read(p, "rule", rule, "public_search");
    read(p, "gamma", gamma, "public_search");
    read(p, "sim_min", sim_min, "public_search");
    read(p, "dis_max", dis_max, "public_search");
    if (rule == "top_gamma") cfg.public_rule = ListRule::top_gamma(gamma);
    else if (rule == "threshold") cfg.public_rule = ListRule::threshold(sim_min, dis_max);
    else throw std::invalid_argument("public_search.rule must be 'top_gamma' or 'threshold'");
    // Keep both knobs so the server can answer either rule.
    cfg.public_rule.gamma = gamma;
    cfg.public_rule.sim_min = sim_min;
    cfg.public_rule.dis_max = dis_max;
  }
  if (root.contains("private_refinement")) {
    const auto& p = root["private_refinement"];
    check_keys(p, {"mode", "metric", "budgets", "top_counts", "allowed_levels", "allow_list"},
               "private_refinement");
    std::string mode = "budget", metric = "squared";
    read(p, "mode", mode, "private_refinement");
    read(p, "metric", metric, "private_refinement");
    if (mode == "budget") cfg.thresholds.mode = RefinementThresholds::Mode::kBudget;
    else if (mode == "top_count") cfg.thresholds.mode = RefinementThresholds::Mode::kTopCount;
    else throw std::invalid_argument("private_refinement.mode must be 'budget' or 'top_count'");
    if (metric == "squared") cfg.thresholds.metric = RefinementThresholds::Metric::kSquared;
    else if (metric == "euclidean") cfg.thresholds.metric = RefinementThresholds::Metric::kEuclidean;
    else throw std::invalid_argument("private_refinement.metric must be 'squared' or 'euclidean'");
    if (p.contains("budgets")) {
      for (const auto& b : p["budgets"]) {
        const double v = b.is_null() ? std::numeric_limits<double>::infinity() : b.get<double>();
        if (!(v > 0.0)) throw std::invalid_argument("private_refinement.budgets must be positive");
        cfg.thresholds.budgets.push_back(v);
      }
    }
    read(p, "top_counts", cfg.thresholds.top_counts, "private_refinement");
    std::vector<std::size_t> allowed;
    read(p, "allowed_levels", allowed, "private_refinement");
    cfg.allowed_levels.insert(allowed.begin(), allowed.end());
    std::optional<std::string> allow_list;
    read(p, "allow_list", allow_list, "private_refinement");
    if (allow_list) cfg.allow_list = *allow_list;
  }
  if (root.contains("client")) {
    const auto& c = root["client"];
    check_keys(c, {"auth_level", "seed"}, "client");
    read(c, "auth_level", cfg.auth_level, "client");
    read(c, "seed", cfg.client_seed, "client");
  }
  if (root.contains("endpoints")) {
    const auto& e = root["endpoints"];
    check_keys(e, {"public", "private"}, "endpoints");
    std::string pub, priv;
    read(e, "public", pub, "endpoints");
    read(e, "private", priv, "endpoints");
    if (!pub.empty()) cfg.public_endpoint = net::Endpoint::parse(pub);
    if (!priv.empty()) cfg.private_endpoint = net::Endpoint::parse(priv);
  }
  if (root.contains("assets_dir")) cfg.assets_dir = root["assets_dir"].get<std::string>();

  if (cfg.items < 1 || cfg.dimension < 1) throw std::invalid_argument("data.items and data.dimension must be >= 1");
  if (cfg.depth < 1) throw std::invalid_argument("layers.depth must be >= 1");
  if (cfg.sparsity < 1 || cfg.sparsity > cfg.code_length()) {
    throw std::invalid_argument("layers.sparsity must lie in [1, L]");
  }
  if (cfg.public_length > cfg.code_length()) throw std::invalid_argument("public_length exceeds L");
  if (cfg.auth_level < 1 || cfg.auth_level > cfg.depth) throw std::invalid_argument("client.auth_level outside [1, depth]");
  if (cfg.max_iterations < 1 || !(cfg.convergence_tol > 0.0)) {
    throw std::invalid_argument("learning.max_iterations >= 1 and convergence_tol > 0 required");
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  auto cfg = parse_pipeline_config(slurp(path));
  // Relative paths inside the config resolve against the config's directory.
  const auto base = path.parent_path();
  if (cfg.assets_dir.is_relative()) cfg.assets_dir = base / cfg.assets_dir;
  if (cfg.data_csv && cfg.data_csv->is_relative()) cfg.data_csv = base / *cfg.data_csv;
  if (cfg.allow_list && cfg.allow_list->is_relative()) cfg.allow_list = base / *cfg.allow_list;
  return cfg;
}

}  // namespace sparseid

namespace sparseid::bench {

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  const json root = parse_text(json_text);
  check_keys(root, {"items", "dimension", "code_length", "sparsity_ratios", "snr_db", "owner_noise_fraction",
                    "query_noise_fraction", "public_length", "depth", "gamma", "trials", "seed",
                    "max_iterations", "convergence_tol", "sim_sparsity_ratios", "dr_items",
                    "dr_sparsity_ratios", "dr_noise_fractions", "leakage_batches", "leakage_items",
                    "leakage_sparsity_ratio"},
             "experiment");
  ExperimentConfig cfg;
  const std::string w = "experiment";
  read(root, "items", cfg.items, w);
  read(root, "dimension", cfg.dimension, w);
  read(root, "code_length", cfg.code_length, w);
  read(root, "sparsity_ratios", cfg.sparsity_ratios, w);
  if (root.contains("snr_db")) {
    cfg.snr_db.clear();
    for (const auto& v : root["snr_db"]) cfg.snr_db.push_back(snr_value(v));
  }
  read(root, "owner_noise_fraction", cfg.owner_noise_fraction, w);
  read(root, "query_noise_fraction", cfg.query_noise_fraction, w);
  read(root, "public_length", cfg.public_length, w);
  read(root, "depth", cfg.depth, w);
  read(root, "gamma", cfg.gamma, w);
  read(root, "trials", cfg.trials, w);
  read(root, "seed", cfg.seed, w);
  read(root, "max_iterations", cfg.max_iterations, w);
  read(root, "convergence_tol", cfg.convergence_tol, w);
  read(root, "sim_sparsity_ratios", cfg.sim_sparsity_ratios, w);
  read(root, "dr_items", cfg.dr_items, w);
  read(root, "dr_sparsity_ratios", cfg.dr_sparsity_ratios, w);
  read(root, "dr_noise_fractions", cfg.dr_noise_fractions, w);
  read(root, "leakage_batches", cfg.leakage_batches, w);
  read(root, "leakage_items", cfg.leakage_items, w);
  read(root, "leakage_sparsity_ratio", cfg.leakage_sparsity_ratio, w);

  if (cfg.items < 1 || cfg.dimension < 1 || cfg.trials < 1 || cfg.depth < 1 || cfg.gamma < 1) {
    throw std::invalid_argument("experiment: items, dimension, trials, depth and gamma must be positive");
  }
  if (cfg.code_length > cfg.dimension) throw std::invalid_argument("experiment: code_length exceeds dimension");
  for (const auto* grid : {&cfg.sparsity_ratios, &cfg.sim_sparsity_ratios, &cfg.dr_sparsity_ratios}) {
    for (double r : *grid) {
      if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("experiment: sparsity ratios must lie in (0, 1]");
    }
  }
  for (double s : cfg.snr_db) {
    if (std::isnan(s)) throw std::invalid_argument("experiment: SNR must not be NaN");
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(slurp(path));
}

}  // namespace sparseid::bench
