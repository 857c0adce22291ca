// sparseid: owner preparation, public/private servers, client queries and
// the synthetic experiment harness.
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparseid/config.hpp"
#include "sparseid/errors.hpp"
#include "sparseid/experiments.hpp"
#include "sparseid/formats.hpp"
#include "sparseid/net.hpp"
#include "sparseid/pipeline.hpp"
#include "sparseid/protocol.hpp"

namespace fs = std::filesystem;
using namespace sparseid;

namespace {

struct QueryOptions {
  std::optional<std::size_t> item;
  std::optional<fs::path> vector_file;
  double snr_db = bench::kNoNoise;
  bool local = false;
};

fs::path private_dir(const PipelineConfig& cfg) { return cfg.assets_dir / "private"; }
fs::path public_dir(const PipelineConfig& cfg) { return cfg.assets_dir / "public"; }

PipelineConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed) {
  PipelineConfig cfg = load_pipeline_config(path);
  if (seed) cfg.seed = *seed;
  return cfg;
}

int run_prepare(const PipelineConfig& cfg) {
  const Eigen::MatrixXd data = load_database(cfg);
  const OwnerAssets assets = owner_prepare(data, cfg.layer_specs(), cfg.ambiguization(), cfg.gain_mode);
  fs::create_directories(private_dir(cfg));
  fs::create_directories(public_dir(cfg));
  save_layers(private_dir(cfg), assets.layers);
  save_public(public_dir(cfg), assets.public_bundle);

  const auto rates = layer_rates(assets.layers);
  std::cout << "prepared " << assets.layers.items() << " items, N=" << assets.layers.dimension()
            << ", L=" << assets.layers.code_length() << ", K=" << assets.layers.depth() << '\n';
  for (std::size_t k = 0; k < assets.layers.depth(); ++k) {
    std::cout << "  layer " << k + 1 << ": S=" << assets.layers.layer(k).sparsity
              << " gain=" << bench::format_double(assets.layers.layer(k).gain)
              << " rate=" << bench::format_double(rates[k])
              << " residual=" << bench::format_double(assets.layers.residual_history()[k]) << '\n';
  }
  std::cout << "  public: L_p=" << assets.public_bundle.public_length()
            << " S_ns=" << cfg.owner_noise() << '\n'
            << "assets written to " << cfg.assets_dir.string() << '\n';
  return 0;
}

// Runs `server` until SIGINT or SIGTERM.
int serve(net::TcpServer& server, const std::string& what) {
  server.start();
  std::cout << what << " listening on port " << server.port() << std::endl;
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  std::cout << what << " stopped" << std::endl;
  return 0;
}

void block_termination_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

int run_serve_public(const PipelineConfig& cfg) {
  block_termination_signals();
  wire::PublicService service(PublicSearcher(load_public(public_dir(cfg))), cfg.public_rule.sim_min,
                              cfg.public_rule.dis_max);
  net::TcpServer server(service, cfg.public_endpoint);
  return serve(server, "public server");
}

int run_serve_private(const PipelineConfig& cfg) {
  block_termination_signals();
  wire::PrivateService service(load_layers(private_dir(cfg)), cfg.thresholds, cfg.resolved_allowed_levels());
  net::TcpServer server(service, cfg.private_endpoint);
  return serve(server, "private server");
}

Eigen::VectorXd read_vector(const fs::path& path, std::size_t dimension) {
  PipelineConfig one;
  one.dimension = dimension;
  one.data_csv = path;
  const Eigen::MatrixXd m = load_database(one);
  if (m.cols() != 1) throw std::invalid_argument(path.string() + ": expected exactly one vector");
  return m.col(0);
}

Eigen::VectorXd query_vector(const PipelineConfig& cfg, const QueryOptions& opt, Rng& rng) {
  Eigen::VectorXd y;
  if (opt.vector_file) {
    y = read_vector(*opt.vector_file, cfg.dimension);
  } else {
    const Eigen::MatrixXd data = load_database(cfg);
    const std::size_t item = opt.item.value_or(0);
    if (item >= static_cast<std::size_t>(data.cols())) {
      throw std::invalid_argument("--item " + std::to_string(item) + " out of range");
    }
    y = data.col(static_cast<Eigen::Index>(item));
  }
  return bench::gen_query(y, opt.snr_db, rng);
}

void print_public(const wire::PublicResponse& list) {
  std::cout << "public list (" << list.entries.size() << "):";
  for (const auto& [index, nu] : list.entries) std::cout << ' ' << index << ':' << bench::format_double(nu);
  std::cout << '\n';
}

void print_private(const wire::PrivateResponse& lists) {
  for (std::size_t k = 0; k < lists.levels.size(); ++k) {
    std::cout << "level " << k + 1 << " (" << lists.levels[k].size() << "):";
    for (const auto& [index, dist] : lists.levels[k]) std::cout << ' ' << index << ':' << bench::format_double(dist);
    std::cout << '\n';
  }
  if (!lists.levels.empty() && !lists.levels.back().empty()) {
    std::cout << "decision: " << lists.levels.back().front().first << '\n';
  } else {
    std::cout << "decision: none\n";
  }
}

int run_query(const PipelineConfig& cfg, const QueryOptions& opt) {
  Rng rng(cfg.effective_client_seed());
  const Eigen::VectorXd y = query_vector(cfg, opt, rng);
  const PublicBundle bundle = load_public(public_dir(cfg));
  const ClientConfig client = cfg.client();
  const TernaryCode b = client_query(y, bundle.transform, client.sparsity, client.noise_count, bundle.selection, rng);
  if (opt.local) {
    print_public(wire::to_response(PublicSearcher(bundle).search(b, client.rule)));
  } else {
    print_public(remote_public_search(cfg.public_endpoint, b, client.rule));
  }
  return 0;
}

int run_identify(const PipelineConfig& cfg, const QueryOptions& opt) {
  Rng rng(cfg.effective_client_seed());
  const Eigen::VectorXd y = query_vector(cfg, opt, rng);
  const PublicBundle bundle = load_public(public_dir(cfg));
  IdentifyResult result;
  if (opt.local) {
    const LayeredCodebooks layers = load_layers(private_dir(cfg));
    result = local_identify(cfg.client(), PublicSearcher(bundle), layers, cfg.thresholds, y, rng);
  } else {
    result = remote_identify(cfg.client(), bundle.transform, bundle.selection, cfg.public_endpoint,
                             cfg.private_endpoint, y, rng);
  }
  print_public(result.public_list);
  print_private(result.private_lists);
  return 0;
}

template <typename Row>
void write_outputs(const fs::path& out, const std::string& name, const std::vector<Row>& rows) {
  fs::create_directories(out);
  const std::string csv = name + ".csv";
  std::ofstream(out / csv, std::ios::binary) << [&] {
    std::ostringstream s;
    bench::write_csv(s, rows);
    return s.str();
  }();
  std::ofstream(out / ("plot_" + name + ".py"), std::ios::binary) << bench::plot_script(name, csv);
  std::cout << "wrote " << (out / csv).string() << " (" << rows.size() << " rows)\n";
}

int report(const std::vector<std::string>& failures, bool assert_trends) {
  for (const auto& f : failures) std::cerr << "trend check failed: " << f << '\n';
  if (failures.empty()) std::cout << "trend checks passed\n";
  return assert_trends && !failures.empty() ? 1 : 0;
}

template <typename A, typename B>
std::vector<std::string> concat(A a, const B& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

int run_bench(const std::string& experiment, const fs::path& config, std::optional<std::uint64_t> seed,
              const fs::path& out, bool assert_trends) {
  bench::ExperimentConfig cfg = bench::load_experiment_config(config);
  if (seed) cfg.seed = *seed;
  if (experiment == "pid") {
    const auto rows = bench::run_pid_experiment(cfg);
    write_outputs(out, "pid", rows);
    return report(concat(bench::check_pid_snr_monotone(rows), bench::check_private_beats_public(rows)),
                  assert_trends);
  }
  if (experiment == "sim") {
    const auto rows = bench::run_similarity_curves(cfg);
    write_outputs(out, "sim", rows);
    return report(bench::check_similarity(rows), assert_trends);
  }
  if (experiment == "dr") {
    const auto rows = bench::run_dr_experiment(cfg);
    write_outputs(out, "dr", rows);
    return report(concat(bench::check_shannon_bound(rows), bench::check_low_rate_gap(rows, 0.3, 4.0)),
                  assert_trends);
  }
  const auto rows = bench::run_leakage_ordering(cfg);
  write_outputs(out, "leakage", rows);
  return report(bench::check_leakage(rows), assert_trends);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving identification with sparse ternary codes"};
  app.require_subcommand(1);

  fs::path config_path;
  std::optional<std::uint64_t> seed;
  QueryOptions query;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Declarative JSON config")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "Override the master seed");
  };
  auto add_query = [&](CLI::App* cmd) {
    auto* item = cmd->add_option("--item", query.item, "Database item used as the query (default 0)");
    cmd->add_option("--vector", query.vector_file, "CSV file holding one query vector")
        ->check(CLI::ExistingFile)
        ->excludes(item);
    cmd->add_option("--snr", query.snr_db, "Add Gaussian noise at this SNR in dB (default: none)");
    cmd->add_flag("--local", query.local, "Run in process from the asset files instead of over TCP");
  };

  auto* prepare = app.add_subcommand("prepare", "Learn layers, ambiguize, write asset files");
  add_common(prepare);
  auto* serve_public = app.add_subcommand("serve-public", "Serve public similarity search");
  add_common(serve_public);
  auto* serve_private = app.add_subcommand("serve-private", "Serve private refinement");
  add_common(serve_private);
  auto* query_cmd = app.add_subcommand("query", "Send a public query and print the candidate list");
  add_common(query_cmd);
  add_query(query_cmd);
  auto* identify = app.add_subcommand("identify", "Run the full public + private identification");
  add_common(identify);
  add_query(identify);

  auto* bench = app.add_subcommand("bench", "Synthetic experiments");
  std::string experiment;
  fs::path out_dir = "bench_out";
  bool assert_trends = false;
  bench->add_option("experiment", experiment, "pid | sim | dr | leakage")
      ->required()
      ->check(CLI::IsMember({"pid", "sim", "dr", "leakage"}));
  add_common(bench);
  bench->add_option("--out", out_dir, "Output directory for CSV and plot script");
  bench->add_flag("--assert", assert_trends, "Exit nonzero when a trend check fails");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench) return run_bench(experiment, config_path, seed, out_dir, assert_trends);
    const PipelineConfig cfg = load_config(config_path, seed);
    if (*prepare) return run_prepare(cfg);
    if (*serve_public) return run_serve_public(cfg);
    if (*serve_private) return run_serve_private(cfg);
    if (*query_cmd) return run_query(cfg, query);
    if (*identify) return run_identify(cfg, query);
  } catch (const std::exception& e) {
    std::cerr << "sparseid: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
