// Acceptance suite: one PASS/FAIL line per criterion.
// Exit status is nonzero when any criterion fails.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "helpers.hpp"
#include "oracles.hpp"
#include "sparseid/config.hpp"
#include "sparseid/experiments.hpp"
#include "sparseid/formats.hpp"
#include "sparseid/net.hpp"
#include "sparseid/pipeline.hpp"
#include "sparseid/protocol.hpp"
#include "sparseid/search.hpp"

namespace fs = std::filesystem;
using namespace sparseid;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) { return bench::format_double(v); }

Outcome encoder_oracle() {
  const auto start = Clock::now();
  Rng rng(101);
  std::size_t mismatches = 0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t length = 1 + rng.below(64);
    const std::size_t s = rng.below(length + 1);
    Eigen::VectorXd f = testing_util::gaussian_vector(length, rng);
    if (t % 4 == 0) f = (2 * f).array().round();  // ties and zeros
    const auto got = ternarize(f, s);
    const auto want = oracle::ternarize(f, s);
    mismatches += !std::equal(want.begin(), want.end(), got.entries().begin());
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && secs < 5.0,
          "10000 cases, " + std::to_string(mismatches) + " mismatches, " + fmt(secs) + " s (limit 5 s)"};
}

Outcome rate_oracle() {
  double worst = 0.0;
  for (std::size_t l = 1; l <= 64; ++l) {
    for (std::size_t s = 0; s <= l; ++s) {
      const double want = oracle::code_rate(l, s);
      const double got = code_rate(l, s);
      worst = std::max(worst, want == 0.0 ? std::abs(got) : std::abs(got - want) / want);
    }
  }
  return {worst <= 1e-12, "max relative error " + fmt(worst) + " (limit 1e-12)"};
}

Outcome transform_learning() {
  const auto start = Clock::now();
  int beats = 0;
  int increases = 0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    const Eigen::MatrixXd x = testing_util::gaussian(16, 512, 5000 + run);
    LearningConfig cfg;
    cfg.sparsity = 4;
    cfg.seed = 7000 + run;
    const auto learned = learn_transform(x, cfg);
    for (std::size_t i = 1; i < learned.objective.size(); ++i) {
      increases += learned.objective[i] > learned.objective[i - 1];
    }
    const double baseline = sparse_coding_objective(x, random_orthonormal(16, 16, 9000 + run), 4);
    beats += learned.objective.back() <= baseline;
  }
  const double secs = seconds_since(start);
  return {increases == 0 && beats >= 95 && secs < 60.0,
          std::to_string(beats) + "/100 runs at or below the random baseline (need 95), " +
              std::to_string(increases) + " objective increases, " + fmt(secs) + " s (limit 60 s)"};
}

Outcome successive_refinement() {
  const auto start = Clock::now();
  const Eigen::MatrixXd x = bench::gen_database(2000, 128, 31);
  LearningConfig base;
  base.seed = 32;
  const auto cb = build_layers(x, uniform_layer_specs(3, 16, base));
  const auto& r = cb.residual_history();
  const bool strict = r[0] > r[1] && r[1] > r[2];
  double prev = std::numeric_limits<double>::infinity();
  bool mean_monotone = true;
  std::string mses;
  for (std::size_t k = 1; k <= 3; ++k) {
    const double mse = (x - cb.reconstruct_all(k)).colwise().squaredNorm().mean() / 128.0;
    mean_monotone = mean_monotone && mse <= prev;
    prev = mse;
    mses += (k > 1 ? ", " : "") + fmt(mse);
  }
  const double secs = seconds_since(start);
  return {strict && mean_monotone && secs < 120.0,
          "residuals " + fmt(r[0]) + " > " + fmt(r[1]) + " > " + fmt(r[2]) + "; per-item MSE by level " + mses +
              "; " + fmt(secs) + " s (limit 120 s)"};
}

Outcome distortion_rate() {
  const bench::ExperimentConfig cfg;
  const auto rows = bench::run_dr_experiment(cfg);
  const auto below = bench::check_shannon_bound(rows);
  const auto gap = bench::check_low_rate_gap(rows, 0.3, 4.0);
  double worst_ratio = 0.0;
  for (const auto& row : rows) {
    if (row.rate <= 0.3) worst_ratio = std::max(worst_ratio, row.distortion / row.shannon);
  }
  std::string detail = std::to_string(rows.size()) + " points, " + std::to_string(below.size()) +
                       " below the bound; worst D/bound at R <= 0.3 is " + fmt(worst_ratio) + " (limit 4)";
  if (!below.empty()) detail += "; " + below.front();
  if (!gap.empty()) detail += "; " + gap.front();
  return {below.empty() && gap.empty(), detail};
}

Outcome similarity_identities() {
  Rng rng(41);
  std::size_t violations = 0;
  for (int t = 0; t < 100000; ++t) {
    const std::size_t length = 1 + rng.below(64);
    const auto u = testing_util::random_code(length, rng.below(length + 1), rng);
    const auto b = testing_util::random_code(length, rng.below(length + 1), rng);
    const auto p = score(u, b);
    const auto n = score(u, b.negated());
    violations += !(p == score(b, u)) || n.sim != p.dis || n.dis != p.sim ||
                  p.sim + p.dis > std::min(u.support_size(), b.support_size());
  }
  Codebook codes;
  for (int m = 0; m < 1000; ++m) codes.push_back(testing_util::random_code(64, rng.below(65), rng));
  const InvertedIndex index(codes);
  std::size_t index_mismatches = 0;
  for (int q = 0; q < 200; ++q) {
    const auto query = testing_util::random_code(64, rng.below(65), rng);
    index_mismatches += !(index.query(query) == score_all(codes, query));
  }
  return {violations == 0 && index_mismatches == 0,
          "1e5 pairs, " + std::to_string(violations) + " identity violations; 200 index queries over M=1000, " +
              std::to_string(index_mismatches) + " mismatches"};
}

Outcome identification_trends() {
  const auto start = Clock::now();
  const bench::ExperimentConfig cfg;
  const auto rows = bench::run_pid_experiment(cfg);
  const double secs = seconds_since(start);
  const auto monotone = bench::check_pid_snr_monotone(rows);
  const auto ordered = bench::check_private_beats_public(rows);
  std::ostringstream detail;
  detail << "(a) " << monotone.size() << " SNR violations, (b) " << ordered.size()
         << " private-below-public violations, (c) " << fmt(secs) << " s (limit 600 s)";
  for (const auto& r : rows) {
    if (r.snr_db == 10.0 && (r.stage == "public" || (r.stage == "private" && r.level == 1))) {
      detail << "; " << r.stage << "@S/L=" << fmt(r.sparsity_ratio) << ",10dB=" << fmt(r.pid);
    }
  }
  if (!monotone.empty()) detail << "; " << monotone.front();
  if (!ordered.empty()) detail << "; " << ordered.front();
  return {monotone.empty() && ordered.empty() && secs <= 600.0, detail.str()};
}

Outcome refinement_nesting() {
  std::size_t nesting_violations = 0;
  std::size_t corruption_changes = 0;
  for (std::uint64_t inst = 0; inst < 100; ++inst) {
    Rng rng = Rng::derive(51, {inst});
    const std::size_t n = 16 + rng.below(17);
    const std::size_t s = 2 + rng.below(5);
    const std::size_t depth = 2 + rng.below(3);
    const Eigen::MatrixXd x = bench::gen_database(150, n, rng.next_u64());
    LearningConfig base;
    base.max_iterations = 4;
    base.seed = rng.next_u64();
    const auto assets =
        owner_prepare(x, uniform_layer_specs(depth, s, base), {noise_count_for(0.5, n, s), 0, rng.next_u64(), 3});
    const PublicSearcher searcher(assets.public_bundle);
    const Eigen::VectorXd y = bench::gen_query(x.col(static_cast<Eigen::Index>(rng.below(150))), 3.0, rng);
    const auto b = client_query(y, assets.public_bundle.transform, s, noise_count_for(0.25, n, s),
                                assets.public_bundle.selection, rng);
    const auto pub = searcher.search(b, ListRule::top_gamma(25));

    RefinementThresholds th;
    if (inst % 2 == 0) {
      for (std::size_t k = 0; k < depth; ++k) th.budgets.push_back(1.6 - 0.2 * static_cast<double>(k));
    } else {
      th.mode = RefinementThresholds::Mode::kTopCount;
      for (std::size_t k = 0; k < depth; ++k) th.top_counts.push_back(12 >> k);
    }
    const auto levels = private_refine(assets.layers, {y, depth, pub.indices}, th);
    std::set<std::uint32_t> outer(pub.indices.begin(), pub.indices.end());
    for (const auto& level : levels) {
      const std::set<std::uint32_t> inner(level.indices.begin(), level.indices.end());
      nesting_violations += !std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
      outer = inner;
    }

    // Corrupt every layer above a random authorization level.
    const std::size_t auth = 1 + rng.below(depth - 1);
    std::vector<Layer> corrupted = assets.layers.layers();
    for (std::size_t k = auth; k < depth; ++k) {
      for (auto& c : corrupted[k].codes) c = testing_util::random_code(c.size(), c.support_size(), rng);
      corrupted[k].gain *= -3.0;
    }
    const LayeredCodebooks bad(corrupted, assets.layers.residual_history());
    const auto clean = wire::to_response(private_refine(assets.layers, {y, auth, pub.indices}, th));
    const auto dirty = wire::to_response(private_refine(bad, {y, auth, pub.indices}, th));
    corruption_changes += wire::encode(clean) != wire::encode(dirty);
  }
  return {nesting_violations == 0 && corruption_changes == 0,
          "100 instances, " + std::to_string(nesting_violations) + " nesting violations, " +
              std::to_string(corruption_changes) + " responses changed by corrupting deeper layers"};
}

Outcome leakage_ordering() {
  const bench::ExperimentConfig cfg;
  const auto rows = bench::run_leakage_ordering(cfg);
  const auto failures = bench::check_leakage(rows);
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) min_gap = std::min(min_gap, r.public_mse - r.level1_mse);
  return {rows.size() == 20 && failures.empty(),
          std::to_string(rows.size()) + " batches, " + std::to_string(failures.size()) +
              " violations; smallest public - level1 MSE gap " + fmt(min_gap)};
}

Outcome protocol_differential() {
  const Eigen::MatrixXd x = bench::gen_database(2000, 64, 61);
  LearningConfig base;
  base.max_iterations = 10;
  const auto assets = owner_prepare(x, uniform_layer_specs(3, 8, base), {noise_count_for(0.5, 64, 8), 56, 62, 63});
  const PublicSearcher searcher(assets.public_bundle);
  RefinementThresholds th;
  th.budgets = {2.0, 1.5, 1.0};
  wire::PublicService pub_service(searcher);
  wire::PrivateService priv_service(assets.layers, th);
  net::TcpServer pub_server(pub_service, {"127.0.0.1", 0});
  net::TcpServer priv_server(priv_service, {"127.0.0.1", 0});
  pub_server.start();
  priv_server.start();
  const net::Endpoint pub{"127.0.0.1", pub_server.port()};
  const net::Endpoint priv{"127.0.0.1", priv_server.port()};
  const ClientConfig client{8, noise_count_for(0.25, 64, 8), ListRule::top_gamma(10), 3};

  auto one_query = [&](std::uint64_t q) {
    Rng draw = Rng::derive(64, {q});
    const Eigen::VectorXd y = bench::gen_query(x.col(static_cast<Eigen::Index>(draw.below(2000))), 10.0, draw);
    const std::uint64_t seed = draw.next_u64();
    Rng a(seed), b(seed);
    const auto local = local_identify(client, searcher, assets.layers, th, y, a);
    const auto remote = remote_identify(client, assets.public_bundle.transform, assets.public_bundle.selection, pub,
                                        priv, y, b);
    return wire::encode(local.public_list) == wire::encode(remote.public_list) &&
           wire::encode(local.private_lists) == wire::encode(remote.private_lists);
  };

  std::atomic<int> mismatches{0};
  std::atomic<int> errors{0};
  for (std::uint64_t q = 0; q < 20; ++q) mismatches += !one_query(q);
  std::vector<std::thread> threads;
  for (std::uint64_t c = 0; c < 8; ++c) {
    threads.emplace_back([&, c] {
      try {
        for (std::uint64_t q = 0; q < 10; ++q) mismatches += !one_query(100 + 10 * c + q);
      } catch (...) {
        ++errors;
      }
    });
  }
  for (auto& t : threads) t.join();

  // Oversized and malformed frames: each must produce an error frame.
  int rejected = 0;
  auto header = [](const char* magic, std::uint8_t version, std::uint8_t type, std::uint32_t len) {
    std::vector<std::uint8_t> h(magic, magic + 4);
    h.push_back(version);
    h.push_back(type);
    for (int i = 0; i < 4; ++i) h.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
    return h;
  };
  std::vector<std::pair<net::Endpoint, std::vector<std::uint8_t>>> bad{
      {pub, header("STID", 1, 0x01, wire::kMaxPayload + 1)},
      {priv, header("STID", 1, 0x03, 0xFFFFFFFFu)},
      {pub, header("BAD!", 1, 0x01, 0)},
      {pub, header("STID", 7, 0x01, 0)},
      {pub, [&] {
         auto f = header("STID", 1, 0x01, 4);
         f.insert(f.end(), {0xFF, 0xFF, 0xFF, 0xFF});
         return f;
       }()},
      {priv, [&] {
         auto f = header("STID", 1, 0x03, 2);
         f.insert(f.end(), {0x01, 0x02});
         return f;
       }()},
  };
  for (const auto& [ep, bytes] : bad) {
    net::Connection c(ep);
    c.send_bytes(bytes);
    const auto f = c.read_frame();
    rejected += f.has_value() && f->type == wire::MsgType::kError;
  }
  const bool alive = one_query(999);
  pub_server.stop();
  priv_server.stop();
  return {mismatches == 0 && errors == 0 && rejected == static_cast<int>(bad.size()) && alive,
          "100 queries (20 serial + 8x10 concurrent): " + std::to_string(mismatches.load()) + " mismatches, " +
              std::to_string(errors.load()) + " client errors; " + std::to_string(rejected) + "/" +
              std::to_string(bad.size()) + " bad frames rejected; server " + (alive ? "still serving" : "DOWN")};
}

std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (auto b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::map<std::string, std::uint64_t> hash_tree(const fs::path& dir) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = fnv1a(read_file(e.path()));
  }
  return out;
}

Outcome determinism(const std::string& cli) {
  const fs::path work = fs::temp_directory_path() / "sparseid_acceptance_determinism";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path cfg_path = work / "config.json";
  std::ofstream(cfg_path) << R"({
    "seed": 5,
    "data": {"items": 10000, "dimension": 128},
    "layers": {"depth": 3, "sparsity": 16},
    "ambiguization": {"owner_noise_fraction": 0.5, "query_noise_fraction": 0.25, "public_length": 112},
    "assets_dir": "assets"
  })";

  std::vector<std::map<std::string, std::uint64_t>> runs;
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(work / "assets");
    const std::string cmd = "\"" + cli + "\" prepare --config \"" + cfg_path.string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "sparseid prepare failed"};
    runs.push_back(hash_tree(work / "assets"));
  }
  fs::remove_all(work);
  std::ostringstream detail;
  detail << runs[0].size() << " asset files";
  if (auto it = runs[0].find("public/public.stcb"); it != runs[0].end()) {
    detail << ", public.stcb fnv1a=" << std::hex << it->second << std::dec;
  }
  const bool same = !runs[0].empty() && runs[0] == runs[1];
  return {same, detail.str() + (same ? ", identical across two runs" : ", DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  std::string only = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"encoder-oracle", encoder_oracle},
      {"rate-formula", rate_oracle},
      {"transform-learning", transform_learning},
      {"successive-refinement", successive_refinement},
      {"distortion-rate", distortion_rate},
      {"similarity-identities", similarity_identities},
      {"identification-trends", identification_trends},
      {"refinement-nesting", refinement_nesting},
      {"leakage-ordering", leakage_ordering},
      {"protocol-differential", protocol_differential},
      {"determinism", [] { return determinism(SPARSEID_CLI_PATH); }},
  };
  int failed = 0;
  int ran = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && only != name) continue;
    ++ran;
    Outcome outcome;
    const auto start = Clock::now();
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failed += !outcome.pass;
    std::cout << (outcome.pass ? "PASS " : "FAIL ") << name << " [" << fmt(seconds_since(start)) << " s] "
              << outcome.detail << std::endl;
  }
  if (ran == 0) {
    std::cerr << "unknown criterion: " << only << '\n';
    return 2;
  }
  std::cout << (ran - failed) << "/" << ran << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
