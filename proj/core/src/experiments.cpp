#include "sparseid/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "sparseid/pipeline.hpp"
#include "sparseid/search.hpp"

namespace sparseid::bench {

namespace {

// Stream tags keep the experiments' random streams disjoint.
enum StreamTag : std::uint64_t {
  kDatabase = 1,
  kPidTrial = 2,
  kSimTrial = 3,
  kAmbiguization = 4,
  kLeakage = 5,
};

LearningConfig learning_for(const ExperimentConfig& cfg, std::size_t sparsity, std::uint64_t seed) {
  LearningConfig lc;
  lc.rows = cfg.length();
  lc.sparsity = sparsity;
  lc.max_iterations = cfg.max_iterations;
  lc.convergence_tol = cfg.convergence_tol;
  lc.seed = seed;
  return lc;
}

AmbiguizationConfig ambiguization_for(const ExperimentConfig& cfg, double fraction, std::size_t sparsity,
                                      std::uint64_t key) {
  const std::size_t length = cfg.length();
  Rng seeds = Rng::derive(cfg.seed, {kAmbiguization, key});
  AmbiguizationConfig amb;
  amb.noise_count = noise_count_for(fraction, length, sparsity);
  amb.public_length = cfg.public_length;
  amb.permutation_seed = seeds.next_u64();
  amb.rng_seed = seeds.next_u64();
  return amb;
}

Eigen::VectorXd standard_normal(std::size_t n, Rng& rng) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return z;
}

Eigen::VectorXd noisy(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::VectorXd& direction,
                      double snr_db) {
  const double variance = noise_variance(snr_db);
  if (variance == 0.0) return x;
  return x + std::sqrt(variance) * direction;
}

std::string snr_text(double snr) { return format_double(snr); }

// W^+ applied to the public codes embedded back into length L.
Eigen::MatrixXd public_decode(const PublicBundle& bundle) {
  const auto length = static_cast<Eigen::Index>(bundle.full_length());
  Eigen::MatrixXd embedded = Eigen::MatrixXd::Zero(length, static_cast<Eigen::Index>(bundle.codes.size()));
  for (std::size_t m = 0; m < bundle.codes.size(); ++m) {
    const auto entries = bundle.codes[m].entries();
    for (std::size_t j = 0; j < entries.size(); ++j) {
      embedded(static_cast<Eigen::Index>(bundle.selection[j]), static_cast<Eigen::Index>(m)) = entries[j];
    }
  }
  return bundle.transform.pinv() * embedded;
}

}  // namespace

Eigen::MatrixXd gen_database(std::size_t items, std::size_t dimension, std::uint64_t seed) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(dimension), static_cast<Eigen::Index>(items));
  for (std::size_t m = 0; m < items; ++m) {
    Rng rng = Rng::derive(seed, {kDatabase, m});
    for (std::size_t i = 0; i < dimension; ++i) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = rng.normal();
    }
  }
  return x;
}

double noise_variance(double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  if (!std::isfinite(snr_db)) throw std::invalid_argument("SNR must be finite or +inf");
  return std::pow(10.0, -snr_db / 10.0);
}

Eigen::VectorXd gen_query(const Eigen::Ref<const Eigen::VectorXd>& x, double snr_db, Rng& rng) {
  const double variance = noise_variance(snr_db);
  if (variance == 0.0) return x;
  return x + std::sqrt(variance) * standard_normal(static_cast<std::size_t>(x.size()), rng);
}

double shannon_dr(double rate, double variance) {
  if (!(rate >= 0.0)) throw std::invalid_argument("shannon_dr: rate must be >= 0");
  return variance * std::exp2(-2.0 * rate);
}

Interval wilson_interval(std::size_t hits, std::size_t trials) {
  if (trials == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::size_t sparsity_for_ratio(double ratio, std::size_t length) {
  const auto s = static_cast<long long>(std::llround(ratio * static_cast<double>(length)));
  return static_cast<std::size_t>(std::clamp<long long>(s, 1, static_cast<long long>(length)));
}

double mean_squared_error(const Eigen::Ref<const Eigen::MatrixXd>& x,
                          const Eigen::Ref<const Eigen::MatrixXd>& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw std::invalid_argument("mse: shape mismatch");
  return (x - y).squaredNorm() / static_cast<double>(x.size());
}

Eigen::MatrixXd public_reconstruction(const PublicBundle& bundle,
                                      const Eigen::Ref<const Eigen::MatrixXd>& data) {
  const Eigen::MatrixXd unscaled = public_decode(bundle);
  return fit_gain(data, unscaled) * unscaled;
}

std::vector<PidRow> run_pid_experiment(const ExperimentConfig& cfg) {
  const std::size_t length = cfg.length();
  const Eigen::MatrixXd data = gen_database(cfg.items, cfg.dimension, cfg.seed);
  const std::size_t snrs = cfg.snr_db.size();
  std::vector<PidRow> rows;

  for (std::size_t g = 0; g < cfg.sparsity_ratios.size(); ++g) {
    const double ratio = cfg.sparsity_ratios[g];
    const std::size_t sparsity = sparsity_for_ratio(ratio, length);
    const auto specs = uniform_layer_specs(cfg.depth, sparsity, learning_for(cfg, sparsity, cfg.seed * 1000 + 10 * g));
    const OwnerAssets assets =
        owner_prepare(data, specs, ambiguization_for(cfg, cfg.owner_noise_fraction, sparsity, g));
    const PublicSearcher searcher(assets.public_bundle);
    const std::size_t query_noise = noise_count_for(cfg.query_noise_fraction, length, sparsity);
    const double rate = code_rate(length, sparsity);

    // hits[snr][0] public membership, [1] public top-1, [1 + k] private level k.
    std::vector<std::vector<std::size_t>> hits(snrs, std::vector<std::size_t>(2 + cfg.depth, 0));
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      Rng trial = Rng::derive(cfg.seed, {kPidTrial, g, t});
      const auto item = static_cast<std::uint32_t>(trial.below(cfg.items));
      const Eigen::VectorXd direction = standard_normal(cfg.dimension, trial);
      const std::uint64_t query_seed = trial.next_u64();
      for (std::size_t s = 0; s < snrs; ++s) {
        const Eigen::VectorXd y = noisy(data.col(item), direction, cfg.snr_db[s]);
        Rng query_rng(query_seed);
        const TernaryCode b = client_query(y, assets.public_bundle.transform, sparsity, query_noise,
                                           assets.public_bundle.selection, query_rng);
        const CandidateList list = searcher.search(b, ListRule::top_gamma(cfg.gamma));
        hits[s][0] += list.contains(item);
        hits[s][1] += !list.indices.empty() && list.indices.front() == item;
        const auto levels = private_refine(assets.layers, PrivateQuery{y, cfg.depth, list.indices},
                                           RefinementThresholds::unlimited());
        for (std::size_t k = 0; k < levels.size(); ++k) {
          hits[s][2 + k] += !levels[k].indices.empty() && levels[k].indices.front() == item;
        }
      }
    }

    for (std::size_t s = 0; s < snrs; ++s) {
      for (std::size_t col = 0; col < hits[s].size(); ++col) {
        PidRow row;
        row.stage = col == 0 ? "public" : (col == 1 ? "public_top1" : "private");
        row.level = col < 2 ? 0 : col - 1;
        row.snr_db = cfg.snr_db[s];
        row.sparsity_ratio = ratio;
        row.sparsity = sparsity;
        row.rate = rate;
        row.hits = hits[s][col];
        row.trials = cfg.trials;
        row.pid = static_cast<double>(row.hits) / static_cast<double>(row.trials);
        row.ci = wilson_interval(row.hits, row.trials);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<SimRow> run_similarity_curves(const ExperimentConfig& cfg) {
  const std::size_t length = cfg.length();
  const Eigen::MatrixXd data = gen_database(cfg.items, cfg.dimension, cfg.seed);
  std::vector<SimRow> rows;

  for (std::size_t g = 0; g < cfg.sim_sparsity_ratios.size(); ++g) {
    const double ratio = cfg.sim_sparsity_ratios[g];
    const std::size_t sparsity = sparsity_for_ratio(ratio, length);
    const Transform w = learn_transform(data, learning_for(cfg, sparsity, cfg.seed * 1000 + 10 * g + 1)).transform;
    const Codebook codes = encode_columns(data, w, sparsity);
    const PublicBundle bundle =
        ambiguize_codebook(codes, ambiguization_for(cfg, cfg.owner_noise_fraction, sparsity, 1000 + g), w, sparsity);
    const std::size_t query_noise = noise_count_for(cfg.query_noise_fraction, length, sparsity);

    struct Acc {
      double sim = 0, dis = 0, nu = 0, min_nu = 1, max_nu = 0;
      void add(const ScorePair& p) {
        sim += p.sim;
        dis += p.dis;
        nu += p.nu();
        min_nu = std::min(min_nu, p.nu());
        max_nu = std::max(max_nu, p.nu());
      }
    };
    std::vector<Acc> clean(cfg.snr_db.size()), ambiguous(cfg.snr_db.size());
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      Rng trial = Rng::derive(cfg.seed, {kSimTrial, g, t});
      const auto item = static_cast<std::size_t>(trial.below(cfg.items));
      const Eigen::VectorXd direction = standard_normal(cfg.dimension, trial);
      const std::uint64_t query_seed = trial.next_u64();
      for (std::size_t s = 0; s < cfg.snr_db.size(); ++s) {
        const Eigen::VectorXd y = noisy(data.col(static_cast<Eigen::Index>(item)), direction, cfg.snr_db[s]);
        clean[s].add(score(codes[item], encode(y, w, sparsity)));
        Rng query_rng(query_seed);
        ambiguous[s].add(score(bundle.codes[item],
                               client_query(y, w, sparsity, query_noise, bundle.selection, query_rng)));
      }
    }
    const double n = static_cast<double>(cfg.trials);
    for (std::size_t s = 0; s < cfg.snr_db.size(); ++s) {
      for (int series = 0; series < 2; ++series) {
        const Acc& acc = series == 0 ? clean[s] : ambiguous[s];
        SimRow row;
        row.series = series == 0 ? "clean" : "ambiguized";
        row.snr_db = cfg.snr_db[s];
        row.sparsity_ratio = ratio;
        row.sparsity = sparsity;
        row.rate = code_rate(length, sparsity);
        row.mean_sim = acc.sim / n;
        row.mean_dis = acc.dis / n;
        row.mean_nu = acc.nu / n;
        row.min_nu = acc.min_nu;
        row.max_nu = acc.max_nu;
        row.trials = cfg.trials;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<DrRow> run_dr_experiment(const ExperimentConfig& cfg) {
  const std::size_t length = cfg.length();
  // The transforms are fitted to the training set, so in-sample distortion
  // is optimistic; the rate-distortion point is measured on fresh samples.
  const Eigen::MatrixXd train = gen_database(cfg.dr_items, cfg.dimension, cfg.seed + 1);
  const Eigen::MatrixXd test = gen_database(cfg.dr_items, cfg.dimension, cfg.seed + 2);
  const double scale = static_cast<double>(test.size());
  std::vector<DrRow> rows;

  for (std::size_t g = 0; g < cfg.dr_sparsity_ratios.size(); ++g) {
    const double ratio = cfg.dr_sparsity_ratios[g];
    const std::size_t sparsity = sparsity_for_ratio(ratio, length);
    const auto specs = uniform_layer_specs(cfg.depth, sparsity, learning_for(cfg, sparsity, cfg.seed * 1000 + 10 * g + 2));
    const LayeredCodebooks layers = build_layers(train, specs);
    const auto rates = layer_rates(layers);
    const auto held_out = residual_norms(layers, test);

    double cumulative = 0.0;
    for (std::size_t k = 0; k < layers.depth(); ++k) {
      cumulative += rates[k];
      const double fitted = layers.residual_history()[k];
      DrRow row;
      row.series = "private";
      row.level = k + 1;
      row.sparsity_ratio = ratio;
      row.sparsity = sparsity;
      row.rate = cumulative;
      row.public_rate = cumulative;
      row.distortion = held_out[k] * held_out[k] / scale;
      row.train_distortion = fitted * fitted / scale;
      row.shannon = shannon_dr(cumulative, 1.0);
      rows.push_back(row);
    }

    const Layer& first = layers.layer(0);
    const Codebook test_codes = encode_columns(test, first.transform, sparsity);
    for (std::size_t a = 0; a < cfg.dr_noise_fractions.size(); ++a) {
      const double fraction = cfg.dr_noise_fractions[a];
      const auto amb = ambiguization_for(cfg, fraction, sparsity, 2000 + 100 * g + a);
      const PublicBundle bundle = ambiguize_codebook(test_codes, amb, first.transform, sparsity);
      const PublicBundle train_bundle = ambiguize_codebook(first.codes, amb, first.transform, sparsity);
      DrRow row;
      row.series = "public";
      row.level = 0;
      row.noise_fraction = fraction;
      row.sparsity_ratio = ratio;
      row.sparsity = sparsity;
      row.rate = rates[0];
      row.public_rate = bundle.rate();
      const Eigen::MatrixXd train_unscaled = public_decode(train_bundle);
      const double gain = fit_gain(train, train_unscaled);
      row.distortion = mean_squared_error(test, gain * public_decode(bundle));
      row.train_distortion = mean_squared_error(train, gain * train_unscaled);
      row.shannon = shannon_dr(rates[0], 1.0);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<LeakageRow> run_leakage_ordering(const ExperimentConfig& cfg) {
  const std::size_t length = cfg.length();
  const std::size_t sparsity = sparsity_for_ratio(cfg.leakage_sparsity_ratio, length);
  std::vector<LeakageRow> rows;
  for (std::size_t b = 0; b < cfg.leakage_batches; ++b) {
    Rng seeds = Rng::derive(cfg.seed, {kLeakage, b});
    const Eigen::MatrixXd data = gen_database(cfg.leakage_items, cfg.dimension, seeds.next_u64());
    const auto specs = uniform_layer_specs(cfg.depth, sparsity, learning_for(cfg, sparsity, seeds.next_u64()));
    const OwnerAssets assets =
        owner_prepare(data, specs, ambiguization_for(cfg, cfg.owner_noise_fraction, sparsity, 5000 + b));
    LeakageRow row;
    row.batch = b;
    row.public_mse = mean_squared_error(data, public_reconstruction(assets.public_bundle, data));
    row.level1_mse = mean_squared_error(data, assets.layers.reconstruct_all(1));
    row.deepest_mse = mean_squared_error(data, assets.layers.reconstruct_all(assets.layers.depth()));
    row.ordered = row.public_mse >= row.level1_mse && row.level1_mse >= row.deepest_mse;
    rows.push_back(row);
  }
  return rows;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const std::vector<PidRow>& rows) {
  out << "stage,level,snr_db,sparsity_ratio,sparsity,rate,hits,trials,pid,ci_low,ci_high\n";
  for (const auto& r : rows) {
    out << r.stage << ',' << r.level << ',' << snr_text(r.snr_db) << ',' << format_double(r.sparsity_ratio) << ','
        << r.sparsity << ',' << format_double(r.rate) << ',' << r.hits << ',' << r.trials << ','
        << format_double(r.pid) << ',' << format_double(r.ci.low) << ',' << format_double(r.ci.high) << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<SimRow>& rows) {
  out << "series,snr_db,sparsity_ratio,sparsity,rate,mean_sim,mean_dis,mean_nu,min_nu,max_nu,trials\n";
  for (const auto& r : rows) {
    out << r.series << ',' << snr_text(r.snr_db) << ',' << format_double(r.sparsity_ratio) << ',' << r.sparsity
        << ',' << format_double(r.rate) << ',' << format_double(r.mean_sim) << ',' << format_double(r.mean_dis)
        << ',' << format_double(r.mean_nu) << ',' << format_double(r.min_nu) << ',' << format_double(r.max_nu)
        << ',' << r.trials << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<DrRow>& rows) {
  out << "series,level,noise_fraction,sparsity_ratio,sparsity,rate,public_rate,distortion,train_distortion,shannon\n";
  for (const auto& r : rows) {
    out << r.series << ',' << r.level << ',' << format_double(r.noise_fraction) << ','
        << format_double(r.sparsity_ratio) << ',' << r.sparsity << ',' << format_double(r.rate) << ','
        << format_double(r.public_rate) << ',' << format_double(r.distortion) << ','
        << format_double(r.train_distortion) << ',' << format_double(r.shannon)
        << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<LeakageRow>& rows) {
  out << "batch,public_mse,level1_mse,deepest_mse,ordered\n";
  for (const auto& r : rows) {
    out << r.batch << ',' << format_double(r.public_mse) << ',' << format_double(r.level1_mse) << ','
        << format_double(r.deepest_mse) << ',' << (r.ordered ? 1 : 0) << '\n';
  }
}

std::vector<std::string> check_pid_snr_monotone(const std::vector<PidRow>& rows) {
  std::map<std::tuple<std::string, std::size_t, double>, std::vector<const PidRow*>> groups;
  for (const auto& r : rows) groups[{r.stage, r.level, r.sparsity_ratio}].push_back(&r);
  std::vector<std::string> failures;
  for (auto& [key, group] : groups) {
    std::sort(group.begin(), group.end(), [](const PidRow* a, const PidRow* b) { return a->snr_db < b->snr_db; });
    for (std::size_t i = 1; i < group.size(); ++i) {
      const PidRow& lo = *group[i - 1];
      const PidRow& hi = *group[i];
      if (hi.ci.high < lo.ci.low) {
        std::ostringstream msg;
        msg << "P_id not monotone in SNR: stage=" << lo.stage << " level=" << lo.level
            << " S/L=" << format_double(lo.sparsity_ratio) << " pid(" << snr_text(lo.snr_db)
            << " dB)=" << format_double(lo.pid) << " > pid(" << snr_text(hi.snr_db) << " dB)=" << format_double(hi.pid);
        failures.push_back(msg.str());
      }
    }
  }
  return failures;
}

std::vector<std::string> check_private_beats_public(const std::vector<PidRow>& rows) {
  std::vector<std::string> failures;
  for (const auto& pub : rows) {
    if (pub.stage != "public") continue;
    for (const auto& priv : rows) {
      if (priv.stage != "private" || priv.level != 1 || priv.snr_db != pub.snr_db ||
          priv.sparsity_ratio != pub.sparsity_ratio) {
        continue;
      }
      if (priv.ci.high < pub.ci.low) {
        std::ostringstream msg;
        msg << "private level 1 below public at S/L=" << format_double(pub.sparsity_ratio)
            << " SNR=" << snr_text(pub.snr_db) << ": " << format_double(priv.pid) << " < "
            << format_double(pub.pid);
        failures.push_back(msg.str());
      }
    }
  }
  return failures;
}

std::vector<std::string> check_similarity(const std::vector<SimRow>& rows) {
  std::vector<std::string> failures;
  for (const auto& r : rows) {
    if (!(r.min_nu >= 0.0 && r.max_nu <= 1.0 && r.mean_nu >= 0.0 && r.mean_nu <= 1.0)) {
      failures.push_back("normalized similarity outside [0, 1] at S/L=" + format_double(r.sparsity_ratio));
    }
  }
  const SimRow* best = nullptr;
  for (const auto& r : rows) {
    if (r.series == "clean" && r.snr_db == 10.0 && (best == nullptr || r.mean_nu > best->mean_nu)) best = &r;
  }
  if (best != nullptr && !(best->sparsity_ratio < 0.5)) {
    failures.push_back("normalized similarity peaks at S/L=" + format_double(best->sparsity_ratio) +
                       " (expected below 0.5 at 10 dB)");
  }
  return failures;
}

std::vector<std::string> check_shannon_bound(const std::vector<DrRow>& rows) {
  std::vector<std::string> failures;
  for (const auto& r : rows) {
    if (r.distortion < r.shannon) {
      failures.push_back(r.series + " point below the Shannon bound: R=" + format_double(r.rate) +
                         " D=" + format_double(r.distortion) + " bound=" + format_double(r.shannon));
    }
  }
  return failures;
}

std::vector<std::string> check_low_rate_gap(const std::vector<DrRow>& rows, double max_rate, double factor) {
  std::vector<std::string> failures;
  for (const auto& r : rows) {
    if (r.rate <= max_rate && r.distortion > factor * r.shannon) {
      failures.push_back(r.series + " point too far from the bound: R=" + format_double(r.rate) +
                         " D=" + format_double(r.distortion) + " bound=" + format_double(r.shannon));
    }
  }
  return failures;
}

std::vector<std::string> check_leakage(const std::vector<LeakageRow>& rows) {
  std::vector<std::string> failures;
  for (const auto& r : rows) {
    if (!r.ordered) {
      failures.push_back("batch " + std::to_string(r.batch) + ": MSE ordering violated (public=" +
                         format_double(r.public_mse) + ", level1=" + format_double(r.level1_mse) +
                         ", deepest=" + format_double(r.deepest_mse) + ")");
    }
  }
  return failures;
}

std::string plot_script(const std::string& experiment, const std::string& csv_name) {
  std::ostringstream s;
  s << "#!/usr/bin/env python3\n"
       "# Generated by `sparseid bench " << experiment << "`; plots " << csv_name << ".\n"
       "import csv, collections, os\n"
       "import matplotlib\n"
       "matplotlib.use('Agg')\n"
       "import matplotlib.pyplot as plt\n\n"
       "here = os.path.dirname(os.path.abspath(__file__))\n"
       "rows = list(csv.DictReader(open(os.path.join(here, '" << csv_name << "'))))\n";
  if (experiment == "pid") {
    s << "series = collections.defaultdict(list)\n"
         "for r in rows:\n"
         "    key = (r['stage'], r['level'], r['snr_db'])\n"
         "    series[key].append((float(r['sparsity_ratio']), float(r['rate']), float(r['pid'])))\n"
         "fig, axes = plt.subplots(1, 2, figsize=(10, 4))\n"
         "for (stage, level, snr), pts in sorted(series.items()):\n"
         "    label = f'{stage}{level if stage == \"private\" else \"\"} {snr} dB'\n"
         "    axes[0].plot([p[0] for p in pts], [p[2] for p in pts], marker='o', label=label)\n"
         "    axes[1].plot([p[1] for p in pts], [p[2] for p in pts], marker='o', label=label)\n"
         "axes[0].set_xlabel('S_x / L'); axes[1].set_xlabel('rate [bits/dim]')\n"
         "axes[0].set_ylabel('P_id'); axes[1].legend(fontsize=6)\n";
  } else if (experiment == "sim") {
    s << "series = collections.defaultdict(list)\n"
         "for r in rows:\n"
         "    series[(r['series'], r['snr_db'])].append((float(r['sparsity_ratio']), float(r['rate']), float(r['mean_nu'])))\n"
         "fig, axes = plt.subplots(1, 2, figsize=(10, 4))\n"
         "for (name, snr), pts in sorted(series.items()):\n"
         "    axes[0].plot([p[0] for p in pts], [p[2] for p in pts], marker='o', label=f'{name} {snr} dB')\n"
         "    axes[1].plot([p[1] for p in pts], [p[2] for p in pts], marker='o', label=f'{name} {snr} dB')\n"
         "axes[0].set_xlabel('S_x / L'); axes[1].set_xlabel('rate [bits/dim]')\n"
         "axes[0].set_ylabel('mean normalized similarity'); axes[1].legend(fontsize=6)\n";
  } else if (experiment == "dr") {
    s << "series = collections.defaultdict(list)\n"
         "bound = []\n"
         "for r in rows:\n"
         "    key = ('private', r['sparsity_ratio']) if r['series'] == 'private' else ('public', r['noise_fraction'])\n"
         "    series[key].append((float(r['rate']), float(r['distortion'])))\n"
         "    bound.append((float(r['rate']), float(r['shannon'])))\n"
         "fig, ax = plt.subplots(figsize=(6, 4))\n"
         "for (name, param), pts in sorted(series.items()):\n"
         "    pts.sort()\n"
         "    ax.plot([p[0] for p in pts], [p[1] for p in pts], marker='o', label=f'{name} {param}')\n"
         "bound.sort()\n"
         "ax.plot([b[0] for b in bound], [b[1] for b in bound], 'k--', label='Shannon bound')\n"
         "ax.set_xlabel('rate [bits/dim]'); ax.set_ylabel('distortion'); ax.legend(fontsize=6)\n";
  } else {
    s << "fig, ax = plt.subplots(figsize=(6, 4))\n"
         "for col in ('public_mse', 'level1_mse', 'deepest_mse'):\n"
         "    ax.plot([int(r['batch']) for r in rows], [float(r[col]) for r in rows], marker='o', label=col)\n"
         "ax.set_xlabel('batch'); ax.set_ylabel('reconstruction MSE'); ax.legend()\n";
  }
  s << "plt.tight_layout()\n"
       "plt.savefig(os.path.join(here, '" << experiment << ".png'), dpi=150)\n";
  return s.str();
}

}  // namespace sparseid::bench
