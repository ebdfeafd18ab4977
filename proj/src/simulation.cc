#include "robfcp/simulation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "robfcp/count_estimator.h"
#include "robfcp/error.h"

namespace robfcp {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kMixtureStream = 1;
constexpr std::uint64_t kTestStream = 2;
constexpr std::uint64_t kDataStream = 3;
constexpr std::uint64_t kAttackStream = 4;
constexpr std::uint64_t kReferenceStream = 5;

constexpr std::size_t kReferenceTestRows = 20000;

[[noreturn]] void config_fail(const std::string& field, const std::string& constraint) {
  throw ConfigError("config field '" + field + "': " + constraint);
}

}  // namespace

std::string_view simulation_mode_name(SimulationMode m) {
  return m == SimulationMode::kSample ? "sample" : "histogram_direct";
}

SimulationMode parse_simulation_mode(std::string_view name) {
  if (name == "sample") return SimulationMode::kSample;
  if (name == "histogram_direct") return SimulationMode::kHistogramDirect;
  throw InputError("unknown mode '" + std::string(name) + "' (expected sample|histogram_direct)");
}

std::int64_t SimulationConfig::client_n(std::size_t k) const {
  return n_list.empty() ? n_per_client : n_list.at(k);
}

void SimulationConfig::validate() const {
  if (K < 2) config_fail("K", "must be >= 2");
  if (!(k_m < K - k_m)) config_fail("k_m", "must satisfy k_m < K - k_m (break point)");
  if (n_list.empty()) {
    if (n_per_client < 1) config_fail("n_per_client", "must be >= 1");
  } else {
    if (n_list.size() != K) config_fail("n_list", "must have exactly K entries");
    for (auto n : n_list) {
      if (n < 1) config_fail("n_list", "entries must be >= 1");
    }
  }
  if (C < 2) config_fail("C", "must be >= 2");
  if (H < 1) config_fail("H", "must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) config_fail("alpha", "must lie in (0,1)");
  if (!(beta > 0.0 && beta < 1.0)) config_fail("beta", "must lie in (0,1)");
  if (!(dirichlet_beta > 0.0)) config_fail("dirichlet_beta", "must be > 0");
  if (!std::isfinite(signal)) config_fail("signal", "must be finite");
  if (!(signal_spread >= 0.0) || !std::isfinite(signal_spread)) {
    config_fail("signal_spread", "must be finite and >= 0");
  }
  if (attack.kind == AttackKind::kGaussian && !(attack.gaussian_std > 0.0)) {
    config_fail("gaussian_std", "must be > 0");
  }
  try {
    (void)DistanceNorm::parse(p_norm);
  } catch (const InputError& e) {
    config_fail("p_norm", e.what());
  }
  if (!km_known && K < 4) config_fail("km_known", "estimating K_m needs K >= 4");
  if (n_test < 1) config_fail("n_test", "must be >= 1");
  if (trials < 1) config_fail("trials", "must be >= 1");
  if (reference_samples < 1000) config_fail("reference_samples", "must be >= 1000");
  if (mode == SimulationMode::kHistogramDirect && attack.kind == AttackKind::kGaussian) {
    config_fail("attack", "gaussian needs raw scores and is unavailable in histogram_direct mode");
  }
}

std::vector<std::vector<double>> dirichlet_mixture(std::size_t C, std::size_t K,
                                                   double dirichlet_beta, Rng& rng) {
  if (C < 2 || K < 2) throw InputError("dirichlet_mixture needs C >= 2 and K >= 2");
  if (!(dirichlet_beta > 0.0)) throw InputError("dirichlet_mixture needs beta > 0");
  std::gamma_distribution<double> gamma(dirichlet_beta, 1.0);
  std::vector<std::vector<double>> share(C, std::vector<double>(K));
  for (std::size_t c = 0; c < C; ++c) {
    double total = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
      share[c][j] = gamma(rng);
      total += share[c][j];
    }
    if (total > 0.0) {
      for (double& x : share[c]) x /= total;
    } else {
      // Every gamma draw underflowed (tiny beta): the whole class goes to one client.
      std::uniform_int_distribution<std::size_t> pick(0, K - 1);
      share[c][pick(rng)] = 1.0;
    }
  }
  std::vector<std::vector<double>> mixtures(K, std::vector<double>(C));
  for (std::size_t j = 0; j < K; ++j) {
    double total = 0.0;
    for (std::size_t c = 0; c < C; ++c) total += share[c][j];
    for (std::size_t c = 0; c < C; ++c) {
      mixtures[j][c] = total > 0.0 ? share[c][j] / total : 1.0 / static_cast<double>(C);
    }
  }
  return mixtures;
}

std::vector<std::int64_t> sample_multinomial(std::int64_t n, std::span<const double> probs,
                                             Rng& rng) {
  std::vector<std::int64_t> counts(probs.size(), 0);
  std::int64_t remaining = n;
  double mass = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (std::size_t h = 0; h + 1 < probs.size() && remaining > 0; ++h) {
    const double p = mass > 0.0 ? std::clamp(probs[h] / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::int64_t> draw(remaining, p);
    counts[h] = draw(rng);
    remaining -= counts[h];
    mass -= probs[h];
  }
  if (!probs.empty()) counts.back() += remaining;
  return counts;
}

ClientData generate_client_data(const ClientProfile& profile, std::size_t C,
                                ScoreKind score_kind, std::size_t num_test_rows, Rng& rng) {
  if (profile.class_mixture.size() != C) {
    throw InputError("client class mixture has wrong length");
  }
  std::discrete_distribution<std::size_t> label_dist(profile.class_mixture.begin(),
                                                     profile.class_mixture.end());
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> logits(C);
  std::vector<double> probs(C);

  auto draw = [&](std::size_t& label) {
    label = label_dist(rng);
    for (std::size_t c = 0; c < C; ++c) logits[c] = noise(rng);
    logits[label] += profile.signal;
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      probs[c] = std::exp(logits[c] - top);
      total += probs[c];
    }
    for (double& p : probs) p /= total;
  };

  ClientData data;
  data.calibration_scores.reserve(static_cast<std::size_t>(profile.n));
  std::size_t label = 0;
  for (std::int64_t i = 0; i < profile.n; ++i) {
    draw(label);
    const ProbabilityVector pv(probs);
    data.calibration_scores.push_back(score_kind == ScoreKind::kLac
                                          ? lac_score(pv, label)
                                          : aps_score(pv, label, unif(rng)));
  }
  data.test_rows.reserve(num_test_rows);
  for (std::size_t i = 0; i < num_test_rows; ++i) {
    draw(label);
    const ProbabilityVector pv(probs);
    const double u = score_kind == ScoreKind::kAps ? unif(rng) : 0.0;
    data.test_rows.push_back({label_scores(pv, score_kind, u), label});
  }
  return data;
}

TrialRunner::TrialRunner(SimulationConfig config)
    : config_(std::move(config)), edges_(uniform_bin_edges(std::max<std::size_t>(config_.H, 1))) {
  config_.validate();
  const std::size_t k = config_.K;
  signals_.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double pos = k > 1 ? static_cast<double>(j) / static_cast<double>(k - 1) - 0.5 : 0.0;
    signals_[j] = config_.signal + config_.signal_spread * pos;
  }

  // The true-label score law is invariant to the label mixture (logits are
  // exchangeable across classes apart from the boost), so one reference per
  // distinct signal level covers every client.
  reference_of_.resize(k);
  std::vector<double> levels;
  for (std::size_t j = 0; j < k; ++j) {
    auto it = std::find(levels.begin(), levels.end(), signals_[j]);
    if (it == levels.end()) {
      levels.push_back(signals_[j]);
      it = levels.end() - 1;
    }
    reference_of_[j] = static_cast<std::size_t>(it - levels.begin());
  }
  const std::vector<double> uniform(config_.C, 1.0 / static_cast<double>(config_.C));
  const std::size_t ref_rows =
      config_.mode == SimulationMode::kHistogramDirect ? kReferenceTestRows : 0;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    Rng rng = make_rng(config_.seed, kReferenceStream, l);
    const ClientProfile profile{static_cast<std::int64_t>(config_.reference_samples), uniform,
                                levels[l], false};
    auto data = generate_client_data(profile, config_.C, config_.score_kind, ref_rows, rng);
    Reference ref;
    const auto v = histogram_characterize(data.calibration_scores, edges_);
    ref.bin_probs.assign(v.values().begin(), v.values().end());
    ref.rows = TestBatch(std::move(data.test_rows));
    references_.push_back(std::move(ref));
  }
}

const std::vector<double>& TrialRunner::true_bin_probs(std::size_t k) const {
  return references_.at(reference_of_.at(k)).bin_probs;
}

TrialReport TrialRunner::run(std::size_t trial_index) const {
  const auto& cfg = config_;
  const std::size_t k = cfg.K;
  const std::size_t k_b = cfg.k_b();
  const std::uint64_t trial_seed = cfg.seed ^ static_cast<std::uint64_t>(trial_index);
  const bool direct = cfg.mode == SimulationMode::kHistogramDirect;

  std::vector<std::vector<double>> mixtures;
  if (cfg.homogeneous) {
    mixtures.assign(k, std::vector<double>(cfg.C, 1.0 / static_cast<double>(cfg.C)));
  } else {
    Rng rng = make_rng(trial_seed, kMixtureStream);
    mixtures = dirichlet_mixture(cfg.C, k, cfg.dirichlet_beta, rng);
  }

  // Test distribution: benign mixture with weights proportional to n_k + 1.
  std::vector<double> lambda(k, 0.0);
  double weight_total = 0.0;
  for (std::size_t j = 0; j < k_b; ++j) {
    lambda[j] = static_cast<double>(cfg.client_n(j)) + 1.0;
    weight_total += lambda[j];
  }
  for (double& w : lambda) w /= weight_total;
  std::vector<std::int64_t> test_counts(k, 0);
  if (!direct) {
    Rng rng = make_rng(trial_seed, kTestStream);
    test_counts = sample_multinomial(static_cast<std::int64_t>(cfg.n_test), lambda, rng);
  }

  std::vector<ClientReport> reports;
  reports.reserve(k);
  std::vector<std::vector<double>> own_scores(k);
  TestBatch test;
  for (std::size_t j = 0; j < k; ++j) {
    const ClientProfile profile{cfg.client_n(j), mixtures[j], signals_[j], j >= k_b};
    Rng rng = make_rng(trial_seed, kDataStream, j);
    if (direct) {
      const auto counts = sample_multinomial(profile.n, true_bin_probs(j), rng);
      std::vector<double> v(counts.size());
      for (std::size_t h = 0; h < counts.size(); ++h) {
        v[h] = static_cast<double>(counts[h]) / static_cast<double>(profile.n);
      }
      if (j < k_b || cfg.attack.kind == AttackKind::kNone) {
        reports.emplace_back(static_cast<std::int64_t>(j), profile.n,
                             CharacterizationVector(std::move(v)), edges_);
      }
    } else {
      auto data = generate_client_data(profile, cfg.C, cfg.score_kind,
                                       static_cast<std::size_t>(test_counts[j]), rng);
      for (auto& row : data.test_rows) test.add(std::move(row));
      if (j < k_b) {
        reports.emplace_back(static_cast<std::int64_t>(j), profile.n,
                             histogram_characterize(data.calibration_scores, edges_), edges_);
      } else {
        own_scores[j] = std::move(data.calibration_scores);
      }
    }
  }
  const std::vector<ClientReport> benign_reports(reports.begin(),
                                                 reports.begin() + static_cast<std::ptrdiff_t>(k_b));
  for (std::size_t j = k_b; j < k; ++j) {
    if (reports.size() > j) continue;  // honest report already built (direct mode, no attack)
    Rng rng = make_rng(trial_seed, kAttackStream, j);
    reports.push_back(apply_attack(cfg.attack, static_cast<std::int64_t>(j), own_scores[j],
                                   benign_reports, edges_, cfg.client_n(j), rng));
  }

  TrialReport out;
  out.trial = trial_index;
  out.trial_seed = trial_seed;

  // Detection.
  const auto norm = DistanceNorm::parse(cfg.p_norm);
  std::size_t k_b_used = k;
  if (cfg.km_known) {
    k_b_used = k_b;
  } else {
    const auto est = estimate_benign_count(std::span<const ClientReport>(reports),
                                           EstimatorOptions{norm, 0, 10});
    k_b_used = est.no_malicious ? k : est.k_b_hat;
  }
  if (k_b_used == k) {
    out.benign_set.resize(k);
    std::iota(out.benign_set.begin(), out.benign_set.end(), 0);
  } else {
    const auto distances = pairwise_distances(std::span<const ClientReport>(reports), norm);
    out.benign_set =
        select_benign(maliciousness_scores(distances, k_b_used), k_b_used).benign_set;
  }
  out.k_m_hat = k - k_b_used;
  std::vector<std::size_t> truth(k_b);
  std::iota(truth.begin(), truth.end(), 0);
  out.detection_exact = out.benign_set == truth;

  // Calibration.
  const auto agg_robust = aggregate(reports, out.benign_set);
  const auto agg_naive = aggregate_all(reports);
  out.q_robust = federated_quantile(agg_robust, cfg.alpha);
  out.q_naive = federated_quantile(agg_naive, cfg.alpha);

  if (direct) {
    auto exact_metrics = [&](const QuantileEstimate& q) {
      EvalMetrics m{0.0, 0.0};
      for (std::size_t j = 0; j < k_b; ++j) {
        double covered = 1.0;
        if (q.q_hat < 1.0) {
          const auto& p = true_bin_probs(j);
          covered = std::accumulate(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(q.bin_index) + 1, 0.0);
        }
        const auto ref = evaluate(references_[reference_of_[j]].rows, q);
        m.marginal_coverage += lambda[j] * covered;
        m.average_set_size += lambda[j] * ref.average_set_size;
      }
      return m;
    };
    out.naive = exact_metrics(out.q_naive);
    out.robust = exact_metrics(out.q_robust);
  } else {
    out.naive = evaluate(test, out.q_naive);
    out.robust = evaluate(test, out.q_robust);
  }

  // Certificate at the true configuration.
  std::vector<std::vector<double>> expected;
  std::int64_t n_b = std::numeric_limits<std::int64_t>::max();
  for (std::size_t j = 0; j < k_b; ++j) {
    expected.push_back(true_bin_probs(j));
    n_b = std::min(n_b, cfg.client_n(j));
  }
  double n_m = 0.0;
  for (std::size_t j = k_b; j < k; ++j) n_m += static_cast<double>(cfg.client_n(j));
  CertificateParams params;
  params.alpha = cfg.alpha;
  params.beta = cfg.beta;
  params.H = static_cast<std::int64_t>(cfg.H);
  params.k_b = static_cast<std::int64_t>(k_b);
  params.k_m = static_cast<std::int64_t>(cfg.k_m);
  params.n_b = static_cast<double>(n_b);
  params.n_m_total = n_m;
  params.sigma = std::min(2.0, heterogeneity_sigma(expected));
  params.epsilon = sketch_epsilon(aggregate(reports, truth));
  out.certificate = cfg.homogeneous && params.sigma == 0.0
                        ? coverage_bounds_homogeneous(params)
                        : coverage_bounds(params);
  return out;
}

TrialReport run_trial(const SimulationConfig& config, std::size_t trial_index) {
  return TrialRunner(config).run(trial_index);
}

const std::vector<std::string>& trial_metric_names() {
  static const std::vector<std::string> names = {
      "naive_cov", "naive_size", "rob_cov",  "rob_size", "km_hat",
      "detect_exact", "bound_lo", "bound_hi", "q_naive", "q_robust"};
  return names;
}

double trial_metric(const TrialReport& r, const std::string& name) {
  if (name == "naive_cov") return r.naive.marginal_coverage;
  if (name == "naive_size") return r.naive.average_set_size;
  if (name == "rob_cov") return r.robust.marginal_coverage;
  if (name == "rob_size") return r.robust.average_set_size;
  if (name == "km_hat") return static_cast<double>(r.k_m_hat);
  if (name == "detect_exact") return r.detection_exact ? 1.0 : 0.0;
  if (name == "bound_lo") return r.certificate.lower;
  if (name == "bound_hi") return r.certificate.upper;
  if (name == "q_naive") return r.q_naive.q_hat;
  if (name == "q_robust") return r.q_robust.q_hat;
  throw InputError("unknown trial metric '" + name + "'");
}

MonteCarloResult monte_carlo(const SimulationConfig& config, std::size_t threads) {
  const TrialRunner runner(config);
  const std::size_t n = config.trials;
  MonteCarloResult result;
  result.trials.resize(n);

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, n);
  if (workers == 1) {
    for (std::size_t t = 0; t < n; ++t) result.trials[t] = runner.run(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t t = next++; t < n; t = next++) result.trials[t] = runner.run(t);
          } catch (...) {
            errors[w] = std::current_exception();
            next = n;
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (const auto& name : trial_metric_names()) {
    MetricSummary s;
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& r : result.trials) {
      const double x = trial_metric(r, name);
      sum += x;
      s.min = std::min(s.min, x);
      s.max = std::max(s.max, x);
    }
    s.mean = sum / static_cast<double>(n);
    if (n > 1) {
      double ss = 0.0;
      for (const auto& r : result.trials) {
        const double dx = trial_metric(r, name) - s.mean;
        ss += dx * dx;
      }
      s.stddev = std::sqrt(ss / static_cast<double>(n - 1));
    }
    result.aggregates[name] = s;
  }
  return result;
}

}  // namespace robfcp
