#include "robfcp/commands.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <thread>

#include "robfcp/calibration.h"
#include "robfcp/count_estimator.h"
#include "robfcp/error.h"

namespace robfcp {

namespace {

std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

double parse_number(const std::string& text, std::string_view what) {
  try {
    std::size_t used = 0;
    const double x = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw InputError("sweep: bad " + std::string(what) + " '" + text + "'");
  }
}

std::size_t as_count(double value, const std::string& key) {
  if (!(value >= 0.0) || value != std::floor(value)) {
    throw ConfigError("sweep value " + fmt_num(value) + " for '" + key +
                      "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(value);
}

void append_csv_rows(std::string& csv, const std::optional<std::string>& prefix,
                     const SimulationConfig& config, const MonteCarloResult& result) {
  for (const auto& r : result.trials) {
    if (prefix) csv += *prefix + ",";
    csv += std::to_string(r.trial) + "," + std::string(attack_kind_name(config.attack.kind)) +
           "," + fmt_num(r.naive.marginal_coverage) + "," + fmt_num(r.naive.average_set_size) +
           "," + fmt_num(r.robust.marginal_coverage) + "," +
           fmt_num(r.robust.average_set_size) + "," + std::to_string(r.k_m_hat) + "," +
           (r.detection_exact ? "1" : "0") + "," + fmt_num(r.certificate.lower) + "," +
           fmt_num(r.certificate.upper) + "\n";
  }
}

constexpr const char* kCsvHeader =
    "trial,attack,naive_cov,naive_size,rob_cov,rob_size,km_hat,detect_exact,bound_lo,bound_hi";

}  // namespace

SweepSpec parse_sweep(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw InputError("sweep must look like key=start:stop[:step], got '" + std::string(text) + "'");
  }
  SweepSpec spec;
  spec.key = std::string(text.substr(0, eq));
  std::vector<std::string> parts;
  std::stringstream ss{std::string(text.substr(eq + 1))};
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() < 2 || parts.size() > 3) {
    throw InputError("sweep range must be start:stop[:step], got '" + std::string(text) + "'");
  }
  const double start = parse_number(parts[0], "start");
  const double stop = parse_number(parts[1], "stop");
  const double step = parts.size() == 3 ? parse_number(parts[2], "step") : 1.0;
  if (!(step > 0.0)) throw InputError("sweep step must be > 0");
  if (stop < start) throw InputError("sweep stop must be >= start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 100000) throw InputError("sweep has too many points");
  for (std::size_t i = 0; i < count; ++i) {
    spec.values.push_back(start + static_cast<double>(i) * step);
  }
  return spec;
}

void apply_sweep_value(SimulationConfig& c, const std::string& key, double value) {
  if (key == "km" || key == "k_m") {
    c.k_m = as_count(value, key);
  } else if (key == "K") {
    c.K = as_count(value, key);
  } else if (key == "H") {
    c.H = as_count(value, key);
  } else if (key == "C") {
    c.C = as_count(value, key);
  } else if (key == "n" || key == "n_per_client") {
    c.n_per_client = static_cast<std::int64_t>(as_count(value, key));
    c.n_list.clear();
  } else if (key == "alpha") {
    c.alpha = value;
  } else if (key == "beta") {
    c.beta = value;
  } else if (key == "signal") {
    c.signal = value;
  } else if (key == "signal_spread") {
    c.signal_spread = value;
  } else if (key == "dirichlet_beta") {
    c.dirichlet_beta = value;
  } else if (key == "gaussian_std") {
    c.attack.gaussian_std = value;
  } else {
    throw ConfigError("unknown sweep key '" + key + "'");
  }
}

std::size_t thread_budget() {
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("ROBFCP_THREADS"); cap != nullptr && *cap != '\0') {
    char* end = nullptr;
    const long v = std::strtol(cap, &end, 10);
    if (end == cap || *end != '\0' || v < 1) {
      throw ConfigError("ROBFCP_THREADS must be a positive integer, got '" + std::string(cap) + "'");
    }
    threads = std::min(threads, static_cast<std::size_t>(v));
  }
  return threads;
}

SimulateOutput simulate(const SimulationConfig& config, const std::optional<SweepSpec>& sweep,
                        std::size_t threads) {
  config.validate();
  SimulateOutput out;
  out.report["config"] = config_to_json(config);
  if (!sweep) {
    const auto result = monte_carlo(config, threads);
    Json trials = Json::array();
    for (const auto& r : result.trials) trials.push_back(trial_to_json(r));
    out.report["trials"] = std::move(trials);
    out.report["aggregates"] = aggregates_to_json(result);
    out.csv = std::string(kCsvHeader) + "\n";
    append_csv_rows(out.csv, std::nullopt, config, result);
    return out;
  }

  Json points = Json::array();
  out.csv = sweep->key + "," + kCsvHeader + "\n";
  for (double value : sweep->values) {
    SimulationConfig point = config;
    apply_sweep_value(point, sweep->key, value);
    point.validate();
    const auto result = monte_carlo(point, threads);
    Json p;
    p["value"] = value;
    p["aggregates"] = aggregates_to_json(result);
    Json trials = Json::array();
    for (const auto& r : result.trials) trials.push_back(trial_to_json(r));
    p["trials"] = std::move(trials);
    points.push_back(std::move(p));
    append_csv_rows(out.csv, fmt_num(value), point, result);
  }
  Json s;
  s["key"] = sweep->key;
  s["points"] = std::move(points);
  out.report["sweep"] = std::move(s);
  return out;
}

Json certify_json(const CertificateParams& params, CertificateVariant variant,
                  std::int64_t k_b_reported) {
  return certificate_to_json(certify(params, variant, k_b_reported));
}

std::string certify_sweep_csv(const CertificateParams& params, CertificateVariant variant,
                              std::int64_t k_b_reported, const SweepSpec& sweep) {
  if (sweep.key != "nb") throw InputError("certify sweep key must be 'nb'");
  std::string csv = "nb,lower,upper,p_byz,vacuous\n";
  for (double nb : sweep.values) {
    CertificateParams p = params;
    p.n_b = nb;
    const auto cert = certify(p, variant, k_b_reported);
    csv += fmt_num(nb) + "," + fmt_num(cert.lower) + "," + fmt_num(cert.upper) + "," +
           fmt_num(cert.p_byz) + "," + (cert.vacuous ? "1" : "0") + "\n";
  }
  return csv;
}

Json estimate_json(std::span<const ClientReport> reports, DistanceNorm norm,
                   std::size_t max_iter) {
  const auto est = estimate_benign_count(reports, EstimatorOptions{norm, 0, max_iter});
  Json j;
  j["k_m_hat"] = est.effective_k_m();
  j["k_b_hat"] = reports.size() - est.effective_k_m();
  j["no_malicious"] = est.no_malicious;
  j["iterations"] = est.iterations;
  Json trace = Json::array();
  for (const auto& [z, t] : est.objective_trace) trace.push_back(Json::array({z, t}));
  j["objective_trace"] = std::move(trace);
  return j;
}

Json calibrate_json(std::span<const ClientReport> reports, double alpha,
                    std::optional<std::size_t> k_b, bool estimate_km, DistanceNorm norm) {
  if (reports.empty()) throw InputError("calibrate: no reports");
  if (k_b.has_value() == estimate_km) {
    throw InputError("calibrate: pass exactly one of --kb or --estimate-km");
  }
  const std::size_t k = reports.size();
  std::size_t k_b_used = 0;
  if (k_b) {
    if (*k_b < 2 || *k_b > k) {
      throw InputError("calibrate: k_b must lie in [2, " + std::to_string(k) + "], got " +
                       std::to_string(*k_b));
    }
    k_b_used = *k_b;
  } else {
    const auto est = estimate_benign_count(reports, EstimatorOptions{norm, 0, 10});
    k_b_used = est.no_malicious ? k : est.k_b_hat;
  }
  const auto distances = pairwise_distances(reports, norm);
  const auto scores = maliciousness_scores(distances, k_b_used);
  const auto ranking = select_benign(scores, k_b_used);
  const auto agg = aggregate(reports, ranking.benign_set);
  const auto q = federated_quantile(agg, alpha);

  Json j;
  j["q_hat"] = q.q_hat;
  j["target_rank"] = q.target_rank;
  j["bin_index"] = q.bin_index;
  Json ids = Json::array();
  for (std::size_t pos : ranking.benign_set) ids.push_back(reports[pos].client_id);
  j["benign_set"] = std::move(ids);
  j["k_m_hat"] = k - k_b_used;
  j["maliciousness"] = scores;
  return j;
}

std::vector<ClientReport> sketch_reports(
    const std::map<std::int64_t, std::vector<LabeledProbs>>& rows, std::size_t num_bins,
    ScoreKind kind, std::uint64_t seed) {
  const auto edges = uniform_bin_edges(num_bins);
  std::vector<ClientReport> reports;
  for (const auto& [id, samples] : rows) {
    Rng rng = make_rng(seed, 0x5c0e, static_cast<std::uint64_t>(id));
    const auto scores = batch_scores(samples, kind, rng);
    reports.emplace_back(id, static_cast<std::int64_t>(scores.size()),
                         histogram_characterize(scores, edges), edges);
  }
  return reports;
}

}  // namespace robfcp
