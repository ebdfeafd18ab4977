#include "robfcp/config.h"

#include <fstream>
#include <set>
#include <string>

#include "robfcp/error.h"

namespace robfcp {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "K",          "k_m",       "n_per_client",  "n_list",     "C",
      "H",          "alpha",     "beta",          "dirichlet_beta", "signal",
      "signal_spread", "homogeneous", "score_kind", "attack",   "gaussian_std",
      "direction_override", "p_norm", "km_known",  "n_test",     "trials",
      "seed",       "mode",      "reference_samples"};
  return keys;
}

template <typename T>
T get_field(const nlohmann::json& j, const char* key) {
  const auto& value = j.at(key);
  const std::string where = std::string("config field '") + key + "': ";
  if constexpr (std::is_same_v<T, bool>) {
    if (!value.is_boolean()) throw ConfigError(where + "expected a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!value.is_number_integer()) throw ConfigError(where + "expected an integer");
    if (std::is_unsigned_v<T> && value.is_number_integer() && !value.is_number_unsigned() &&
        value.get<std::int64_t>() < 0) {
      throw ConfigError(where + "must be non-negative");
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!value.is_number()) throw ConfigError(where + "expected a number");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!value.is_string()) throw ConfigError(where + "expected a string");
  }
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "wrong type");
  }
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = get_field<T>(j, key);
}

template <typename F>
auto wrap_enum(const char* key, F&& parse) {
  try {
    return parse();
  } catch (const InputError& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

SimulationConfig parse_config(const nlohmann::json& j, std::uint64_t fallback_seed) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  SimulationConfig c;
  c.seed = fallback_seed;
  read_opt(j, "K", c.K);
  read_opt(j, "k_m", c.k_m);
  read_opt(j, "n_per_client", c.n_per_client);
  read_opt(j, "n_list", c.n_list);
  read_opt(j, "C", c.C);
  read_opt(j, "H", c.H);
  read_opt(j, "alpha", c.alpha);
  read_opt(j, "beta", c.beta);
  read_opt(j, "dirichlet_beta", c.dirichlet_beta);
  read_opt(j, "signal", c.signal);
  read_opt(j, "signal_spread", c.signal_spread);
  read_opt(j, "homogeneous", c.homogeneous);
  if (j.contains("score_kind")) {
    const auto name = get_field<std::string>(j, "score_kind");
    c.score_kind = wrap_enum("score_kind", [&] { return parse_score_kind(name); });
  }
  if (j.contains("attack")) {
    const auto name = get_field<std::string>(j, "attack");
    c.attack.kind = wrap_enum("attack", [&] { return parse_attack_kind(name); });
  }
  read_opt(j, "gaussian_std", c.attack.gaussian_std);
  if (j.contains("direction_override") && !j.at("direction_override").is_null()) {
    const auto name = get_field<std::string>(j, "direction_override");
    c.attack.direction_override =
        wrap_enum("direction_override", [&] { return parse_mass_direction(name); });
  }
  if (j.contains("p_norm")) {
    const auto& p = j.at("p_norm");
    c.p_norm = p.is_number_integer() ? std::to_string(p.get<std::int64_t>())
                                     : get_field<std::string>(j, "p_norm");
  }
  read_opt(j, "km_known", c.km_known);
  read_opt(j, "n_test", c.n_test);
  read_opt(j, "trials", c.trials);
  read_opt(j, "seed", c.seed);
  if (j.contains("mode")) {
    const auto name = get_field<std::string>(j, "mode");
    c.mode = wrap_enum("mode", [&] { return parse_simulation_mode(name); });
  }
  read_opt(j, "reference_samples", c.reference_samples);
  c.validate();
  return c;
}

SimulationConfig parse_config_file(const std::filesystem::path& path,
                                   std::uint64_t fallback_seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_config(j, fallback_seed);
}

Json config_to_json(const SimulationConfig& c) {
  Json j;
  j["K"] = c.K;
  j["k_m"] = c.k_m;
  j["n_per_client"] = c.n_per_client;
  j["n_list"] = c.n_list;
  j["C"] = c.C;
  j["H"] = c.H;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["dirichlet_beta"] = c.dirichlet_beta;
  j["signal"] = c.signal;
  j["signal_spread"] = c.signal_spread;
  j["homogeneous"] = c.homogeneous;
  j["score_kind"] = score_kind_name(c.score_kind);
  j["attack"] = attack_kind_name(c.attack.kind);
  j["gaussian_std"] = c.attack.gaussian_std;
  if (c.attack.direction_override) {
    j["direction_override"] = mass_direction_name(*c.attack.direction_override);
  } else {
    j["direction_override"] = nullptr;
  }
  j["p_norm"] = c.p_norm;
  j["km_known"] = c.km_known;
  j["n_test"] = c.n_test;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["mode"] = simulation_mode_name(c.mode);
  j["reference_samples"] = c.reference_samples;
  return j;
}

Json certificate_to_json(const CoverageCertificate& cert) {
  Json j;
  j["variant"] = certificate_variant_name(cert.variant);
  j["lower"] = cert.lower;
  j["upper"] = cert.upper;
  j["p_byz"] = cert.p_byz;
  j["vacuous"] = cert.vacuous;
  Json p;
  p["alpha"] = cert.params.alpha;
  p["beta"] = cert.params.beta;
  p["H"] = cert.params.H;
  p["k_b"] = cert.params.k_b;
  p["k_m"] = cert.params.k_m;
  p["n_b"] = cert.params.n_b;
  p["n_m_total"] = cert.params.n_m_total;
  p["sigma"] = cert.params.sigma;
  p["epsilon"] = cert.params.epsilon;
  j["params"] = std::move(p);
  return j;
}

namespace {

Json quantile_to_json(const QuantileEstimate& q) {
  Json j;
  j["q_hat"] = q.q_hat;
  j["target_rank"] = q.target_rank;
  j["bin_index"] = q.bin_index;
  return j;
}

Json metrics_to_json(const EvalMetrics& m) {
  Json j;
  j["coverage"] = m.marginal_coverage;
  j["set_size"] = m.average_set_size;
  return j;
}

}  // namespace

Json trial_to_json(const TrialReport& r) {
  Json j;
  j["trial"] = r.trial;
  j["trial_seed"] = r.trial_seed;
  j["naive"] = metrics_to_json(r.naive);
  j["robust"] = metrics_to_json(r.robust);
  j["q_naive"] = quantile_to_json(r.q_naive);
  j["q_robust"] = quantile_to_json(r.q_robust);
  j["benign_set"] = r.benign_set;
  j["k_m_hat"] = r.k_m_hat;
  j["detection_exact"] = r.detection_exact;
  j["certificate"] = certificate_to_json(r.certificate);
  return j;
}

Json aggregates_to_json(const MonteCarloResult& result) {
  Json j;
  for (const auto& name : trial_metric_names()) {
    const auto& s = result.aggregates.at(name);
    Json m;
    m["mean"] = s.mean;
    m["std"] = s.stddev;
    m["min"] = s.min;
    m["max"] = s.max;
    j[name] = std::move(m);
  }
  return j;
}

}  // namespace robfcp
