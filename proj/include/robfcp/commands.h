#ifndef ROBFCP_COMMANDS_H_
#define ROBFCP_COMMANDS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "robfcp/config.h"
#include "robfcp/detection.h"
#include "robfcp/score.h"
#include "robfcp/sketch.h"

namespace robfcp {

// `key=start:stop[:step]`, inclusive; step defaults to 1.
struct SweepSpec {
  std::string key;
  std::vector<double> values;
};

SweepSpec parse_sweep(std::string_view text);

// Simulation keys accepted by --sweep: km (alias k_m), K, H, n (alias
// n_per_client), C, alpha, beta, signal, signal_spread, dirichlet_beta,
// gaussian_std.
void apply_sweep_value(SimulationConfig& config, const std::string& key, double value);

// Worker count: hardware concurrency capped by ROBFCP_THREADS when set.
std::size_t thread_budget();

struct SimulateOutput {
  Json report;
  std::string csv;
};

// Report layout without a sweep: {config, trials, aggregates}. With a sweep:
// {config, sweep: {key, points: [{value, aggregates, trials}]}} and the CSV
// gains a leading column named after the swept key.
SimulateOutput simulate(const SimulationConfig& config, const std::optional<SweepSpec>& sweep,
                        std::size_t threads);

Json certify_json(const CertificateParams& params, CertificateVariant variant,
                  std::int64_t k_b_reported);

// CSV `nb,lower,upper,p_byz,vacuous` over the n_b values of an `nb=...` sweep.
std::string certify_sweep_csv(const CertificateParams& params, CertificateVariant variant,
                              std::int64_t k_b_reported, const SweepSpec& sweep);

Json estimate_json(std::span<const ClientReport> reports, DistanceNorm norm,
                   std::size_t max_iter);

// Detection + aggregation + quantile over ingested reports. Exactly one of
// k_b / estimate_km must be given. benign_set lists client ids.
Json calibrate_json(std::span<const ClientReport> reports, double alpha,
                    std::optional<std::size_t> k_b, bool estimate_km, DistanceNorm norm);

// One report per client of a probability CSV, ascending client id.
std::vector<ClientReport> sketch_reports(
    const std::map<std::int64_t, std::vector<LabeledProbs>>& rows, std::size_t num_bins,
    ScoreKind kind, std::uint64_t seed);

}  // namespace robfcp

#endif  // ROBFCP_COMMANDS_H_
