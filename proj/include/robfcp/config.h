#ifndef ROBFCP_CONFIG_H_
#define ROBFCP_CONFIG_H_

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "robfcp/certify.h"
#include "robfcp/simulation.h"

namespace robfcp {

using Json = nlohmann::ordered_json;

// Missing optional keys take the SimulationConfig defaults. When `seed` is
// absent, `fallback_seed` is used (the CLI passes a fresh random seed).
// Unknown keys and invariant violations throw ConfigError naming the field.
SimulationConfig parse_config(const nlohmann::json& j, std::uint64_t fallback_seed = 42);
SimulationConfig parse_config_file(const std::filesystem::path& path,
                                   std::uint64_t fallback_seed = 42);

// Fully resolved configuration; parse_config(config_to_json(c)) == c.
Json config_to_json(const SimulationConfig& config);

Json trial_to_json(const TrialReport& report);
Json aggregates_to_json(const MonteCarloResult& result);
Json certificate_to_json(const CoverageCertificate& cert);

}  // namespace robfcp

#endif  // ROBFCP_CONFIG_H_
