#include "robfcp/attacks.h"

#include <algorithm>
#include <string>
#include <vector>

#include "robfcp/error.h"

namespace robfcp {

std::string_view attack_kind_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone: return "none";
    case AttackKind::kCoverage: return "coverage";
    case AttackKind::kEfficiency: return "efficiency";
    case AttackKind::kGaussian: return "gaussian";
    case AttackKind::kMimic: return "mimic";
  }
  return "none";
}

AttackKind parse_attack_kind(std::string_view name) {
  if (name == "none") return AttackKind::kNone;
  if (name == "coverage") return AttackKind::kCoverage;
  if (name == "efficiency") return AttackKind::kEfficiency;
  if (name == "gaussian") return AttackKind::kGaussian;
  if (name == "mimic") return AttackKind::kMimic;
  throw InputError("unknown attack '" + std::string(name) +
                   "' (expected coverage|efficiency|gaussian|mimic|none)");
}

std::string_view mass_direction_name(MassDirection d) {
  return d == MassDirection::kLow ? "mass_low" : "mass_high";
}

MassDirection parse_mass_direction(std::string_view name) {
  if (name == "mass_low" || name == "low") return MassDirection::kLow;
  if (name == "mass_high" || name == "high") return MassDirection::kHigh;
  throw InputError("unknown direction '" + std::string(name) +
                   "' (expected mass_low|mass_high)");
}

void AttackSpec::validate() const {
  if (kind == AttackKind::kGaussian && !(gaussian_std > 0.0)) {
    throw InputError("gaussian_std must be > 0, got " + std::to_string(gaussian_std));
  }
}

CharacterizationVector point_mass(std::size_t num_bins, std::size_t bin) {
  if (bin >= num_bins) {
    throw InputError("point mass bin " + std::to_string(bin) + " out of range for " +
                     std::to_string(num_bins) + " bins");
  }
  std::vector<double> v(num_bins, 0.0);
  v[bin] = 1.0;
  return CharacterizationVector(std::move(v));
}

ClientReport apply_attack(const AttackSpec& spec, std::int64_t client_id,
                          std::span<const double> own_scores,
                          std::span<const ClientReport> benign_reports,
                          const BinEdges& edges, std::int64_t n, Rng& rng) {
  spec.validate();
  if (n < 1) throw InputError("attack: trusted n must be >= 1");
  const std::size_t bins = edges.num_bins();

  switch (spec.kind) {
    case AttackKind::kCoverage:
    case AttackKind::kEfficiency: {
      MassDirection dir = spec.kind == AttackKind::kCoverage ? MassDirection::kLow
                                                             : MassDirection::kHigh;
      if (spec.direction_override) dir = *spec.direction_override;
      const std::size_t bin = dir == MassDirection::kLow ? 0 : bins - 1;
      return ClientReport(client_id, n, point_mass(bins, bin), edges);
    }
    case AttackKind::kGaussian: {
      if (own_scores.empty()) throw InputError("gaussian attack needs the client's scores");
      std::normal_distribution<double> noise(0.0, spec.gaussian_std);
      std::vector<double> perturbed(own_scores.size());
      for (std::size_t i = 0; i < own_scores.size(); ++i) {
        perturbed[i] = std::clamp(own_scores[i] + noise(rng), 0.0, 1.0);
      }
      return ClientReport(client_id, n, histogram_characterize(perturbed, edges), edges);
    }
    case AttackKind::kMimic: {
      if (benign_reports.empty()) throw InputError("mimic attack needs benign reports");
      std::uniform_int_distribution<std::size_t> pick(0, benign_reports.size() - 1);
      const auto& target = benign_reports[pick(rng)];
      if (!(target.edges == edges)) throw InputError("mimic target uses different bin edges");
      return ClientReport(client_id, n, target.v, edges);
    }
    case AttackKind::kNone: {
      if (own_scores.empty()) throw InputError("honest report needs the client's scores");
      return ClientReport(client_id, n, histogram_characterize(own_scores, edges), edges);
    }
  }
  throw InputError("unhandled attack kind");
}

}  // namespace robfcp
