#ifndef ROBFCP_ATTACKS_H_
#define ROBFCP_ATTACKS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "robfcp/rng.h"
#include "robfcp/sketch.h"

namespace robfcp {

enum class AttackKind { kNone, kCoverage, kEfficiency, kGaussian, kMimic };

// Bin that a point-mass attack fills.
enum class MassDirection { kLow, kHigh };

std::string_view attack_kind_name(AttackKind kind);
AttackKind parse_attack_kind(std::string_view name);
std::string_view mass_direction_name(MassDirection d);
MassDirection parse_mass_direction(std::string_view name);

struct AttackSpec {
  AttackKind kind = AttackKind::kNone;
  double gaussian_std = 0.5;
  std::optional<MassDirection> direction_override;

  void validate() const;
};

// Attack semantics follow their effect on the k-th smallest quantile:
//   Coverage   point mass in the lowest bin; drags q_hat down.
//   Efficiency point mass in the highest bin; pushes q_hat to 1.
//   Gaussian   own scores + N(0, std^2), clipped to [0,1], re-binned.
//   Mimic      copy of a uniformly chosen benign report's vector.
//   None       honest histogram of own scores.
// `own_scores` is the data the malicious client would have reported honestly.
// The returned report always carries the trusted sample count n.
ClientReport apply_attack(const AttackSpec& spec, std::int64_t client_id,
                          std::span<const double> own_scores,
                          std::span<const ClientReport> benign_reports,
                          const BinEdges& edges, std::int64_t n, Rng& rng);

CharacterizationVector point_mass(std::size_t num_bins, std::size_t bin);

}  // namespace robfcp

#endif  // ROBFCP_ATTACKS_H_
