#ifndef ROBFCP_CALIBRATION_H_
#define ROBFCP_CALIBRATION_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "robfcp/score.h"
#include "robfcp/sketch.h"

namespace robfcp {

// Pooled bin counts of the selected clients.
struct AggregateHistogram {
  std::vector<std::int64_t> counts;
  std::int64_t total_n = 0;
  std::size_t num_clients = 0;
  BinEdges edges;
};

// Sums reconstructed counts over the reports whose positions are in
// `selected`. Result is independent of the order of `selected`.
AggregateHistogram aggregate(std::span<const ClientReport> reports,
                             std::span<const std::size_t> selected);
AggregateHistogram aggregate_all(std::span<const ClientReport> reports);

struct QuantileEstimate {
  double q_hat;
  std::int64_t target_rank;
  std::size_t bin_index;
  double alpha;
};

// q_hat is the upper edge of the bin holding the k-th smallest pooled score,
// k = ceil((1 - alpha)(N + K)), clamped to N. Conservative: never below the
// exact empirical quantile of the sketched sample, and at most one bin width
// above it.
QuantileEstimate federated_quantile(const AggregateHistogram& agg, double alpha);

// Exact split-conformal quantile of raw pooled scores: the k-th smallest with
// the same rank rule (1.0 when the rank exceeds the sample).
double exact_federated_quantile(std::span<const double> pooled_scores,
                                std::size_t num_clients, double alpha);

std::vector<std::size_t> prediction_set(std::span<const double> label_scores,
                                        const QuantileEstimate& q);

struct EvalMetrics {
  double marginal_coverage;
  double average_set_size;
};

EvalMetrics evaluate(const TestBatch& test, const QuantileEstimate& q);

}  // namespace robfcp

#endif  // ROBFCP_CALIBRATION_H_
