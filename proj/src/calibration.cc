#include "robfcp/calibration.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "robfcp/error.h"

namespace robfcp {

namespace {

// ceil((1 - alpha) * m), robust to (1 - alpha) * m landing one ulp above an
// integer (e.g. 0.9 * 100).
std::int64_t conformal_rank(double alpha, std::int64_t m) {
  const double x = (1.0 - alpha) * static_cast<double>(m);
  return static_cast<std::int64_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("alpha must lie in (0,1), got " + std::to_string(alpha));
  }
}

}  // namespace

AggregateHistogram aggregate(std::span<const ClientReport> reports,
                             std::span<const std::size_t> selected) {
  if (selected.empty()) throw InputError("aggregate: empty client selection");
  for (std::size_t idx : selected) {
    if (idx >= reports.size()) {
      throw InputError("aggregate: selected position " + std::to_string(idx) +
                       " out of range");
    }
  }
  const auto& edges = reports[selected.front()].edges;
  AggregateHistogram agg{std::vector<std::int64_t>(edges.num_bins(), 0), 0, 0, edges};
  for (std::size_t idx : selected) {
    const auto& r = reports[idx];
    if (!(r.edges == edges)) {
      throw InputError("aggregate: client " + std::to_string(r.client_id) +
                       " reports different bin edges");
    }
    const auto counts = reconstruct_counts(r);
    for (std::size_t h = 0; h < counts.size(); ++h) agg.counts[h] += counts[h];
    agg.total_n += r.n;
    ++agg.num_clients;
  }
  return agg;
}

AggregateHistogram aggregate_all(std::span<const ClientReport> reports) {
  std::vector<std::size_t> all(reports.size());
  std::iota(all.begin(), all.end(), 0);
  return aggregate(reports, all);
}

QuantileEstimate federated_quantile(const AggregateHistogram& agg, double alpha) {
  check_alpha(alpha);
  if (agg.num_clients == 0 || agg.total_n <= 0) {
    throw InputError("federated_quantile: empty aggregate");
  }
  const double per_client =
      static_cast<double>(agg.total_n) / static_cast<double>(agg.num_clients);
  const double min_alpha = 1.0 / (per_client + 1.0);
  if (alpha < min_alpha - 1e-12) {
    throw InputError("alpha=" + std::to_string(alpha) + " below the admissible minimum " +
                     std::to_string(min_alpha) + " = 1/(N/K + 1)");
  }
  const auto m = agg.total_n + static_cast<std::int64_t>(agg.num_clients);
  const std::int64_t rank = std::max<std::int64_t>(1, conformal_rank(alpha, m));
  const std::int64_t wanted = std::min(rank, agg.total_n);
  std::int64_t cumulative = 0;
  std::size_t bin = agg.counts.size() - 1;
  for (std::size_t h = 0; h < agg.counts.size(); ++h) {
    cumulative += agg.counts[h];
    if (cumulative >= wanted) {
      bin = h;
      break;
    }
  }
  // An out-of-range rank means "larger than every calibration score".
  const double q = rank > agg.total_n ? 1.0 : agg.edges.upper(bin);
  if (rank > agg.total_n) bin = agg.counts.size() - 1;
  return {q, wanted, bin, alpha};
}

double exact_federated_quantile(std::span<const double> pooled_scores,
                                std::size_t num_clients, double alpha) {
  check_alpha(alpha);
  if (pooled_scores.empty()) throw InputError("exact_federated_quantile: no scores");
  const auto n = static_cast<std::int64_t>(pooled_scores.size());
  const std::int64_t rank = std::max<std::int64_t>(
      1, conformal_rank(alpha, n + static_cast<std::int64_t>(num_clients)));
  if (rank > n) return 1.0;
  std::vector<double> sorted(pooled_scores.begin(), pooled_scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
  return sorted[static_cast<std::size_t>(rank - 1)];
}

std::vector<std::size_t> prediction_set(std::span<const double> label_scores,
                                        const QuantileEstimate& q) {
  std::vector<std::size_t> labels;
  for (std::size_t y = 0; y < label_scores.size(); ++y) {
    if (label_scores[y] <= q.q_hat) labels.push_back(y);
  }
  return labels;
}

EvalMetrics evaluate(const TestBatch& test, const QuantileEstimate& q) {
  if (test.empty()) throw InputError("evaluate: empty test batch");
  std::size_t covered = 0;
  std::size_t total_size = 0;
  for (const auto& row : test.rows()) {
    if (row.label_scores[row.label] <= q.q_hat) ++covered;
    for (double s : row.label_scores) total_size += s <= q.q_hat ? 1 : 0;
  }
  const double n = static_cast<double>(test.size());
  return {static_cast<double>(covered) / n, static_cast<double>(total_size) / n};
}

}  // namespace robfcp
