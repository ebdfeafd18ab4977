#include "robfcp/sketch.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "robfcp/error.h"

namespace robfcp {

BinEdges::BinEdges(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) throw InputError("bin edges need at least 2 cut points");
  if (edges_.front() != 0.0 || edges_.back() != 1.0) {
    throw InputError("bin edges must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (!(edges_[i] > edges_[i - 1])) {
      throw InputError("bin edges must be strictly increasing (index " +
                       std::to_string(i) + ")");
    }
  }
}

std::size_t BinEdges::bin_of(double score) const {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw InputError("score " + std::to_string(score) + " outside [0,1]");
  }
  // First edge strictly greater than the score; its predecessor opens the bin.
  auto it = std::upper_bound(edges_.begin() + 1, edges_.end(), score);
  const auto bin = static_cast<std::size_t>(it - edges_.begin()) - 1;
  return std::min(bin, num_bins() - 1);
}

BinEdges uniform_bin_edges(std::size_t num_bins) {
  if (num_bins == 0) throw InputError("number of bins must be >= 1");
  std::vector<double> edges(num_bins + 1);
  for (std::size_t h = 0; h <= num_bins; ++h) {
    edges[h] = static_cast<double>(h) / static_cast<double>(num_bins);
  }
  return BinEdges(std::move(edges));
}

CharacterizationVector::CharacterizationVector(std::vector<double> v) : v_(std::move(v)) {
  if (v_.empty()) throw InputError("characterization vector is empty");
  double total = 0.0;
  for (double x : v_) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw InputError("characterization vector entry " + std::to_string(x) +
                       " is negative or not finite");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InputError("characterization vector sums to " + std::to_string(total) +
                     ", expected 1");
  }
}

ClientReport::ClientReport(std::int64_t id, std::int64_t count, CharacterizationVector vec,
                           BinEdges bin_edges)
    : client_id(id), n(count), v(std::move(vec)), edges(std::move(bin_edges)) {
  if (n < 1) throw InputError("report n must be >= 1, got " + std::to_string(n));
  if (v.size() != edges.num_bins()) {
    throw InputError("report has " + std::to_string(v.size()) + " bins but " +
                     std::to_string(edges.edges().size()) + " edges");
  }
}

std::vector<std::int64_t> bin_counts(std::span<const double> scores, const BinEdges& edges) {
  std::vector<std::int64_t> counts(edges.num_bins(), 0);
  for (double s : scores) ++counts[edges.bin_of(s)];
  return counts;
}

CharacterizationVector histogram_characterize(std::span<const double> scores,
                                              const BinEdges& edges) {
  if (scores.empty()) throw InputError("histogram_characterize: empty score sample");
  const auto counts = bin_counts(scores, edges);
  const double n = static_cast<double>(scores.size());
  std::vector<double> v(counts.size());
  for (std::size_t h = 0; h < counts.size(); ++h) v[h] = static_cast<double>(counts[h]) / n;
  return CharacterizationVector(std::move(v));
}

GaussianSummary gaussian_characterize(std::span<const double> scores) {
  if (scores.empty()) throw InputError("gaussian_characterize: empty score sample");
  const double n = static_cast<double>(scores.size());
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  return {mean, std::sqrt(ss / n)};
}

std::vector<std::int64_t> reconstruct_counts(const ClientReport& r) {
  const auto values = r.v.values();
  std::vector<std::int64_t> counts(values.size());
  std::int64_t total = 0;
  for (std::size_t h = 0; h < values.size(); ++h) {
    counts[h] = static_cast<std::int64_t>(
        std::floor(values[h] * static_cast<double>(r.n) + 1e-9));
    total += counts[h];
  }
  const std::int64_t residual = r.n - total;
  if (residual != 0) {
    const auto largest = static_cast<std::size_t>(
        std::max_element(values.begin(), values.end()) - values.begin());
    counts[largest] += residual;
    // A negative residual larger than the top bin is only possible for
    // vectors summing well above one, which the type rejects.
    counts[largest] = std::max<std::int64_t>(counts[largest], 0);
  }
  return counts;
}

}  // namespace robfcp
