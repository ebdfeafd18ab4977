#ifndef ROBFCP_SKETCH_H_
#define ROBFCP_SKETCH_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace robfcp {

// Cut points 0 = a_0 < a_1 < ... < a_H = 1 partitioning the score range.
class BinEdges {
 public:
  explicit BinEdges(std::vector<double> edges);

  std::size_t num_bins() const noexcept { return edges_.size() - 1; }
  std::span<const double> edges() const noexcept { return edges_; }
  double lower(std::size_t bin) const { return edges_[bin]; }
  double upper(std::size_t bin) const { return edges_[bin + 1]; }

  // Bin of a score in [0,1]: half-open [a_{h}, a_{h+1}) except the last bin,
  // which is closed so that s = 1 lands there.
  std::size_t bin_of(double score) const;

  friend bool operator==(const BinEdges&, const BinEdges&) = default;

 private:
  std::vector<double> edges_;
};

BinEdges uniform_bin_edges(std::size_t num_bins);

// Histogram probabilities of one client's scores. Non-negative, sums to one.
class CharacterizationVector {
 public:
  explicit CharacterizationVector(std::vector<double> v);

  std::size_t size() const noexcept { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<const double> values() const noexcept { return v_; }

  friend bool operator==(const CharacterizationVector&,
                         const CharacterizationVector&) = default;

 private:
  std::vector<double> v_;
};

// The only message a client sends: its id, its (server-trusted) calibration
// sample count and its sketch.
struct ClientReport {
  ClientReport(std::int64_t client_id, std::int64_t n, CharacterizationVector v,
               BinEdges edges);

  std::int64_t client_id;
  std::int64_t n;
  CharacterizationVector v;
  BinEdges edges;
};

// Per-bin counts of a score sample. Scores must lie in [0,1].
std::vector<std::int64_t> bin_counts(std::span<const double> scores, const BinEdges& edges);

CharacterizationVector histogram_characterize(std::span<const double> scores,
                                              const BinEdges& edges);

struct GaussianSummary {
  double mean;
  double stddev;  // population
};

GaussianSummary gaussian_characterize(std::span<const double> scores);

// Integer bin counts summing to r.n. floor(v_h * n) per bin, then the residual
// goes to the largest-mass bin (lowest index on ties). Exact for honest
// reports; deterministic for inconsistent ones.
std::vector<std::int64_t> reconstruct_counts(const ClientReport& r);

}  // namespace robfcp

#endif  // ROBFCP_SKETCH_H_
