#ifndef ROBFCP_DETECTION_H_
#define ROBFCP_DETECTION_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "robfcp/sketch.h"

namespace robfcp {

// Distance used between characterization vectors: an l_p norm of the
// difference (p >= 1), l_inf, or cosine distance 1 - cos(u, v).
class DistanceNorm {
 public:
  enum class Kind { kLp, kLInf, kCosine };

  static DistanceNorm lp(int p);
  static DistanceNorm linf() { return DistanceNorm(Kind::kLInf, 0); }
  static DistanceNorm cosine() { return DistanceNorm(Kind::kCosine, 0); }
  // "1", "2", ..., "inf", "cosine".
  static DistanceNorm parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  int p() const noexcept { return p_; }
  std::string name() const;

  double operator()(std::span<const double> a, std::span<const double> b) const;

 private:
  DistanceNorm(Kind kind, int p) : kind_(kind), p_(p) {}
  Kind kind_;
  int p_;
};

// Symmetric K x K matrix with zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix(std::size_t k, DistanceNorm norm);

  std::size_t size() const noexcept { return k_; }
  const DistanceNorm& norm() const noexcept { return norm_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * k_ + j]; }
  void set(std::size_t i, std::size_t j, double value);

 private:
  std::size_t k_;
  DistanceNorm norm_;
  std::vector<double> d_;
};

DistanceMatrix pairwise_distances(std::span<const ClientReport> reports, DistanceNorm norm);
DistanceMatrix pairwise_distances(std::span<const std::vector<double>> vectors,
                                  DistanceNorm norm);

// M(k): mean distance from client k to its k_b - 1 nearest other clients.
std::vector<double> maliciousness_scores(const DistanceMatrix& d, std::size_t k_b);

struct MaliciousnessRanking {
  std::vector<double> scores;
  std::vector<std::size_t> benign_set;  // positions, ascending
  std::size_t k_b_used;
};

// Keeps the k_b lowest-scored positions; equal scores go to the lower index.
MaliciousnessRanking select_benign(std::span<const double> scores, std::size_t k_b);

// Positions sorted by ascending score, ties by index.
std::vector<std::size_t> rank_by_score(std::span<const double> scores);

}  // namespace robfcp

#endif  // ROBFCP_DETECTION_H_
