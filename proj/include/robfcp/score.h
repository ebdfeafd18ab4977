#ifndef ROBFCP_SCORE_H_
#define ROBFCP_SCORE_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "robfcp/rng.h"

namespace robfcp {

// Class-probability vector of a classifier output. Entries lie in [0,1] and
// sum to one within 1e-9; at least two classes.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> probs);

  std::size_t num_classes() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

 private:
  std::vector<double> probs_;
};

enum class ScoreKind { kLac, kAps };

std::string_view score_kind_name(ScoreKind kind);
ScoreKind parse_score_kind(std::string_view name);

// Least-ambiguous-set score: 1 - p_y.
double lac_score(const ProbabilityVector& p, std::size_t label);

// Adaptive prediction set score: mass of classes strictly more probable than
// y, plus u * p_y. Classes tied with y do not enter the leading sum.
double aps_score(const ProbabilityVector& p, std::size_t label, double u);

struct LabeledProbs {
  ProbabilityVector probs;
  std::size_t label;
};

// One score per row. APS draws its randomizer u ~ U[0,1] per row from rng, in
// row order; LAC leaves rng untouched.
std::vector<double> batch_scores(std::span<const LabeledProbs> rows, ScoreKind kind,
                                 Rng& rng);

// Scores of every candidate label for one test point. A single u is shared by
// all labels of the row so the APS sets stay nested in q.
std::vector<double> label_scores(const ProbabilityVector& p, ScoreKind kind, double u);

// Test data: per-label score vectors plus the true label.
struct TestRow {
  std::vector<double> label_scores;
  std::size_t label;
};

class TestBatch {
 public:
  TestBatch() = default;
  explicit TestBatch(std::vector<TestRow> rows);

  void add(TestRow row);
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  std::span<const TestRow> rows() const noexcept { return rows_; }

 private:
  std::vector<TestRow> rows_;
};

}  // namespace robfcp

#endif  // ROBFCP_SCORE_H_
