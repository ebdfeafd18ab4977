#include "robfcp/score.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "robfcp/error.h"

namespace robfcp {

namespace {

void check_label(const ProbabilityVector& p, std::size_t label) {
  if (label >= p.num_classes()) {
    throw InputError("label " + std::to_string(label) + " out of range for " +
                     std::to_string(p.num_classes()) + " classes");
  }
}

void check_score(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw InputError("score " + std::to_string(s) + " outside [0,1]");
  }
}

}  // namespace

ProbabilityVector::ProbabilityVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) throw InputError("probability vector needs at least 2 classes");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InputError("class probability " + std::to_string(p) + " outside [0,1]");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InputError("class probabilities sum to " + std::to_string(total) + ", expected 1");
  }
}

std::string_view score_kind_name(ScoreKind kind) {
  return kind == ScoreKind::kLac ? "lac" : "aps";
}

ScoreKind parse_score_kind(std::string_view name) {
  if (name == "lac" || name == "LAC") return ScoreKind::kLac;
  if (name == "aps" || name == "APS") return ScoreKind::kAps;
  throw InputError("unknown score kind '" + std::string(name) + "' (expected lac|aps)");
}

double lac_score(const ProbabilityVector& p, std::size_t label) {
  check_label(p, label);
  // p_y <= 1 holds, but 1 - p_y can still round below zero for p_y = 1 + ulp.
  return std::clamp(1.0 - p[label], 0.0, 1.0);
}

double aps_score(const ProbabilityVector& p, std::size_t label, double u) {
  check_label(p, label);
  if (!(u >= 0.0 && u <= 1.0)) {
    throw InputError("APS randomizer u=" + std::to_string(u) + " outside [0,1]");
  }
  const double py = p[label];
  double above = 0.0;
  for (double pj : p.probs()) {
    if (pj > py) above += pj;
  }
  return std::clamp(above + py * u, 0.0, 1.0);
}

std::vector<double> batch_scores(std::span<const LabeledProbs> rows, ScoreKind kind,
                                 Rng& rng) {
  if (rows.empty()) throw InputError("batch_scores: empty input");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (kind == ScoreKind::kLac) {
      out.push_back(lac_score(row.probs, row.label));
    } else {
      out.push_back(aps_score(row.probs, row.label, unif(rng)));
    }
  }
  return out;
}

std::vector<double> label_scores(const ProbabilityVector& p, ScoreKind kind, double u) {
  std::vector<double> out(p.num_classes());
  for (std::size_t y = 0; y < out.size(); ++y) {
    out[y] = kind == ScoreKind::kLac ? lac_score(p, y) : aps_score(p, y, u);
  }
  return out;
}

TestBatch::TestBatch(std::vector<TestRow> rows) : rows_() {
  rows_.reserve(rows.size());
  for (auto& r : rows) add(std::move(r));
}

void TestBatch::add(TestRow row) {
  if (row.label >= row.label_scores.size()) {
    throw InputError("test row label " + std::to_string(row.label) + " out of range");
  }
  for (double s : row.label_scores) check_score(s);
  rows_.push_back(std::move(row));
}

}  // namespace robfcp
