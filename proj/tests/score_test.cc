#include <doctest.h>

#include <random>
#include <vector>

#include "robfcp/error.h"
#include "robfcp/score.h"

using namespace robfcp;

namespace {

ProbabilityVector random_probs(std::mt19937_64& rng, std::size_t c) {
  std::gamma_distribution<double> g(0.7, 1.0);
  std::vector<double> p(c);
  double total = 0.0;
  for (auto& x : p) total += (x = g(rng) + 1e-12);
  for (auto& x : p) x /= total;
  return ProbabilityVector(p);
}

}  // namespace

TEST_CASE("probability vector invariants") {
  CHECK_NOTHROW(ProbabilityVector({0.5, 0.5}));
  CHECK_THROWS_AS(ProbabilityVector({1.0}), InputError);
  CHECK_THROWS_AS(ProbabilityVector({0.6, 0.6}), InputError);
  CHECK_THROWS_AS(ProbabilityVector({1.2, -0.2}), InputError);
}

TEST_CASE("lac score") {
  CHECK(lac_score(ProbabilityVector({0.8, 0.2}), 0) == doctest::Approx(0.2));
  CHECK(lac_score(ProbabilityVector({1.0, 0.0}), 0) == 0.0);
  CHECK(lac_score(ProbabilityVector({0.35, 0.65}), 0) == doctest::Approx(0.65));
  CHECK_THROWS_AS(lac_score(ProbabilityVector({0.5, 0.5}), 2), InputError);
}

TEST_CASE("aps score") {
  const ProbabilityVector p({0.5, 0.3, 0.2});
  CHECK(aps_score(p, 0, 1.0) == doctest::Approx(0.5));
  CHECK(aps_score(p, 2, 0.0) == doctest::Approx(0.8));
  CHECK(aps_score(p, 1, 0.5) == doctest::Approx(0.65));
  CHECK_THROWS_AS(aps_score(p, 0, 1.5), InputError);
  CHECK_THROWS_AS(aps_score(p, 0, -0.1), InputError);

  // Ties with y are excluded from the leading sum.
  const ProbabilityVector tied({0.4, 0.4, 0.2});
  CHECK(aps_score(tied, 1, 0.0) == doctest::Approx(0.0));
  CHECK(aps_score(tied, 1, 1.0) == doctest::Approx(0.4));
}

TEST_CASE("batch scores") {
  Rng rng(1);
  std::vector<LabeledProbs> rows = {{ProbabilityVector({0.8, 0.2}), 0}};
  const auto one = batch_scores(rows, ScoreKind::kLac, rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == doctest::Approx(0.2));

  rows.push_back(rows.front());
  const auto two = batch_scores(rows, ScoreKind::kLac, rng);
  CHECK(two[0] == two[1]);

  std::vector<LabeledProbs> aps_rows;
  std::mt19937_64 gen(5);
  for (int i = 0; i < 50; ++i) aps_rows.push_back({random_probs(gen, 4), std::size_t(i % 4)});
  Rng a(99), b(99);
  CHECK(batch_scores(aps_rows, ScoreKind::kAps, a) == batch_scores(aps_rows, ScoreKind::kAps, b));

  CHECK_THROWS_AS(batch_scores(std::vector<LabeledProbs>{}, ScoreKind::kLac, rng), InputError);
}

TEST_CASE("score properties on random inputs") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t c = 2 + trial % 9;
    const auto p = random_probs(gen, c);
    const std::size_t y = trial % c;
    const double u = unif(gen);

    const double lac = lac_score(p, y);
    const double lo = aps_score(p, y, 0.0);
    const double mid = aps_score(p, y, u);
    const double hi = aps_score(p, y, 1.0);
    CHECK(lac >= 0.0);
    CHECK(lac <= 1.0);
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0 + 1e-12);
    CHECK(lo <= mid);
    CHECK(mid <= hi);

    // u = 1: strictly greater set plus p_y itself.
    double expect = p[y];
    for (std::size_t j = 0; j < c; ++j) {
      if (p[j] > p[y]) expect += p[j];
    }
    CHECK(hi == doctest::Approx(expect).epsilon(1e-12));

    // Raising p_y (others rescaled) lowers the LAC score.
    std::vector<double> boosted(p.probs().begin(), p.probs().end());
    const double new_py = p[y] + 0.5 * (1.0 - p[y]);
    const double scale = (1.0 - new_py) / (1.0 - p[y] + 1e-300);
    for (std::size_t j = 0; j < c; ++j) boosted[j] = j == y ? new_py : boosted[j] * scale;
    if (p[y] < 1.0 - 1e-9) {
      CHECK(lac_score(ProbabilityVector(boosted), y) <= lac);
    }
  }
}

TEST_CASE("test batch validates rows") {
  TestBatch batch;
  batch.add({{0.1, 0.2}, 1});
  CHECK(batch.size() == 1);
  CHECK_THROWS_AS(batch.add({{0.1, 0.2}, 2}), InputError);
  CHECK_THROWS_AS(batch.add({{0.1, 1.2}, 0}), InputError);
}
