#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "oracles.h"
#include "robfcp/error.h"
#include "robfcp/sketch.h"

using namespace robfcp;

namespace {

std::vector<double> as_vec(const CharacterizationVector& v) {
  return {v.values().begin(), v.values().end()};
}

}  // namespace

TEST_CASE("uniform bin edges") {
  CHECK(uniform_bin_edges(1).edges().size() == 2);
  const auto two = uniform_bin_edges(2);
  CHECK(std::vector<double>(two.edges().begin(), two.edges().end()) ==
        std::vector<double>{0.0, 0.5, 1.0});
  const auto four = uniform_bin_edges(4);
  CHECK(std::vector<double>(four.edges().begin(), four.edges().end()) ==
        std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK_THROWS_AS(uniform_bin_edges(0), InputError);
  CHECK_THROWS_AS(BinEdges({0.0, 0.5, 0.5, 1.0}), InputError);
  CHECK_THROWS_AS(BinEdges({0.1, 1.0}), InputError);
}

TEST_CASE("histogram characterization") {
  const std::vector<double> spread = {0.1, 0.3, 0.6, 0.9};
  CHECK(as_vec(histogram_characterize(spread, uniform_bin_edges(4))) ==
        std::vector<double>{0.25, 0.25, 0.25, 0.25});
  CHECK(as_vec(histogram_characterize(std::vector<double>{1.0}, uniform_bin_edges(2))) ==
        std::vector<double>{0.0, 1.0});
  CHECK(as_vec(histogram_characterize(std::vector<double>{0.5}, uniform_bin_edges(2))) ==
        std::vector<double>{0.0, 1.0});
  CHECK(as_vec(histogram_characterize(std::vector<double>{0.0}, uniform_bin_edges(3)))[0] == 1.0);

  CHECK_THROWS_AS(histogram_characterize(std::vector<double>{}, uniform_bin_edges(2)),
                  InputError);
  CHECK_THROWS_AS(histogram_characterize(std::vector<double>{1.5}, uniform_bin_edges(2)),
                  InputError);
  CHECK_THROWS_AS(histogram_characterize(std::vector<double>{-0.1}, uniform_bin_edges(2)),
                  InputError);
}

TEST_CASE("gaussian characterization") {
  auto g = gaussian_characterize(std::vector<double>{0.0, 1.0});
  CHECK(g.mean == doctest::Approx(0.5));
  CHECK(g.stddev == doctest::Approx(0.5));
  g = gaussian_characterize(std::vector<double>{0.3, 0.3, 0.3});
  CHECK(g.mean == doctest::Approx(0.3));
  CHECK(g.stddev == doctest::Approx(0.0));
  // sqrt(((0.3)^2 + (0.1)^2 + (0.1)^2 + (0.3)^2) / 4) = sqrt(0.05)
  g = gaussian_characterize(std::vector<double>{0.2, 0.4, 0.6, 0.8});
  CHECK(g.mean == doctest::Approx(0.5));
  CHECK(g.stddev == doctest::Approx(0.22360679774997896));
  CHECK_THROWS_AS(gaussian_characterize(std::vector<double>{}), InputError);
}

TEST_CASE("reconstruct counts") {
  const auto e2 = uniform_bin_edges(2);
  CHECK(reconstruct_counts(ClientReport(0, 4, CharacterizationVector({0.25, 0.75}), e2)) ==
        std::vector<std::int64_t>{1, 3});
  // floor gives [1,1]; the missing unit goes to the largest bin, lowest index.
  CHECK(reconstruct_counts(ClientReport(0, 3, CharacterizationVector({0.5, 0.5}), e2)) ==
        std::vector<std::int64_t>{2, 1});
  CHECK(reconstruct_counts(ClientReport(0, 7, CharacterizationVector({1.0, 0.0}), e2)) ==
        std::vector<std::int64_t>{7, 0});
}

TEST_CASE("client report invariants") {
  const auto e2 = uniform_bin_edges(2);
  CHECK_THROWS_AS(ClientReport(0, 0, CharacterizationVector({0.5, 0.5}), e2), InputError);
  CHECK_THROWS_AS(ClientReport(0, 3, CharacterizationVector({0.2, 0.3, 0.5}), e2), InputError);
  CHECK_THROWS_AS(CharacterizationVector({0.7, 0.7}), InputError);
  CHECK_THROWS_AS(CharacterizationVector({1.2, -0.2}), InputError);
}

TEST_CASE("sketch properties on random samples") {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + gen() % 400;
    const std::size_t m = 1 + gen() % 50;
    std::vector<double> scores(n);
    for (auto& s : scores) {
      // Mix in exact edge values and the endpoints.
      const auto r = gen() % 10;
      s = r == 0 ? 1.0 : r == 1 ? static_cast<double>(gen() % (m + 1)) / static_cast<double>(m)
                                : unif(gen);
    }
    const auto coarse_edges = uniform_bin_edges(m);
    const auto fine_edges = uniform_bin_edges(2 * m);
    const auto v = histogram_characterize(scores, coarse_edges);

    // Entries are multiples of 1/n and match the direct-arithmetic oracle.
    std::vector<std::int64_t> expect(m, 0);
    for (double s : scores) ++expect[oracle::uniform_bin(s, m)];
    const ClientReport report(0, static_cast<std::int64_t>(n), v, coarse_edges);
    CHECK(reconstruct_counts(report) == bin_counts(scores, coarse_edges));
    CHECK(bin_counts(scores, coarse_edges) == expect);

    // Permutation invariance.
    auto shuffled = scores;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    CHECK(histogram_characterize(shuffled, coarse_edges) == v);

    // Merging adjacent bins of the 2m histogram gives the m histogram.
    const auto fine = bin_counts(scores, fine_edges);
    std::vector<std::int64_t> merged(m);
    for (std::size_t h = 0; h < m; ++h) merged[h] = fine[2 * h] + fine[2 * h + 1];
    CHECK(merged == bin_counts(scores, coarse_edges));

    const auto g = gaussian_characterize(scores);
    CHECK(g.mean >= 0.0);
    CHECK(g.mean <= 1.0);
    CHECK(g.stddev >= 0.0);
    CHECK(g.stddev <= 0.5 + 1e-12);
  }
}
