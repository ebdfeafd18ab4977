#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "robfcp/error.h"
#include "robfcp/rng.h"
#include "robfcp/simulation.h"

using namespace robfcp;

namespace {

SimulationConfig small_config() {
  SimulationConfig c;
  c.K = 10;
  c.n_per_client = 1000;
  c.n_test = 1000;
  c.reference_samples = 50000;
  return c;
}

}  // namespace

TEST_CASE("dirichlet mixtures") {
  Rng rng(1);
  const auto flat = dirichlet_mixture(10, 5, 1e6, rng);
  for (const auto& m : flat) {
    double l1 = 0.0, total = 0.0;
    for (double x : m) {
      l1 += std::abs(x - 0.1);
      total += x;
    }
    CHECK(l1 < 0.01);
    CHECK(total == doctest::Approx(1.0));
  }

  Rng a(9), b(9);
  CHECK(dirichlet_mixture(10, 5, 0.5, a) == dirichlet_mixture(10, 5, 0.5, b));

  int skewed = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng r(seed);
    const auto mixes = dirichlet_mixture(10, 10, 0.1, r);
    const bool any = std::any_of(mixes.begin(), mixes.end(), [](const auto& m) {
      return *std::max_element(m.begin(), m.end()) > 0.5;
    });
    skewed += any ? 1 : 0;
  }
  CHECK(skewed >= 90);
  CHECK_THROWS_AS(dirichlet_mixture(10, 5, 0.0, rng), InputError);
}

TEST_CASE("multinomial sampling") {
  Rng rng(3);
  const std::vector<double> p = {0.2, 0.0, 0.8};
  const auto counts = sample_multinomial(1000, p, rng);
  CHECK(counts[0] + counts[1] + counts[2] == 1000);
  CHECK(counts[1] == 0);
  CHECK(std::abs(counts[0] - 200) < 60);
}

TEST_CASE("client data") {
  ClientProfile saturated{2000, std::vector<double>(10, 0.1), 50.0, false};
  Rng rng(4);
  const auto sat = generate_client_data(saturated, 10, ScoreKind::kLac, 100, rng);
  CHECK(sat.calibration_scores.size() == 2000);
  CHECK(sat.test_rows.size() == 100);
  CHECK(*std::max_element(sat.calibration_scores.begin(), sat.calibration_scores.end()) < 1e-6);

  ClientProfile blind{10000, std::vector<double>(10, 0.1), 0.0, false};
  const auto none = generate_client_data(blind, 10, ScoreKind::kLac, 0, rng);
  double mean = 0.0;
  for (double s : none.calibration_scores) mean += s;
  mean /= static_cast<double>(none.calibration_scores.size());
  CHECK(std::abs(mean - 0.9) < 0.02);

  Rng a(5), b(5);
  const auto x = generate_client_data(blind, 10, ScoreKind::kAps, 10, a);
  const auto y = generate_client_data(blind, 10, ScoreKind::kAps, 10, b);
  CHECK(x.calibration_scores == y.calibration_scores);
}

TEST_CASE("config validation") {
  auto c = small_config();
  CHECK_NOTHROW(c.validate());
  c.k_m = 5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.dirichlet_beta = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.alpha = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.n_list = {100, 200};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("trials") {
  SUBCASE("no attack, no malicious clients") {
    auto c = small_config();
    c.km_known = false;
    const auto r = run_trial(c, 0);
    CHECK(r.k_m_hat == 0);
    CHECK(r.naive.marginal_coverage == r.robust.marginal_coverage);
    CHECK(r.naive.average_set_size == r.robust.average_set_size);
    CHECK(r.q_naive.q_hat == r.q_robust.q_hat);
  }
  SUBCASE("efficiency attack") {
    auto c = small_config();
    c.k_m = 4;
    c.attack.kind = AttackKind::kEfficiency;
    c.trials = 5;
    const auto mc = monte_carlo(c, 2);
    CHECK(mc.aggregates.at("naive_cov").mean > 0.99);
    CHECK(mc.aggregates.at("naive_size").mean == doctest::Approx(10.0));
    CHECK(std::abs(mc.aggregates.at("rob_cov").mean - 0.9) <= 0.02);
    CHECK(mc.aggregates.at("detect_exact").mean == 1.0);
  }
  SUBCASE("coverage attack") {
    auto c = small_config();
    c.k_m = 4;
    c.attack.kind = AttackKind::kCoverage;
    c.trials = 5;
    const auto mc = monte_carlo(c, 2);
    CHECK(std::abs(mc.aggregates.at("naive_cov").mean - 0.8333) <= 0.02);
    CHECK(std::abs(mc.aggregates.at("rob_cov").mean - 0.9) <= 0.02);
  }
}

TEST_CASE("monte carlo aggregation and determinism") {
  auto c = small_config();
  c.k_m = 2;
  c.attack.kind = AttackKind::kCoverage;

  c.trials = 1;
  const auto one = monte_carlo(c, 1);
  const auto single = run_trial(c, 0);
  CHECK(one.aggregates.at("rob_cov").mean == single.robust.marginal_coverage);
  CHECK(one.aggregates.at("rob_cov").stddev == 0.0);
  CHECK(one.aggregates.at("naive_size").mean == single.naive.average_set_size);

  c.trials = 6;
  const auto serial = monte_carlo(c, 1);
  const auto parallel = monte_carlo(c, 8);
  for (const auto& name : trial_metric_names()) {
    CHECK(serial.aggregates.at(name).mean == parallel.aggregates.at(name).mean);
    CHECK(serial.aggregates.at(name).stddev == parallel.aggregates.at(name).stddev);
  }
  for (std::size_t t = 0; t < c.trials; ++t) {
    CHECK(serial.trials[t].robust.marginal_coverage == parallel.trials[t].robust.marginal_coverage);
    CHECK(serial.trials[t].benign_set == parallel.trials[t].benign_set);
  }
}
