#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.h"
#include "robfcp/calibration.h"
#include "robfcp/error.h"
#include "robfcp/sketch.h"

using namespace robfcp;

namespace {

ClientReport report_from_counts(std::size_t id, const std::vector<std::int64_t>& counts) {
  std::int64_t n = 0;
  for (auto c : counts) n += c;
  std::vector<double> v;
  for (auto c : counts) v.push_back(static_cast<double>(c) / static_cast<double>(n));
  return ClientReport(id, n, CharacterizationVector(v), uniform_bin_edges(counts.size()));
}

// Expands each bin into copies of its midpoint, then ranks the multiset.
double brute_force_quantile(const std::vector<std::int64_t>& counts, std::size_t k_b,
                            std::int64_t num, std::int64_t den) {
  const std::size_t h = counts.size();
  std::vector<double> pooled;
  for (std::size_t b = 0; b < h; ++b) {
    for (std::int64_t i = 0; i < counts[b]; ++i) pooled.push_back((b + 0.5) / static_cast<double>(h));
  }
  const auto rank = oracle::rank_rational(num, den, static_cast<std::int64_t>(pooled.size() + k_b));
  const double s = oracle::kth_smallest(pooled, rank);
  if (s >= 1.0) return 1.0;
  return static_cast<double>(oracle::uniform_bin(s, h) + 1) / static_cast<double>(h);
}

}  // namespace

TEST_CASE("aggregate") {
  const auto e2 = uniform_bin_edges(2);
  std::vector<ClientReport> one = {ClientReport(0, 10, CharacterizationVector({0.5, 0.5}), e2)};
  auto agg = aggregate_all(one);
  CHECK(agg.counts == std::vector<std::int64_t>{5, 5});
  CHECK(agg.total_n == 10);
  CHECK(agg.num_clients == 1);

  one.push_back(one.front());
  agg = aggregate_all(one);
  CHECK(agg.counts == std::vector<std::int64_t>{10, 10});
  CHECK(agg.total_n == 20);
  CHECK(agg.num_clients == 2);

  const std::vector<std::size_t> only_second = {1};
  CHECK(aggregate(one, only_second).num_clients == 1);
  CHECK_THROWS_AS(aggregate(one, std::vector<std::size_t>{}), InputError);

  one.push_back(ClientReport(2, 10, CharacterizationVector({0.5, 0.5}), BinEdges({0.0, 0.3, 1.0})));
  CHECK_THROWS_AS(aggregate_all(one), InputError);
}

TEST_CASE("federated quantile") {
  const std::vector<std::int64_t> counts = {40, 30, 20, 9};
  const std::vector<ClientReport> reports = {report_from_counts(0, counts)};
  const auto agg = aggregate_all(reports);

  const auto q10 = federated_quantile(agg, 0.1);
  CHECK(q10.target_rank == 90);
  CHECK(q10.bin_index == 2);
  CHECK(q10.q_hat == 0.75);
  CHECK(q10.q_hat == brute_force_quantile(counts, 1, 1, 10));

  const auto q50 = federated_quantile(agg, 0.5);
  CHECK(q50.target_rank == 50);
  CHECK(q50.bin_index == 1);
  CHECK(q50.q_hat == 0.5);
  CHECK(q50.q_hat == brute_force_quantile(counts, 1, 1, 2));

  const std::vector<ClientReport> top = {report_from_counts(0, {0, 0, 0, 50})};
  for (double a : {0.05, 0.1, 0.3, 0.9}) CHECK(federated_quantile(aggregate_all(top), a).q_hat == 1.0);

  CHECK_THROWS_AS(federated_quantile(agg, 0.0), InputError);
  CHECK_THROWS_AS(federated_quantile(agg, 1.0), InputError);
  // alpha below 1/(N/K + 1) = 0.01 cannot be certified with 99 scores.
  CHECK_THROWS_AS(federated_quantile(agg, 0.005), InputError);
}

TEST_CASE("federated quantile agrees with the multiset oracle") {
  std::mt19937_64 gen(42);
  const std::vector<std::pair<std::int64_t, std::int64_t>> alphas = {
      {1, 10}, {1, 20}, {1, 5}, {1, 2}, {3, 10}};
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t h = 1 + gen() % 20;
    const std::size_t k = 1 + gen() % 5;
    std::vector<ClientReport> reports;
    std::vector<std::int64_t> total(h, 0);
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<std::int64_t> counts(h);
      std::int64_t n = 0;
      while (n == 0) {
        n = 0;
        for (auto& x : counts) n += (x = static_cast<std::int64_t>(gen() % 30));
      }
      for (std::size_t b = 0; b < h; ++b) total[b] += counts[b];
      reports.push_back(report_from_counts(c, counts));
    }
    const auto agg = aggregate_all(reports);
    CHECK(agg.counts == total);
    for (auto [num, den] : alphas) {
      const double alpha = static_cast<double>(num) / static_cast<double>(den);
      const double n_over_k = static_cast<double>(agg.total_n) / static_cast<double>(k);
      if (alpha < 1.0 / (n_over_k + 1.0)) continue;
      CHECK(federated_quantile(agg, alpha).q_hat == brute_force_quantile(total, k, num, den));
    }
  }
}

TEST_CASE("sketched quantile brackets the exact quantile") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t h = 1 + gen() % 50;
    const std::size_t k = 1 + gen() % 6;
    const double alpha = 0.05 + 0.4 * unif(gen);
    const auto edges = uniform_bin_edges(h);
    std::vector<double> pooled;
    std::vector<ClientReport> reports;
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<double> scores(20 + gen() % 80);
      for (auto& s : scores) s = unif(gen) * unif(gen);
      pooled.insert(pooled.end(), scores.begin(), scores.end());
      reports.emplace_back(c, static_cast<std::int64_t>(scores.size()),
                           histogram_characterize(scores, edges), edges);
    }
    const auto q = federated_quantile(aggregate_all(reports), alpha);
    const double exact = exact_federated_quantile(pooled, k, alpha);
    CHECK(q.q_hat >= exact);
    if (exact < 1.0) CHECK(q.q_hat - exact <= 1.0 / static_cast<double>(h) + 1e-12);

    // Larger alpha never raises the threshold.
    const auto q2 = federated_quantile(aggregate_all(reports), alpha + 0.05);
    CHECK(q2.q_hat <= q.q_hat);
  }
}

TEST_CASE("prediction set and evaluation") {
  const std::vector<double> scores = {0.1, 0.6, 0.4};
  QuantileEstimate q{0.5, 0, 0, 0.1};
  CHECK(prediction_set(scores, q) == std::vector<std::size_t>{0, 2});
  q.q_hat = 1.0;
  CHECK(prediction_set(scores, q).size() == 3);
  q.q_hat = 0.0;
  CHECK(prediction_set(scores, q).empty());

  TestBatch two;
  two.add({{0.2, 0.7}, 0});
  two.add({{0.3, 0.9}, 1});
  const auto m = evaluate(two, QuantileEstimate{0.5, 0, 0, 0.1});
  CHECK(m.marginal_coverage == 0.5);
  CHECK(m.average_set_size == 1.0);

  TestBatch ten;
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> s(10);
    for (auto& x : s) x = unif(gen);
    ten.add({s, static_cast<std::size_t>(i % 10)});
  }
  const auto full = evaluate(ten, QuantileEstimate{1.0, 0, 0, 0.1});
  CHECK(full.marginal_coverage == 1.0);
  CHECK(full.average_set_size == 10.0);

  TestBatch big;
  std::vector<double> truths;
  for (int i = 0; i < 1000; ++i) {
    const double s = unif(gen);
    truths.push_back(s);
    big.add({{s, unif(gen)}, 0});
  }
  const double q90 = oracle::kth_smallest(truths, oracle::rank_rational(1, 10, 1000));
  const auto cov = evaluate(big, QuantileEstimate{q90, 0, 0, 0.1}).marginal_coverage;
  CHECK(cov >= 0.9);
  CHECK(cov <= 0.9 + 1.0 / 1000 + 1e-12);

  CHECK_THROWS_AS(evaluate(TestBatch{}, q), InputError);
}
