#include "robfcp/count_estimator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "robfcp/error.h"

namespace robfcp {

GaussianModel::GaussianModel(Eigen::VectorXd mean, Eigen::MatrixXd covariance, double ridge)
    : mean_(std::move(mean)),
      covariance_(std::move(covariance)),
      ridge_(ridge),
      llt_(covariance_),
      log_det_(0.0) {
  if (covariance_.rows() != mean_.size() || covariance_.cols() != mean_.size()) {
    throw InputError("Gaussian mean and covariance dimensions disagree");
  }
  if (llt_.info() != Eigen::Success) {
    throw NumericalError("covariance is not positive definite");
  }
  const auto& l = llt_.matrixL();
  for (Eigen::Index i = 0; i < mean_.size(); ++i) {
    const double diag = l(i, i);
    if (!(diag > 0.0)) throw NumericalError("covariance factor has a non-positive pivot");
    log_det_ += 2.0 * std::log(diag);
  }
}

double GaussianModel::mahalanobis_sq(std::span<const double> v) const {
  if (v.size() != dim()) {
    throw InputError("vector of length " + std::to_string(v.size()) +
                     " against a Gaussian of dimension " + std::to_string(dim()));
  }
  Eigen::VectorXd diff(mean_.size());
  for (Eigen::Index i = 0; i < mean_.size(); ++i) diff[i] = v[i] - mean_[i];
  const Eigen::VectorXd w = llt_.matrixL().solve(diff);
  return w.squaredNorm();
}

GaussianModel gaussian_fit(std::span<const std::vector<double>> vectors) {
  if (vectors.size() < 2) throw InputError("gaussian_fit needs at least 2 vectors");
  const auto h = static_cast<Eigen::Index>(vectors.front().size());
  if (h == 0) throw InputError("gaussian_fit: zero-dimensional vectors");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(h);
  for (const auto& v : vectors) {
    if (static_cast<Eigen::Index>(v.size()) != h) {
      throw InputError("gaussian_fit: vectors of unequal length");
    }
    mean += Eigen::Map<const Eigen::VectorXd>(v.data(), h);
  }
  const double z = static_cast<double>(vectors.size());
  mean /= z;

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(h, h);
  for (const auto& v : vectors) {
    const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(v.data(), h) - mean;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(d);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= z;
  const double ridge = std::max(1e-8, 1e-6 * cov.trace() / static_cast<double>(h));
  cov.diagonal().array() += ridge;
  return GaussianModel(std::move(mean), std::move(cov), ridge);
}

double log_likelihood(std::span<const double> v, const GaussianModel& g) {
  const double h = static_cast<double>(g.dim());
  return -0.5 * h * std::log(2.0 * std::numbers::pi) - 0.5 * g.log_det() -
         0.5 * g.mahalanobis_sq(v);
}

double objective_T(std::size_t z, std::span<const std::vector<double>> ordered) {
  const std::size_t k = ordered.size();
  if (z < 2 || k < 3 || z > k - 1) {
    throw InputError("objective_T: z=" + std::to_string(z) + " outside [2, " +
                     std::to_string(k >= 1 ? k - 1 : 0) + "]");
  }
  const auto model = gaussian_fit(ordered.first(z));
  double inside = 0.0;
  for (std::size_t i = 0; i < z; ++i) inside += log_likelihood(ordered[i], model);
  double outside = 0.0;
  for (std::size_t i = z; i < k; ++i) outside += log_likelihood(ordered[i], model);
  return inside / static_cast<double>(z) - outside / static_cast<double>(k - z);
}

std::size_t default_k_b_init(std::size_t k) {
  return std::max((k + 1) / 2, k / 2 + 1);
}

bool looks_all_benign(std::span<const double> maliciousness) {
  if (maliciousness.empty()) return true;
  std::vector<double> sorted(maliciousness.begin(), maliciousness.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median =
      n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return sorted.back() <= 2.0 * median;
}

CountEstimate estimate_benign_count(std::span<const std::vector<double>> vectors,
                                    const EstimatorOptions& options) {
  const std::size_t k = vectors.size();
  if (k < 4) {
    throw InputError("estimate_benign_count needs K >= 4 clients, got " + std::to_string(k));
  }
  const std::size_t z_lo = k / 2 + 1;
  const std::size_t z_hi = k - 1;
  std::size_t k_tilde = options.k_b_init == 0 ? default_k_b_init(k) : options.k_b_init;
  if (k_tilde < z_lo || k_tilde > k) {
    throw InputError("k_b_init must lie in [" + std::to_string(z_lo) + ", " +
                     std::to_string(k) + "], got " + std::to_string(k_tilde));
  }
  if (options.max_iter == 0) throw InputError("max_iter must be >= 1");

  const auto distances = pairwise_distances(vectors, options.norm);
  CountEstimate est;
  std::vector<std::vector<double>> ordered(k);
  std::size_t previous = 0;
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    est.maliciousness = maliciousness_scores(distances, k_tilde);
    if (it == 1) est.no_malicious = looks_all_benign(est.maliciousness);
    const auto order = rank_by_score(est.maliciousness);
    for (std::size_t r = 0; r < k; ++r) ordered[r] = vectors[order[r]];

    est.objective_trace.clear();
    std::size_t best = z_lo;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t z = z_lo; z <= z_hi; ++z) {
      const double t = objective_T(z, ordered);
      est.objective_trace.emplace_back(z, t);
      // Ties (up to round-off) go to the larger z: without separation, call
      // more clients benign.
      const double slack = 1e-9 * std::max(1.0, std::abs(best_value));
      if (t >= best_value - slack) {
        best_value = std::max(best_value, t);
        best = z;
      }
    }
    est.iterations = it;
    est.k_b_hat = best;
    if (best == previous || best == k_tilde) break;
    previous = best;
    k_tilde = best;
  }
  est.k_m_hat = k - est.k_b_hat;
  return est;
}

CountEstimate estimate_benign_count(std::span<const ClientReport> reports,
                                    const EstimatorOptions& options) {
  std::vector<std::vector<double>> vectors;
  vectors.reserve(reports.size());
  for (const auto& r : reports) {
    if (!(r.edges == reports.front().edges)) {
      throw InputError("client " + std::to_string(r.client_id) + " reports different bin edges");
    }
    vectors.emplace_back(r.v.values().begin(), r.v.values().end());
  }
  return estimate_benign_count(std::span<const std::vector<double>>(vectors), options);
}

}  // namespace robfcp
