#ifndef ROBFCP_COUNT_ESTIMATOR_H_
#define ROBFCP_COUNT_ESTIMATOR_H_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "robfcp/detection.h"
#include "robfcp/sketch.h"

namespace robfcp {

// Gaussian fitted to characterization vectors. The covariance carries a ridge
// because histogram vectors live on the simplex and the raw sample covariance
// is singular.
class GaussianModel {
 public:
  GaussianModel(Eigen::VectorXd mean, Eigen::MatrixXd covariance, double ridge);

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }
  double ridge() const noexcept { return ridge_; }
  double log_det() const noexcept { return log_det_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }

  // (v - mu)^T Sigma^{-1} (v - mu)
  double mahalanobis_sq(std::span<const double> v) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  double ridge_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_;
};

// Sample mean; covariance with divisor z plus lambda*I,
// lambda = max(1e-8, 1e-6 * trace / H).
GaussianModel gaussian_fit(std::span<const std::vector<double>> vectors);

double log_likelihood(std::span<const double> v, const GaussianModel& g);

// Likelihood separation for a benign-count hypothesis z: mean log-likelihood of
// the z least suspicious vectors minus that of the remaining K - z, both under
// the Gaussian fitted to the first z. `ordered` is sorted by ascending
// maliciousness. Requires 2 <= z <= K - 1.
double objective_T(std::size_t z, std::span<const std::vector<double>> ordered);

struct CountEstimate {
  std::size_t k_b_hat = 0;
  std::size_t k_m_hat = 0;  // K - k_b_hat
  std::vector<std::pair<std::size_t, double>> objective_trace;  // last sweep
  std::size_t iterations = 0;
  // max M(k) <= 2 * median M(k) on the first ranking: nothing stands out, so
  // callers should keep every client.
  bool no_malicious = false;
  std::vector<double> maliciousness;  // M(k) from the final ranking

  std::size_t effective_k_m() const noexcept { return no_malicious ? 0 : k_m_hat; }
};

struct EstimatorOptions {
  DistanceNorm norm = DistanceNorm::lp(2);
  std::size_t k_b_init = 0;  // 0 selects max(ceil(K/2), floor(K/2) + 1)
  std::size_t max_iter = 10;
};

std::size_t default_k_b_init(std::size_t k);

// Escape-hatch rule for the all-benign case.
bool looks_all_benign(std::span<const double> maliciousness);

CountEstimate estimate_benign_count(std::span<const ClientReport> reports,
                                    const EstimatorOptions& options = {});
CountEstimate estimate_benign_count(std::span<const std::vector<double>> vectors,
                                    const EstimatorOptions& options = {});

}  // namespace robfcp

#endif  // ROBFCP_COUNT_ESTIMATOR_H_
