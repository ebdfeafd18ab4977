#ifndef ROBFCP_CERTIFY_H_
#define ROBFCP_CERTIFY_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "robfcp/calibration.h"

namespace robfcp {

// Standard normal CDF.
double norm_cdf(double x);

// Inverse standard normal CDF: Acklam's rational approximation followed by a
// Newton step against norm_cdf. Absolute error below 1e-8 on (0,1).
double inv_norm_cdf(double p);

struct CertificateParams {
  double alpha = 0.1;
  double beta = 0.05;
  std::int64_t H = 100;
  std::int64_t k_b = 1;
  std::int64_t k_m = 0;
  double n_b = 1;        // smallest benign sample size
  double n_m_total = 0;  // total malicious sample size
  double sigma = 0.0;    // max pairwise l1 between expected benign vectors
  double epsilon = 0.0;  // sketch rank error

  double tau() const { return static_cast<double>(k_m) / static_cast<double>(k_b); }
  void validate() const;
};

enum class CertificateVariant { kNormal, kDkw, kHomogeneous, kOverestimate };

std::string_view certificate_variant_name(CertificateVariant v);
CertificateVariant parse_certificate_variant(std::string_view name);

// Coverage bounds. Vacuous values (lower < 0, upper > 1) are kept as computed.
struct CoverageCertificate {
  double lower;
  double upper;
  double p_byz;  // Byzantine penalty (for Overestimate: the overestimation penalty)
  CertificateVariant variant;
  bool vacuous;
  CertificateParams params;
};

// Binomial-proportion concentration radius H * Phi^{-1}(1 - beta/(2 H K_b)) / (2 sqrt(n_b)).
double normal_radius(const CertificateParams& p);
// DKW radius H * sqrt(ln(2 K_b / beta) / (2 n_b)).
double dkw_radius(const CertificateParams& p);

// Heterogeneous bound with the binomial radius:
//   P_byz = r (1 + (N_m/n_b) 2/(1-tau))
//   lower = 1-a - P_byz - N_m s/(n_b(1-tau)) - (e n_b + 1)/(n_b + K_b)
//   upper = 1-a + P_byz + N_m s/(n_b(1-tau)) + (e n_b + (e+1) K_b)/(n_b + K_b)
CoverageCertificate coverage_bounds(const CertificateParams& params);

// Identically distributed benign clients (sigma must be 0); the upper sketch
// term is written e + K_b/(n_b + K_b).
CoverageCertificate coverage_bounds_homogeneous(const CertificateParams& params);

// As coverage_bounds with the DKW radius in place of the binomial one.
CoverageCertificate coverage_bounds_dkw(const CertificateParams& params);

// 1 - (K_b / K'_b)(1 - r).
double overestimate_penalty(std::int64_t k_b, std::int64_t k_b_reported, double radius);

// Detection run with K'_b > K_b (equal client sample sizes assumed).
CoverageCertificate overestimate_bounds(const CertificateParams& params,
                                        std::int64_t k_b_reported);

CoverageCertificate certify(const CertificateParams& params, CertificateVariant variant,
                            std::int64_t k_b_reported = 0);

// Lower bound on P[K_m estimate is exact]:
//   1 - (3Kt - Km - 2)^2 Tr / ((Kt - Km)^2 d^2) - 2 (K + Kb) Tr r^2 / d^2
// with r = sigma_max / sigma_min of Sigma^{-1/2}. May be negative.
double estimator_precision_bound(double trace_sigma, double sigma_max_ratio, double d,
                                 std::int64_t k, std::int64_t k_b, std::int64_t k_m,
                                 std::int64_t k_b_tilde);

// Trace and eigenvalue-spread inputs of estimator_precision_bound for
// histogram vectors of n samples from bin probabilities p. The multinomial
// covariance is singular on the simplex, so the spread is taken on the
// (H'-1)-dimensional coordinates of the H' bins with positive mass.
struct CovarianceSummary {
  double trace;
  double sigma_max_ratio;
};
CovarianceSummary multinomial_covariance_summary(std::span<const double> p, double n);

// Max pairwise l1 distance.
double heterogeneity_sigma(std::span<const std::vector<double>> expected_vectors);

// Largest share of the pooled sample held by one bin.
double sketch_epsilon(const AggregateHistogram& agg);

}  // namespace robfcp

#endif  // ROBFCP_CERTIFY_H_
