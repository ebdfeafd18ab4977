#include "robfcp/certify.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "robfcp/error.h"

namespace robfcp {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double inv_norm_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InputError("inv_norm_cdf: p=" + std::to_string(p) + " outside (0,1)");
  }
  static constexpr std::array<double, 6> a = {-3.969683028665376e+01, 2.209460984245205e+02,
                                              -2.759285104469687e+02, 1.383577518672690e+02,
                                              -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {-5.447609879822406e+01, 1.615858368580409e+02,
                                              -1.556989798598866e+02, 6.680131188771972e+01,
                                              -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {-7.784894002430293e-03, -3.223964580411365e-01,
                                              -2.400758277161838e+00, -2.549732539343734e+00,
                                              4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {7.784695709041462e-03, 3.224671290700398e-01,
                                              2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Newton step. In the upper tail work with the complement so the residual
  // keeps its relative precision.
  const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  if (density > 0.0) {
    const double residual = p < 0.5 ? norm_cdf(x) - p
                                    : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
    x -= residual / density;
  }
  return x;
}

void CertificateParams::validate() const {
  auto fail = [](const std::string& msg) { throw InputError("certificate: " + msg); };
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0,1)");
  if (!(beta > 0.0 && beta < 1.0)) fail("beta must lie in (0,1)");
  if (H < 1) fail("H must be >= 1");
  if (k_b < 1) fail("k_b must be >= 1");
  if (k_m < 0) fail("k_m must be >= 0");
  if (k_m >= k_b) fail("k_m must be < k_b (tau < 1)");
  if (!(n_b >= 1.0)) fail("n_b must be >= 1");
  if (!(n_m_total >= 0.0)) fail("N_m must be >= 0");
  if (!(sigma >= 0.0 && sigma <= 2.0)) fail("sigma must lie in [0,2]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) fail("epsilon must lie in [0,1]");
}

std::string_view certificate_variant_name(CertificateVariant v) {
  switch (v) {
    case CertificateVariant::kNormal: return "normal";
    case CertificateVariant::kDkw: return "dkw";
    case CertificateVariant::kHomogeneous: return "homogeneous";
    case CertificateVariant::kOverestimate: return "overestimate";
  }
  return "normal";
}

CertificateVariant parse_certificate_variant(std::string_view name) {
  if (name == "normal") return CertificateVariant::kNormal;
  if (name == "dkw") return CertificateVariant::kDkw;
  if (name == "homogeneous") return CertificateVariant::kHomogeneous;
  if (name == "overestimate") return CertificateVariant::kOverestimate;
  throw InputError("unknown certificate variant '" + std::string(name) +
                   "' (expected normal|dkw|homogeneous|overestimate)");
}

double normal_radius(const CertificateParams& p) {
  const double h = static_cast<double>(p.H);
  const double kb = static_cast<double>(p.k_b);
  return h * inv_norm_cdf(1.0 - p.beta / (2.0 * h * kb)) / (2.0 * std::sqrt(p.n_b));
}

double dkw_radius(const CertificateParams& p) {
  const double kb = static_cast<double>(p.k_b);
  return static_cast<double>(p.H) * std::sqrt(std::log(2.0 * kb / p.beta) / (2.0 * p.n_b));
}

namespace {

CoverageCertificate finish(double lower, double upper, double p_byz,
                           CertificateVariant variant, const CertificateParams& params) {
  return {lower, upper, p_byz, variant, lower < 0.0 || upper > 1.0, params};
}

double byzantine_penalty(const CertificateParams& p, double radius) {
  return radius * (1.0 + (p.n_m_total / p.n_b) * 2.0 / (1.0 - p.tau()));
}

double disparity_penalty(const CertificateParams& p) {
  return p.n_m_total * p.sigma / (p.n_b * (1.0 - p.tau()));
}

double sketch_lower_penalty(const CertificateParams& p) {
  return (p.epsilon * p.n_b + 1.0) / (p.n_b + static_cast<double>(p.k_b));
}

// Single-fraction form of the upper sketch term.
double sketch_upper_penalty(const CertificateParams& p) {
  const double kb = static_cast<double>(p.k_b);
  return (p.epsilon * p.n_b + (p.epsilon + 1.0) * kb) / (p.n_b + kb);
}

// Split form, epsilon + K_b/(n_b+K_b); algebraically equal to sketch_upper_penalty.
double sketch_upper_penalty_split(const CertificateParams& p) {
  const double kb = static_cast<double>(p.k_b);
  return p.epsilon + kb / (p.n_b + kb);
}

}  // namespace

CoverageCertificate coverage_bounds(const CertificateParams& params) {
  params.validate();
  const double target = 1.0 - params.alpha;
  const double p_byz = byzantine_penalty(params, normal_radius(params));
  const double disparity = disparity_penalty(params);
  return finish(target - p_byz - disparity - sketch_lower_penalty(params),
                target + p_byz + disparity + sketch_upper_penalty(params), p_byz,
                CertificateVariant::kNormal, params);
}

CoverageCertificate coverage_bounds_homogeneous(const CertificateParams& params) {
  params.validate();
  if (params.sigma != 0.0) {
    throw InputError("certificate: homogeneous variant requires sigma = 0");
  }
  const double target = 1.0 - params.alpha;
  const double p_byz = byzantine_penalty(params, normal_radius(params));
  return finish(target - sketch_lower_penalty(params) - p_byz,
                target + sketch_upper_penalty_split(params) + p_byz, p_byz,
                CertificateVariant::kHomogeneous, params);
}

CoverageCertificate coverage_bounds_dkw(const CertificateParams& params) {
  params.validate();
  const double target = 1.0 - params.alpha;
  const double p_byz = byzantine_penalty(params, dkw_radius(params));
  const double disparity = disparity_penalty(params);
  return finish(target - p_byz - disparity - sketch_lower_penalty(params),
                target + p_byz + disparity + sketch_upper_penalty(params), p_byz,
                CertificateVariant::kDkw, params);
}

double overestimate_penalty(std::int64_t k_b, std::int64_t k_b_reported, double radius) {
  return 1.0 - (static_cast<double>(k_b) / static_cast<double>(k_b_reported)) * (1.0 - radius);
}

CoverageCertificate overestimate_bounds(const CertificateParams& params,
                                        std::int64_t k_b_reported) {
  params.validate();
  if (k_b_reported <= params.k_b) {
    throw InputError("certificate: k_b_reported must exceed k_b for the overestimate bound");
  }
  const double target = 1.0 - params.alpha;
  const double penalty =
      overestimate_penalty(params.k_b, k_b_reported, normal_radius(params));
  return finish(target - sketch_lower_penalty(params) - penalty,
                target + sketch_upper_penalty_split(params) + penalty, penalty,
                CertificateVariant::kOverestimate, params);
}

CoverageCertificate certify(const CertificateParams& params, CertificateVariant variant,
                            std::int64_t k_b_reported) {
  switch (variant) {
    case CertificateVariant::kNormal: return coverage_bounds(params);
    case CertificateVariant::kDkw: return coverage_bounds_dkw(params);
    case CertificateVariant::kHomogeneous: return coverage_bounds_homogeneous(params);
    case CertificateVariant::kOverestimate: return overestimate_bounds(params, k_b_reported);
  }
  return coverage_bounds(params);
}

double estimator_precision_bound(double trace_sigma, double sigma_max_ratio, double d,
                                 std::int64_t k, std::int64_t k_b, std::int64_t k_m,
                                 std::int64_t k_b_tilde) {
  if (!(d > 0.0)) throw InputError("precision bound: d must be > 0");
  if (!(trace_sigma >= 0.0)) throw InputError("precision bound: Tr(Sigma) must be >= 0");
  if (!(sigma_max_ratio >= 1.0)) {
    throw InputError("precision bound: sigma_max/sigma_min must be >= 1");
  }
  if (k_m < 0 || !(k_m < k_b_tilde && k_b_tilde <= k_b)) {
    throw InputError("precision bound: requires K_m < K~_b <= K_b");
  }
  if (k_b + k_m > k) throw InputError("precision bound: K_b + K_m exceeds K");
  const double kt = static_cast<double>(k_b_tilde);
  const double km = static_cast<double>(k_m);
  const double d2 = d * d;
  const double first = (3.0 * kt - km - 2.0) * (3.0 * kt - km - 2.0) * trace_sigma /
                       ((kt - km) * (kt - km) * d2);
  const double second = 2.0 * static_cast<double>(k + k_b) * trace_sigma * sigma_max_ratio *
                         sigma_max_ratio / d2;
  return 1.0 - first - second;
}

CovarianceSummary multinomial_covariance_summary(std::span<const double> p, double n) {
  if (p.size() < 2) throw InputError("covariance summary needs at least 2 bins");
  if (!(n > 0.0)) throw InputError("covariance summary needs n > 0");
  double sum_sq = 0.0;
  std::vector<double> support;
  for (double x : p) {
    sum_sq += x * x;
    if (x > 0.0) support.push_back(x);
  }
  const double trace = (1.0 - sum_sq) / n;
  if (support.size() < 2) return {trace, 1.0};
  const auto m = static_cast<Eigen::Index>(support.size() - 1);
  Eigen::MatrixXd cov(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      cov(i, j) = ((i == j ? support[i] : 0.0) - support[i] * support[j]) / n;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen decomposition failed");
  const double lo = solver.eigenvalues().minCoeff();
  const double hi = solver.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) throw NumericalError("projected multinomial covariance is singular");
  return {trace, std::sqrt(hi / lo)};
}

double heterogeneity_sigma(std::span<const std::vector<double>> expected_vectors) {
  if (expected_vectors.empty()) throw InputError("heterogeneity_sigma: no vectors");
  double sigma = 0.0;
  for (std::size_t i = 0; i < expected_vectors.size(); ++i) {
    for (std::size_t j = i + 1; j < expected_vectors.size(); ++j) {
      const auto& a = expected_vectors[i];
      const auto& b = expected_vectors[j];
      if (a.size() != b.size()) throw InputError("heterogeneity_sigma: unequal lengths");
      double l1 = 0.0;
      for (std::size_t h = 0; h < a.size(); ++h) l1 += std::abs(a[h] - b[h]);
      sigma = std::max(sigma, l1);
    }
  }
  return sigma;
}

double sketch_epsilon(const AggregateHistogram& agg) {
  if (agg.total_n <= 0) throw InputError("sketch_epsilon: empty aggregate");
  const auto top = *std::max_element(agg.counts.begin(), agg.counts.end());
  return static_cast<double>(top) / static_cast<double>(agg.total_n);
}

}  // namespace robfcp
