// Test-only reference computations. Deliberately naive and independent of
// the library code paths they check.
#ifndef ROBFCP_TESTS_ORACLES_H_
#define ROBFCP_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

inline double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Bisection on the forward CDF.
inline double inv_phi(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// k-th smallest (1-based) by full sort; 1.0 when k exceeds the sample.
inline double kth_smallest(std::vector<double> xs, std::int64_t k) {
  if (k > static_cast<std::int64_t>(xs.size())) return 1.0;
  std::sort(xs.begin(), xs.end());
  return xs[static_cast<std::size_t>(std::max<std::int64_t>(k, 1) - 1)];
}

// ceil((1-alpha) m) computed with integer arithmetic on a rational alpha = num/den.
inline std::int64_t rank_rational(std::int64_t num, std::int64_t den, std::int64_t m) {
  const std::int64_t top = (den - num) * m;
  return (top + den - 1) / den;
}

// Bin by direct arithmetic on uniform edges: floor(s*H), last bin closed.
inline std::size_t uniform_bin(double s, std::size_t h) {
  const double hd = static_cast<double>(h);
  auto b = static_cast<std::int64_t>(std::floor(s * hd));
  // s*h may round across an edge; compare against the edge value k/h itself.
  if (static_cast<double>(b + 1) / hd <= s) ++b;
  if (b > 0 && static_cast<double>(b) / hd > s) --b;
  return std::min(static_cast<std::size_t>(b), h - 1);
}

using Matrix = std::vector<std::vector<double>>;

// Gauss-Jordan inverse with partial pivoting; also returns log|det|.
inline Matrix invert(Matrix a, double& log_det) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  log_det = 0.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double p = a[col][col];
    log_det += std::log(std::abs(p));
    for (std::size_t c = 0; c < n; ++c) {
      a[col][c] /= p;
      inv[col][c] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

// Mean log-likelihood separation with a ridge-regularized Gaussian fitted to
// the first z vectors.
inline double objective(std::size_t z, const std::vector<std::vector<double>>& ordered) {
  const std::size_t h = ordered[0].size();
  std::vector<double> mu(h, 0.0);
  for (std::size_t i = 0; i < z; ++i)
    for (std::size_t d = 0; d < h; ++d) mu[d] += ordered[i][d] / static_cast<double>(z);
  Matrix cov(h, std::vector<double>(h, 0.0));
  for (std::size_t i = 0; i < z; ++i)
    for (std::size_t a = 0; a < h; ++a)
      for (std::size_t b = 0; b < h; ++b)
        cov[a][b] += (ordered[i][a] - mu[a]) * (ordered[i][b] - mu[b]) / static_cast<double>(z);
  double trace = 0.0;
  for (std::size_t a = 0; a < h; ++a) trace += cov[a][a];
  const double ridge = std::max(1e-8, 1e-6 * trace / static_cast<double>(h));
  for (std::size_t a = 0; a < h; ++a) cov[a][a] += ridge;
  double log_det = 0.0;
  const auto inv = invert(cov, log_det);
  auto loglik = [&](const std::vector<double>& v) {
    double q = 0.0;
    for (std::size_t a = 0; a < h; ++a)
      for (std::size_t b = 0; b < h; ++b) q += (v[a] - mu[a]) * inv[a][b] * (v[b] - mu[b]);
    return -0.5 * static_cast<double>(h) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det -
           0.5 * q;
  };
  double in = 0.0, out = 0.0;
  for (std::size_t i = 0; i < z; ++i) in += loglik(ordered[i]);
  for (std::size_t i = z; i < ordered.size(); ++i) out += loglik(ordered[i]);
  return in / static_cast<double>(z) - out / static_cast<double>(ordered.size() - z);
}

}  // namespace oracle

#endif  // ROBFCP_TESTS_ORACLES_H_
