#include "robfcp/detection.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robfcp/error.h"

namespace robfcp {

DistanceNorm DistanceNorm::lp(int p) {
  if (p < 1) throw InputError("norm order p must be >= 1, got " + std::to_string(p));
  return DistanceNorm(Kind::kLp, p);
}

DistanceNorm DistanceNorm::parse(std::string_view text) {
  if (text == "inf" || text == "linf") return linf();
  if (text == "cosine" || text == "cos") return cosine();
  int p = 0;
  try {
    std::size_t used = 0;
    p = std::stoi(std::string(text), &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw InputError("unknown norm '" + std::string(text) + "' (expected p>=1, inf, cosine)");
  }
  return lp(p);
}

std::string DistanceNorm::name() const {
  switch (kind_) {
    case Kind::kLp: return std::to_string(p_);
    case Kind::kLInf: return "inf";
    case Kind::kCosine: return "cosine";
  }
  return "?";
}

double DistanceNorm::operator()(std::span<const double> a, std::span<const double> b) const {
  if (a.size() != b.size()) throw InputError("distance between vectors of unequal length");
  switch (kind_) {
    case Kind::kLInf: {
      double m = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
      return m;
    }
    case Kind::kCosine: {
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
      }
      if (na == 0.0 || nb == 0.0) return na == nb ? 0.0 : 1.0;
      return std::max(0.0, 1.0 - dot / std::sqrt(na * nb));
    }
    case Kind::kLp: break;
  }
  if (p_ == 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
  }
  if (p_ == 2) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(std::abs(a[i] - b[i]), p_);
  return std::pow(s, 1.0 / p_);
}

DistanceMatrix::DistanceMatrix(std::size_t k, DistanceNorm norm)
    : k_(k), norm_(norm), d_(k * k, 0.0) {}

void DistanceMatrix::set(std::size_t i, std::size_t j, double value) {
  d_[i * k_ + j] = value;
  d_[j * k_ + i] = value;
}

DistanceMatrix pairwise_distances(std::span<const std::vector<double>> vectors,
                                  DistanceNorm norm) {
  if (vectors.size() < 2) throw InputError("pairwise_distances needs at least 2 clients");
  DistanceMatrix d(vectors.size(), norm);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t j = i + 1; j < vectors.size(); ++j) {
      d.set(i, j, norm(vectors[i], vectors[j]));
    }
  }
  return d;
}

DistanceMatrix pairwise_distances(std::span<const ClientReport> reports, DistanceNorm norm) {
  if (reports.size() < 2) throw InputError("pairwise_distances needs at least 2 clients");
  std::vector<std::vector<double>> vectors;
  vectors.reserve(reports.size());
  for (const auto& r : reports) {
    if (!(r.edges == reports.front().edges)) {
      throw InputError("client " + std::to_string(r.client_id) +
                       " reports different bin edges than client " +
                       std::to_string(reports.front().client_id));
    }
    vectors.emplace_back(r.v.values().begin(), r.v.values().end());
  }
  return pairwise_distances(std::span<const std::vector<double>>(vectors), norm);
}

std::vector<double> maliciousness_scores(const DistanceMatrix& d, std::size_t k_b) {
  const std::size_t k = d.size();
  if (k_b < 2 || k_b > k) {
    throw InputError("k_b must lie in [2, " + std::to_string(k) + "], got " +
                     std::to_string(k_b));
  }
  const std::size_t neighbors = k_b - 1;
  std::vector<double> scores(k);
  std::vector<double> row;
  row.reserve(k - 1);
  for (std::size_t i = 0; i < k; ++i) {
    row.clear();
    for (std::size_t j = 0; j < k; ++j) {
      if (j != i) row.push_back(d(i, j));
    }
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(neighbors),
                      row.end());
    double sum = 0.0;
    for (std::size_t t = 0; t < neighbors; ++t) sum += row[t];
    scores[i] = sum / static_cast<double>(neighbors);
  }
  return scores;
}

std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return order;
}

MaliciousnessRanking select_benign(std::span<const double> scores, std::size_t k_b) {
  if (k_b < 1 || k_b > scores.size()) {
    throw InputError("k_b must lie in [1, " + std::to_string(scores.size()) + "], got " +
                     std::to_string(k_b));
  }
  auto order = rank_by_score(scores);
  order.resize(k_b);
  std::sort(order.begin(), order.end());
  return {std::vector<double>(scores.begin(), scores.end()), std::move(order), k_b};
}

}  // namespace robfcp
