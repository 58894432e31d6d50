#pragma once

// Graph construction over feature rows:
//
//   A_ij = exp(-d(x_i, x_j)^2 / (2 sigma^2)) for i != j, A_ii = 0
//   kNN:  row i keeps its k largest affinities (lower index wins ties)
//   W:    W_ij = max(K_ij, K_ji)
//   S:    D^-1/2 W D^-1/2 with d_ii = sum_j W_ij

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aspectra/error.hpp"
#include "aspectra/features.hpp"
#include "aspectra/sparse.hpp"

namespace aspectra {

enum class DistanceMetric { euclidean, hamming };

inline std::string_view to_string(DistanceMetric m) {
  return m == DistanceMetric::euclidean ? "euclidean" : "hamming";
}

inline std::optional<DistanceMetric> parse_distance_metric(std::string_view s) {
  if (s == "euclidean") return DistanceMetric::euclidean;
  if (s == "hamming") return DistanceMetric::hamming;
  return std::nullopt;
}

/// Squared distance between two boolean rows. For Euclidean this is the
/// number of differing bits; Hamming distance is that count itself, so its
/// square is the count squared.
inline double squared_distance(const FeatureRow& a, const FeatureRow& b, DistanceMetric metric) {
  std::size_t diff = 0;
  for (std::size_t f = 0; f < kFeatureCount; ++f) diff += a[f] != b[f];
  const auto d = static_cast<double>(diff);
  return metric == DistanceMetric::euclidean ? d : d * d;
}

inline double rbf_weight(double squared_dist, double sigma) {
  return std::exp(-squared_dist / (2.0 * sigma * sigma));
}

/// Dense symmetric affinity matrix with zero diagonal.
class AffinityMatrix {
 public:
  AffinityMatrix() = default;
  AffinityMatrix(std::size_t size, double sigma, DistanceMetric metric)
      : size_(size), sigma_(sigma), metric_(metric), entries_(size * size, 0.0) {}

  std::size_t size() const noexcept { return size_; }
  double sigma() const noexcept { return sigma_; }
  DistanceMetric metric() const noexcept { return metric_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * size_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return entries_[i * size_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {entries_.data() + i * size_, size_}; }

 private:
  std::size_t size_ = 0;
  double sigma_ = 1.0;
  DistanceMetric metric_ = DistanceMetric::euclidean;
  std::vector<double> entries_;
};

struct GraphConfig {
  double sigma = 1.0;
  std::size_t k = 10;
  DistanceMetric metric = DistanceMetric::euclidean;
};

struct SparseGraph {
  std::size_t size = 0;
  std::size_t k = 0;
  CsrMatrix weights;            // W, symmetric, zero diagonal
  std::vector<double> degrees;  // d_ii
  CsrMatrix normalized;         // S
};

namespace detail {

inline void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be positive");
}

inline void check_k(std::size_t k, std::size_t m) {
  if (k < 1 || m < 2 || k > m - 1)
    throw ConfigError("k=" + std::to_string(k) + " out of range [1, " +
                      std::to_string(m < 2 ? 0 : m - 1) + "] for " + std::to_string(m) +
                      " candidates");
}

/// Indices of the k largest entries of `row` excluding `self`, ties to the
/// lower index, returned in ascending index order.
inline std::vector<std::size_t> top_k(std::span<const double> row, std::size_t self, std::size_t k,
                                      std::vector<std::size_t>& scratch) {
  scratch.clear();
  for (std::size_t j = 0; j < row.size(); ++j)
    if (j != self) scratch.push_back(j);
  auto better = [&](std::size_t a, std::size_t b) {
    return row[a] > row[b] || (row[a] == row[b] && a < b);
  };
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   scratch.end(), better);
  std::vector<std::size_t> picked(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace detail

inline AffinityMatrix rbf_affinity(std::span<const FeatureRow> rows, double sigma,
                                   DistanceMetric metric = DistanceMetric::euclidean) {
  detail::check_sigma(sigma);
  if (rows.size() < 2) throw ConfigError("affinity needs at least 2 candidates");
  AffinityMatrix a(rows.size(), sigma, metric);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      const double w = rbf_weight(squared_distance(rows[i], rows[j], metric), sigma);
      a(i, j) = w;
      a(j, i) = w;
    }
  }
  return a;
}

inline AffinityMatrix rbf_affinity(const FeatureMatrix& matrix, double sigma,
                                   DistanceMetric metric = DistanceMetric::euclidean) {
  return rbf_affinity(std::span<const FeatureRow>(matrix.rows), sigma, metric);
}

/// Directed kNN adjacency: exactly k stored entries per row.
inline CsrMatrix knn_sparsify(const AffinityMatrix& affinity, std::size_t k) {
  const std::size_t m = affinity.size();
  detail::check_k(k, m);
  CsrMatrix out;
  out.rows = out.cols = m;
  out.row_ptr.reserve(m + 1);
  out.col_index.reserve(m * k);
  out.values.reserve(m * k);
  std::vector<std::size_t> scratch;
  for (std::size_t i = 0; i < m; ++i) {
    for (auto j : detail::top_k(affinity.row(i), i, k, scratch)) {
      out.col_index.push_back(j);
      out.values.push_back(affinity(i, j));
    }
    out.row_ptr.push_back(out.col_index.size());
  }
  return out;
}

/// Same result as knn_sparsify(rbf_affinity(rows, ...), k) without holding
/// the dense m x m affinity in memory.
inline CsrMatrix knn_affinity(std::span<const FeatureRow> rows, double sigma, std::size_t k,
                              DistanceMetric metric = DistanceMetric::euclidean) {
  detail::check_sigma(sigma);
  const std::size_t m = rows.size();
  if (m < 2) throw ConfigError("affinity needs at least 2 candidates");
  detail::check_k(k, m);
  CsrMatrix out;
  out.rows = out.cols = m;
  out.row_ptr.reserve(m + 1);
  std::vector<double> row(m);
  std::vector<std::size_t> scratch;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j)
      row[j] = j == i ? 0.0 : rbf_weight(squared_distance(rows[i], rows[j], metric), sigma);
    for (auto j : detail::top_k(row, i, k, scratch)) {
      out.col_index.push_back(j);
      out.values.push_back(row[j]);
    }
    out.row_ptr.push_back(out.col_index.size());
  }
  return out;
}

/// Union symmetrization: W_ij = max(K_ij, K_ji) over the union of both
/// sparsity patterns.
inline CsrMatrix symmetrize(const CsrMatrix& directed) {
  const std::size_t m = directed.rows;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto cols = directed.row_cols(i);
    auto vals = directed.row_values(i);
    for (std::size_t t = 0; t < cols.size(); ++t) {
      if (cols[t] == i) continue;
      rows[i].emplace_back(cols[t], vals[t]);
      rows[cols[t]].emplace_back(i, vals[t]);
    }
  }
  CsrMatrix out;
  out.rows = out.cols = m;
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    for (std::size_t t = 0; t < r.size();) {
      const std::size_t col = r[t].first;
      double best = r[t].second;
      for (++t; t < r.size() && r[t].first == col; ++t) best = std::max(best, r[t].second);
      out.col_index.push_back(col);
      out.values.push_back(best);
    }
    out.row_ptr.push_back(out.col_index.size());
  }
  return out;
}

/// Degrees and S = D^-1/2 W D^-1/2. Zero-degree nodes are rejected.
inline SparseGraph normalize(CsrMatrix weights, std::size_t k = 0) {
  const std::size_t m = weights.rows;
  SparseGraph g;
  g.size = m;
  g.k = k;
  g.degrees.assign(m, 0.0);
  std::vector<std::size_t> isolated;
  for (std::size_t i = 0; i < m; ++i) {
    auto vals = weights.row_values(i);
    g.degrees[i] = std::accumulate(vals.begin(), vals.end(), 0.0);
    if (!(g.degrees[i] > 0.0)) isolated.push_back(i);
  }
  if (!isolated.empty()) {
    std::string list;
    for (auto i : isolated) list += (list.empty() ? "" : ", ") + std::to_string(i);
    throw ValidationError("zero-degree candidates: " + list);
  }
  std::vector<double> inv_sqrt(m);
  for (std::size_t i = 0; i < m; ++i) inv_sqrt[i] = 1.0 / std::sqrt(g.degrees[i]);
  g.normalized = weights;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = weights.row_ptr[i]; t < weights.row_ptr[i + 1]; ++t)
      g.normalized.values[t] = weights.values[t] * inv_sqrt[i] * inv_sqrt[weights.col_index[t]];
  }
  g.weights = std::move(weights);
  return g;
}

/// Full construction: affinity, kNN, union symmetrization, normalization.
inline SparseGraph build_graph(std::span<const FeatureRow> rows, const GraphConfig& config) {
  return normalize(symmetrize(knn_affinity(rows, config.sigma, config.k, config.metric)), config.k);
}

}  // namespace aspectra
