#pragma once

// Label spreading: Y(t+1) = alpha * S * Y(t) + (1 - alpha) * Y0, started at
// Y0 and stopped when the Frobenius norm of successive iterates falls below
// the tolerance. The fixed point is (1 - alpha) (I - alpha S)^-1 Y0, which
// closed_form_oracle computes by a dense solve for verification.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aspectra/error.hpp"
#include "aspectra/features.hpp"
#include "aspectra/graph.hpp"
#include "aspectra/sparse.hpp"

namespace aspectra {

inline constexpr std::size_t kClassCount = 2;

struct SpreadConfig {
  double alpha = 0.2;
  std::size_t max_iterations = 700;
  double tolerance = 1e-4;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0, 1)");
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  }
};

struct LabelDistribution {
  DenseMatrix scores;  // m x 2
  std::size_t iterations_run = 0;
  bool converged = false;
  double final_delta = 0.0;  // ||Y(t) - Y(t-1)||_F at the last step
};

/// One-hot rows for labeled candidates, zero rows for unlabeled ones.
inline DenseMatrix init_label_matrix(std::span<const Label> labels) {
  DenseMatrix y(labels.size(), kClassCount);
  bool any = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::unlabeled) continue;
    y(i, static_cast<std::size_t>(to_int(labels[i]))) = 1.0;
    any = true;
  }
  if (!any) throw ValidationError("no labeled candidates");
  return y;
}

inline DenseMatrix init_label_matrix(const FeatureMatrix& matrix) {
  return init_label_matrix(std::span<const Label>(matrix.labels));
}

/// out = alpha * S * y + (1 - alpha) * y0
inline void spread_step(const CsrMatrix& s, const DenseMatrix& y, const DenseMatrix& y0, double alpha,
                        DenseMatrix& out) {
  multiply(s, y, out);
  auto dst = out.data();
  auto init = y0.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = alpha * dst[i] + (1.0 - alpha) * init[i];
}

inline LabelDistribution spread(const SparseGraph& graph, const DenseMatrix& y0, const SpreadConfig& config) {
  config.validate();
  if (y0.rows() != graph.size)
    throw ValidationError("label matrix has " + std::to_string(y0.rows()) + " rows, graph has " +
                          std::to_string(graph.size) + " nodes");
  bool any = false;
  for (double v : y0.data()) any = any || v != 0.0;
  if (!any) throw ValidationError("initial label matrix is all zero");

  LabelDistribution dist;
  DenseMatrix current = y0;
  DenseMatrix next(y0.rows(), y0.cols());
  for (std::size_t t = 1; t <= config.max_iterations; ++t) {
    spread_step(graph.normalized, current, y0, config.alpha, next);
    double sq = 0.0;
    auto a = next.data();
    auto b = current.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!std::isfinite(a[i])) throw Error("non-finite score at iteration " + std::to_string(t));
      const double d = a[i] - b[i];
      sq += d * d;
    }
    std::swap(current, next);
    dist.iterations_run = t;
    dist.final_delta = std::sqrt(sq);
    if (dist.final_delta < config.tolerance) {
      dist.converged = true;
      break;
    }
  }
  dist.scores = std::move(current);
  return dist;
}

/// (1 - alpha) (I - alpha S)^-1 Y0 by dense LU. Intended for test-sized graphs.
inline DenseMatrix closed_form_oracle(const SparseGraph& graph, const DenseMatrix& y0, double alpha) {
  const auto m = static_cast<Eigen::Index>(graph.size);
  if (y0.rows() != graph.size) throw ValidationError("label matrix and graph sizes differ");
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(m, m);
  for (std::size_t i = 0; i < graph.size; ++i) {
    auto cols = graph.normalized.row_cols(i);
    auto vals = graph.normalized.row_values(i);
    for (std::size_t t = 0; t < cols.size(); ++t)
      system(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[t])) -= alpha * vals[t];
  }
  Eigen::MatrixXd rhs(m, static_cast<Eigen::Index>(y0.cols()));
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < rhs.cols(); ++j)
      rhs(i, j) = (1.0 - alpha) * y0(static_cast<std::size_t>(i), static_cast<std::size_t>(j));

  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) throw Error("closed form: I - alpha S is singular");
  const Eigen::MatrixXd solution = lu.solve(rhs);

  DenseMatrix out(y0.rows(), y0.cols());
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j)
      out(i, j) = solution(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

/// Argmax per unlabeled row, ties and zero rows to non-aspect. Labeled rows
/// keep their given label.
inline std::vector<Label> assign_labels(const LabelDistribution& dist, std::span<const Label> given) {
  std::vector<Label> out(given.size());
  for (std::size_t i = 0; i < given.size(); ++i) {
    if (given[i] != Label::unlabeled) {
      out[i] = given[i];
      continue;
    }
    out[i] = dist.scores(i, 1) > dist.scores(i, 0) ? Label::aspect : Label::non_aspect;
  }
  return out;
}

inline std::vector<Label> assign_labels(const LabelDistribution& dist, const FeatureMatrix& matrix) {
  return assign_labels(dist, std::span<const Label>(matrix.labels));
}

}  // namespace aspectra
