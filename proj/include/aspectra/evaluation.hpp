#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "aspectra/corpus.hpp"
#include "aspectra/error.hpp"
#include "aspectra/features.hpp"
#include "aspectra/graph.hpp"
#include "aspectra/random.hpp"
#include "aspectra/spreading.hpp"
#include "aspectra/text.hpp"

namespace aspectra {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  bool precision_defined = true;  // false when TP + FP = 0
  bool recall_defined = true;     // false when TP + FN = 0

  bool operator==(const Metrics&) const = default;
};

/// Aspect (1) is the positive class. Only entries with mask set are counted.
inline ConfusionMatrix confusion(std::span<const Label> predicted, std::span<const Label> gold,
                                 const std::vector<bool>& evaluated) {
  if (predicted.size() != gold.size() || gold.size() != evaluated.size())
    throw ValidationError("confusion: length mismatch (" + std::to_string(predicted.size()) + ", " +
                          std::to_string(gold.size()) + ", " + std::to_string(evaluated.size()) + ")");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!evaluated[i]) continue;
    const bool p = predicted[i] == Label::aspect;
    const bool g = gold[i] == Label::aspect;
    if (p && g) ++cm.tp;
    else if (p) ++cm.fp;
    else if (g) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

inline Metrics metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ValidationError("metrics of an empty confusion matrix");
  Metrics m;
  const auto ratio = [](std::size_t num, std::size_t den) {
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.precision_defined = cm.tp + cm.fp > 0;
  m.recall_defined = cm.tp + cm.fn > 0;
  m.precision = m.precision_defined ? ratio(cm.tp, cm.tp + cm.fp) : 0.0;
  m.recall = m.recall_defined ? ratio(cm.tp, cm.tp + cm.fn) : 0.0;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  return m;
}

struct ExperimentConfig {
  GraphConfig graph;
  SpreadConfig spread;
  double labeled_fraction = 0.1;
  double balance_ratio = 1.0;
};

struct ExperimentResult {
  Metrics metrics;
  ConfusionMatrix confusion;
  std::size_t iterations_run = 0;
  bool converged = false;
  double final_delta = 0.0;
  std::size_t candidates = 0;  // after class balancing
  std::size_t labeled = 0;
};

namespace detail {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace detail

/// One seeded run: balance, label, build graph, spread, score the candidates
/// that were unlabeled going in. `matrix` must carry gold for every row.
inline ExperimentResult run_experiment(const FeatureMatrix& matrix, const ExperimentConfig& config,
                                       std::uint64_t seed) {
  detail::stage("features", [&] { (void)matrix.gold_labels(); });
  const FeatureMatrix balanced =
      detail::stage("balance_classes", [&] { return balance_classes(matrix, config.balance_ratio, seed); });
  const FeatureMatrix labeled =
      detail::stage("select_labeled", [&] { return select_labeled(balanced, config.labeled_fraction, seed); });
  const SparseGraph graph = detail::stage("graph", [&] {
    return build_graph(std::span<const FeatureRow>(labeled.rows), config.graph);
  });
  const DenseMatrix y0 = detail::stage("spread", [&] { return init_label_matrix(labeled); });
  const LabelDistribution dist = detail::stage("spread", [&] { return spread(graph, y0, config.spread); });
  const auto predicted = assign_labels(dist, labeled);

  ExperimentResult r;
  std::vector<bool> test(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    test[i] = labeled.labels[i] == Label::unlabeled;
    r.labeled += !test[i];
  }
  const auto gold = labeled.gold_labels();
  r.confusion = detail::stage("metrics", [&] { return confusion(predicted, gold, test); });
  r.metrics = detail::stage("metrics", [&] { return metrics(r.confusion); });
  r.iterations_run = dist.iterations_run;
  r.converged = dist.converged;
  r.final_delta = dist.final_delta;
  r.candidates = labeled.size();
  return r;
}

inline ExperimentResult run_experiment(const Corpus& corpus, const FeatureConfig& features,
                                       const ExperimentConfig& config, std::uint64_t seed) {
  const auto matrix = detail::stage("features", [&] { return build_feature_matrix(corpus, features); });
  return run_experiment(matrix, config, seed);
}

struct SweepGrid {
  std::vector<std::size_t> k_values;
  std::vector<double> fractions;
  std::size_t runs = 10;
  std::uint64_t base_seed = 0;

  void validate() const {
    if (k_values.empty()) throw ConfigError("sweep needs at least one k");
    if (fractions.empty()) throw ConfigError("sweep needs at least one labeled fraction");
    if (runs < 1) throw ConfigError("sweep needs runs >= 1");
  }
};

struct RunRecord {
  std::size_t k = 0;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::optional<ExperimentResult> result;  // nullopt when the run failed
  std::string error;
};

struct AveragedRow {
  std::size_t k = 0;
  double fraction = 0.0;
  Metrics mean;
  std::size_t successful_runs = 0;
  std::size_t max_iterations_run = 0;
  bool all_converged = true;
};

struct SweepResult {
  std::string dataset;
  std::vector<RunRecord> runs;        // grid order: k, fraction, seed
  std::vector<AveragedRow> averages;  // grid order: k, fraction; failed cells omitted

  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(runs.begin(), runs.end(), [](const RunRecord& r) { return !r.result; }));
  }
};

/// Worker count from ASPECTRA_THREADS, else hardware concurrency.
inline std::size_t default_worker_count() {
  if (const char* env = std::getenv("ASPECTRA_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body) {
  workers = std::min(std::max<std::size_t>(workers, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
}

}  // namespace detail

inline AveragedRow average_cell(std::span<const RunRecord> cell) {
  AveragedRow row;
  row.k = cell.front().k;
  row.fraction = cell.front().fraction;
  double p = 0.0, r = 0.0, a = 0.0;
  for (const auto& run : cell) {
    if (!run.result) continue;
    ++row.successful_runs;
    p += run.result->metrics.precision;
    r += run.result->metrics.recall;
    a += run.result->metrics.accuracy;
    row.mean.precision_defined = row.mean.precision_defined && run.result->metrics.precision_defined;
    row.mean.recall_defined = row.mean.recall_defined && run.result->metrics.recall_defined;
    row.max_iterations_run = std::max(row.max_iterations_run, run.result->iterations_run);
    row.all_converged = row.all_converged && run.result->converged;
  }
  if (row.successful_runs > 0) {
    const auto n = static_cast<double>(row.successful_runs);
    row.mean.precision = p / n;
    row.mean.recall = r / n;
    row.mean.accuracy = a / n;
  }
  return row;
}

/// Runs the Cartesian grid k x fraction x seed on a prebuilt feature matrix.
/// Failing runs are recorded, not rethrown. Seeds are base_seed + run index.
inline SweepResult sweep(const FeatureMatrix& matrix, std::string dataset, const SweepGrid& grid,
                         const ExperimentConfig& base, std::size_t workers = default_worker_count()) {
  grid.validate();
  SweepResult result;
  result.dataset = std::move(dataset);
  for (auto k : grid.k_values)
    for (double f : grid.fractions)
      for (std::size_t r = 0; r < grid.runs; ++r)
        result.runs.push_back({k, f, grid.base_seed + r, std::nullopt, {}});

  detail::parallel_for(result.runs.size(), workers, [&](std::size_t i) {
    RunRecord& rec = result.runs[i];
    ExperimentConfig cfg = base;
    cfg.graph.k = rec.k;
    cfg.labeled_fraction = rec.fraction;
    try {
      rec.result = run_experiment(matrix, cfg, rec.seed);
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  });

  for (std::size_t start = 0; start < result.runs.size(); start += grid.runs) {
    auto row = average_cell(std::span<const RunRecord>(result.runs).subspan(start, grid.runs));
    if (row.successful_runs > 0) result.averages.push_back(row);
  }
  return result;
}

inline SweepResult sweep(const Corpus& corpus, const FeatureConfig& features, const SweepGrid& grid,
                         const ExperimentConfig& base, std::size_t workers = default_worker_count()) {
  const auto matrix = detail::stage("features", [&] { return build_feature_matrix(corpus, features); });
  return sweep(matrix, corpus.domain_name(), grid, base, workers);
}

/// CSV with header dataset,k,labeled_fraction,seed,precision,recall,accuracy.
/// Each cell's runs are followed by its averaged row (seed=avg). Failed runs
/// are omitted. Numbers use the shortest round-trip decimal form.
inline void export_metrics_csv(const SweepResult& result, std::ostream& out) {
  if (result.runs.empty()) throw ValidationError("empty sweep result");
  out << "dataset,k,labeled_fraction,seed,precision,recall,accuracy\n";
  const auto dataset = text::csv_field(result.dataset);
  auto line = [&](std::size_t k, double f, const std::string& seed, const Metrics& m) {
    out << dataset << ',' << k << ',' << text::format_double(f) << ',' << seed << ','
        << text::format_double(m.precision) << ',' << text::format_double(m.recall) << ','
        << text::format_double(m.accuracy) << '\n';
  };
  std::size_t avg = 0;
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    const auto& run = result.runs[i];
    if (run.result) line(run.k, run.fraction, std::to_string(run.seed), run.result->metrics);
    const bool cell_end = i + 1 == result.runs.size() || result.runs[i + 1].k != run.k ||
                          result.runs[i + 1].fraction != run.fraction;
    if (cell_end && avg < result.averages.size() && result.averages[avg].k == run.k &&
        result.averages[avg].fraction == run.fraction) {
      line(run.k, run.fraction, "avg", result.averages[avg].mean);
      ++avg;
    }
  }
  if (!out) throw Error("failed writing metrics CSV");
}

inline void export_metrics_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  export_metrics_csv(result, out);
  out.flush();
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace aspectra
