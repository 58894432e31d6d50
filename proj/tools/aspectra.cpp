// aspectra: aspect term extraction by label spreading, from annotated corpus
// to metrics and opinion summaries.
//
// Exit codes: 0 success, 1 runtime stage failure, 2 input/validation failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aspectra/aspectra.hpp"

namespace {

using namespace aspectra;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitRuntime = 1;
constexpr int kExitInput = 2;

struct Options {
  std::string input;
  std::string format = "jsonl";
  std::string annotations;
  std::string config;
  std::string output;
  std::string domain;
  std::string aspects;
  std::string lexicon;
  std::string features_csv;
  std::string graph_dump;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> k;
  std::optional<std::string> fraction;
  std::optional<std::size_t> runs;
  std::size_t top_n = 10;
};

void write_json_file(const std::string& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string dataset_name(const Options& o) {
  return o.domain.empty() ? std::filesystem::path(o.input).stem().string() : o.domain;
}

PipelineConfig resolve_config(const Options& o) {
  PipelineConfig c = o.config.empty() ? PipelineConfig{} : load_pipeline_config(o.config);
  if (o.seed) {
    c.seed = *o.seed;
    c.grid.base_seed = *o.seed;
  }
  if (o.k) {
    c.grid.k_values = parse_k_list(*o.k);
    c.graph.k = c.grid.k_values.front();
  }
  if (o.fraction) {
    c.grid.fractions = parse_fraction_list(*o.fraction);
    c.classify_fraction = c.grid.fractions.front();
  }
  if (o.runs) c.grid.runs = *o.runs;
  c.validate();
  return c;
}

Corpus load_jsonl(const Options& o) {
  return load_corpus(o.input, CorpusFormat::jsonl, {}, dataset_name(o));
}

void print_stats(const CorpusStats& s) {
  std::cout << s.sentence_count << " sentences, " << s.aspect_word_count << " aspect words, "
            << s.non_aspect_word_count << " non-aspect words\n";
}

int cmd_ingest(const Options& o) {
  const auto format = parse_corpus_format(o.format);
  if (!format) throw ConfigError("--format must be semeval-xml or jsonl");
  if (*format == CorpusFormat::semeval_xml && o.annotations.empty())
    throw ConfigError("--annotations is required for semeval-xml input");
  const Corpus corpus = load_corpus(o.input, *format, o.annotations, dataset_name(o));
  {
    std::ofstream out(o.output, std::ios::binary);
    if (!out) throw Error("cannot open '" + o.output + "' for writing");
    write_annotated_jsonl(corpus, out);
    if (!out) throw Error("failed writing '" + o.output + "'");
  }
  print_stats(corpus.stats());
  ordered_json run;
  run["command"] = "ingest";
  run["input"] = o.input;
  run["format"] = o.format;
  run["annotations"] = o.annotations;
  run["stats"] = {{"sentences", corpus.stats().sentence_count},
                  {"aspect_words", corpus.stats().aspect_word_count},
                  {"non_aspect_words", corpus.stats().non_aspect_word_count}};
  write_json_file(o.output + ".run.json", run);
  return 0;
}

int cmd_classify(const Options& o) {
  const PipelineConfig cfg = resolve_config(o);
  const Corpus corpus = load_jsonl(o);
  const FeatureMatrix matrix = build_feature_matrix(corpus, cfg.features);
  for (const auto& w : matrix.warnings) std::cerr << "warning: " << w << '\n';
  const FeatureMatrix labeled = select_labeled(matrix, cfg.classify_fraction, cfg.seed);
  if (!o.features_csv.empty()) {
    std::ofstream out(o.features_csv, std::ios::binary);
    if (!out) throw Error("cannot open '" + o.features_csv + "' for writing");
    write_feature_csv(labeled, out);
  }
  const SparseGraph graph = build_graph(std::span<const FeatureRow>(labeled.rows), cfg.graph);
  if (!o.graph_dump.empty()) {
    std::ofstream w(o.graph_dump + ".W.coo"), s(o.graph_dump + ".S.coo");
    write_coo(graph.weights, w);
    write_coo(graph.normalized, s);
  }
  const LabelDistribution dist = spread(graph, init_label_matrix(labeled), cfg.spread);
  const auto labels = assign_labels(dist, labeled);

  std::size_t detected = 0, given = 0;
  {
    std::ofstream out(o.output, std::ios::binary);
    if (!out) throw Error("cannot open '" + o.output + "' for writing");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      given += labeled.labels[i] != Label::unlabeled;
      if (labels[i] != Label::aspect) continue;
      out << labeled.candidates[i].surface << '\n';
      ++detected;
    }
    if (!out) throw Error("failed writing '" + o.output + "'");
  }

  ordered_json diag;
  diag["command"] = "classify";
  diag["input"] = o.input;
  diag["seed"] = cfg.seed;
  diag["config"] = to_json(cfg);
  diag["iterations_run"] = dist.iterations_run;
  diag["converged"] = dist.converged;
  diag["final_delta"] = dist.final_delta;
  diag["candidates"] = labeled.size();
  diag["labeled"] = given;
  diag["detected_aspects"] = detected;
  diag["graph_edges"] = graph.weights.nnz();
  write_json_file(o.output + ".diagnostics.json", diag);
  std::cout << detected << " aspects detected among " << labeled.size() << " candidates ("
            << given << " labeled); " << dist.iterations_run << " iterations, "
            << (dist.converged ? "converged" : "not converged") << '\n';
  return 0;
}

int cmd_evaluate(const Options& o) {
  const PipelineConfig cfg = resolve_config(o);
  const Corpus corpus = load_jsonl(o);
  const FeatureMatrix matrix = build_feature_matrix(corpus, cfg.features);
  const SweepResult result = sweep(matrix, dataset_name(o), cfg.grid, cfg.experiment());

  for (const auto& run : result.runs)
    if (!run.result)
      std::cerr << "cell k=" << run.k << " fraction=" << text::format_double(run.fraction)
                << " seed=" << run.seed << " failed: " << run.error << '\n';

  if (result.averages.empty()) {
    std::cerr << "every sweep cell failed\n";
    return kExitRuntime;
  }
  export_metrics_csv(result, o.output);

  ordered_json run;
  run["command"] = "evaluate";
  run["input"] = o.input;
  run["dataset"] = result.dataset;
  run["config"] = to_json(cfg);
  run["runs_total"] = result.runs.size();
  run["runs_failed"] = result.failures();
  std::size_t max_iter = 0;
  bool all_converged = true;
  for (const auto& row : result.averages) {
    max_iter = std::max(max_iter, row.max_iterations_run);
    all_converged = all_converged && row.all_converged;
  }
  run["max_iterations_run"] = max_iter;
  run["all_converged"] = all_converged;
  write_json_file(o.output + ".run.json", run);

  std::map<double, const AveragedRow*> best;
  for (const auto& row : result.averages) {
    auto& b = best[row.fraction];
    if (!b || row.mean.accuracy > b->mean.accuracy) b = &row;
  }
  for (const auto& [fraction, row] : best)
    std::cout << "fraction " << text::format_double(fraction) << ": best k=" << row->k
              << " accuracy=" << text::format_double(row->mean.accuracy)
              << " precision=" << text::format_double(row->mean.precision)
              << " recall=" << text::format_double(row->mean.recall) << '\n';
  std::cout << result.runs.size() - result.failures() << '/' << result.runs.size()
            << " runs succeeded; max iterations " << max_iter
            << (all_converged ? ", all converged" : ", some runs hit the iteration cap") << '\n';
  return 0;
}

std::vector<std::string> read_aspects(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open aspects file '" + path + "'");
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

int cmd_summarize(const Options& o) {
  if (!std::filesystem::exists(o.lexicon)) throw ValidationError("lexicon '" + o.lexicon + "' not found");
  const OpinionLexicon lexicon = load_lexicon(o.lexicon);
  const Corpus corpus = load_jsonl(o);
  const auto aspects = read_aspects(o.aspects);
  const AspectSummary summary = summarize(corpus, aspects, lexicon);
  const SummaryPaths paths{o.output + "_frequency.csv", o.output + "_polarity.json"};
  export_summary(summary, o.top_n, paths);

  ordered_json run;
  run["command"] = "summarize";
  run["input"] = o.input;
  run["aspects"] = o.aspects;
  run["lexicon"] = o.lexicon;
  run["top_n"] = o.top_n;
  run["tuples"] = summary.tuples.size();
  write_json_file(o.output + ".run.json", run);
  std::cout << summary.aspects.size() << " aspects, " << summary.tuples.size()
            << " opinion tuples -> " << paths.frequency_csv << ", " << paths.polarity_json << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aspect term extraction with graph label spreading"};
  app.require_subcommand(1);
  Options o;

  auto* ingest = app.add_subcommand("ingest", "Validate a corpus and write canonical JSONL");
  ingest->add_option("--input", o.input, "Corpus file")->required();
  ingest->add_option("--format", o.format, "semeval-xml or jsonl")->required();
  ingest->add_option("--annotations", o.annotations, "Annotated JSONL for XML input");
  ingest->add_option("--output", o.output, "Canonical JSONL output")->required();
  ingest->add_option("--domain", o.domain, "Dataset name");

  auto* classify = app.add_subcommand("classify", "Detect aspect terms in an annotated corpus");
  classify->add_option("--input", o.input, "Annotated JSONL corpus")->required();
  classify->add_option("--config", o.config, "Pipeline config JSON");
  classify->add_option("--seed", o.seed, "Seed for labeled-set selection");
  classify->add_option("--k", o.k, "Nearest neighbours");
  classify->add_option("--fraction", o.fraction, "Labeled fraction");
  classify->add_option("--output", o.output, "Aspect list output")->required();
  classify->add_option("--features-csv", o.features_csv, "Optional feature matrix dump");
  classify->add_option("--dump-graph", o.graph_dump, "Optional W/S coordinate-list dump prefix");

  auto* evaluate = app.add_subcommand("evaluate", "Sweep k and labeled fraction, write metrics CSV");
  evaluate->add_option("--input", o.input, "Annotated JSONL corpus with gold aspects")->required();
  evaluate->add_option("--config", o.config, "Pipeline config JSON");
  evaluate->add_option("--seed", o.seed, "Base seed");
  evaluate->add_option("--k", o.k, "k values, e.g. 1-20 or 1,5,10");
  evaluate->add_option("--fraction", o.fraction, "Labeled fractions, e.g. 0.1,0.15,0.2");
  evaluate->add_option("--runs", o.runs, "Runs per cell");
  evaluate->add_option("--output", o.output, "Metrics CSV")->required();
  evaluate->add_option("--domain", o.domain, "Dataset name for the CSV");

  auto* summarize_cmd = app.add_subcommand("summarize", "Opinion summary for detected aspects");
  summarize_cmd->add_option("--input", o.input, "Annotated JSONL corpus")->required();
  summarize_cmd->add_option("--aspects", o.aspects, "Aspect list from classify")->required();
  summarize_cmd->add_option("--lexicon", o.lexicon, "Opinion lexicon file")->required();
  summarize_cmd->add_option("--top-n", o.top_n, "Aspects in the polarity JSON");
  summarize_cmd->add_option("--output", o.output, "Output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*ingest) return cmd_ingest(o);
    if (*classify) return cmd_classify(o);
    if (*evaluate) return cmd_evaluate(o);
    if (*summarize_cmd) return cmd_summarize(o);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
