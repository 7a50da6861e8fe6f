#pragma once

// Command-line front end: train, classify, evaluate, curve, distances, profile.
//
// Exit codes: 0 success, 1 usage error, 2 data or solver error.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sklc/centroid.hpp"
#include "sklc/classifier.hpp"
#include "sklc/corpus_io.hpp"
#include "sklc/divergence.hpp"
#include "sklc/evaluation.hpp"
#include "sklc/model_io.hpp"

namespace sklc::cli {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2 };

struct CliConfig {
  std::string input;
  std::string output;
  std::string model;
  std::string format;  // empty: infer from the input extension
  double alpha = 1.0;
  std::size_t min_count = 1;
  std::size_t min_token_length = 1;
  bool keep_case = false;
  std::string centroid = "skl";
  std::string solver = "flow";
  double tol = 1e-8;
  double tol_energy = 1e-18;
  double step_init = 1e-2;
  std::uint64_t max_iters = 200000;
  double dual_tol = 1e-12;
  std::vector<double> fractions{0.1, 0.2, 0.4, 0.8};
  std::size_t repeats = 5;
  std::uint64_t seed = 42;
  std::vector<std::string> methods{"mean", "skl"};
  std::size_t threads = 0;
  std::string per_class_output;
  std::string summary_output;
  std::string matrix_output;
  std::string trace_dir;
  std::vector<double> q{0.01, 0.99};
  std::vector<std::string> measures{"skl", "cosine", "euclidean"};
  std::size_t grid = 999;
  bool verbose = false;

  TrainConfig train_config() const {
    TrainConfig cfg;
    cfg.tokenizer.lowercase = !keep_case;
    cfg.tokenizer.min_token_length = min_token_length;
    cfg.smoothing.alpha = alpha;
    cfg.min_count = min_count;
    cfg.method = parse_centroid_method(centroid);
    cfg.solver = parse_solver(solver);
    cfg.flow.tol_grad = tol;
    cfg.flow.tol_energy = tol_energy;
    cfg.flow.step_init = step_init;
    cfg.flow.max_iters = max_iters;
    cfg.dual_tol = dual_tol;
    cfg.threads = threads;
    return cfg;
  }
};

namespace detail {

inline std::vector<LabeledDocument> load_input(const CliConfig& c) {
  if (c.format.empty()) return read_corpus(c.input);
  return read_corpus(c.input, parse_corpus_format(c.format));
}

/// Writes to `path`, or to `fallback` when the path is empty or "-".
template <typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  fn(out);
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

inline std::string sibling_path(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

inline std::string sanitize(const std::string& label) {
  std::string out;
  for (unsigned char ch : label) {
    out += std::isalnum(ch) || ch == '-' || ch == '_' ? static_cast<char>(ch) : '_';
  }
  return out;
}

inline void add_training_flags(CLI::App* cmd, CliConfig& c) {
  cmd->add_option("--format", c.format, "Corpus format (jsonl|tsv); inferred from the extension when empty")
      ->check(CLI::IsMember({"", "jsonl", "tsv"}));
  cmd->add_option("--alpha", c.alpha, "Additive smoothing pseudo-count (> 0)");
  cmd->add_option("--min-count", c.min_count, "Minimum corpus count for a vocabulary word")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--min-token-length", c.min_token_length, "Drop shorter tokens")->check(CLI::PositiveNumber);
  cmd->add_flag("--keep-case", c.keep_case, "Do not lowercase tokens");
  cmd->add_option("--solver", c.solver, "SKL centroid solver")->check(CLI::IsMember({"flow", "dual"}));
  cmd->add_option("--tol", c.tol, "Flow stop: max |d rho/dt|");
  cmd->add_option("--tol-energy", c.tol_energy, "Flow stop: energy decrease of a full step");
  cmd->add_option("--step-init", c.step_init, "Initial Euler step");
  cmd->add_option("--max-iters", c.max_iters, "Flow step limit");
  cmd->add_option("--dual-tol", c.dual_tol, "Dual solver tolerance on |sum q - 1|");
  cmd->add_option("--threads", c.threads, "Worker threads (0 = one per core)");
}

inline int do_train(const CliConfig& c, std::ostream& err) {
  const auto docs = load_input(c);
  TrainConfig cfg = c.train_config();
  if (!c.trace_dir.empty()) cfg.flow.record_history = true;
  TrainingReport report;
  const TrainedModel model = train(docs, cfg, &report);
  save_model(model, c.output);

  for (std::size_t k = 0; k < model.classes.size(); ++k) {
    const SolverReport& s = report.solvers[k];
    if (c.verbose) {
      err << model.classes[k].label << ": prior " << format_double(model.classes[k].prior);
      if (s.solver == SolverKind::Flow) {
        err << ", flow steps " << s.trace.iterations << " (rejected " << s.trace.rejected_steps << "), energy "
            << format_double(s.trace.initial_energy) << " -> " << format_double(s.trace.final_energy)
            << ", max |rhs| " << format_double(s.trace.max_rhs_norm);
      } else if (s.solver == SolverKind::Dual) {
        err << ", dual outer " << s.dual.outer_iterations << ", max residual " << format_double(s.dual.max_residual);
      }
      err << '\n';
    }
    if (!c.trace_dir.empty() && s.solver == SolverKind::Flow) {
      std::filesystem::create_directories(c.trace_dir);
      const auto path = std::filesystem::path(c.trace_dir) /
                        ("trace_" + std::to_string(k) + "_" + sanitize(model.classes[k].label) + ".csv");
      with_output(path.string(), err, [&](std::ostream& out) { write_trace_csv(out, s.trace); });
    }
  }
  return kOk;
}

inline int do_classify(const CliConfig& c, std::ostream& out) {
  const TrainedModel model = load_model(c.model);
  const auto docs = load_input(c);
  std::vector<std::string> lines(docs.size());
  parallel_for(docs.size(), c.threads, [&](std::size_t i) {
    try {
      lines[i] = prediction_record(classify(model, docs[i]));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyDocument) throw;
      lines[i] = nlohmann::json{{"label", nullptr}, {"error", std::string(to_string(e.code()))}}.dump();
    }
  });
  with_output(c.output, out, [&](std::ostream& o) {
    for (const auto& line : lines) o << line << '\n';
  });
  return kOk;
}

inline int do_evaluate(const CliConfig& c, std::ostream& out) {
  const TrainedModel model = load_model(c.model);
  const auto docs = load_input(c);
  const EvaluationReport r = evaluate(model, docs, c.threads);
  with_output(c.output, out, [&](std::ostream& o) {
    o << "label,accuracy,support,empty_docs\n";
    for (const auto& [label, cls] : r.per_class) {
      o << csv_field(label) << ',' << format_double(cls.accuracy) << ',' << cls.support << ',' << cls.empty << '\n';
    }
    o << "__overall__," << format_double(r.overall_accuracy) << ',' << r.total << ',' << r.empty_documents << '\n';
  });
  return kOk;
}

inline int do_curve(const CliConfig& c, std::ostream& out) {
  const auto docs = load_input(c);
  CurveSpec spec;
  spec.fractions = c.fractions;
  spec.repeats = c.repeats;
  spec.seed = c.seed;
  spec.methods.clear();
  for (const auto& m : c.methods) spec.methods.push_back(parse_centroid_method(m));
  TrainConfig cfg = c.train_config();
  cfg.threads = 1;
  const CurveResult result = learning_curve(docs, spec, cfg, c.threads);

  with_output(c.output, out, [&](std::ostream& o) { write_curve_csv(o, result); });
  const std::string per_class = !c.per_class_output.empty() ? c.per_class_output
                                : c.output == "-"             ? c.output
                                                              : sibling_path(c.output, "_per_class");
  with_output(per_class, out, [&](std::ostream& o) { write_curve_class_csv(o, result); });
  if (!c.summary_output.empty()) {
    const auto summary = summarize_curve(result);
    with_output(c.summary_output, out, [&](std::ostream& o) { write_curve_summary_csv(o, summary); });
  }
  return kOk;
}

inline int do_distances(const CliConfig& c, std::ostream& out) {
  const DistanceTable t = class_distance_table(load_model(c.model));
  with_output(c.output, out, [&](std::ostream& o) { write_distance_csv(o, t); });
  const std::string matrix = !c.matrix_output.empty() ? c.matrix_output
                             : c.output.empty() || c.output == "-" ? std::string()
                                                                   : sibling_path(c.output, "_matrix");
  if (!matrix.empty()) {
    with_output(matrix, out, [&](std::ostream& o) { write_distance_matrix_csv(o, t); });
  }
  return kOk;
}

inline int do_profile(const CliConfig& c, std::ostream& out) {
  std::vector<MeasureKind> measures;
  for (const auto& m : c.measures) measures.push_back(parse_measure(m));
  const Distribution q(c.q);
  ProfileGrid grid;
  grid.points = c.grid;
  const auto rows = divergence_profile(q, measures, grid);
  with_output(c.output, out, [&](std::ostream& o) { write_profile_csv(o, rows); });
  return kOk;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CliConfig c;
  CLI::App app{"Naive Bayes text classification with symmetric-KL class centroids", "sklc"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.add_flag("-v,--verbose", c.verbose, "Log per-class solver progress to stderr");

  auto* train = app.add_subcommand("train", "Fit a model from a labeled corpus");
  train->add_option("--input", c.input, "Labeled corpus (.jsonl or .tsv)")->required();
  train->add_option("--output", c.output, "Model JSON to write")->required();
  train->add_option("--centroid", c.centroid, "Centroid estimator")->check(CLI::IsMember({"mean", "skl"}));
  train->add_option("--trace-dir", c.trace_dir, "Write per-class flow traces (iter,energy,max_rhs,step) here");
  detail::add_training_flags(train, c);

  auto* classify = app.add_subcommand("classify", "Predict labels; one JSON record per input document");
  classify->add_option("--model", c.model, "Model JSON")->required();
  classify->add_option("--input", c.input, "Corpus to classify (labels are ignored)")->required();
  classify->add_option("--output", c.output, "Predictions JSONL ('-' for stdout)");
  classify->add_option("--format", c.format, "Corpus format (jsonl|tsv)")->check(CLI::IsMember({"", "jsonl", "tsv"}));
  classify->add_option("--threads", c.threads, "Worker threads (0 = one per core)");

  auto* evaluate = app.add_subcommand("evaluate", "Accuracy of a model on a labeled corpus");
  evaluate->add_option("--model", c.model, "Model JSON")->required();
  evaluate->add_option("--input", c.input, "Labeled test corpus")->required();
  evaluate->add_option("--output", c.output, "Report CSV ('-' for stdout)");
  evaluate->add_option("--format", c.format, "Corpus format (jsonl|tsv)")->check(CLI::IsMember({"", "jsonl", "tsv"}));
  evaluate->add_option("--threads", c.threads, "Worker threads (0 = one per core)");

  auto* curve = app.add_subcommand("curve", "Learning curve over training fractions");
  curve->add_option("--input", c.input, "Labeled corpus")->required();
  curve->add_option("--output", c.output, "Overall accuracy CSV")->required();
  curve->add_option("--per-class-output", c.per_class_output, "Per-class CSV (default: <output>_per_class.csv)");
  curve->add_option("--summary-output", c.summary_output, "Mean accuracy per fraction and method");
  curve->add_option("--fractions", c.fractions, "Training fractions, strictly increasing in (0,1)")->delimiter(',');
  curve->add_option("--repeats", c.repeats, "Random splits per fraction")->check(CLI::PositiveNumber);
  curve->add_option("--seed", c.seed, "Base seed; repeat r uses seed + 10007 r");
  curve->add_option("--methods", c.methods, "Centroid estimators")
      ->delimiter(',')
      ->check(CLI::IsMember({"mean", "skl"}));
  detail::add_training_flags(curve, c);

  auto* distances = app.add_subcommand("distances", "Average SKL between class centroids");
  distances->add_option("--model", c.model, "Model JSON")->required();
  distances->add_option("--output", c.output, "label,avg_skl CSV ('-' for stdout)");
  distances->add_option("--matrix-output", c.matrix_output, "Pairwise CSV (default: <output>_matrix.csv)");

  auto* profile = app.add_subcommand("profile", "Measures between p = (x, 1-x) and a fixed q");
  profile->add_option("--q", c.q, "Reference distribution of length 2")->delimiter(',');
  profile->add_option("--measures", c.measures, "Measures to evaluate")
      ->delimiter(',')
      ->check(CLI::IsMember({"kl", "skl", "cosine", "euclidean"}));
  profile->add_option("--grid", c.grid, "Grid points in [0.001, 0.999]");
  profile->add_option("--output", c.output, "Profile CSV ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train) return detail::do_train(c, err);
    if (*classify) return detail::do_classify(c, out);
    if (*evaluate) return detail::do_evaluate(c, out);
    if (*curve) return detail::do_curve(c, out);
    if (*distances) return detail::do_distances(c, out);
    if (*profile) return detail::do_profile(c, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace sklc::cli
