#pragma once

// Multinomial naive Bayes in its KL form:
//
//   label(d) = argmax_j log P(C_j) + sum_i d_i log c_ji
//            = argmin_j -log P(C_j) + KL(d, c_j)
//
// for a normalized document d. The two objectives differ per class only by
// the class-independent term sum_i d_i log d_i.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sklc/centroid.hpp"
#include "sklc/corpus.hpp"
#include "sklc/divergence.hpp"
#include "sklc/error.hpp"
#include "sklc/parallel.hpp"

namespace sklc {

enum class CentroidMethod { Mean, Skl };
enum class SklSolver { Flow, Dual };

constexpr std::string_view to_string(CentroidMethod m) { return m == CentroidMethod::Mean ? "mean" : "skl"; }
constexpr std::string_view to_string(SklSolver s) { return s == SklSolver::Flow ? "flow" : "dual"; }

inline CentroidMethod parse_centroid_method(std::string_view name) {
  if (name == "mean") return CentroidMethod::Mean;
  if (name == "skl") return CentroidMethod::Skl;
  throw Error(ErrorCode::InvalidConfig, "unknown centroid method '" + std::string(name) + "'");
}

inline SklSolver parse_solver(std::string_view name) {
  if (name == "flow") return SklSolver::Flow;
  if (name == "dual") return SklSolver::Dual;
  throw Error(ErrorCode::InvalidConfig, "unknown solver '" + std::string(name) + "'");
}

struct TrainConfig {
  TokenizerConfig tokenizer;
  SmoothingConfig smoothing;
  std::size_t min_count = 1;
  CentroidMethod method = CentroidMethod::Skl;
  SklSolver solver = SklSolver::Flow;
  FlowConfig flow;
  double dual_tol = 1e-12;
  std::size_t threads = 1;
};

struct ClassModel {
  std::string label;
  double prior = 0.0;
  Distribution centroid;

  friend bool operator==(const ClassModel&, const ClassModel&) = default;
};

struct TrainedModel {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  Vocabulary vocab;
  TokenizerConfig tokenizer;
  SmoothingConfig smoothing;
  CentroidMethod centroid_method = CentroidMethod::Skl;
  std::vector<ClassModel> classes;

  std::optional<std::size_t> class_index(std::string_view label) const {
    for (std::size_t k = 0; k < classes.size(); ++k) {
      if (classes[k].label == label) return k;
    }
    return std::nullopt;
  }

  friend bool operator==(const TrainedModel&, const TrainedModel&) = default;
};

struct ClassScore {
  std::string label;
  double neg_log_prior;
  double kl_term;
  double total;
};

using ScoreBreakdown = std::vector<ClassScore>;

/// Solver output per class, kept next to the model for diagnostics.
struct TrainingReport {
  std::vector<SolverReport> solvers;
};

/// Priors are class shares of the (nonempty) training documents. Documents
/// with no in-vocabulary token are skipped. Classes are ordered by label.
inline TrainedModel train(std::span<const LabeledDocument> corpus, const TrainConfig& cfg,
                          TrainingReport* report = nullptr) {
  cfg.tokenizer.validate();
  cfg.smoothing.validate();

  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < corpus.size(); ++i) by_label[corpus[i].label].push_back(i);
  if (by_label.size() < 2) {
    throw Error(ErrorCode::InsufficientClasses,
                "training needs at least 2 distinct labels, got " + std::to_string(by_label.size()));
  }

  TrainedModel model;
  model.vocab = build_vocabulary(corpus, cfg.tokenizer, cfg.min_count);
  model.tokenizer = cfg.tokenizer;
  model.smoothing = cfg.smoothing;
  model.centroid_method = cfg.method;
  const std::size_t n = model.vocab.size();

  std::vector<ClassCorpus> classes;
  std::size_t total_docs = 0;
  for (const auto& [label, members] : by_label) {
    ClassCorpus cc;
    cc.label = label;
    for (std::size_t i : members) {
      try {
        cc.raw_counts.push_back(vectorize(corpus[i], model.vocab, cfg.tokenizer));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyDocument) throw;
        continue;
      }
      cc.docs.push_back(smooth_normalize(cc.raw_counts.back(), n, cfg.smoothing));
    }
    if (cc.docs.empty()) {
      throw Error(ErrorCode::InsufficientData, "class '" + label + "' has no document with in-vocabulary tokens");
    }
    total_docs += cc.docs.size();
    classes.push_back(std::move(cc));
  }

  std::vector<SolverReport> solved(classes.size());
  parallel_for(classes.size(), cfg.threads, [&](std::size_t k) {
    const ClassCorpus& cc = classes[k];
    if (cfg.method == CentroidMethod::Mean) {
      solved[k].centroid = mean_centroid(cc, cfg.smoothing, n);
      solved[k].solver = SolverKind::Mean;
    } else if (cfg.solver == SklSolver::Flow) {
      solved[k] = solve_flow(cc, LineGraph(n), cfg.flow);
    } else {
      solved[k] = solve_dual(cc, cfg.dual_tol);
    }
  });

  for (std::size_t k = 0; k < classes.size(); ++k) {
    model.classes.push_back(ClassModel{
        classes[k].label,
        static_cast<double>(classes[k].docs.size()) / static_cast<double>(total_docs),
        solved[k].centroid,
    });
  }
  if (report) report->solvers = std::move(solved);
  return model;
}

/// total_j = -log P(C_j) + KL(d, c_j) for each class in model order.
inline ScoreBreakdown score(const TrainedModel& model, std::span<const double> doc) {
  if (doc.size() != model.vocab.size()) {
    throw Error(ErrorCode::DimensionMismatch, "document length " + std::to_string(doc.size()) +
                                                  " differs from vocabulary size " +
                                                  std::to_string(model.vocab.size()));
  }
  ScoreBreakdown out;
  out.reserve(model.classes.size());
  for (const auto& c : model.classes) {
    const double neg_log_prior = -std::log(c.prior);
    const double kl_term = kl(doc, c.centroid);
    out.push_back({c.label, neg_log_prior, kl_term, neg_log_prior + kl_term});
  }
  return out;
}

/// Lowest total wins; ties go to the earliest class in model order.
inline std::size_t best_class(const ScoreBreakdown& scores) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k].total < scores[best].total) best = k;
  }
  return best;
}

struct Prediction {
  std::string label;
  ScoreBreakdown scores;
};

inline Prediction classify(const TrainedModel& model, std::string_view text) {
  const CountVector counts = vectorize(text, model.vocab, model.tokenizer);
  const Distribution doc = smooth_normalize(counts, model.vocab.size(), model.smoothing);
  Prediction p;
  p.scores = score(model, doc);
  p.label = p.scores[best_class(p.scores)].label;
  return p;
}

inline Prediction classify(const TrainedModel& model, const LabeledDocument& doc) {
  return classify(model, doc.text);
}

}  // namespace sklc
