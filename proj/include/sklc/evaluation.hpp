#pragma once

// Accuracy reports, learning curves and inter-class SKL tables.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sklc/classifier.hpp"
#include "sklc/corpus.hpp"
#include "sklc/divergence.hpp"
#include "sklc/error.hpp"
#include "sklc/format.hpp"
#include "sklc/parallel.hpp"

namespace sklc {

struct ClassAccuracy {
  double accuracy = 0.0;
  std::size_t support = 0;
  std::size_t empty = 0;  // test documents of this label with no in-vocabulary token
};

struct EvaluationReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t empty_documents = 0;
  double overall_accuracy = 0.0;
  std::map<std::string, ClassAccuracy> per_class;
  std::map<std::pair<std::string, std::string>, std::size_t> confusion;  // (true, predicted)
};

/// Documents that vectorize to nothing count as errors; they appear in
/// `empty_documents` and per-class `empty` but not in the confusion matrix.
inline EvaluationReport evaluate(const TrainedModel& model, std::span<const LabeledDocument> test_docs,
                                 std::size_t threads = 1) {
  if (test_docs.empty()) throw Error(ErrorCode::InsufficientData, "evaluation needs at least one test document");
  for (const auto& doc : test_docs) {
    if (!model.class_index(doc.label)) {
      throw Error(ErrorCode::UnknownLabel, "test label '" + doc.label + "' is not a model class");
    }
  }

  std::vector<std::optional<std::string>> predicted(test_docs.size());
  parallel_for(test_docs.size(), threads, [&](std::size_t i) {
    try {
      predicted[i] = classify(model, test_docs[i]).label;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyDocument) throw;
    }
  });

  EvaluationReport report;
  report.total = test_docs.size();
  for (std::size_t i = 0; i < test_docs.size(); ++i) {
    const std::string& truth = test_docs[i].label;
    ClassAccuracy& cls = report.per_class[truth];
    ++cls.support;
    if (!predicted[i]) {
      ++cls.empty;
      ++report.empty_documents;
      continue;
    }
    ++report.confusion[{truth, *predicted[i]}];
    if (*predicted[i] == truth) {
      ++report.correct;
      cls.accuracy += 1.0;
    }
  }
  for (auto& [label, cls] : report.per_class) cls.accuracy /= static_cast<double>(cls.support);
  report.overall_accuracy = static_cast<double>(report.correct) / static_cast<double>(report.total);
  return report;
}

struct CurveSpec {
  std::vector<double> fractions;
  std::size_t repeats = 1;
  std::uint64_t seed = 42;
  std::vector<CentroidMethod> methods{CentroidMethod::Mean, CentroidMethod::Skl};

  static constexpr std::uint64_t kRepeatSeedStride = 10007;

  std::uint64_t repeat_seed(std::size_t repeat) const { return seed + repeat * kRepeatSeedStride; }

  void validate() const {
    if (fractions.empty()) throw Error(ErrorCode::InvalidConfig, "curve needs at least one fraction");
    for (std::size_t i = 0; i < fractions.size(); ++i) {
      if (!(fractions[i] > 0.0 && fractions[i] < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "curve fractions must lie in (0, 1)");
      }
      if (i > 0 && !(fractions[i - 1] < fractions[i])) {
        throw Error(ErrorCode::InvalidConfig, "curve fractions must be strictly increasing");
      }
    }
    if (repeats < 1) throw Error(ErrorCode::InvalidConfig, "curve repeats must be >= 1");
    if (methods.empty()) throw Error(ErrorCode::InvalidConfig, "curve needs at least one method");
  }
};

struct CurveRow {
  double fraction;
  std::size_t repeat;
  CentroidMethod method;
  double overall_accuracy;
  std::size_t empty_documents;
};

struct CurveClassRow {
  double fraction;
  std::size_t repeat;
  CentroidMethod method;
  std::string label;
  double accuracy;
};

struct CurveResult {
  std::vector<CurveRow> overall;
  std::vector<CurveClassRow> per_class;
};

/// One cell per (fraction, repeat, method). All methods of a repeat share the
/// same stratified split, seeded by CurveSpec::repeat_seed. Rows come out
/// sorted by (fraction, repeat, method, label) whatever the thread count.
inline CurveResult learning_curve(std::span<const LabeledDocument> corpus, const CurveSpec& spec,
                                  const TrainConfig& base, std::size_t threads = 1) {
  spec.validate();
  std::vector<CentroidMethod> methods = spec.methods;
  std::sort(methods.begin(), methods.end(),
            [](CentroidMethod a, CentroidMethod b) { return to_string(a) < to_string(b); });
  methods.erase(std::unique(methods.begin(), methods.end()), methods.end());

  struct Cell {
    double fraction;
    std::size_t repeat;
    CentroidMethod method;
    EvaluationReport report;
  };
  std::vector<Cell> cells;
  for (double f : spec.fractions) {
    for (std::size_t r = 0; r < spec.repeats; ++r) {
      for (CentroidMethod m : methods) cells.push_back({f, r, m, {}});
    }
  }

  parallel_for(cells.size(), threads, [&](std::size_t k) {
    Cell& cell = cells[k];
    const DatasetSplit split = split_corpus(corpus, cell.fraction, spec.repeat_seed(cell.repeat));
    TrainConfig cfg = base;
    cfg.method = cell.method;
    cfg.threads = 1;
    const TrainedModel model = train(split.train, cfg);
    cell.report = evaluate(model, split.test);
  });

  CurveResult result;
  for (const auto& cell : cells) {
    result.overall.push_back(
        {cell.fraction, cell.repeat, cell.method, cell.report.overall_accuracy, cell.report.empty_documents});
    for (const auto& [label, cls] : cell.report.per_class) {
      result.per_class.push_back({cell.fraction, cell.repeat, cell.method, label, cls.accuracy});
    }
  }
  return result;
}

struct CurveSummaryRow {
  double fraction;
  CentroidMethod method;
  double mean_accuracy;
};

/// Mean overall accuracy over repeats, per (fraction, method).
inline std::vector<CurveSummaryRow> summarize_curve(const CurveResult& result) {
  std::map<std::pair<double, std::string>, std::pair<double, std::size_t>> acc;
  std::map<std::string, CentroidMethod> by_name;
  for (const auto& row : result.overall) {
    auto& [sum, n] = acc[{row.fraction, std::string(to_string(row.method))}];
    sum += row.overall_accuracy;
    ++n;
    by_name[std::string(to_string(row.method))] = row.method;
  }
  std::vector<CurveSummaryRow> out;
  for (const auto& [key, v] : acc) {
    out.push_back({key.first, by_name[key.second], v.first / static_cast<double>(v.second)});
  }
  return out;
}

inline void write_curve_csv(std::ostream& out, const CurveResult& result) {
  out << "fraction,repeat,method,overall_accuracy,empty_docs\n";
  for (const auto& r : result.overall) {
    out << format_double(r.fraction) << ',' << r.repeat << ',' << to_string(r.method) << ','
        << format_double(r.overall_accuracy) << ',' << r.empty_documents << '\n';
  }
}

inline void write_curve_class_csv(std::ostream& out, const CurveResult& result) {
  out << "fraction,repeat,method,label,accuracy\n";
  for (const auto& r : result.per_class) {
    out << format_double(r.fraction) << ',' << r.repeat << ',' << to_string(r.method) << ',' << csv_field(r.label)
        << ',' << format_double(r.accuracy) << '\n';
  }
}

inline void write_curve_summary_csv(std::ostream& out, std::span<const CurveSummaryRow> rows) {
  out << "fraction,method,mean_accuracy\n";
  for (const auto& r : rows) {
    out << format_double(r.fraction) << ',' << to_string(r.method) << ',' << format_double(r.mean_accuracy) << '\n';
  }
}

struct DistanceTable {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> pairwise;  // skl(c_j, c_k)
  std::vector<double> average;                // mean over k != j of pairwise[j][k]
};

inline DistanceTable class_distance_table(const TrainedModel& model) {
  const std::size_t k = model.classes.size();
  if (k < 2) throw Error(ErrorCode::InsufficientClasses, "distance table needs at least 2 classes");
  DistanceTable t;
  t.pairwise.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t a = 0; a < k; ++a) {
    t.labels.push_back(model.classes[a].label);
    for (std::size_t b = a + 1; b < k; ++b) {
      const double d = skl(model.classes[a].centroid, model.classes[b].centroid);
      t.pairwise[a][b] = d;
      t.pairwise[b][a] = d;
    }
  }
  for (std::size_t a = 0; a < k; ++a) {
    double sum = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
      if (b != a) sum += t.pairwise[a][b];
    }
    t.average.push_back(sum / static_cast<double>(k - 1));
  }
  return t;
}

inline void write_distance_csv(std::ostream& out, const DistanceTable& t) {
  out << "label,avg_skl\n";
  for (std::size_t a = 0; a < t.labels.size(); ++a) {
    out << csv_field(t.labels[a]) << ',' << format_double(t.average[a]) << '\n';
  }
}

inline void write_distance_matrix_csv(std::ostream& out, const DistanceTable& t) {
  out << "label";
  for (const auto& l : t.labels) out << ',' << csv_field(l);
  out << '\n';
  for (std::size_t a = 0; a < t.labels.size(); ++a) {
    out << csv_field(t.labels[a]);
    for (double d : t.pairwise[a]) out << ',' << format_double(d);
    out << '\n';
  }
}

}  // namespace sklc
