#pragma once

// Versioned JSON model files and JSONL prediction records.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "sklc/classifier.hpp"
#include "sklc/error.hpp"

namespace sklc {

// nlohmann::json writes the shortest decimal that parses back to the same
// double, so floats round-trip bit for bit.
inline nlohmann::json model_to_json(const TrainedModel& model) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : model.classes) {
    classes.push_back({{"label", c.label}, {"prior", c.prior}, {"centroid", c.centroid.values()}});
  }
  return {
      {"version", model.format_version},
      {"tokenizer", {{"lowercase", model.tokenizer.lowercase}, {"min_token_length", model.tokenizer.min_token_length}}},
      {"smoothing", {{"alpha", model.smoothing.alpha}}},
      {"centroid_method", std::string(to_string(model.centroid_method))},
      {"min_count", model.vocab.min_count()},
      {"vocab", model.vocab.words()},
      {"classes", std::move(classes)},
  };
}

namespace detail {

class SchemaReader {
 public:
  const nlohmann::json& field(const nlohmann::json& obj, const std::string& key, const std::string& path,
                              nlohmann::json::value_t type) const {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    const std::string at = path.empty() ? key : path + "." + key;
    if (it == obj.end()) fail(at, "missing");
    check(*it, at, type);
    return *it;
  }

  void check(const nlohmann::json& v, const std::string& path, nlohmann::json::value_t type) const {
    using vt = nlohmann::json::value_t;
    const bool ok = type == vt::number_float ? v.is_number()
                    : type == vt::number_unsigned ? v.is_number_integer() && v.get<std::int64_t>() >= 0
                                                  : v.type() == type;
    if (!ok) fail(path, "has the wrong type");
  }

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw Error(ErrorCode::SchemaError, "field '" + path + "' " + what);
  }
};

}  // namespace detail

inline TrainedModel model_from_json(const nlohmann::json& j) {
  using vt = nlohmann::json::value_t;
  const detail::SchemaReader r;
  if (!j.is_object()) r.fail("", "model root is not an object");

  const auto& version = r.field(j, "version", "", vt::number_unsigned);
  if (version.get<std::uint64_t>() != TrainedModel::kFormatVersion) {
    throw Error(ErrorCode::VersionMismatch, "model format version " + version.dump() + " (expected " +
                                                std::to_string(TrainedModel::kFormatVersion) + ")");
  }

  TrainedModel model;
  const auto& tok = r.field(j, "tokenizer", "", vt::object);
  model.tokenizer.lowercase = r.field(tok, "lowercase", "tokenizer", vt::boolean).get<bool>();
  model.tokenizer.min_token_length =
      r.field(tok, "min_token_length", "tokenizer", vt::number_unsigned).get<std::size_t>();
  const auto& smooth = r.field(j, "smoothing", "", vt::object);
  model.smoothing.alpha = r.field(smooth, "alpha", "smoothing", vt::number_float).get<double>();
  try {
    model.tokenizer.validate();
    model.smoothing.validate();
    model.centroid_method = parse_centroid_method(r.field(j, "centroid_method", "", vt::string).get<std::string>());
  } catch (const Error& e) {
    r.fail("tokenizer/smoothing/centroid_method", e.detail());
  }

  const auto min_count = r.field(j, "min_count", "", vt::number_unsigned).get<std::size_t>();
  const auto& vocab = r.field(j, "vocab", "", vt::array);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    r.check(vocab[i], "vocab[" + std::to_string(i) + "]", vt::string);
    words.push_back(vocab[i].get<std::string>());
  }
  try {
    model.vocab = Vocabulary(std::move(words), min_count);
  } catch (const Error& e) {
    r.fail("vocab", e.detail());
  }

  const auto& classes = r.field(j, "classes", "", vt::array);
  if (classes.size() < 2) r.fail("classes", "needs at least 2 entries");
  double prior_sum = 0.0;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const std::string path = "classes[" + std::to_string(k) + "]";
    ClassModel c;
    c.label = r.field(classes[k], "label", path, vt::string).get<std::string>();
    c.prior = r.field(classes[k], "prior", path, vt::number_float).get<double>();
    if (!(c.prior > 0.0 && c.prior <= 1.0)) r.fail(path + ".prior", "must lie in (0, 1]");
    const auto& centroid = r.field(classes[k], "centroid", path, vt::array);
    if (centroid.size() != model.vocab.size()) r.fail(path + ".centroid", "length differs from the vocabulary");
    std::vector<double> probs;
    probs.reserve(centroid.size());
    for (std::size_t i = 0; i < centroid.size(); ++i) {
      r.check(centroid[i], path + ".centroid[" + std::to_string(i) + "]", vt::number_float);
      probs.push_back(centroid[i].get<double>());
    }
    try {
      c.centroid = Distribution(std::move(probs));
    } catch (const Error& e) {
      r.fail(path + ".centroid", e.detail());
    }
    if (model.class_index(c.label)) r.fail(path + ".label", "duplicates an earlier class");
    prior_sum += c.prior;
    model.classes.push_back(std::move(c));
  }
  if (std::abs(prior_sum - 1.0) > 1e-9) r.fail("classes", "priors do not sum to 1");
  return model;
}

inline std::string model_to_string(const TrainedModel& model) { return model_to_json(model).dump(1) + "\n"; }

inline void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write model to '" + path.string() + "'");
  out << model_to_string(model);
  if (!out) throw Error(ErrorCode::IoError, "failed writing model to '" + path.string() + "'");
}

inline TrainedModel model_from_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("model file is not valid JSON (") + e.what() + ")");
  }
  return model_from_json(j);
}

inline TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open model '" + path.string() + "': file not found or unreadable");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_string(buf.str());
}

/// {"label": predicted, "scores": {label: total, ...}}
inline std::string prediction_record(const Prediction& p) {
  nlohmann::json scores = nlohmann::json::object();
  for (const auto& s : p.scores) scores[s.label] = s.total;
  return nlohmann::json{{"label", p.label}, {"scores", std::move(scores)}}.dump();
}

}  // namespace sklc
