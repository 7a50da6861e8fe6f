#pragma once

// Text → smoothed multinomial distributions over a shared vocabulary.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sklc/error.hpp"

namespace sklc {

struct LabeledDocument {
  std::string label;
  std::string text;

  friend bool operator==(const LabeledDocument&, const LabeledDocument&) = default;
};

struct TokenizerConfig {
  bool lowercase = true;
  std::size_t min_token_length = 1;

  void validate() const {
    if (min_token_length < 1) {
      throw Error(ErrorCode::InvalidConfig, "min_token_length must be >= 1");
    }
  }

  friend bool operator==(const TokenizerConfig&, const TokenizerConfig&) = default;
};

struct SmoothingConfig {
  double alpha = 1.0;

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      throw Error(ErrorCode::InvalidConfig, "smoothing alpha must be finite and > 0");
    }
  }

  friend bool operator==(const SmoothingConfig&, const SmoothingConfig&) = default;
};

/// Dense, strictly positive probability vector. Construction validates the
/// invariants; every centroid, smoothed document and flow iterate is one.
class Distribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  Distribution() = default;

  explicit Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) {
      throw Error(ErrorCode::DimensionMismatch, "distribution must have at least one entry");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      const double v = probs_[i];
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::NonPositiveEntry,
                    "distribution entry " + std::to_string(i) + " is not strictly positive");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw Error(ErrorCode::InvalidConfig, "distribution sums to " + std::to_string(sum));
    }
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> span() const noexcept { return probs_; }
  const std::vector<double>& values() const noexcept { return probs_; }
  operator std::span<const double>() const noexcept { return probs_; }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> probs_;
};

class Vocabulary {
 public:
  Vocabulary() = default;

  /// `words` must be strictly increasing (sorted, no duplicates) and nonempty.
  Vocabulary(std::vector<std::string> words, std::size_t min_count)
      : words_(std::move(words)), min_count_(min_count) {
    if (words_.empty()) {
      throw Error(ErrorCode::EmptyVocabulary, "vocabulary has no words");
    }
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (i > 0 && !(words_[i - 1] < words_[i])) {
        throw Error(ErrorCode::SchemaError,
                    "vocabulary is not strictly sorted at position " + std::to_string(i));
      }
      index_.emplace(words_[i], i);
    }
  }

  std::size_t size() const noexcept { return words_.size(); }
  std::size_t min_count() const noexcept { return min_count_; }
  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::string& word(std::size_t i) const { return words_[i]; }

  std::optional<std::size_t> index_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_ && a.min_count_ == b.min_count_;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t min_count_ = 1;
};

/// Sparse word counts of one document, entries sorted by vocabulary index.
struct CountVector {
  std::vector<std::pair<std::size_t, std::uint64_t>> entries;
  std::uint64_t total = 0;

  std::vector<double> dense(std::size_t vocab_size) const {
    std::vector<double> out(vocab_size, 0.0);
    for (const auto& [index, count] : entries) out[index] = static_cast<double>(count);
    return out;
  }

  friend bool operator==(const CountVector&, const CountVector&) = default;
};

struct DatasetSplit {
  std::vector<LabeledDocument> train;
  std::vector<LabeledDocument> test;
  std::uint64_t seed = 0;
};

namespace detail {

// ASCII alphanumerics plus every non-ASCII byte, so UTF-8 encoded letters
// stay inside tokens.
inline bool is_token_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

inline std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

// Unbiased draw in [0, bound) from a 64-bit engine; the standard
// distributions are implementation-defined, this is not.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace detail

inline std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg = {}) {
  cfg.validate();
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !detail::is_token_byte(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && detail::is_token_byte(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) continue;
    std::string token(text.substr(start, i - start));
    if (detail::utf8_length(token) < cfg.min_token_length) continue;
    if (cfg.lowercase) {
      for (char& c : token) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
    }
    tokens.push_back(std::move(token));
  }
  return tokens;
}

inline Vocabulary build_vocabulary(std::span<const LabeledDocument> docs, const TokenizerConfig& cfg,
                                   std::size_t min_count = 1) {
  cfg.validate();
  if (min_count < 1) throw Error(ErrorCode::InvalidConfig, "min_count must be >= 1");
  if (docs.empty()) throw Error(ErrorCode::EmptyVocabulary, "no documents to build a vocabulary from");

  std::map<std::string, std::uint64_t> counts;
  for (const auto& doc : docs) {
    for (auto& token : tokenize(doc.text, cfg)) ++counts[std::move(token)];
  }
  std::vector<std::string> words;
  for (const auto& [word, count] : counts) {
    if (count >= min_count) words.push_back(word);
  }
  if (words.empty()) {
    throw Error(ErrorCode::EmptyVocabulary,
                "no token occurs at least " + std::to_string(min_count) + " times");
  }
  return Vocabulary(std::move(words), min_count);
}

inline CountVector vectorize(std::string_view text, const Vocabulary& vocab, const TokenizerConfig& cfg) {
  std::map<std::size_t, std::uint64_t> counts;
  for (const auto& token : tokenize(text, cfg)) {
    if (auto index = vocab.index_of(token)) ++counts[*index];
  }
  CountVector out;
  out.entries.assign(counts.begin(), counts.end());
  for (const auto& [index, count] : out.entries) out.total += count;
  if (out.total == 0) {
    throw Error(ErrorCode::EmptyDocument, "document has no in-vocabulary tokens");
  }
  return out;
}

inline CountVector vectorize(const LabeledDocument& doc, const Vocabulary& vocab, const TokenizerConfig& cfg) {
  return vectorize(doc.text, vocab, cfg);
}

/// probs[i] = (count_i + alpha) / (total + alpha * |V|)
inline Distribution smooth_normalize(const CountVector& counts, std::size_t vocab_size,
                                     const SmoothingConfig& cfg) {
  cfg.validate();
  if (vocab_size == 0) throw Error(ErrorCode::DimensionMismatch, "vocabulary size is zero");
  std::vector<double> probs(vocab_size, cfg.alpha);
  for (const auto& [index, count] : counts.entries) {
    if (index >= vocab_size) {
      throw Error(ErrorCode::DimensionMismatch, "count index beyond vocabulary size");
    }
    probs[index] += static_cast<double>(count);
  }
  const double denom = static_cast<double>(counts.total) + cfg.alpha * static_cast<double>(vocab_size);
  for (double& p : probs) p /= denom;
  return Distribution(std::move(probs));
}

/// Stratified split. Each label keeps round(fraction * count) documents for
/// training (at least one); both sides preserve the input order.
inline DatasetSplit split_corpus(std::span<const LabeledDocument> docs, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "split fraction must lie in (0, 1)");
  }
  if (docs.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "need at least 2 documents to split");
  }
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < docs.size(); ++i) by_label[docs[i].label].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<char> in_train(docs.size(), 0);
  for (auto& [label, members] : by_label) {
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[detail::bounded(rng, i)]);
    }
    const auto want = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
    const std::size_t n_train = std::clamp<std::size_t>(want, 1, members.size());
    for (std::size_t k = 0; k < n_train; ++k) in_train[members[k]] = 1;
  }

  DatasetSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    (in_train[i] ? split.train : split.test).push_back(docs[i]);
  }
  if (split.test.empty()) {
    throw Error(ErrorCode::InsufficientData, "split leaves no test documents");
  }
  return split;
}

}  // namespace sklc
