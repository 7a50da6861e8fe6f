#pragma once

// Test-only generators and oracles. Nothing here calls into the library's
// numerical paths except to build inputs.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sklc/centroid.hpp"
#include "sklc/corpus.hpp"

namespace sklc::testing {

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double standard_normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Uniform point of the open simplex: normalized standard exponentials.
inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> v(n);
  double sum = 0.0;
  for (auto& x : v) {
    double u = uniform01(rng);
    while (u <= 0.0) u = uniform01(rng);
    x = -std::log(u);
    sum += x;
  }
  for (auto& x : v) x /= sum;
  return v;
}

/// Simplex point with every coordinate >= floor.
inline std::vector<double> random_interior(std::mt19937_64& rng, std::size_t n, double floor) {
  auto v = random_simplex(rng, n);
  const double scale = 1.0 - floor * static_cast<double>(n);
  for (auto& x : v) x = floor + scale * x;
  return v;
}

inline CountVector random_counts(std::mt19937_64& rng, std::size_t n, std::uint64_t max_count) {
  CountVector cv;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t k = rng() % (max_count + 1);
    if (k > 0) {
      cv.entries.emplace_back(i, k);
      cv.total += k;
    }
  }
  if (cv.total == 0) {
    cv.entries.emplace_back(rng() % n, 1);
    cv.total = 1;
  }
  return cv;
}

/// N Laplace-smoothed random count vectors over n words.
inline ClassCorpus random_class(std::mt19937_64& rng, std::size_t n, std::size_t docs, std::uint64_t max_count = 5,
                                double alpha = 1.0) {
  ClassCorpus c;
  c.label = "c";
  for (std::size_t j = 0; j < docs; ++j) {
    c.raw_counts.push_back(random_counts(rng, n, max_count));
    c.docs.push_back(smooth_normalize(c.raw_counts.back(), n, SmoothingConfig{alpha}));
  }
  return c;
}

inline ClassCorpus class_of(std::vector<std::vector<double>> docs) {
  ClassCorpus c;
  c.label = "c";
  for (auto& d : docs) c.docs.emplace_back(std::move(d));
  return c;
}

inline std::size_t sample_categorical(std::mt19937_64& rng, const std::vector<double>& cdf) {
  const double u = uniform01(rng) * cdf.back();
  std::size_t lo = 0, hi = cdf.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (cdf[mid] > u) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

inline std::string word_name(std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "w" + digits;
}

/// Documents drawn from per-class multinomials given as unnormalized weights.
/// Labels are "A", "B", ...; documents are interleaved by class.
inline std::vector<LabeledDocument> sample_corpus(std::mt19937_64& rng, const std::vector<std::vector<double>>& weights,
                                                  std::size_t docs_per_class, std::size_t tokens_per_doc) {
  std::vector<std::vector<double>> cdfs;
  for (const auto& w : weights) {
    std::vector<double> cdf(w.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) cdf[i] = acc += w[i];
    cdfs.push_back(std::move(cdf));
  }
  std::vector<LabeledDocument> out;
  for (std::size_t d = 0; d < docs_per_class; ++d) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
      LabeledDocument doc;
      doc.label = std::string(1, static_cast<char>('A' + k));
      for (std::size_t t = 0; t < tokens_per_doc; ++t) {
        if (t) doc.text += ' ';
        doc.text += word_name(sample_categorical(rng, cdfs[k]));
      }
      out.push_back(std::move(doc));
    }
  }
  return out;
}

/// Two classes over |V| = vocab words sharing a Zipf-like background; each
/// class perturbs it by exp(sigma * z) with independent normal z per word.
inline std::vector<LabeledDocument> overlapping_corpus(std::uint64_t seed, std::size_t docs_per_class = 250,
                                                       std::size_t vocab = 100, std::size_t tokens = 100,
                                                       double sigma = 0.5) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> weights(2, std::vector<double>(vocab));
  for (std::size_t i = 0; i < vocab; ++i) {
    const double base = 1.0 / std::pow(static_cast<double>(i + 1), 0.8);
    for (auto& w : weights) w[i] = base * std::exp(sigma * standard_normal(rng));
  }
  return sample_corpus(rng, weights, docs_per_class, tokens);
}

/// Two classes whose high-mass words are disjoint (first vs second half of
/// the vocabulary, 20:1 weight ratio).
inline std::vector<LabeledDocument> separable_corpus(std::uint64_t seed, std::size_t docs_per_class = 100,
                                                     std::size_t vocab = 40, std::size_t tokens = 100) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> weights(2, std::vector<double>(vocab, 1.0));
  for (std::size_t i = 0; i < vocab / 2; ++i) {
    weights[0][i] = 20.0;
    weights[1][vocab / 2 + i] = 20.0;
  }
  return sample_corpus(rng, weights, docs_per_class, tokens);
}

// ---- oracles -------------------------------------------------------------

/// Direct long-double summation of sum (p - q) log(p / q).
inline double skl_oracle(const std::vector<double>& p, const std::vector<double>& q) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += (static_cast<long double>(p[i]) - q[i]) * std::log(static_cast<long double>(p[i]) / q[i]);
  }
  return static_cast<double>(s);
}

inline double kl_oracle(const std::vector<double>& p, const std::vector<double>& q) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0) s += static_cast<long double>(p[i]) * std::log(static_cast<long double>(p[i]) / q[i]);
  }
  return static_cast<double>(s);
}

/// Energy as an unconstrained function of rho (no simplex projection), via
/// direct summation, for finite differences.
inline double energy_oracle(const ClassCorpus& c, const std::vector<double>& rho) {
  long double e = 0.0L;
  for (const auto& d : c.docs) e += skl_oracle(d.values(), rho);
  return static_cast<double>(e);
}

inline double central_difference(const ClassCorpus& c, std::vector<double> rho, std::size_t i, double h) {
  const double x = rho[i];
  rho[i] = x + h;
  const double up = energy_oracle(c, rho);
  rho[i] = x - h;
  const double down = energy_oracle(c, rho);
  return (up - down) / (2.0 * h);
}

inline double second_difference(const ClassCorpus& c, std::vector<double> rho, std::size_t i, double h) {
  const double x = rho[i];
  const double mid = energy_oracle(c, rho);
  rho[i] = x + h;
  const double up = energy_oracle(c, rho);
  rho[i] = x - h;
  const double down = energy_oracle(c, rho);
  return (up - 2.0 * mid + down) / (h * h);
}

/// Sum accumulated in long double, for checking cancellation properties.
inline long double exact_sum(const std::vector<double>& v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return s;
}

}  // namespace sklc::testing
