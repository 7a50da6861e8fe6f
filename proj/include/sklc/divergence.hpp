#pragma once

// Divergence and similarity kernels between probability vectors. Natural
// logarithm throughout.

#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sklc/error.hpp"
#include "sklc/format.hpp"

namespace sklc {

enum class MeasureKind { KL, SKL, Cosine, Euclidean };

inline constexpr MeasureKind kAllMeasures[] = {MeasureKind::KL, MeasureKind::SKL, MeasureKind::Cosine,
                                               MeasureKind::Euclidean};

constexpr std::string_view to_string(MeasureKind m) {
  switch (m) {
    case MeasureKind::KL: return "kl";
    case MeasureKind::SKL: return "skl";
    case MeasureKind::Cosine: return "cosine";
    case MeasureKind::Euclidean: return "euclidean";
  }
  return "?";
}

inline MeasureKind parse_measure(std::string_view name) {
  for (MeasureKind m : kAllMeasures) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown measure '" + std::string(name) + "'");
}

namespace detail {

inline void require_same_size(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "lengths differ (" + std::to_string(p.size()) + " vs " + std::to_string(q.size()) + ")");
  }
}

}  // namespace detail

/// KL(p, q) = sum p_i log(p_i / q_i), with 0 log 0 = 0 on the p side.
inline double kl(std::span<const double> p, std::span<const double> q) {
  detail::require_same_size(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0) throw Error(ErrorCode::NonPositiveEntry, "kl: negative entry in p");
    if (p[i] == 0.0) continue;
    if (!(q[i] > 0.0)) {
      throw Error(ErrorCode::NonPositiveEntry, "kl: q_" + std::to_string(i) + " <= 0 where p_i > 0");
    }
    sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum;
}

/// Symmetric KL: sum (p_i - q_i) log(p_i / q_i). Every term is >= 0, so the
/// result is nonnegative and exactly symmetric term by term.
inline double skl(std::span<const double> p, std::span<const double> q) {
  detail::require_same_size(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0) || !(q[i] > 0.0)) {
      throw Error(ErrorCode::NonPositiveEntry, "skl: entry " + std::to_string(i) + " is not strictly positive");
    }
    sum += (p[i] - q[i]) * std::log(p[i] / q[i]);
  }
  return sum;
}

inline double cosine_similarity(std::span<const double> p, std::span<const double> q) {
  detail::require_same_size(p, q);
  double dot = 0.0, pp = 0.0, qq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    dot += p[i] * q[i];
    pp += p[i] * p[i];
    qq += q[i] * q[i];
  }
  if (pp == 0.0 || qq == 0.0) throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero vector");
  return dot / (std::sqrt(pp) * std::sqrt(qq));
}

inline double euclidean_distance(std::span<const double> p, std::span<const double> q) {
  detail::require_same_size(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

inline double measure(MeasureKind kind, std::span<const double> p, std::span<const double> q) {
  switch (kind) {
    case MeasureKind::KL: return kl(p, q);
    case MeasureKind::SKL: return skl(p, q);
    case MeasureKind::Cosine: return cosine_similarity(p, q);
    case MeasureKind::Euclidean: return euclidean_distance(p, q);
  }
  return 0.0;
}

struct ProfileRow {
  double x;
  MeasureKind measure;
  double value;
};

struct ProfileGrid {
  std::size_t points = 999;
  double lo = 1e-3;
  double hi = 1.0 - 1e-3;
};

/// Evaluates each measure between p = (x, 1 - x) and a fixed two-point q on a
/// uniform grid of x. Rows are ordered by x, then by measure in the order given.
inline std::vector<ProfileRow> divergence_profile(std::span<const double> q, std::span<const MeasureKind> measures,
                                                  const ProfileGrid& grid = {}) {
  if (q.size() != 2) throw Error(ErrorCode::DimensionMismatch, "profile reference q must have length 2");
  if (grid.points < 3) throw Error(ErrorCode::InvalidConfig, "profile needs at least 3 grid points");
  if (!(grid.lo > 0.0 && grid.lo < grid.hi && grid.hi < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "profile interval must satisfy 0 < lo < hi < 1");
  }
  std::vector<ProfileRow> rows;
  rows.reserve(grid.points * measures.size());
  const double span = grid.hi - grid.lo;
  for (std::size_t k = 0; k < grid.points; ++k) {
    const double x = grid.lo + span * static_cast<double>(k) / static_cast<double>(grid.points - 1);
    const double p[2] = {x, 1.0 - x};
    for (MeasureKind m : measures) rows.push_back({x, m, measure(m, p, q)});
  }
  return rows;
}

inline void write_profile_csv(std::ostream& out, std::span<const ProfileRow> rows) {
  out << "x,measure,value\n";
  for (const auto& row : rows) {
    out << format_double(row.x) << ',' << to_string(row.measure) << ',' << format_double(row.value) << '\n';
  }
}

}  // namespace sklc
