#pragma once

// Class centroid estimation on the probability simplex.
//
// The SKL centroid minimizes F(q) = sum_{p in class} SKL(p, q). F is
// separable and strictly convex:
//
//   dF/dq_i   = sum_j ( -p_i^j / q_i + log q_i + 1 - log p_i^j )
//   d2F/dq_i2 = sum_j ( p_i^j / q_i^2 + 1 / q_i ),   off-diagonals zero.
//
// Two independent solvers are provided. solve_flow integrates the discrete
// Wasserstein gradient flow on a path graph over the vocabulary,
//
//   d rho_i / dt = - sum_{j in N(i)} g_ij(rho) (F_i(rho) - F_j(rho)),
//
// with upwind weights g_ij = rho of the endpoint with the larger F_i.
// solve_dual solves the first-order conditions with a simplex multiplier by
// nested bisection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sklc/corpus.hpp"
#include "sklc/divergence.hpp"
#include "sklc/error.hpp"
#include "sklc/format.hpp"

namespace sklc {

struct ClassCorpus {
  std::string label;
  std::vector<Distribution> docs;
  std::vector<CountVector> raw_counts;

  std::size_t dim() const { return docs.empty() ? 0 : docs.front().size(); }

  void validate() const {
    if (docs.empty()) throw Error(ErrorCode::InsufficientData, "class '" + label + "' has no documents");
    for (const auto& d : docs) {
      if (d.size() != dim()) {
        throw Error(ErrorCode::DimensionMismatch, "class '" + label + "' mixes document lengths");
      }
    }
  }
};

/// Words linked one by one in vocabulary order: node i touches i-1 and i+1.
class LineGraph {
 public:
  explicit LineGraph(std::size_t n) : n_(n) {
    if (n == 0) throw Error(ErrorCode::InvalidConfig, "graph needs at least one node");
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return n_ - 1; }

  std::vector<std::size_t> neighbors(std::size_t i) const {
    std::vector<std::size_t> out;
    if (i > 0) out.push_back(i - 1);
    if (i + 1 < n_) out.push_back(i + 1);
    return out;
  }

 private:
  std::size_t n_;
};

struct FlowConfig {
  double step_init = 1e-2;
  double tol_grad = 1e-8;
  double tol_energy = 1e-18;
  std::uint64_t max_iters = 200000;
  double pos_floor = 1e-12;
  // Multiplier applied to the step after each accepted Euler step; rejected
  // steps are halved.
  double step_growth = 1.1;
  bool record_history = false;

  static constexpr int kMaxHalvings = 60;

  void validate(std::size_t n) const {
    if (!(step_init > 0 && tol_grad > 0 && tol_energy > 0 && max_iters > 0 && pos_floor > 0)) {
      throw Error(ErrorCode::InvalidConfig, "flow tolerances, step and iteration limits must be positive");
    }
    if (!(step_growth >= 1.0)) throw Error(ErrorCode::InvalidConfig, "step_growth must be >= 1");
    if (!(pos_floor < 1.0 / static_cast<double>(n))) {
      throw Error(ErrorCode::InvalidConfig, "pos_floor must be below 1/|V|");
    }
  }
};

/// One accepted Euler step.
struct FlowStep {
  std::uint64_t iter;
  double energy;   // after the step
  double max_rhs;  // max |d rho/dt| at the point the step started from
  double step;
  double mass_drift;  // |sum(rho + step * rhs) - 1| before renormalization
  double mass;        // sum of the accepted iterate after renormalization
};

struct FlowTrace {
  std::uint64_t iterations = 0;
  std::uint64_t rejected_steps = 0;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double max_rhs_norm = 0.0;
  bool converged = false;
  std::vector<FlowStep> history;  // only filled when FlowConfig::record_history
};

struct DualStats {
  std::uint64_t outer_iterations = 0;
  std::uint64_t inner_iterations = 0;
  double multiplier = 0.0;
  double max_residual = 0.0;
  double mass_error = 0.0;  // |sum q - 1| before the final renormalization
};

enum class SolverKind { Flow, Dual, Mean };

struct SolverReport {
  Distribution centroid;
  SolverKind solver = SolverKind::Mean;
  FlowTrace trace;
  DualStats dual;
};

/// Per-class sufficient statistics: document count N, S_i = sum_j p_i^j,
/// L_i = sum_j log p_i^j and the constant sum_j sum_i p log p. Accumulated in
/// document order so results do not depend on scheduling.
class SklObjective {
 public:
  explicit SklObjective(const ClassCorpus& corpus) {
    corpus.validate();
    const std::size_t n = corpus.dim();
    count_ = static_cast<double>(corpus.docs.size());
    sum_p_.assign(n, 0.0);
    sum_log_p_.assign(n, 0.0);
    for (const auto& doc : corpus.docs) {
      for (std::size_t i = 0; i < n; ++i) {
        const double lp = std::log(doc[i]);
        sum_p_[i] += doc[i];
        sum_log_p_[i] += lp;
        entropy_term_ += doc[i] * lp;
      }
    }
  }

  std::size_t dim() const noexcept { return sum_p_.size(); }
  double doc_count() const noexcept { return count_; }
  std::span<const double> sum_p() const noexcept { return sum_p_; }
  std::span<const double> sum_log_p() const noexcept { return sum_log_p_; }

  double energy(std::span<const double> rho) const {
    double e = entropy_term_;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      const double lr = std::log(rho[i]);
      e += count_ * rho[i] * lr - sum_p_[i] * lr - sum_log_p_[i] * rho[i];
    }
    return e;
  }

  /// energy(next) - energy(rho) for two points of the simplex, given the
  /// gradient at rho. Split into the first-order part sum (F_i - mean F) delta_i
  /// and an explicit second-order remainder, so neither the constant terms nor
  /// rounding in sum(delta) = 0 swamp the tiny changes of late flow steps.
  double energy_change(std::span<const double> rho, std::span<const double> grad,
                       std::span<const double> next) const {
    double mean_grad = 0.0;
    for (double g : grad) mean_grad += g;
    mean_grad /= static_cast<double>(grad.size());

    double first = 0.0, second = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      const double delta = next[i] - rho[i];
      const double u = delta / rho[i];
      const double lu = std::log1p(u);
      first += (grad[i] - mean_grad) * delta;
      // N [(rho + delta) log(1 + u) - delta] - S [log(1 + u) - u]
      second += count_ * rho[i] * ((1.0 + u) * lu - u) - sum_p_[i] * (lu - u);
    }
    return first + second;
  }

  void gradient(std::span<const double> rho, std::span<double> out) const {
    for (std::size_t i = 0; i < rho.size(); ++i) {
      out[i] = -sum_p_[i] / rho[i] + count_ * std::log(rho[i]) + count_ - sum_log_p_[i];
    }
  }

 private:
  double count_ = 0.0;
  double entropy_term_ = 0.0;
  std::vector<double> sum_p_;
  std::vector<double> sum_log_p_;
};

namespace detail {

inline void require_positive(std::span<const double> rho) {
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > 0.0)) {
      throw Error(ErrorCode::NonPositiveEntry, "rho_" + std::to_string(i) + " is not strictly positive");
    }
  }
}

inline void require_dim(std::span<const double> rho, const ClassCorpus& corpus) {
  corpus.validate();
  if (rho.size() != corpus.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "rho length differs from the class documents");
  }
  require_positive(rho);
}

// Each edge (i, i+1) moves g * (F_i - F_j) from i to j, where g is rho at the
// upstream (higher-F) endpoint; ties are oriented i -> i+1. Fluxes are rounded
// to a common power-of-two grid 2^-52 below the largest one, which makes every
// node difference exact: the components then sum to exactly zero.
inline void upwind_rhs(std::span<const double> rho, std::span<const double> grad, std::span<double> out) {
  const std::size_t n = rho.size();
  std::fill(out.begin(), out.end(), 0.0);
  if (n < 2) return;
  double largest = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double g = grad[i] >= grad[i + 1] ? rho[i] : rho[i + 1];
    out[i] = g * (grad[i] - grad[i + 1]);  // flux over edge (i, i+1), stored in place
    largest = std::max(largest, std::abs(out[i]));
  }
  if (largest == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  int exponent = 0;
  std::frexp(largest, &exponent);
  const double grid = std::ldexp(1.0, exponent - 52);
  double inflow = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double flux = std::nearbyint(out[i] / grid) * grid;
    out[i] = inflow - flux;
    inflow = flux;
  }
  out[n - 1] = inflow;
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

/// Pools the class's raw counts, then smooths: the usual multinomial NB estimate.
inline Distribution mean_centroid(const ClassCorpus& corpus, const SmoothingConfig& cfg, std::size_t vocab_size) {
  cfg.validate();
  if (corpus.raw_counts.empty()) {
    throw Error(ErrorCode::InsufficientData, "class '" + corpus.label + "' has no count vectors");
  }
  std::vector<std::uint64_t> pooled(vocab_size, 0);
  CountVector total;
  for (const auto& counts : corpus.raw_counts) {
    for (const auto& [index, count] : counts.entries) {
      if (index >= vocab_size) throw Error(ErrorCode::DimensionMismatch, "count index beyond vocabulary");
      pooled[index] += count;
    }
  }
  for (std::size_t i = 0; i < vocab_size; ++i) {
    if (pooled[i] > 0) {
      total.entries.emplace_back(i, pooled[i]);
      total.total += pooled[i];
    }
  }
  return smooth_normalize(total, vocab_size, cfg);
}

inline Distribution mean_centroid(const ClassCorpus& corpus, const SmoothingConfig& cfg) {
  return mean_centroid(corpus, cfg, corpus.dim());
}

/// Arithmetic mean of the class's (smoothed) document distributions.
inline Distribution arithmetic_mean(const ClassCorpus& corpus) {
  corpus.validate();
  std::vector<double> mean(corpus.dim(), 0.0);
  for (const auto& doc : corpus.docs) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += doc[i];
  }
  double total = 0.0;
  for (double v : mean) total += v;
  for (double& v : mean) v /= total;
  return Distribution(std::move(mean));
}

inline double skl_energy(std::span<const double> rho, const ClassCorpus& corpus) {
  detail::require_dim(rho, corpus);
  double e = 0.0;
  for (const auto& doc : corpus.docs) e += skl(doc, rho);
  return e;
}

inline std::vector<double> skl_energy_gradient(std::span<const double> rho, const ClassCorpus& corpus) {
  detail::require_dim(rho, corpus);
  std::vector<double> grad(rho.size(), 0.0);
  for (const auto& doc : corpus.docs) {
    for (std::size_t i = 0; i < rho.size(); ++i) {
      grad[i] += -doc[i] / rho[i] + std::log(rho[i]) + 1.0 - std::log(doc[i]);
    }
  }
  return grad;
}

/// Diagonal of the Hessian of skl_energy; the off-diagonal entries are zero.
inline std::vector<double> hessian_diag(std::span<const double> rho, const ClassCorpus& corpus) {
  detail::require_dim(rho, corpus);
  std::vector<double> h(rho.size(), 0.0);
  for (const auto& doc : corpus.docs) {
    for (std::size_t i = 0; i < rho.size(); ++i) h[i] += doc[i] / (rho[i] * rho[i]) + 1.0 / rho[i];
  }
  return h;
}

inline std::vector<double> flow_rhs(std::span<const double> rho, const ClassCorpus& corpus, const LineGraph& graph) {
  if (graph.size() != rho.size()) throw Error(ErrorCode::DimensionMismatch, "graph size differs from rho length");
  const auto grad = skl_energy_gradient(rho, corpus);
  std::vector<double> out(rho.size());
  detail::upwind_rhs(rho, grad, out);
  return out;
}

/// Forward Euler on the gradient flow, started at the arithmetic mean of the
/// class documents. A step is accepted only if the renormalized iterate
/// stays above pos_floor and does not raise the energy; otherwise the step is
/// halved. The energy is tracked as a running sum of per-step changes, so the
/// recorded history is exactly non-increasing. Stops when max |d rho/dt| <= tol_grad, or when a full (unhalved)
/// step lowers the energy by less than tol_energy.
inline SolverReport solve_flow(const ClassCorpus& corpus, const LineGraph& graph, const FlowConfig& cfg = {}) {
  const SklObjective objective(corpus);
  const std::size_t n = objective.dim();
  if (graph.size() != n) throw Error(ErrorCode::DimensionMismatch, "graph size differs from vocabulary size");
  cfg.validate(n);

  std::vector<double> rho = arithmetic_mean(corpus).values();
  std::vector<double> grad(n), rhs(n), candidate(n);
  double energy = objective.energy(rho);
  double step = cfg.step_init;

  FlowTrace trace;
  trace.initial_energy = energy;

  while (true) {
    objective.gradient(rho, grad);
    detail::upwind_rhs(rho, grad, rhs);
    const double max_rhs = detail::max_abs(rhs);
    trace.max_rhs_norm = max_rhs;
    if (max_rhs <= cfg.tol_grad) {
      trace.converged = true;
      break;
    }
    if (trace.iterations >= cfg.max_iters) {
      throw Error(ErrorCode::MaxIters, "flow for class '" + corpus.label + "' did not converge in " +
                                           std::to_string(cfg.max_iters) + " steps (max |rhs| = " +
                                           format_double(max_rhs) + ")");
    }

    int halvings = 0;
    double change = 0.0;
    double drift = 0.0;
    while (true) {
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        candidate[i] = rho[i] + step * rhs[i];
        mass += candidate[i];
      }
      drift = std::abs(mass - 1.0);
      bool admissible = true;
      for (std::size_t i = 0; i < n; ++i) {
        candidate[i] /= mass;
        if (!(candidate[i] >= cfg.pos_floor)) admissible = false;
      }
      if (admissible) {
        change = objective.energy_change(rho, grad, candidate);
        if (change <= 0.0) break;
      }
      ++trace.rejected_steps;
      step *= 0.5;
      if (++halvings > FlowConfig::kMaxHalvings) {
        throw Error(ErrorCode::Stalled, "flow for class '" + corpus.label + "' stalled after " +
                                            std::to_string(trace.iterations) + " steps (max |rhs| = " +
                                            format_double(max_rhs) + ")");
      }
    }

    rho.swap(candidate);
    energy += change;
    ++trace.iterations;
    if (cfg.record_history) {
      double mass = 0.0;
      for (double x : rho) mass += x;
      trace.history.push_back({trace.iterations, energy, max_rhs, step, drift, mass});
    }
    step *= cfg.step_growth;
    if (halvings == 0 && -change < cfg.tol_energy) {
      trace.converged = true;
      break;
    }
  }

  trace.final_energy = objective.energy(rho);
  SolverReport report{Distribution(std::move(rho)), SolverKind::Flow, std::move(trace), {}};
  return report;
}

inline SolverReport solve_flow(const ClassCorpus& corpus, const FlowConfig& cfg = {}) {
  corpus.validate();
  return solve_flow(corpus, LineGraph(corpus.dim()), cfg);
}

/// Solves the stationarity conditions
///
///   N log q_i - S_i / q_i = L_i - N - lambda,   sum_i q_i = 1,
///
/// by bisection on each q_i (the left-hand side is strictly increasing) inside
/// an outer bisection on lambda (sum q(lambda) is strictly decreasing).
inline SolverReport solve_dual(const ClassCorpus& corpus, double tol = 1e-12) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "dual tolerance must be positive");
  const SklObjective objective(corpus);
  const std::size_t n = objective.dim();
  const double count = objective.doc_count();
  const auto sum_p = objective.sum_p();
  const auto sum_log_p = objective.sum_log_p();

  constexpr double kLogLo = -690.7755278982137;  // log(1e-300)
  constexpr double kLogHi = 13.815510557964274;  // log(1e6)

  DualStats stats;
  std::vector<double> q(n);

  auto lhs = [&](std::size_t i, double qi) { return count * std::log(qi) - sum_p[i] / qi; };

  // Fills q for a given multiplier and returns sum q.
  auto solve_inner = [&](double lambda) {
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double target = sum_log_p[i] - count - lambda;
      double lo = kLogLo, hi = kLogHi;
      while (true) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        ++stats.inner_iterations;
        if (lhs(i, std::exp(mid)) < target) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      // Keep whichever endpoint has the smaller residual.
      const double q_lo = std::exp(lo), q_hi = std::exp(hi);
      q[i] = std::abs(lhs(i, q_lo) - target) <= std::abs(lhs(i, q_hi) - target) ? q_lo : q_hi;
      mass += q[i];
    }
    return mass;
  };

  double bound = 1.0;
  while (!(solve_inner(-bound) >= 1.0 && solve_inner(bound) <= 1.0)) {
    bound *= 2.0;
    if (bound > 1e300) {
      throw Error(ErrorCode::BracketFailure, "cannot bracket the simplex multiplier for class '" + corpus.label + "'");
    }
  }

  double lo = -bound, hi = bound;
  double lambda = 0.0, mass = 0.0;
  while (true) {
    lambda = 0.5 * (lo + hi);
    mass = solve_inner(lambda);
    ++stats.outer_iterations;
    if (std::abs(mass - 1.0) <= tol) break;
    if (lambda <= lo || lambda >= hi) break;
    (mass > 1.0 ? lo : hi) = lambda;
  }
  stats.mass_error = std::abs(mass - 1.0);
  if (stats.mass_error > tol) {
    throw Error(ErrorCode::BracketFailure, "multiplier bisection for class '" + corpus.label +
                                               "' ended with |sum q - 1| = " + format_double(stats.mass_error));
  }
  stats.multiplier = lambda;
  for (std::size_t i = 0; i < n; ++i) {
    stats.max_residual = std::max(stats.max_residual, std::abs(lhs(i, q[i]) - (sum_log_p[i] - count - lambda)));
  }
  for (double& v : q) v /= mass;

  return SolverReport{Distribution(std::move(q)), SolverKind::Dual, {}, stats};
}

inline void write_trace_csv(std::ostream& out, const FlowTrace& trace) {
  out << "iter,energy,max_rhs,step\n";
  for (const auto& s : trace.history) {
    out << s.iter << ',' << format_double(s.energy) << ',' << format_double(s.max_rhs) << ','
        << format_double(s.step) << '\n';
  }
}

}  // namespace sklc
