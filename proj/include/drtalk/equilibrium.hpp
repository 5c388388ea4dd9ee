#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "drtalk/prior.hpp"

namespace drtalk {

// Canonical single-sender quantizer game on the transformed type space:
// the sender's ideal action equals the type theta, the receiver's ideal
// action is g(theta) = gamma * theta + delta. gamma lies in (0, 1] -- the
// value 1 is the constant-bias limit, admitted here for oracles and
// asymptotic checks. (alpha, price) record the affine map back to the
// consumer's valuation space, omega = alpha * theta + price.
struct CanonicalGame {
  double gamma = 1.0;
  double delta = 0.0;
  double theta_lo = 0.0;
  double theta_hi = 1.0;
  Prior theta_prior;
  double alpha = 1.0;
  double price = 0.0;

  CanonicalGame() : theta_prior(Prior::uniform(0.0, 1.0)) {}
  CanonicalGame(double gamma_, double delta_, Prior theta_prior_, double alpha_ = 1.0,
                double price_ = 0.0)
      : gamma(gamma_),
        delta(delta_),
        theta_lo(theta_prior_.lo),
        theta_hi(theta_prior_.hi),
        theta_prior(theta_prior_),
        alpha(alpha_),
        price(price_) {
    if (!(gamma > 0.0) || gamma > 1.0) {
      throw std::invalid_argument("CanonicalGame: requires gamma in (0, 1]");
    }
  }

  double ideal_action(double theta) const { return gamma * theta + delta; }
  double omega_of(double theta) const { return alpha * theta + price; }
};

struct BrdConfig {
  double epsilon = 1e-10;      // sup-norm boundary-change tolerance
  int max_iterations = 10000;
  std::optional<double> min_gap;  // default 1e-8 * support width

  double resolved_min_gap(double support_width) const {
    if (min_gap) {
      if (*min_gap < 0.0) throw std::invalid_argument("BrdConfig: requires min_gap >= 0");
      return *min_gap;
    }
    return 1e-8 * support_width;
  }
};

// An interval partition of the transformed type space together with the
// induced actions and per-bin statistics. Non-convergence is recorded in
// the flags, not thrown: the message-count search treats it as data.
struct Partition {
  int kappa = 0;
  std::vector<double> boundaries;        // kappa + 1 values in theta space
  std::vector<double> actions;           // induced action per bin
  std::vector<double> probabilities;     // prior mass per bin
  std::vector<double> theta_means;       // conditional type mean per bin
  std::vector<double> omega_means;       // the same, mapped to valuation space
  std::vector<double> omega_boundaries;  // bin edges in valuation space
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;

  bool boundaries_strictly_increasing(double min_gap) const {
    for (std::size_t i = 1; i < boundaries.size(); ++i) {
      if (!(boundaries[i] - boundaries[i - 1] >= min_gap) ||
          !(boundaries[i] > boundaries[i - 1])) {
        return false;
      }
    }
    return true;
  }

  bool actions_strictly_increasing() const {
    for (std::size_t i = 1; i < actions.size(); ++i) {
      if (!(actions[i] > actions[i - 1])) return false;
    }
    return true;
  }
};

// Validity in the sense of the message-count search: converged to a
// strictly ordered partition whose actions are distinct.
inline bool partition_is_valid(const Partition& p, double min_gap) {
  return p.converged && p.boundaries_strictly_increasing(min_gap) &&
         (p.kappa == 1 || p.actions_strictly_increasing());
}

namespace detail {

// Receiver best response on one bin: gamma * E[theta | bin] + delta.
// Degenerate bins take the midpoint, the limit of the conditional mean as
// the bin width shrinks; this keeps the dynamics defined after boundary
// collapse, which the validity check then reports.
inline double bin_action(const CanonicalGame& g, double lo, double hi) {
  const double width = g.theta_hi - g.theta_lo;
  double mean;
  if (hi - lo <= 1e-14 * width) {
    mean = 0.5 * (lo + hi);
  } else {
    mean = prior_conditional_mean(g.theta_prior, lo, hi);
  }
  return g.gamma * mean + g.delta;
}

inline void fill_bin_statistics(const CanonicalGame& g, Partition& p) {
  p.probabilities.resize(p.kappa);
  p.theta_means.resize(p.kappa);
  p.omega_means.resize(p.kappa);
  p.omega_boundaries.resize(p.kappa + 1);
  const double width = g.theta_hi - g.theta_lo;
  for (int i = 0; i <= p.kappa; ++i) {
    p.omega_boundaries[i] = g.omega_of(p.boundaries[i]);
  }
  for (int i = 0; i < p.kappa; ++i) {
    const double lo = p.boundaries[i], hi = p.boundaries[i + 1];
    p.probabilities[i] = prior_interval_probability(g.theta_prior, lo, hi);
    if (hi - lo <= 1e-14 * width) {
      p.theta_means[i] = 0.5 * (lo + hi);
    } else {
      p.theta_means[i] = prior_conditional_mean(g.theta_prior, lo, hi);
    }
    p.omega_means[i] = g.omega_of(p.theta_means[i]);
  }
}

}  // namespace detail

struct BrdTracePoint {
  int iteration;
  double sup_change;
};

// Best-response dynamics: alternate the receiver's centroid step and the
// sender's midpoint step from equally spaced boundaries (or a supplied
// initialization) until the sup-norm boundary change drops below epsilon.
inline Partition brd_solve(const CanonicalGame& game, int kappa, const BrdConfig& config = {},
                           std::vector<BrdTracePoint>* trace = nullptr,
                           const std::vector<double>* initial_boundaries = nullptr) {
  if (kappa < 1) throw std::invalid_argument("brd_solve: requires kappa >= 1");
  const double lo = game.theta_lo, hi = game.theta_hi;

  Partition p;
  p.kappa = kappa;
  p.boundaries.resize(kappa + 1);
  p.actions.resize(kappa);

  if (kappa == 1) {
    p.boundaries = {lo, hi};
    p.actions[0] = detail::bin_action(game, lo, hi);
    p.converged = true;
    p.iterations = 0;
    p.residual = 0.0;
    detail::fill_bin_statistics(game, p);
    return p;
  }

  if (initial_boundaries) {
    if (static_cast<int>(initial_boundaries->size()) != kappa + 1 ||
        initial_boundaries->front() != lo || initial_boundaries->back() != hi) {
      throw std::invalid_argument("brd_solve: initial boundaries must span the support");
    }
    p.boundaries = *initial_boundaries;
  } else {
    for (int i = 0; i <= kappa; ++i) {
      p.boundaries[i] = lo + (hi - lo) * static_cast<double>(i) / kappa;
    }
  }

  for (int k = 1; k <= config.max_iterations; ++k) {
    for (int i = 0; i < kappa; ++i) {
      p.actions[i] = detail::bin_action(game, p.boundaries[i], p.boundaries[i + 1]);
    }
    double sup_change = 0.0;
    for (int i = 1; i < kappa; ++i) {
      double next = 0.5 * (p.actions[i - 1] + p.actions[i]);
      next = std::clamp(next, lo, hi);
      sup_change = std::max(sup_change, std::abs(next - p.boundaries[i]));
      p.boundaries[i] = next;
    }
    if (trace) trace->push_back({k, sup_change});
    p.iterations = k;
    if (sup_change <= config.epsilon) {
      p.converged = true;
      break;
    }
  }

  // Refresh actions at the final boundaries and report the remaining
  // sender-indifference residual.
  for (int i = 0; i < kappa; ++i) {
    p.actions[i] = detail::bin_action(game, p.boundaries[i], p.boundaries[i + 1]);
  }
  double residual = 0.0;
  for (int i = 1; i < kappa; ++i) {
    const double midpoint = std::clamp(0.5 * (p.actions[i - 1] + p.actions[i]), lo, hi);
    residual = std::max(residual, std::abs(midpoint - p.boundaries[i]));
  }
  p.residual = residual;
  detail::fill_bin_statistics(game, p);
  return p;
}

// Closed-form equilibrium for a uniform transformed prior. The boundary
// recurrence mu_{i+1} - ((4-2g)/g) mu_i + mu_{i-1} = -4d/g is solved from
// the characteristic roots (g < 1) or the quadratic profile (g = 1), then
// fitted to the support endpoints.
inline Partition uniform_closed_form(const CanonicalGame& game, int kappa) {
  if (kappa < 1) throw std::invalid_argument("uniform_closed_form: requires kappa >= 1");
  if (game.theta_prior.kind != PriorKind::Uniform) {
    throw std::invalid_argument("closed form requires uniform prior");
  }
  const double lo = game.theta_lo, hi = game.theta_hi;
  const double gamma = game.gamma, delta = game.delta;

  Partition p;
  p.kappa = kappa;
  p.boundaries.resize(kappa + 1);
  p.actions.resize(kappa);
  p.converged = true;
  p.iterations = 0;
  p.residual = 0.0;

  if (kappa == 1) {
    p.boundaries = {lo, hi};
  } else if (gamma == 1.0) {
    // Double characteristic root: quadratic boundary profile.
    const double slope = (hi - lo) / kappa + 2.0 * delta * kappa;
    for (int i = 0; i <= kappa; ++i) {
      p.boundaries[i] = lo + slope * i - 2.0 * delta * static_cast<double>(i) * i;
    }
  } else {
    const double c = (4.0 - 2.0 * gamma) / gamma;  // > 2 for gamma < 1
    const double s = std::sqrt((c - 2.0) * (c + 2.0));
    const double r = 2.0 / (c + s);  // stable smaller root, in (0, 1)
    const double theta_star = delta / (1.0 - gamma);
    const double q = std::pow(r, kappa);
    const double det = q * q - 1.0;
    const double a_coef = (q * (lo - theta_star) - (hi - theta_star)) / det;
    const double b_coef = (q * (hi - theta_star) - (lo - theta_star)) / det;
    for (int i = 0; i <= kappa; ++i) {
      p.boundaries[i] =
          a_coef * std::pow(r, kappa - i) + b_coef * std::pow(r, i) + theta_star;
    }
    p.boundaries[0] = lo;
    p.boundaries[kappa] = hi;
  }

  for (int i = 1; i <= kappa; ++i) {
    if (!(p.boundaries[i] > p.boundaries[i - 1])) {
      throw std::domain_error("invalid partition");
    }
  }
  for (int i = 0; i < kappa; ++i) {
    p.actions[i] =
        gamma * 0.5 * (p.boundaries[i] + p.boundaries[i + 1]) + delta;
  }
  detail::fill_bin_statistics(game, p);
  return p;
}

// Result of the maximal-message-count search: either unbounded (agreement
// type inside the support) or the largest kappa admitting a valid
// equilibrium partition; at_cap reports a truncated search.
struct KappaMax {
  bool infinite = false;
  int value = 1;
  bool at_cap = false;

  static KappaMax unbounded() { return {true, std::numeric_limits<int>::max(), false}; }
  static KappaMax bounded(int v, bool cap = false) { return {false, v, cap}; }

  bool operator==(const KappaMax&) const = default;
};

// Largest supportable message count. Early exit when the zero-bias type
// lies inside the support; otherwise increment kappa while best-response
// dynamics still reach a valid partition.
inline KappaMax kappa_max(const CanonicalGame& game, const BrdConfig& config = {},
                          int kappa_cap = 64) {
  if (kappa_cap < 1) throw std::invalid_argument("kappa_max: requires kappa_cap >= 1");
  if (game.gamma == 1.0) {
    if (game.delta == 0.0) return KappaMax::unbounded();
  } else {
    const double theta_star = game.delta / (1.0 - game.gamma);
    if (theta_star >= game.theta_lo && theta_star <= game.theta_hi) {
      return KappaMax::unbounded();
    }
  }
  const double min_gap = config.resolved_min_gap(game.theta_hi - game.theta_lo);
  int kappa = 1;
  while (kappa < kappa_cap) {
    const Partition candidate = brd_solve(game, kappa + 1, config);
    if (!partition_is_valid(candidate, min_gap)) return KappaMax::bounded(kappa);
    ++kappa;
  }
  return KappaMax::bounded(kappa_cap, true);
}

}  // namespace drtalk
