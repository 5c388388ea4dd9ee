#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "drtalk/equilibrium.hpp"
#include "drtalk/population.hpp"

namespace drtalk {

namespace detail {

// Interior (unconstrained) welfare-maximizing dispatch for beliefs
// omega_hat restricted to the index set `active`; non-active entries are
// left untouched by the caller.
inline void interior_dispatch_over(const Scenario& s, std::span<const double> omega_hat,
                                   const std::vector<std::size_t>& active,
                                   std::vector<double>& x) {
  const double a = s.cost.a, b = s.cost.b;
  double sum_ratio = 0.0, sum_inv_alpha = 0.0;
  for (std::size_t n : active) {
    sum_ratio += (omega_hat[n] - b) / s.consumers[n].alpha;
    sum_inv_alpha += 1.0 / s.consumers[n].alpha;
  }
  const double total = sum_ratio / (1.0 + 2.0 * a * sum_inv_alpha);
  for (std::size_t n : active) {
    x[n] = (omega_hat[n] - b - 2.0 * a * total) / s.consumers[n].alpha;
  }
}

}  // namespace detail

// Interior solution of the dispatch first-order conditions over the full
// population, with no non-negativity clipping. Used by the moment algebra
// and the participation diagnostic.
inline std::vector<double> unconstrained_dispatch(std::span<const double> omega_hat,
                                                  const Scenario& s) {
  s.validate();
  if (omega_hat.size() != s.size()) {
    throw std::invalid_argument("unconstrained_dispatch: belief/consumer count mismatch");
  }
  std::vector<std::size_t> all(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) all[n] = n;
  std::vector<double> x(s.size(), 0.0);
  detail::interior_dispatch_over(s, omega_hat, all, x);
  return x;
}

struct DispatchResult {
  std::vector<double> allocation;  // kWh per consumer
  std::vector<bool> clipped;       // true where the non-negativity bound binds
  double total = 0.0;

  bool any_clipped() const {
    for (bool c : clipped) {
      if (c) return true;
    }
    return false;
  }
};

// Welfare-maximizing dispatch under x >= 0 for belief vector omega_hat.
// The componentwise max{0, .} of the interior formula is not the KKT point
// of the constrained problem, so the bound is enforced by active-set
// removal: drop the most negative allocation and re-solve the interior
// problem over the remainder until all active allocations are nonnegative.
inline DispatchResult aggregator_best_response(std::span<const double> omega_hat,
                                               const Scenario& s) {
  s.validate();
  if (omega_hat.size() != s.size()) {
    throw std::invalid_argument("aggregator_best_response: belief/consumer count mismatch");
  }
  DispatchResult r;
  r.allocation.assign(s.size(), 0.0);
  r.clipped.assign(s.size(), false);
  std::vector<std::size_t> active(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) active[n] = n;

  while (!active.empty()) {
    detail::interior_dispatch_over(s, omega_hat, active, r.allocation);
    std::size_t worst = active.size();
    double worst_value = 0.0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const double v = r.allocation[active[k]];
      if (v < worst_value) {
        worst_value = v;
        worst = k;
      }
    }
    if (worst == active.size()) break;
    const std::size_t dropped = active[worst];
    r.allocation[dropped] = 0.0;
    r.clipped[dropped] = true;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(worst));
  }
  for (double v : r.allocation) r.total += v;
  return r;
}

// Curvature and intercept of the effective receiver facing consumer n once
// the other consumers are integrated out at their prior means. Both are
// independent of the announced price.
struct EffectiveCost {
  double a_eff = 0.0;
  double b_eff = 0.0;
};

inline EffectiveCost effective_cost_params(const Scenario& s, std::size_t n) {
  s.validate();
  if (n >= s.size()) throw std::invalid_argument("effective_cost_params: invalid consumer index");
  const double a = s.cost.a, b = s.cost.b;
  double sum_inv_alpha = 0.0, sum_mean_ratio = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (j == n) continue;
    sum_inv_alpha += 1.0 / s.consumers[j].alpha;
    sum_mean_ratio += (prior_mean(s.consumers[j].prior) - b) / s.consumers[j].alpha;
  }
  const double denom = 1.0 + 2.0 * a * sum_inv_alpha;
  return {a / denom, b + 2.0 * a * sum_mean_ratio / denom};
}

// The decoupled single-sender game for consumer n: effective receiver
// parameters, the canonical slope/intercept (gamma, delta), and the
// transformed type prior on theta = (omega - p) / alpha.
struct EffectiveSubgame {
  double a_eff = 0.0;
  double b_eff = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double theta_lo = 0.0;
  double theta_hi = 0.0;
  Prior theta_prior;
  double alpha = 0.0;
  double price = 0.0;
  std::size_t consumer_index = 0;

  double omega_lo() const { return alpha * theta_lo + price; }
  double omega_hi() const { return alpha * theta_hi + price; }

  CanonicalGame canonical() const {
    return CanonicalGame(gamma, delta, theta_prior, alpha, price);
  }
};

inline EffectiveSubgame effective_subgame(const Scenario& s, std::size_t n) {
  const double p = s.require_price();
  const EffectiveCost eff = effective_cost_params(s, n);
  const ConsumerSpec& consumer = s.consumers[n];

  EffectiveSubgame g;
  g.a_eff = eff.a_eff;
  g.b_eff = eff.b_eff;
  g.alpha = consumer.alpha;
  g.price = p;
  g.consumer_index = n;
  g.gamma = consumer.alpha / (consumer.alpha + 2.0 * eff.a_eff);
  g.delta = (p - eff.b_eff) / (consumer.alpha + 2.0 * eff.a_eff);
  g.theta_prior = prior_affine(consumer.prior, 1.0 / consumer.alpha, -p / consumer.alpha);
  g.theta_lo = g.theta_prior.lo;
  g.theta_hi = g.theta_prior.hi;
  return g;
}

struct ParticipationReport {
  bool holds = false;
  std::size_t worst_consumer = 0;
  double worst_margin = 0.0;  // min over consumers of the adversarial dispatch
};

// Conservative sufficient check of the active-participation assumption:
// evaluate the interior dispatch of each consumer at the adversarial
// belief vertex (own valuation at the support bottom, everyone else at the
// top). The dispatch is affine in beliefs, so positivity at the vertices
// implies positivity over the whole belief box.
inline ParticipationReport check_active_participation(const Scenario& s) {
  s.validate();
  ParticipationReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  std::vector<double> omega_hat(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      omega_hat[j] = (j == n) ? s.consumers[j].prior.lo : s.consumers[j].prior.hi;
    }
    const std::vector<double> x = unconstrained_dispatch(omega_hat, s);
    if (x[n] < report.worst_margin) {
      report.worst_margin = x[n];
      report.worst_consumer = n;
    }
  }
  report.holds = report.worst_margin > 0.0;
  return report;
}

}  // namespace drtalk
