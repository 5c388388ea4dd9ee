#pragma once

#include <optional>
#include <stdexcept>

#include "drtalk/decoupling.hpp"
#include "drtalk/population.hpp"

namespace drtalk {

// Bias-minimizing price for consumer n's subgame,
// p*_n = (alpha_n b_eff_n + 2 a_eff_n E[omega_n]) / (alpha_n + 2 a_eff_n).
// Computed from prior means only; any announced price on the scenario is
// ignored.
inline double per_consumer_optimal_price(const Scenario& s, std::size_t n) {
  const EffectiveCost eff = effective_cost_params(s, n);
  const double alpha = s.consumers[n].alpha;
  const double mean = prior_mean(s.consumers[n].prior);
  return (alpha * eff.b_eff + 2.0 * eff.a_eff * mean) / (alpha + 2.0 * eff.a_eff);
}

// The uniform system-wide price minimizing every consumer's expected bias,
// p* = (b + 2a sum_j E[omega_j]/alpha_j) / (1 + 2a sum_j 1/alpha_j).
// Coincides with each per-consumer price and with the expected marginal
// cost at the full-information optimum.
inline double optimal_price(const Scenario& s) {
  s.validate();
  const double a = s.cost.a, b = s.cost.b;
  double sum_mean_ratio = 0.0, sum_inv_alpha = 0.0;
  for (const ConsumerSpec& consumer : s.consumers) {
    sum_mean_ratio += prior_mean(consumer.prior) / consumer.alpha;
    sum_inv_alpha += 1.0 / consumer.alpha;
  }
  return (b + 2.0 * a * sum_mean_ratio) / (1.0 + 2.0 * a * sum_inv_alpha);
}

// Population-level statistics for the large-population limit. Supplied
// explicitly so scaling experiments control their own sampling.
struct PopulationLimit {
  double mean_omega_over_alpha = 0.0;  // E[omega / alpha]
  double mean_inv_alpha = 0.0;         // E[1 / alpha]
  bool independent = false;            // omega independent of alpha
  std::optional<double> mean_omega;    // E[omega], used under independence

  void validate() const {
    if (!(mean_inv_alpha > 0.0)) {
      throw std::invalid_argument("PopulationLimit: requires mean_inv_alpha > 0");
    }
  }
};

// Large-population bias-minimizing price, E[omega/alpha] / E[1/alpha];
// reduces to the average valuation when omega and alpha are independent.
inline double asymptotic_price(const PopulationLimit& limit) {
  limit.validate();
  if (limit.independent && limit.mean_omega) return *limit.mean_omega;
  return limit.mean_omega_over_alpha / limit.mean_inv_alpha;
}

// Equal-weight mixture statistics over a template population; cycling that
// template to larger sizes converges to this limit.
inline PopulationLimit population_limit_of(const Scenario& base) {
  base.validate();
  PopulationLimit limit;
  double sum_mean = 0.0;
  for (const ConsumerSpec& consumer : base.consumers) {
    const double mean = prior_mean(consumer.prior);
    limit.mean_omega_over_alpha += mean / consumer.alpha;
    limit.mean_inv_alpha += 1.0 / consumer.alpha;
    sum_mean += mean;
  }
  const double n = static_cast<double>(base.consumers.size());
  limit.mean_omega_over_alpha /= n;
  limit.mean_inv_alpha /= n;
  limit.mean_omega = sum_mean / n;
  return limit;
}

}  // namespace drtalk
