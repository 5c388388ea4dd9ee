#pragma once

#include <random>

#include "drtalk/decoupling.hpp"
#include "drtalk/population.hpp"
#include "drtalk/prior.hpp"

namespace drtalk_test {

// Three-group heterogeneous population used throughout the experiments:
// a truncated-normal group and two uniform groups, quadratic cost
// (a, b, c) = (0.051, 7.89, 0).
inline drtalk::Scenario table1_scenario() {
  drtalk::Scenario s;
  s.consumers.emplace_back(drtalk::Prior::truncated_normal(10.5, 0.25, 10.0, 11.0), 0.30);
  s.consumers.emplace_back(drtalk::Prior::uniform(12.0, 13.0), 0.35);
  s.consumers.emplace_back(drtalk::Prior::uniform(14.0, 15.0), 0.45);
  s.cost = drtalk::CostParams(0.051, 7.89, 0.0);
  return s;
}

// Single group-1 consumer with the convergence-experiment cost.
inline drtalk::Scenario group1_scenario() {
  drtalk::Scenario s;
  s.consumers.emplace_back(drtalk::Prior::truncated_normal(10.5, 0.25, 10.0, 11.0), 0.30);
  s.cost = drtalk::CostParams(0.1, 9.0, 0.0);
  return s;
}

// An effective subgame with prescribed canonical parameters; the effective
// cost fields are back-solved so the subgame is internally consistent
// (gamma = alpha/(alpha + 2 a_eff), delta = (price - b_eff)/(alpha + 2 a_eff)).
inline drtalk::EffectiveSubgame make_subgame(double gamma, double delta,
                                             const drtalk::Prior& theta_prior,
                                             double alpha = 1.0, double price = 0.0) {
  drtalk::EffectiveSubgame g;
  g.gamma = gamma;
  g.delta = delta;
  g.alpha = alpha;
  g.price = price;
  g.a_eff = alpha * (1.0 - gamma) / (2.0 * gamma);
  g.b_eff = price - delta * (alpha + 2.0 * g.a_eff);
  g.theta_prior = theta_prior;
  g.theta_lo = theta_prior.lo;
  g.theta_hi = theta_prior.hi;
  g.consumer_index = 0;
  return g;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

// Random small scenario with supports comfortably above the cost intercept
// so the participation assumption holds.
inline drtalk::Scenario random_small_scenario(std::mt19937_64& rng, int max_consumers = 3) {
  drtalk::Scenario s;
  const int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_consumers));
  const double b = uniform_in(rng, 0.5, 2.0);
  for (int i = 0; i < n; ++i) {
    const double lo = uniform_in(rng, b + 2.0, b + 6.0);
    const double width = uniform_in(rng, 0.5, 2.0);
    const double alpha = uniform_in(rng, 0.3, 2.0);
    if (rng() % 2 == 0) {
      s.consumers.emplace_back(drtalk::Prior::uniform(lo, lo + width), alpha);
    } else {
      const double mu = uniform_in(rng, lo, lo + width);
      const double sigma = uniform_in(rng, 0.2 * width, width);
      s.consumers.emplace_back(drtalk::Prior::truncated_normal(mu, sigma, lo, lo + width),
                               alpha);
    }
  }
  s.cost = drtalk::CostParams(uniform_in(rng, 0.05, 0.5) / n, b, uniform_in(rng, 0.0, 1.0));
  return s;
}

}  // namespace drtalk_test
