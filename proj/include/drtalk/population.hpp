#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "drtalk/prior.hpp"

namespace drtalk {

// One consumer: valuation prior (over $/kWh) and saturation sensitivity
// alpha ($/kWh^2). The quadratic intrinsic benefit is w*x - alpha/2 * x^2.
struct ConsumerSpec {
  Prior prior;
  double alpha = 0.0;

  ConsumerSpec() = default;
  ConsumerSpec(Prior prior_, double alpha_) : prior(prior_), alpha(alpha_) {
    if (!(alpha > 0.0)) throw std::invalid_argument("ConsumerSpec: requires alpha > 0");
    if (!(prior.lo > 0.0)) {
      throw std::invalid_argument("ConsumerSpec: prior support must be strictly positive");
    }
  }
};

// Quadratic procurement cost C(X) = a X^2 + b X + c over the total load X.
struct CostParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  CostParams() = default;
  CostParams(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {
    if (!(a > 0.0)) throw std::invalid_argument("CostParams: requires a > 0");
    if (b < 0.0) throw std::invalid_argument("CostParams: requires b >= 0");
    if (c < 0.0) throw std::invalid_argument("CostParams: requires c >= 0");
  }

  double operator()(double total_load) const {
    return a * total_load * total_load + b * total_load + c;
  }

  double marginal(double total_load) const { return 2.0 * a * total_load + b; }
};

// A population plus cost and the announced tariff. The price is optional
// until set: the equilibrium machinery requires it, the pricing module
// computes it.
struct Scenario {
  std::vector<ConsumerSpec> consumers;
  CostParams cost;
  std::optional<double> price;

  std::size_t size() const { return consumers.size(); }

  void validate() const {
    if (consumers.empty()) throw std::invalid_argument("Scenario: requires at least one consumer");
    if (price && !(*price >= 0.0)) throw std::invalid_argument("Scenario: requires price >= 0");
  }

  double require_price() const {
    if (!price) throw std::logic_error("Scenario: price not set");
    return *price;
  }

  Scenario with_price(double p) const {
    Scenario s = *this;
    s.price = p;
    return s;
  }
};

// Population of size n built by cycling the template's consumer list;
// sizes that are multiples of the template preserve group proportions.
inline Scenario cycle_population(const Scenario& base, std::size_t n) {
  base.validate();
  Scenario s;
  s.cost = base.cost;
  s.price = base.price;
  s.consumers.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.consumers.push_back(base.consumers[i % base.consumers.size()]);
  }
  return s;
}

}  // namespace drtalk
