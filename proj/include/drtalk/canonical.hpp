#pragma once

#include <stdexcept>
#include <string>

#include "drtalk/decoupling.hpp"
#include "drtalk/equilibrium.hpp"

namespace drtalk {

// State-dependent bias between the sender's and receiver's ideal actions,
// beta(theta) = (1 - gamma) * theta - delta. Affine and strictly increasing
// for gamma < 1; its unique zero is the agreement type.
inline double bias(const EffectiveSubgame& g, double theta) {
  if (theta < g.theta_lo || theta > g.theta_hi) {
    throw std::invalid_argument("bias: theta outside support");
  }
  return (1.0 - g.gamma) * theta - g.delta;
}

inline double expected_bias(const EffectiveSubgame& g) {
  return (1.0 - g.gamma) * prior_mean(g.theta_prior) - g.delta;
}

struct AgreementPoint {
  double theta_star = 0.0;  // kWh
  double omega_star = 0.0;  // $/kWh
};

// The zero-bias type where the players' interests align, in both the
// transformed and the original type space.
inline AgreementPoint agreement_type(const EffectiveSubgame& g) {
  if (!(g.gamma < 1.0)) throw std::domain_error("no finite agreement type");
  AgreementPoint pt;
  pt.theta_star = g.delta / (1.0 - g.gamma);
  pt.omega_star = g.alpha * (g.price - g.b_eff) / (2.0 * g.a_eff) + g.price;
  return pt;
}

// Sufficient condition for an informative (two-message) equilibrium:
// (2 - gamma) theta_lo - gamma E[theta] < 2 delta < (2 - gamma) theta_hi - gamma E[theta],
// strict on both sides.
inline bool informative_equilibrium_exists(const EffectiveSubgame& g) {
  const double mean_theta = prior_mean(g.theta_prior);
  const double lhs = (2.0 - g.gamma) * g.theta_lo - g.gamma * mean_theta;
  const double rhs = (2.0 - g.gamma) * g.theta_hi - g.gamma * mean_theta;
  const double two_delta = 2.0 * g.delta;
  return lhs < two_delta && two_delta < rhs;
}

enum class BiasRegime { NonInformative, StrictBias, OutwardBias };

inline std::string to_string(BiasRegime r) {
  switch (r) {
    case BiasRegime::NonInformative: return "non_informative";
    case BiasRegime::StrictBias: return "strict_bias";
    case BiasRegime::OutwardBias: return "outward_bias";
  }
  return "unknown";
}

struct PriceBand {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double p) const { return p >= lo && p <= hi; }
};

// Prices for which the agreement valuation falls inside the consumer's
// support (closed on both ends, matching the non-strict band inequality).
inline PriceBand outward_bias_price_band(const EffectiveSubgame& g) {
  const double denom = g.alpha + 2.0 * g.a_eff;
  return {(2.0 * g.a_eff * g.omega_lo() + g.alpha * g.b_eff) / denom,
          (2.0 * g.a_eff * g.omega_hi() + g.alpha * g.b_eff) / denom};
}

struct RegimeReport {
  BiasRegime regime = BiasRegime::NonInformative;
  KappaMax kappa_max;
  double agreement_omega = 0.0;
  double agreement_theta = 0.0;
  PriceBand price_band;
  // Eq-13-style sufficient existence signal; reported alongside the
  // search-based message count, which is the classification authority when
  // they disagree.
  bool informative_sufficient = false;
};

// Price-regime classification: outward bias (unbounded messages) when the
// agreement valuation lies in the support; otherwise the message-count
// search decides between strict bias and a non-informative collapse.
inline RegimeReport classify_regime(const EffectiveSubgame& g, const BrdConfig& config = {},
                                    int kappa_cap = 64) {
  RegimeReport report;
  const AgreementPoint agreement = agreement_type(g);
  report.agreement_theta = agreement.theta_star;
  report.agreement_omega = agreement.omega_star;
  report.price_band = outward_bias_price_band(g);
  report.informative_sufficient = informative_equilibrium_exists(g);

  if (agreement.omega_star >= g.omega_lo() && agreement.omega_star <= g.omega_hi()) {
    report.regime = BiasRegime::OutwardBias;
    report.kappa_max = KappaMax::unbounded();
    return report;
  }
  report.kappa_max = kappa_max(g.canonical(), config, kappa_cap);
  if (report.kappa_max.infinite) {
    // Floating-point band edge: the theta-space test can disagree with the
    // omega-space one by one ulp. The message count wins.
    report.regime = BiasRegime::OutwardBias;
  } else {
    report.regime = report.kappa_max.value == 1 ? BiasRegime::NonInformative
                                                : BiasRegime::StrictBias;
  }
  return report;
}

}  // namespace drtalk
