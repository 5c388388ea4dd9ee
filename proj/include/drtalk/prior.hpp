#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace drtalk {

// Type priors supported by the welfare moment algebra. The set is a closed
// enumeration: each member must provide exact first and second moments,
// conditional means, and interval probabilities in closed form.
enum class PriorKind { Uniform, TruncatedNormal };

namespace detail {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double normal_pdf(double z) {
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

// P(a < Z < b) for a standard normal. Routed through erfc on the dominant
// tail so narrow intervals far from the mode do not cancel.
inline double normal_interval_prob(double a, double b) {
  if (a > b) std::swap(a, b);
  if (a >= 0.0) {
    return 0.5 * (std::erfc(a * kInvSqrt2) - std::erfc(b * kInvSqrt2));
  }
  if (b <= 0.0) {
    return 0.5 * (std::erfc(-b * kInvSqrt2) - std::erfc(-a * kInvSqrt2));
  }
  return 0.5 * (std::erf(b * kInvSqrt2) - std::erf(a * kInvSqrt2));
}

}  // namespace detail

// A bounded-support prior: Uniform(lo, hi) or a normal with pre-truncation
// parameters (mu, sigma) truncated to [lo, hi]. Immutable after construction.
struct Prior {
  PriorKind kind = PriorKind::Uniform;
  double lo = 0.0;
  double hi = 1.0;
  double mu = 0.0;     // TruncatedNormal only
  double sigma = 0.0;  // TruncatedNormal only

  static Prior uniform(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("Prior: requires lo < hi");
    Prior p;
    p.kind = PriorKind::Uniform;
    p.lo = lo;
    p.hi = hi;
    return p;
  }

  static Prior truncated_normal(double mu, double sigma, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("Prior: requires lo < hi");
    if (!(sigma > 0.0)) throw std::invalid_argument("Prior: requires sigma > 0");
    Prior p;
    p.kind = PriorKind::TruncatedNormal;
    p.lo = lo;
    p.hi = hi;
    p.mu = mu;
    p.sigma = sigma;
    return p;
  }

  double width() const { return hi - lo; }

  double z(double w) const { return (w - mu) / sigma; }

  // Normalizing mass of the parent normal over [lo, hi].
  double truncation_mass() const {
    return detail::normal_interval_prob(z(lo), z(hi));
  }

  double pdf(double w) const {
    if (w < lo || w > hi) return 0.0;
    if (kind == PriorKind::Uniform) return 1.0 / (hi - lo);
    return detail::normal_pdf(z(w)) / (sigma * truncation_mass());
  }

  double cdf(double w) const {
    if (w <= lo) return 0.0;
    if (w >= hi) return 1.0;
    if (kind == PriorKind::Uniform) return (w - lo) / (hi - lo);
    return detail::normal_interval_prob(z(lo), z(w)) / truncation_mass();
  }
};

namespace detail {

// Conditional-mean ratio for a tiny interval, where the closed-form tail
// ratio would divide two near-cancelling quantities. Fixed-node
// Gauss-Legendre on the raw (unnormalized) density; the normalization
// cancels in the ratio.
inline double local_quadrature_mean(const Prior& p, double a, double b) {
  static constexpr double kNodes[4] = {-0.8611363115940526, -0.3399810435848563,
                                       0.3399810435848563, 0.8611363115940526};
  static constexpr double kWeights[4] = {0.3478548451374538, 0.6521451548625461,
                                         0.6521451548625461, 0.3478548451374538};
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double x = mid + half * kNodes[i];
    const double f = normal_pdf((x - p.mu) / p.sigma);
    num += kWeights[i] * x * f;
    den += kWeights[i] * f;
  }
  if (den <= 0.0) return mid;
  return num / den;
}

// E[w | w in (a, b)] for the truncated normal, (a, b) already clipped to the
// support. Standard tail-ratio formula with a local-quadrature fallback for
// intervals narrower than 1e-6 * sigma.
inline double truncated_normal_conditional_mean(const Prior& p, double a, double b) {
  if (b - a < 1e-6 * p.sigma) return local_quadrature_mean(p, a, b);
  const double za = p.z(a), zb = p.z(b);
  const double mass = normal_interval_prob(za, zb);
  if (mass <= 0.0) return local_quadrature_mean(p, a, b);
  return p.mu + p.sigma * (normal_pdf(za) - normal_pdf(zb)) / mass;
}

}  // namespace detail

inline double prior_conditional_mean(const Prior& p, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("prior_conditional_mean: requires lo < hi");
  const double a = std::max(lo, p.lo);
  const double b = std::min(hi, p.hi);
  if (!(a < b)) throw std::invalid_argument("empty conditioning event");
  if (p.kind == PriorKind::Uniform) return 0.5 * (a + b);
  return detail::truncated_normal_conditional_mean(p, a, b);
}

inline double prior_mean(const Prior& p) {
  if (p.kind == PriorKind::Uniform) return 0.5 * (p.lo + p.hi);
  return detail::truncated_normal_conditional_mean(p, p.lo, p.hi);
}

inline double prior_second_moment(const Prior& p) {
  if (p.kind == PriorKind::Uniform) {
    return (p.lo * p.lo + p.lo * p.hi + p.hi * p.hi) / 3.0;
  }
  const double za = p.z(p.lo), zb = p.z(p.hi);
  const double mass = detail::normal_interval_prob(za, zb);
  const double lambda = (detail::normal_pdf(za) - detail::normal_pdf(zb)) / mass;
  const double mean = p.mu + p.sigma * lambda;
  const double var =
      p.sigma * p.sigma *
      (1.0 + (za * detail::normal_pdf(za) - zb * detail::normal_pdf(zb)) / mass -
       lambda * lambda);
  return var + mean * mean;
}

inline double prior_variance(const Prior& p) {
  const double m = prior_mean(p);
  return prior_second_moment(p) - m * m;
}

// P(lo < w < hi), interval clipped to the support.
inline double prior_interval_probability(const Prior& p, double lo, double hi) {
  const double a = std::max(lo, p.lo);
  const double b = std::min(hi, p.hi);
  if (!(a < b)) return 0.0;
  if (p.kind == PriorKind::Uniform) return (b - a) / (p.hi - p.lo);
  return detail::normal_interval_prob(p.z(a), p.z(b)) / p.truncation_mass();
}

// Push-forward of the prior under y = scale * w + offset, scale > 0. Both
// families are closed under increasing affine maps.
inline Prior prior_affine(const Prior& p, double scale, double offset) {
  if (!(scale > 0.0)) throw std::invalid_argument("prior_affine: requires scale > 0");
  if (p.kind == PriorKind::Uniform) {
    return Prior::uniform(scale * p.lo + offset, scale * p.hi + offset);
  }
  return Prior::truncated_normal(scale * p.mu + offset, scale * p.sigma,
                                 scale * p.lo + offset, scale * p.hi + offset);
}

namespace detail {

// Uniform double in (0, 1]; avoids log(0) in Box-Muller. Hand-rolled so
// that draws depend only on the engine state, not on the standard library's
// distribution implementation.
inline double uniform01(std::mt19937_64& g) {
  return (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53;
}

inline double standard_normal(std::mt19937_64& g) {
  const double u1 = uniform01(g);
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
}

}  // namespace detail

inline double prior_sample(const Prior& p, std::mt19937_64& g) {
  if (p.kind == PriorKind::Uniform) {
    return p.lo + (p.hi - p.lo) * detail::uniform01(g);
  }
  // Rejection from the parent normal; supports in this domain sit within a
  // few sigma of the mode, so the acceptance rate stays high.
  for (;;) {
    const double w = p.mu + p.sigma * detail::standard_normal(g);
    if (w >= p.lo && w <= p.hi) return w;
  }
}

}  // namespace drtalk
