#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "drtalk/decoupling.hpp"
#include "drtalk/equilibrium.hpp"
#include "drtalk/parallel.hpp"
#include "drtalk/population.hpp"

namespace drtalk {

enum class WelfareMethod { MomentExact, BinEnumeration, MonteCarlo };

inline const char* to_string(WelfareMethod m) {
  switch (m) {
    case WelfareMethod::MomentExact: return "moment_exact";
    case WelfareMethod::BinEnumeration: return "bin_enumeration";
    case WelfareMethod::MonteCarlo: return "monte_carlo";
  }
  return "unknown";
}

namespace detail {

// Exact expected welfare for interior dispatch driven by posterior-mean
// beliefs. The dispatch is affine in the belief vector and the welfare is
// quadratic, so with independent types the expectation splits into a base
// term at the prior means plus a per-consumer term linear in the variance
// of the posterior mean:
//
//   E[u_R] = W0 + sum_k rho_k * Var(E[omega_k | information]).
//
// Full information uses the prior variance, no communication uses zero,
// and a partition strategy uses the between-bin variance.
struct WelfareAlgebra {
  double base_welfare = 0.0;        // W0: welfare of dispatch at prior means
  std::vector<double> prior_means;
  std::vector<double> rho;          // marginal value of posterior-mean variance

  explicit WelfareAlgebra(const Scenario& s) {
    s.validate();
    const std::size_t n = s.size();
    const double a = s.cost.a;
    prior_means.resize(n);
    rho.resize(n);

    double t = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      prior_means[k] = prior_mean(s.consumers[k].prior);
      t += 1.0 / s.consumers[k].alpha;
    }
    const double g = 1.0 + 2.0 * a * t;

    const std::vector<double> x_bar = unconstrained_dispatch(prior_means, s);
    double total = 0.0;
    for (double x : x_bar) total += x;
    base_welfare = -s.cost(total);
    for (std::size_t k = 0; k < n; ++k) {
      const double alpha = s.consumers[k].alpha;
      base_welfare += prior_means[k] * x_bar[k] - 0.5 * alpha * x_bar[k] * x_bar[k];
    }

    // Dispatch sensitivity A = diag(w) - u w^T with u_n = 2a w_n / g and
    // w_n = 1/alpha_n; its column sums are w_k / g.
    double sum_alpha_u_sq = 0.0;  // sum_n alpha_n u_n^2 = (4a^2/g^2) * t
    for (std::size_t k = 0; k < n; ++k) {
      const double w = 1.0 / s.consumers[k].alpha;
      sum_alpha_u_sq += s.consumers[k].alpha * (2.0 * a * w / g) * (2.0 * a * w / g);
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double alpha = s.consumers[k].alpha;
      const double w = 1.0 / alpha;
      const double diag = w - 2.0 * a * w * w / g;
      const double col_sum = w / g;
      const double own = alpha * (2.0 * a * w / g) * (2.0 * a * w / g);
      rho[k] = diag - 0.5 * (alpha * diag * diag + w * w * (sum_alpha_u_sq - own)) -
               a * col_sum * col_sum;
    }
  }

  double welfare(std::span<const double> posterior_mean_variance) const {
    double value = base_welfare;
    for (std::size_t k = 0; k < rho.size(); ++k) {
      value += rho[k] * posterior_mean_variance[k];
    }
    return value;
  }
};

inline void require_partitions_match(const Scenario& s, const std::vector<Partition>& parts) {
  if (parts.size() != s.size()) {
    throw std::invalid_argument("welfare_sit: partition/consumer count mismatch");
  }
  for (const Partition& p : parts) {
    if (static_cast<int>(p.omega_means.size()) != p.kappa ||
        static_cast<int>(p.probabilities.size()) != p.kappa) {
      throw std::invalid_argument("welfare_sit: partition lacks bin statistics");
    }
  }
}

// Variance of the posterior mean induced by a partition strategy.
inline double posterior_mean_variance(const Partition& p, double prior_mean_value) {
  double second = 0.0;
  for (int i = 0; i < p.kappa; ++i) {
    second += p.probabilities[i] * p.omega_means[i] * p.omega_means[i];
  }
  return second - prior_mean_value * prior_mean_value;
}

inline int locate_bin(const Partition& p, double omega) {
  int lo = 0, hi = p.kappa - 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (omega <= p.omega_boundaries[mid + 1]) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

}  // namespace detail

// Expected welfare under full communication: dispatch at the realized
// types. Exact via moment algebra; presumes interior dispatch (active
// participation).
inline double welfare_fc(const Scenario& s) {
  detail::WelfareAlgebra algebra(s);
  std::vector<double> v(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) v[k] = prior_variance(s.consumers[k].prior);
  return algebra.welfare(v);
}

// Expected welfare with no communication: a fixed dispatch at the prior
// means (clipped if the participation assumption fails; the allocation is
// deterministic, so the expectation stays exact either way).
inline double welfare_nc(const Scenario& s) {
  s.validate();
  std::vector<double> means(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) means[k] = prior_mean(s.consumers[k].prior);
  const DispatchResult dispatch = aggregator_best_response(means, s);
  double value = -s.cost(dispatch.total);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double x = dispatch.allocation[k];
    value += means[k] * x - 0.5 * s.consumers[k].alpha * x * x;
  }
  return value;
}

// Expected welfare under strategic information transmission with one
// equilibrium partition per consumer. Exact via moment algebra over the
// joint message distribution.
inline double welfare_sit(const Scenario& s, const std::vector<Partition>& partitions) {
  detail::WelfareAlgebra algebra(s);
  detail::require_partitions_match(s, partitions);
  std::vector<double> v(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    v[k] = detail::posterior_mean_variance(partitions[k], algebra.prior_means[k]);
  }
  return algebra.welfare(v);
}

inline constexpr std::int64_t kBinEnumerationLimit = 100000;

// Secondary exact method: enumerate the product of message profiles.
// Cross-validates the moment algebra at desk scale.
inline double welfare_sit_enum(const Scenario& s, const std::vector<Partition>& partitions) {
  s.validate();
  detail::require_partitions_match(s, partitions);
  const std::size_t n = s.size();
  std::int64_t profiles = 1;
  for (const Partition& p : partitions) {
    profiles *= p.kappa;
    if (profiles > kBinEnumerationLimit) {
      throw std::invalid_argument("welfare_sit_enum: bin-profile count exceeds enumeration limit");
    }
  }

  std::vector<int> index(n, 0);
  std::vector<double> omega_hat(n);
  double value = 0.0;
  for (std::int64_t step = 0; step < profiles; ++step) {
    double prob = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      prob *= partitions[k].probabilities[index[k]];
      omega_hat[k] = partitions[k].omega_means[index[k]];
    }
    const std::vector<double> x = unconstrained_dispatch(omega_hat, s);
    double total = 0.0;
    for (double xi : x) total += xi;
    double u = -s.cost(total);
    for (std::size_t k = 0; k < n; ++k) {
      u += omega_hat[k] * x[k] - 0.5 * s.consumers[k].alpha * x[k] * x[k];
    }
    value += prob * u;
    for (std::size_t k = 0; k < n; ++k) {
      if (++index[k] < partitions[k].kappa) break;
      index[k] = 0;
    }
  }
  return value;
}

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

namespace detail {

inline constexpr std::int64_t kMcBlockSize = 8192;

inline std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  return std::mt19937_64(seq);
}

// Seeded block-summed Monte Carlo mean/stderr of `sample_value(engine)`.
// Blocks have fixed substreams and combine in index order, so the result
// depends on (samples, seed) only, not on the worker count.
template <typename SampleFn>
McEstimate monte_carlo_mean(std::int64_t samples, std::uint64_t seed, int threads,
                            SampleFn&& sample_value) {
  if (samples < 1) throw std::invalid_argument("monte_carlo_mean: requires samples >= 1");
  const std::int64_t blocks = (samples + kMcBlockSize - 1) / kMcBlockSize;
  std::vector<double> block_sum(blocks, 0.0), block_sum_sq(blocks, 0.0);
  parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t b) {
    std::mt19937_64 engine = block_engine(seed, b);
    const std::int64_t begin = static_cast<std::int64_t>(b) * kMcBlockSize;
    const std::int64_t end = std::min(begin + kMcBlockSize, samples);
    double sum = 0.0, sum_sq = 0.0;
    for (std::int64_t i = begin; i < end; ++i) {
      const double u = sample_value(engine);
      sum += u;
      sum_sq += u * u;
    }
    block_sum[b] = sum;
    block_sum_sq[b] = sum_sq;
  });
  double sum = 0.0, sum_sq = 0.0;
  for (std::int64_t b = 0; b < blocks; ++b) {
    sum += block_sum[b];
    sum_sq += block_sum_sq[b];
  }
  McEstimate est;
  const double count = static_cast<double>(samples);
  est.value = sum / count;
  if (samples > 1) {
    const double var = std::max(0.0, (sum_sq - sum * sum / count) / (count - 1.0));
    est.std_error = std::sqrt(var / count);
  }
  return est;
}

}  // namespace detail

// Independent Monte-Carlo oracle for the SIT welfare: draw types, map each
// to its message bin, dispatch on the posterior means (with non-negativity
// clipping), and evaluate realized welfare at the true types.
inline McEstimate welfare_sit_mc(const Scenario& s, const std::vector<Partition>& partitions,
                                 std::int64_t samples, std::uint64_t seed, int threads = 1) {
  s.validate();
  detail::require_partitions_match(s, partitions);
  const std::size_t n = s.size();
  return detail::monte_carlo_mean(samples, seed, threads, [&](std::mt19937_64& g) {
    std::vector<double> omega(n), omega_hat(n);
    for (std::size_t k = 0; k < n; ++k) {
      omega[k] = prior_sample(s.consumers[k].prior, g);
      omega_hat[k] = partitions[k].omega_means[detail::locate_bin(partitions[k], omega[k])];
    }
    const DispatchResult dispatch = aggregator_best_response(omega_hat, s);
    double u = -s.cost(dispatch.total);
    for (std::size_t k = 0; k < n; ++k) {
      const double x = dispatch.allocation[k];
      u += omega[k] * x - 0.5 * s.consumers[k].alpha * x * x;
    }
    return u;
  });
}

// Monte-Carlo estimate of the expected marginal cost at the
// full-information optimum, E[C'(X*)]; cross-checks the optimal price.
inline McEstimate expected_marginal_cost_mc(const Scenario& s, std::int64_t samples,
                                            std::uint64_t seed, int threads = 1) {
  s.validate();
  const std::size_t n = s.size();
  return detail::monte_carlo_mean(samples, seed, threads, [&](std::mt19937_64& g) {
    std::vector<double> omega(n);
    for (std::size_t k = 0; k < n; ++k) omega[k] = prior_sample(s.consumers[k].prior, g);
    const DispatchResult dispatch = aggregator_best_response(omega, s);
    return s.cost.marginal(dispatch.total);
  });
}

// Recovered-welfare percentage: the share of the full-information gain
// over no-communication achieved by strategic transmission.
inline double recovered_welfare(double u_sit, double u_fc, double u_nc) {
  if (!(u_fc > u_nc)) throw std::domain_error("degenerate benchmark gap");
  const double pct = 100.0 * (u_sit - u_nc) / (u_fc - u_nc);
  if (pct < -0.1 || pct > 100.1) {
    throw std::runtime_error("recovered welfare outside consistency bounds [-0.1, 100.1]");
  }
  return pct;
}

struct WelfareReport {
  double u_sit = 0.0;
  double u_fc = 0.0;
  double u_nc = 0.0;
  double recovered_pct = 0.0;
  WelfareMethod method = WelfareMethod::MomentExact;
  std::optional<double> mc_std_error;
  bool approximate = false;  // participation assumption failed; exact
                             // methods treat dispatch as interior
};

// Full three-benchmark report. The moment algebra is the default exact
// method; when the message-profile space is small the enumeration oracle
// runs as a consistency check.
inline WelfareReport welfare_report(const Scenario& s, const std::vector<Partition>& partitions) {
  WelfareReport report;
  report.u_fc = welfare_fc(s);
  report.u_nc = welfare_nc(s);
  report.u_sit = welfare_sit(s, partitions);
  report.method = WelfareMethod::MomentExact;
  report.approximate = !check_active_participation(s).holds;

  std::int64_t profiles = 1;
  bool enumerable = true;
  for (const Partition& p : partitions) {
    profiles *= p.kappa;
    if (profiles > kBinEnumerationLimit) {
      enumerable = false;
      break;
    }
  }
  if (enumerable) {
    const double by_enum = welfare_sit_enum(s, partitions);
    const double scale = std::max({1.0, std::abs(report.u_sit), std::abs(by_enum)});
    if (std::abs(by_enum - report.u_sit) > 1e-9 * scale) {
      throw std::runtime_error("welfare method disagreement: moment algebra vs bin enumeration");
    }
  }
  report.recovered_pct = recovered_welfare(report.u_sit, report.u_fc, report.u_nc);
  return report;
}

}  // namespace drtalk
