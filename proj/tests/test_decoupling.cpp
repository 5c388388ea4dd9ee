#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "drtalk/decoupling.hpp"
#include "drtalk/equilibrium.hpp"
#include "drtalk/pricing.hpp"
#include "support/builders.hpp"

using namespace drtalk;
using drtalk_test::group1_scenario;
using drtalk_test::table1_scenario;

namespace {

Scenario two_consumer(double alpha1, double alpha2, double a, double b) {
  Scenario s;
  s.consumers.emplace_back(Prior::uniform(2.0, 4.0), alpha1);
  s.consumers.emplace_back(Prior::uniform(2.0, 4.0), alpha2);
  s.cost = CostParams(a, b, 0.0);
  return s;
}

}  // namespace

TEST_CASE("aggregator best response solves the dispatch FOC") {
  // N=1: omega - alpha x - 2 a x - b = 0  =>  x = 4/3
  Scenario s;
  s.consumers.emplace_back(Prior::uniform(3.0, 5.0), 2.0);
  s.cost = CostParams(0.5, 0.0, 0.0);
  const std::vector<double> belief{4.0};
  const DispatchResult r = aggregator_best_response(belief, s);
  CHECK(r.allocation[0] == Catch::Approx(4.0 / 3.0).margin(1e-12));
  CHECK_FALSE(r.any_clipped());
}

TEST_CASE("beliefs at the cost intercept give zero dispatch") {
  Scenario s = table1_scenario();
  const std::vector<double> belief(s.size(), s.cost.b);
  const DispatchResult r = aggregator_best_response(belief, s);
  for (double x : r.allocation) CHECK(x == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("two-consumer interior dispatch matches the 2x2 FOC solution") {
  Scenario s = two_consumer(1.0, 1.0, 0.5, 0.0);
  const std::vector<double> belief{3.0, 2.0};
  const DispatchResult r = aggregator_best_response(belief, s);
  CHECK(r.allocation[0] == Catch::Approx(4.0 / 3.0).margin(1e-12));
  CHECK(r.allocation[1] == Catch::Approx(1.0 / 3.0).margin(1e-12));
  CHECK(r.total == Catch::Approx(5.0 / 3.0).margin(1e-12));
}

TEST_CASE("active-set clipping removes negative allocations") {
  Scenario s = two_consumer(1.0, 1.0, 0.5, 0.0);
  // unconstrained solution gives x2 = -1/3; after removal x1 = 3/(1+2a)
  const std::vector<double> belief{3.0, 1.0};
  const std::vector<double> interior = unconstrained_dispatch(belief, s);
  CHECK(interior[1] == Catch::Approx(-1.0 / 3.0).margin(1e-12));
  const DispatchResult r = aggregator_best_response(belief, s);
  CHECK(r.allocation[0] == Catch::Approx(1.5).margin(1e-12));
  CHECK(r.allocation[1] == 0.0);
  CHECK_FALSE(r.clipped[0]);
  CHECK(r.clipped[1]);
}

TEST_CASE("dispatch validates its inputs") {
  Scenario empty;
  empty.cost = CostParams(0.5, 0.0, 0.0);
  const std::vector<double> belief{1.0};
  CHECK_THROWS_AS(aggregator_best_response(belief, empty), std::invalid_argument);
  Scenario s = table1_scenario();
  CHECK_THROWS_AS(aggregator_best_response(belief, s), std::invalid_argument);
}

TEST_CASE("interior dispatch maximizes the posterior welfare objective") {
  // perturbing the unconstrained optimum never increases
  // sum(omega_hat x - alpha x^2/2) - C(X)
  Scenario s = table1_scenario();
  const std::vector<double> belief{10.4, 12.9, 14.1};
  const std::vector<double> x_star = unconstrained_dispatch(belief, s);
  const auto objective = [&](const std::vector<double>& x) {
    double total = 0.0, value = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      value += belief[n] * x[n] - 0.5 * s.consumers[n].alpha * x[n] * x[n];
      total += x[n];
    }
    return value - s.cost(total);
  };
  const double best = objective(x_star);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x = x_star;
    for (double& xi : x) {
      xi += 1e-3 * (drtalk_test::uniform_in(rng, -1.0, 1.0));
    }
    CHECK(objective(x) <= best + 1e-15);
  }
}

TEST_CASE("effective subgame parameters") {
  SECTION("N=1 reduces to the raw cost") {
    Scenario s;
    s.consumers.emplace_back(Prior::uniform(2.0, 4.0), 1.0);
    s.cost = CostParams(0.5, 1.0, 0.0);
    const EffectiveCost eff = effective_cost_params(s, 0);
    CHECK(eff.a_eff == Catch::Approx(0.5).margin(1e-15));
    CHECK(eff.b_eff == Catch::Approx(1.0).margin(1e-15));
  }

  SECTION("two-consumer worked example") {
    // alpha = (1, 2), a = 0.5, b = 1, E[omega_2] = 3:
    // a_eff = 1/3, b_eff = 5/3, gamma = 0.6
    Scenario s;
    s.consumers.emplace_back(Prior::uniform(2.0, 4.0), 1.0);
    s.consumers.emplace_back(Prior::uniform(2.0, 4.0), 2.0);
    s.cost = CostParams(0.5, 1.0, 0.0);
    s.price = 2.0;
    const EffectiveSubgame g = effective_subgame(s, 0);
    CHECK(g.a_eff == Catch::Approx(1.0 / 3.0).margin(1e-12));
    CHECK(g.b_eff == Catch::Approx(5.0 / 3.0).margin(1e-12));
    CHECK(g.gamma == Catch::Approx(0.6).margin(1e-12));
    CHECK(g.theta_lo == Catch::Approx(0.0).margin(1e-12));
    CHECK(g.theta_hi == Catch::Approx(2.0).margin(1e-12));
  }

  SECTION("group-1 homogeneous gamma at N=1 and N=40") {
    Scenario base = group1_scenario();
    for (const auto& [n, expected] : {std::pair{1, 0.600}, std::pair{40, 0.976}}) {
      Scenario pop = cycle_population(base, static_cast<std::size_t>(n));
      pop.price = optimal_price(pop);
      CHECK(effective_subgame(pop, 0).gamma == Catch::Approx(expected).margin(1e-3));
    }
  }

  SECTION("invalid index") {
    Scenario s = table1_scenario().with_price(9.9);
    CHECK_THROWS_AS(effective_subgame(s, 7), std::invalid_argument);
  }

  SECTION("price must be set") {
    Scenario s = table1_scenario();
    CHECK_THROWS_AS(effective_subgame(s, 0), std::logic_error);
  }
}

TEST_CASE("gamma rises monotonically toward one as consumers are added") {
  Scenario base = group1_scenario();
  double prev = 0.0;
  for (int n = 1; n <= 30; ++n) {
    Scenario pop = cycle_population(base, static_cast<std::size_t>(n));
    pop.price = optimal_price(pop);
    const double gamma = effective_subgame(pop, 0).gamma;
    CHECK(gamma > prev);
    CHECK(gamma < 1.0);
    prev = gamma;
  }
}

TEST_CASE("predicted subgame response matches Monte-Carlo dispatch") {
  // E[x_n | omega_hat_n] over others' types equals the effective
  // single-sender best response (omega_hat_n - b_eff)/(alpha + 2 a_eff)
  Scenario s = table1_scenario().with_price(9.9);
  const EffectiveSubgame g = effective_subgame(s, 0);
  const double own_belief = 10.4;
  const double predicted = (own_belief - g.b_eff) / (g.alpha + 2.0 * g.a_eff);

  std::mt19937_64 rng(314);
  const int samples = 200000;
  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> belief(s.size());
  for (int i = 0; i < samples; ++i) {
    belief[0] = own_belief;
    for (std::size_t j = 1; j < s.size(); ++j) {
      belief[j] = prior_sample(s.consumers[j].prior, rng);
    }
    const double x = unconstrained_dispatch(belief, s)[0];
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / samples;
  const double se = std::sqrt((sum_sq - sum * sum / samples) / (samples - 1.0) / samples);
  CHECK(std::abs(mean - predicted) <= 3.0 * se);
}

TEST_CASE("allocation variance is invariant to the own message (matched seeds)") {
  // From consumer n's viewpoint the dispatch splits into an own-belief
  // term plus a term in others' reports; switching message shifts the
  // distribution without changing its spread.
  Scenario s = table1_scenario().with_price(9.9);
  std::vector<Partition> other_parts;
  for (std::size_t j = 1; j < s.size(); ++j) {
    other_parts.push_back(brd_solve(effective_subgame(s, j).canonical(), 3));
  }
  const auto variance_given_message = [&](double own_belief, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int samples = 20000;
    double sum = 0.0, sum_sq = 0.0;
    std::vector<double> belief(s.size());
    for (int i = 0; i < samples; ++i) {
      belief[0] = own_belief;
      for (std::size_t j = 1; j < s.size(); ++j) {
        const double omega = prior_sample(s.consumers[j].prior, rng);
        const Partition& p = other_parts[j - 1];
        int bin = 0;
        while (bin + 1 < p.kappa && omega > p.omega_boundaries[bin + 1]) ++bin;
        belief[j] = p.omega_means[bin];
      }
      const double x = unconstrained_dispatch(belief, s)[0];
      sum += x;
      sum_sq += x * x;
    }
    return (sum_sq - sum * sum / samples) / (samples - 1.0);
  };
  const double var_a = variance_given_message(10.2, 555);
  const double var_b = variance_given_message(10.8, 555);
  CHECK(var_a == Catch::Approx(var_b).margin(1e-9));
}

TEST_CASE("indifference point is unchanged by others' partition choice") {
  // tau - p = alpha/2 (E[x] + E[x']) holds with expectations over others'
  // reports; swapping others' equilibrium partitions leaves tau in place.
  Scenario s = table1_scenario().with_price(9.9);
  const auto indifference_point = [&](int others_kappa, std::uint64_t seed) {
    std::vector<Partition> other_parts;
    for (std::size_t j = 1; j < s.size(); ++j) {
      other_parts.push_back(brd_solve(effective_subgame(s, j).canonical(), others_kappa));
    }
    const double msg_a = 10.25, msg_b = 10.75;  // two candidate own reports
    std::mt19937_64 rng(seed);
    const int samples = 400000;
    double sum_a = 0, sum_a2 = 0, sum_b = 0, sum_b2 = 0;
    std::vector<double> belief(s.size());
    for (int i = 0; i < samples; ++i) {
      for (std::size_t j = 1; j < s.size(); ++j) {
        const double omega = prior_sample(s.consumers[j].prior, rng);
        const Partition& p = other_parts[j - 1];
        int bin = 0;
        while (bin + 1 < p.kappa && omega > p.omega_boundaries[bin + 1]) ++bin;
        belief[j] = p.omega_means[bin];
      }
      belief[0] = msg_a;
      const double xa = unconstrained_dispatch(belief, s)[0];
      belief[0] = msg_b;
      const double xb = unconstrained_dispatch(belief, s)[0];
      sum_a += xa;
      sum_a2 += xa * xa;
      sum_b += xb;
      sum_b2 += xb * xb;
    }
    const double ex_a = sum_a / samples, ex_b = sum_b / samples;
    const double e2_a = sum_a2 / samples, e2_b = sum_b2 / samples;
    return *s.price + 0.5 * s.consumers[0].alpha * (e2_a - e2_b) / (ex_a - ex_b);
  };
  const double tau_two_bins = indifference_point(2, 404);
  const double tau_three_bins = indifference_point(3, 404);
  // analytic value: p + alpha/2 (E[x]+E[x']) with E[x] from b_eff
  const EffectiveSubgame g = effective_subgame(s, 0);
  const double ex_a = (10.25 - g.b_eff) / (g.alpha + 2.0 * g.a_eff);
  const double ex_b = (10.75 - g.b_eff) / (g.alpha + 2.0 * g.a_eff);
  const double tau_analytic = *s.price + 0.5 * g.alpha * (ex_a + ex_b);
  CHECK(tau_two_bins == Catch::Approx(tau_analytic).margin(2e-3));
  CHECK(tau_two_bins == Catch::Approx(tau_three_bins).margin(2e-3));
}

TEST_CASE("active participation check") {
  SECTION("table-1 population holds") {
    const ParticipationReport r = check_active_participation(table1_scenario());
    CHECK(r.holds);
    CHECK(r.worst_margin > 0.0);
  }

  SECTION("supports entirely below the cost intercept fail") {
    Scenario s;
    s.consumers.emplace_back(Prior::uniform(1.0, 2.0), 0.5);
    s.consumers.emplace_back(Prior::uniform(1.5, 2.5), 0.5);
    s.cost = CostParams(0.1, 5.0, 0.0);
    const ParticipationReport r = check_active_participation(s);
    CHECK_FALSE(r.holds);
    CHECK(r.worst_margin < 0.0);
  }

  SECTION("asymmetric degenerate-support example fails at the FOC solution") {
    // alpha = (1,1), a = 0.5, b = 0, supports {3} x {1}: x_2 = -1/3
    Scenario s;
    s.consumers.emplace_back(Prior::uniform(3.0 - 1e-12, 3.0 + 1e-12), 1.0);
    s.consumers.emplace_back(Prior::uniform(1.0 - 1e-12, 1.0 + 1e-12), 1.0);
    s.cost = CostParams(0.5, 0.0, 0.0);
    const ParticipationReport r = check_active_participation(s);
    CHECK_FALSE(r.holds);
    CHECK(r.worst_consumer == 1);
    CHECK(r.worst_margin == Catch::Approx(-1.0 / 3.0).margin(1e-6));
  }
}
