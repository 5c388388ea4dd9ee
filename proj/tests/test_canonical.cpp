#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "drtalk/canonical.hpp"
#include "drtalk/pricing.hpp"
#include "support/builders.hpp"
#include "support/quadrature.hpp"

using namespace drtalk;
using drtalk_test::make_subgame;
using drtalk_test::table1_scenario;

TEST_CASE("bias function") {
  const EffectiveSubgame g = make_subgame(0.6, 0.2, Prior::uniform(0.0, 1.0));
  CHECK(bias(g, 0.5) == Catch::Approx(0.0).margin(1e-15));
  const EffectiveSubgame g0 = make_subgame(0.6, 0.0, Prior::uniform(0.0, 1.0));
  CHECK(bias(g0, 1.0) == Catch::Approx(0.4).margin(1e-15));
  CHECK_THROWS_AS(bias(g, 1.5), std::invalid_argument);
  // affine, strictly increasing, unique zero at theta*
  CHECK(bias(g, 0.2) < bias(g, 0.3));
  CHECK(bias(g, 0.499) < 0.0);
  CHECK(bias(g, 0.501) > 0.0);
}

TEST_CASE("expected bias vanishes at the optimal price") {
  Scenario s = table1_scenario();
  const Scenario sp = s.with_price(optimal_price(s));
  for (std::size_t n = 0; n < sp.size(); ++n) {
    const EffectiveSubgame g = effective_subgame(sp, n);
    CHECK(expected_bias(g) == Catch::Approx(0.0).margin(1e-10));
    // independent quadrature of beta(theta) phi(theta) over the support
    const double by_quadrature = drtalk_test::integrate(
        [&](double theta) {
          return ((1.0 - g.gamma) * theta - g.delta) * g.theta_prior.pdf(theta);
        },
        g.theta_lo, g.theta_hi);
    CHECK(by_quadrature == Catch::Approx(0.0).margin(1e-8));
  }
}

TEST_CASE("agreement type") {
  SECTION("zero delta puts the agreement at the price") {
    // N=1 with price = b: b_eff = b, delta = 0
    Scenario s;
    s.consumers.emplace_back(Prior::uniform(2.0, 4.0), 1.0);
    s.cost = CostParams(0.5, 1.0, 0.0);
    const EffectiveSubgame g = effective_subgame(s.with_price(1.0), 0);
    const AgreementPoint pt = agreement_type(g);
    CHECK(pt.theta_star == Catch::Approx(0.0).margin(1e-12));
    CHECK(pt.omega_star == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("direct parameters") {
    const EffectiveSubgame g = make_subgame(0.6, 0.2, Prior::uniform(0.0, 1.0));
    const AgreementPoint pt = agreement_type(g);
    CHECK(pt.theta_star == Catch::Approx(0.5).margin(1e-12));
    CHECK(pt.omega_star == Catch::Approx(g.alpha * pt.theta_star + g.price).margin(1e-12));
  }

  SECTION("at p* the agreement valuation is the prior mean for every consumer") {
    Scenario s = table1_scenario();
    const Scenario sp = s.with_price(optimal_price(s));
    for (std::size_t n = 0; n < sp.size(); ++n) {
      const AgreementPoint pt = agreement_type(effective_subgame(sp, n));
      CHECK(pt.omega_star ==
            Catch::Approx(prior_mean(sp.consumers[n].prior)).margin(1e-9));
    }
  }

  SECTION("gamma = 1 has no finite agreement type") {
    EffectiveSubgame g = make_subgame(0.5, 0.1, Prior::uniform(0.0, 1.0));
    g.gamma = 1.0;
    CHECK_THROWS_WITH(agreement_type(g), "no finite agreement type");
  }
}

TEST_CASE("informative equilibrium sufficient condition") {
  const Prior u01 = Prior::uniform(0.0, 1.0);
  CHECK(informative_equilibrium_exists(make_subgame(0.5, 0.0, u01)));
  // boundary is strict: 2 delta = (2-gamma) hi - gamma E[theta] = 1.25
  CHECK_FALSE(informative_equilibrium_exists(make_subgame(0.5, 0.625, u01)));
  CHECK_FALSE(informative_equilibrium_exists(make_subgame(0.5, 10.0, u01)));
}

TEST_CASE("outward bias iff the sufficient condition holds on the interior") {
  // whenever theta* is strictly inside the support, the Eq-13-style
  // sufficient condition must also report an informative equilibrium
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const double gamma = drtalk_test::uniform_in(rng, 0.05, 0.95);
    const double theta_star = drtalk_test::uniform_in(rng, 0.01, 0.99);
    const double delta = theta_star * (1.0 - gamma);
    const EffectiveSubgame g = make_subgame(gamma, delta, Prior::uniform(0.0, 1.0));
    CHECK(informative_equilibrium_exists(g));
  }
}

TEST_CASE("regime classification") {
  Scenario s = table1_scenario();
  const double p_star = optimal_price(s);

  SECTION("outward bias at the optimal price, for every consumer") {
    const Scenario sp = s.with_price(p_star);
    for (std::size_t n = 0; n < sp.size(); ++n) {
      const RegimeReport r = classify_regime(effective_subgame(sp, n));
      CHECK(r.regime == BiasRegime::OutwardBias);
      CHECK(r.kappa_max.infinite);
      CHECK(r.price_band.contains(p_star));
      CHECK(r.informative_sufficient);
    }
  }

  SECTION("strict bias just outside the band, kappa_max = 3 at p* + 0.11") {
    const Scenario sp = s.with_price(p_star + 0.11);
    int min_kappa = std::numeric_limits<int>::max();
    for (std::size_t n = 0; n < sp.size(); ++n) {
      const RegimeReport r = classify_regime(effective_subgame(sp, n));
      CHECK(r.regime == BiasRegime::StrictBias);
      REQUIRE_FALSE(r.kappa_max.infinite);
      min_kappa = std::min(min_kappa, r.kappa_max.value);
    }
    CHECK(min_kappa == 3);
  }

  SECTION("far-off prices collapse to the non-informative regime") {
    const Scenario sp = s.with_price(9.0);
    for (std::size_t n = 0; n < sp.size(); ++n) {
      const RegimeReport r = classify_regime(effective_subgame(sp, n));
      CHECK(r.regime == BiasRegime::NonInformative);
      CHECK(r.kappa_max == KappaMax::bounded(1));
    }
  }

  SECTION("interior agreement type on direct parameters") {
    const RegimeReport r =
        classify_regime(make_subgame(0.6, 0.2, Prior::uniform(0.0, 1.0)));
    CHECK(r.regime == BiasRegime::OutwardBias);
    CHECK(r.kappa_max.infinite);
  }
}

TEST_CASE("band consistency over a dense price grid") {
  Scenario s = table1_scenario();
  const Scenario at_star = s.with_price(optimal_price(s));
  const std::size_t n = 0;
  const PriceBand band = outward_bias_price_band(effective_subgame(at_star, n));
  const double step = 0.004;
  for (double p = band.lo - 40.0 * step; p <= band.hi + 40.0 * step; p += step) {
    const RegimeReport r = classify_regime(effective_subgame(s.with_price(p), n));
    const bool inside = band.contains(p);
    const bool near_edge =
        std::min(std::abs(p - band.lo), std::abs(p - band.hi)) <= step;
    if (!near_edge) {
      CHECK((r.regime == BiasRegime::OutwardBias) == inside);
    }
  }
}
