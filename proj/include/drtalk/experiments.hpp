#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "drtalk/canonical.hpp"
#include "drtalk/csv.hpp"
#include "drtalk/decoupling.hpp"
#include "drtalk/equilibrium.hpp"
#include "drtalk/parallel.hpp"
#include "drtalk/pricing.hpp"
#include "drtalk/scenario_io.hpp"
#include "drtalk/welfare.hpp"

namespace drtalk {

inline constexpr const char* kToolName = "drtalk";
inline constexpr const char* kToolVersion = "0.1.0";

enum class ExperimentKind { Convergence, PriceSweep, KappaSweep, Scaling, Price, Equilibrium };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Convergence: return "convergence";
    case ExperimentKind::PriceSweep: return "price-sweep";
    case ExperimentKind::KappaSweep: return "kappa-sweep";
    case ExperimentKind::Scaling: return "scaling";
    case ExperimentKind::Price: return "price";
    case ExperimentKind::Equilibrium: return "equilibrium";
  }
  return "unknown";
}

// Inclusive evenly spaced grid with `steps` points, written lo:hi:steps.
struct SweepGrid {
  double lo = 0.0;
  double hi = 0.0;
  int steps = 1;

  double at(int i) const {
    if (steps <= 1) return lo;
    return lo + (hi - lo) * static_cast<double>(i) / (steps - 1);
  }

  static SweepGrid parse(const std::string& text) {
    SweepGrid g;
    char colon1 = 0, colon2 = 0;
    std::istringstream in(text);
    if (!(in >> g.lo >> colon1 >> g.hi >> colon2 >> g.steps) || colon1 != ':' ||
        colon2 != ':' || !(in >> std::ws).eof()) {
      throw std::invalid_argument("grid must be lo:hi:steps, got \"" + text + "\"");
    }
    if (g.steps < 1) throw std::invalid_argument("grid steps must be >= 1");
    if (g.steps > 1 && !(g.lo < g.hi)) throw std::invalid_argument("grid requires lo < hi");
    return g;
  }
};

struct ExperimentConfig {
  std::string scenario_path;
  Scenario scenario;
  std::string out_path;  // CSV path; manifest goes to out_path + ".manifest.json"
  BrdConfig brd;
  int kappa = 0;  // 0 selects the per-experiment default
  std::optional<SweepGrid> grid;
  std::int64_t mc_samples = 1000000;
  std::uint64_t seed = 12345;
  int threads = 1;
  double suboptimal_offset = 0.11;
  std::vector<double> curvatures = {0.05, 0.3};
  int kappa_cap = 64;

  int kappa_or(int fallback) const { return kappa > 0 ? kappa : fallback; }
};

namespace detail {

inline nlohmann::json grid_json(const SweepGrid& g) {
  return {{"lo", g.lo}, {"hi", g.hi}, {"steps", g.steps}};
}

inline void write_manifest(const ExperimentConfig& config, ExperimentKind kind,
                           nlohmann::json parameters, std::vector<std::string> warnings) {
  if (config.out_path.empty()) return;
  nlohmann::json m;
  m["tool"] = kToolName;
  m["version"] = kToolVersion;
  m["experiment"] = to_string(kind);
  m["seed"] = config.seed;
  m["mc_samples"] = config.mc_samples;
  m["brd"] = {{"epsilon", config.brd.epsilon},
              {"max_iterations", config.brd.max_iterations},
              {"min_gap", config.brd.min_gap ? nlohmann::json(*config.brd.min_gap)
                                             : nlohmann::json(nullptr)}};
  m["kappa_cap"] = config.kappa_cap;
  m["scenario_path"] = config.scenario_path;
  m["scenario"] = scenario_to_json(config.scenario);
  m["parameters"] = std::move(parameters);
  m["warnings"] = warnings;
  std::ofstream out(config.out_path + ".manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot open manifest file for " + config.out_path);
  out << m.dump(2) << '\n';
}

inline std::vector<std::string> participation_warnings(const Scenario& s) {
  std::vector<std::string> warnings;
  const ParticipationReport report = check_active_participation(s);
  if (!report.holds) {
    warnings.push_back(
        "active participation check failed (worst margin " +
        CsvWriter::format_double(report.worst_margin) + " kWh at consumer " +
        std::to_string(report.worst_consumer) +
        "); dispatch clipping treated as a diagnostic, equilibrium results are approximate");
  }
  return warnings;
}

// Equilibrium partitions for every consumer at the scenario's price, with
// the requested message count clamped to each consumer's maximum.
struct PopulationEquilibrium {
  std::vector<Partition> partitions;
  std::vector<KappaMax> kappa_limits;
};

inline PopulationEquilibrium solve_population(const Scenario& s, int kappa_target,
                                              const BrdConfig& brd, int kappa_cap) {
  PopulationEquilibrium eq;
  eq.partitions.reserve(s.size());
  eq.kappa_limits.reserve(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) {
    const CanonicalGame game = effective_subgame(s, n).canonical();
    const KappaMax limit = kappa_max(game, brd, kappa_cap);
    const int kappa_n = limit.infinite ? kappa_target : std::min(kappa_target, limit.value);
    eq.partitions.push_back(brd_solve(game, kappa_n, brd));
    eq.kappa_limits.push_back(limit);
  }
  return eq;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// convergence: per-iteration sup-norm boundary change of the best-response
// dynamics for a representative consumer, across population sizes built by
// cycling the scenario's consumers. Runs at the optimal price of each
// population.
// ---------------------------------------------------------------------------
struct ConvergenceSummary {
  std::vector<int> population_sizes;
  std::vector<int> iterations;
  std::vector<bool> converged;
  std::vector<double> gamma;
};

inline ConvergenceSummary run_convergence(const ExperimentConfig& config,
                                          std::ostream& log = std::cout) {
  const SweepGrid grid = config.grid.value_or(SweepGrid{1.0, 40.0, 40});
  const int kappa = config.kappa_or(20);

  struct Row {
    int n = 0;
    std::vector<BrdTracePoint> trace;
    bool converged = false;
    double gamma = 0.0;
  };
  std::vector<Row> rows(grid.steps);
  parallel_for(static_cast<std::size_t>(grid.steps), config.threads, [&](std::size_t i) {
    const int n = static_cast<int>(std::lround(grid.at(static_cast<int>(i))));
    Scenario pop = cycle_population(config.scenario, static_cast<std::size_t>(std::max(1, n)));
    pop.price = optimal_price(pop);
    const EffectiveSubgame sub = effective_subgame(pop, 0);
    Row& row = rows[i];
    row.n = n;
    row.gamma = sub.gamma;
    const Partition p = brd_solve(sub.canonical(), kappa, config.brd, &row.trace);
    row.converged = p.converged;
  });

  ConvergenceSummary summary;
  std::vector<std::string> warnings = detail::participation_warnings(config.scenario);
  if (!config.out_path.empty()) {
    CsvWriter csv(config.out_path);
    csv.header({"n_consumers", "iteration", "sup_boundary_change_kwh"});
    for (const Row& row : rows) {
      for (const BrdTracePoint& pt : row.trace) {
        csv.row({static_cast<long long>(row.n), static_cast<long long>(pt.iteration),
                 pt.sup_change});
      }
    }
  }
  for (const Row& row : rows) {
    summary.population_sizes.push_back(row.n);
    summary.iterations.push_back(static_cast<int>(row.trace.size()));
    summary.converged.push_back(row.converged);
    summary.gamma.push_back(row.gamma);
    if (!row.converged) {
      warnings.push_back("BRD did not converge for population size " + std::to_string(row.n));
    }
  }
  detail::write_manifest(config, ExperimentKind::Convergence,
                         {{"grid", detail::grid_json(grid)},
                          {"kappa", kappa},
                          {"price", "optimal per population"}},
                         warnings);
  log << "convergence: " << grid.steps << " population sizes, kappa " << kappa
      << ", epsilon " << config.brd.epsilon << '\n';
  return summary;
}

// ---------------------------------------------------------------------------
// price-sweep: regime, maximal message count, mean expected bias, and
// recovered welfare across a uniform grid of announced prices.
// ---------------------------------------------------------------------------
struct PriceSweepRow {
  double price = 0.0;
  BiasRegime regime = BiasRegime::NonInformative;
  KappaMax kappa_min;
  double mean_expected_bias = 0.0;
  double rw_pct = 0.0;
};

inline std::vector<PriceSweepRow> run_price_sweep(const ExperimentConfig& config,
                                                  std::ostream& log = std::cout) {
  const SweepGrid grid = config.grid.value_or(SweepGrid{9.0, 11.0, 201});
  const int kappa_target = config.kappa_or(10);

  std::vector<PriceSweepRow> rows(grid.steps);
  parallel_for(static_cast<std::size_t>(grid.steps), config.threads, [&](std::size_t i) {
    const double price = grid.at(static_cast<int>(i));
    const Scenario s = config.scenario.with_price(price);
    PriceSweepRow row;
    row.price = price;

    bool all_outward = true, all_mute = true;
    KappaMax min_kappa = KappaMax::unbounded();
    double bias_sum = 0.0;
    std::vector<Partition> partitions;
    partitions.reserve(s.size());
    for (std::size_t n = 0; n < s.size(); ++n) {
      const EffectiveSubgame sub = effective_subgame(s, n);
      const RegimeReport report = classify_regime(sub, config.brd, config.kappa_cap);
      bias_sum += expected_bias(sub);
      all_outward = all_outward && report.regime == BiasRegime::OutwardBias;
      all_mute = all_mute && !report.kappa_max.infinite && report.kappa_max.value == 1;
      if (!report.kappa_max.infinite &&
          (min_kappa.infinite || report.kappa_max.value < min_kappa.value)) {
        min_kappa = report.kappa_max;
      }
      const int kappa_n = report.kappa_max.infinite
                              ? kappa_target
                              : std::min(kappa_target, report.kappa_max.value);
      partitions.push_back(brd_solve(sub.canonical(), kappa_n, config.brd));
    }
    row.regime = all_outward ? BiasRegime::OutwardBias
                             : (all_mute ? BiasRegime::NonInformative : BiasRegime::StrictBias);
    row.kappa_min = min_kappa;
    row.mean_expected_bias = bias_sum / static_cast<double>(s.size());
    row.rw_pct = welfare_report(s, partitions).recovered_pct;
    rows[i] = row;
  });

  if (!config.out_path.empty()) {
    CsvWriter csv(config.out_path);
    csv.header({"price_usd_per_kwh", "regime", "kappa_max", "kappa_max_at_cap",
                "mean_expected_bias_kwh", "rw_pct"});
    for (const PriceSweepRow& row : rows) {
      csv.row({row.price, to_string(row.regime),
               row.kappa_min.infinite ? CsvWriter::Cell(std::string())
                                      : CsvWriter::Cell(static_cast<long long>(row.kappa_min.value)),
               static_cast<long long>(row.kappa_min.at_cap ? 1 : 0), row.mean_expected_bias,
               row.rw_pct});
    }
  }
  detail::write_manifest(config, ExperimentKind::PriceSweep,
                         {{"grid", detail::grid_json(grid)}, {"kappa", kappa_target}},
                         detail::participation_warnings(config.scenario));
  log << "price-sweep: " << grid.steps << " prices in [" << grid.lo << ", " << grid.hi
      << "]\n";
  return rows;
}

// ---------------------------------------------------------------------------
// kappa-sweep: recovered welfare versus the number of messages at the
// optimal price and at a configured suboptimal price (message counts are
// clamped to each consumer's equilibrium maximum).
// ---------------------------------------------------------------------------
struct KappaSweepRow {
  int kappa = 0;
  double rw_at_optimal_pct = 0.0;
  double rw_at_suboptimal_pct = 0.0;
};

inline std::vector<KappaSweepRow> run_kappa_sweep(const ExperimentConfig& config,
                                                  std::ostream& log = std::cout) {
  const int kappa_hi = config.kappa_or(10);
  const double p_star = optimal_price(config.scenario);
  const double p_sub = p_star + config.suboptimal_offset;

  std::vector<KappaSweepRow> rows(kappa_hi);
  parallel_for(static_cast<std::size_t>(kappa_hi), config.threads, [&](std::size_t i) {
    const int kappa = static_cast<int>(i) + 1;
    KappaSweepRow row;
    row.kappa = kappa;
    for (const double price : {p_star, p_sub}) {
      const Scenario s = config.scenario.with_price(price);
      const detail::PopulationEquilibrium eq =
          detail::solve_population(s, kappa, config.brd, config.kappa_cap);
      const double rw = welfare_report(s, eq.partitions).recovered_pct;
      (price == p_star ? row.rw_at_optimal_pct : row.rw_at_suboptimal_pct) = rw;
    }
    rows[i] = row;
  });

  if (!config.out_path.empty()) {
    CsvWriter csv(config.out_path);
    csv.header({"kappa", "rw_at_optimal_price_pct", "rw_at_suboptimal_price_pct"});
    for (const KappaSweepRow& row : rows) {
      csv.row({static_cast<long long>(row.kappa), row.rw_at_optimal_pct,
               row.rw_at_suboptimal_pct});
    }
  }
  detail::write_manifest(config, ExperimentKind::KappaSweep,
                         {{"kappa_max_swept", kappa_hi},
                          {"optimal_price", p_star},
                          {"suboptimal_price", p_sub},
                          {"suboptimal_offset", config.suboptimal_offset}},
                         detail::participation_warnings(config.scenario));
  log << "kappa-sweep: kappa 1.." << kappa_hi << " at p* = " << p_star << " and p* + "
      << config.suboptimal_offset << '\n';
  return rows;
}

// ---------------------------------------------------------------------------
// scaling: finite-population optimal price versus its large-population
// limit, and recovered welfare under both, across population sizes and
// cost curvatures. Populations cycle the scenario's consumer list.
// ---------------------------------------------------------------------------
struct ScalingRow {
  double curvature = 0.0;
  int n_consumers = 0;
  double p_star_n = 0.0;
  double p_star_inf = 0.0;
  double rw_at_p_star_n_pct = 0.0;
  double rw_at_p_star_inf_pct = 0.0;
};

inline std::vector<ScalingRow> run_scaling(const ExperimentConfig& config,
                                           std::ostream& log = std::cout) {
  const SweepGrid grid = config.grid.value_or(SweepGrid{3.0, 60.0, 20});
  const int kappa_target = config.kappa_or(10);
  const double p_inf = asymptotic_price(population_limit_of(config.scenario));
  const std::size_t jobs = config.curvatures.size() * static_cast<std::size_t>(grid.steps);

  std::vector<ScalingRow> rows(jobs);
  parallel_for(jobs, config.threads, [&](std::size_t j) {
    const std::size_t a_index = j / static_cast<std::size_t>(grid.steps);
    const int n_index = static_cast<int>(j % static_cast<std::size_t>(grid.steps));
    const double a = config.curvatures[a_index];
    const int n = static_cast<int>(std::lround(grid.at(n_index)));

    Scenario pop = cycle_population(config.scenario, static_cast<std::size_t>(std::max(1, n)));
    pop.cost = CostParams(a, config.scenario.cost.b, config.scenario.cost.c);

    ScalingRow row;
    row.curvature = a;
    row.n_consumers = n;
    row.p_star_n = optimal_price(pop);
    row.p_star_inf = p_inf;
    for (const bool use_limit_price : {false, true}) {
      const Scenario s = pop.with_price(use_limit_price ? p_inf : row.p_star_n);
      const detail::PopulationEquilibrium eq =
          detail::solve_population(s, kappa_target, config.brd, config.kappa_cap);
      const double rw = welfare_report(s, eq.partitions).recovered_pct;
      (use_limit_price ? row.rw_at_p_star_inf_pct : row.rw_at_p_star_n_pct) = rw;
    }
    rows[j] = row;
  });

  if (!config.out_path.empty()) {
    CsvWriter csv(config.out_path);
    csv.header({"a_usd_per_kwh2", "n_consumers", "p_star_n_usd_per_kwh",
                "p_star_inf_usd_per_kwh", "rw_at_p_star_n_pct", "rw_at_p_star_inf_pct"});
    for (const ScalingRow& row : rows) {
      csv.row({row.curvature, static_cast<long long>(row.n_consumers), row.p_star_n,
               row.p_star_inf, row.rw_at_p_star_n_pct, row.rw_at_p_star_inf_pct});
    }
  }
  detail::write_manifest(config, ExperimentKind::Scaling,
                         {{"grid", detail::grid_json(grid)},
                          {"kappa", kappa_target},
                          {"curvatures", config.curvatures},
                          {"p_star_inf", p_inf}},
                         detail::participation_warnings(config.scenario));
  log << "scaling: " << grid.steps << " population sizes x " << config.curvatures.size()
      << " curvatures, p*_inf = " << p_inf << '\n';
  return rows;
}

// ---------------------------------------------------------------------------
// price: the uniform optimal price, per-consumer prices, and the
// Monte-Carlo expected-marginal-cost cross-check.
// ---------------------------------------------------------------------------
struct PriceResult {
  double p_star = 0.0;
  std::vector<double> per_consumer;
  McEstimate marginal_cost;
};

inline PriceResult run_price(const ExperimentConfig& config, std::ostream& log = std::cout) {
  PriceResult result;
  result.p_star = optimal_price(config.scenario);
  for (std::size_t n = 0; n < config.scenario.size(); ++n) {
    result.per_consumer.push_back(per_consumer_optimal_price(config.scenario, n));
  }
  result.marginal_cost =
      expected_marginal_cost_mc(config.scenario, config.mc_samples, config.seed, config.threads);

  log << "optimal price p* = " << CsvWriter::format_double(result.p_star) << " $/kWh\n";
  for (std::size_t n = 0; n < result.per_consumer.size(); ++n) {
    log << "  consumer " << n
        << ": p*_n = " << CsvWriter::format_double(result.per_consumer[n]) << " $/kWh\n";
  }
  log << "expected marginal cost at the full-information optimum: "
      << CsvWriter::format_double(result.marginal_cost.value) << " +/- "
      << CsvWriter::format_double(result.marginal_cost.std_error) << " $/kWh ("
      << config.mc_samples << " samples, seed " << config.seed << ")\n";

  if (!config.out_path.empty()) {
    CsvWriter csv(config.out_path);
    csv.header({"consumer_index", "p_star_n_usd_per_kwh", "p_star_usd_per_kwh",
                "marginal_cost_mc_usd_per_kwh", "marginal_cost_mc_stderr"});
    for (std::size_t n = 0; n < result.per_consumer.size(); ++n) {
      csv.row({static_cast<long long>(n), result.per_consumer[n], result.p_star,
               result.marginal_cost.value, result.marginal_cost.std_error});
    }
    detail::write_manifest(config, ExperimentKind::Price, nlohmann::json::object(),
                           detail::participation_warnings(config.scenario));
  }
  return result;
}

// ---------------------------------------------------------------------------
// equilibrium: partition dump for every consumer at the scenario price (or
// the optimal price when unset).
// ---------------------------------------------------------------------------
struct EquilibriumResult {
  double price = 0.0;
  std::vector<Partition> partitions;
  std::vector<KappaMax> kappa_limits;
};

inline EquilibriumResult run_equilibrium(const ExperimentConfig& config,
                                         std::ostream& log = std::cout) {
  EquilibriumResult result;
  result.price = config.scenario.price ? *config.scenario.price : optimal_price(config.scenario);
  const Scenario s = config.scenario.with_price(result.price);
  const int kappa_target = config.kappa_or(5);
  detail::PopulationEquilibrium eq =
      detail::solve_population(s, kappa_target, config.brd, config.kappa_cap);
  result.partitions = std::move(eq.partitions);
  result.kappa_limits = std::move(eq.kappa_limits);

  if (!config.out_path.empty()) {
    CsvWriter csv(config.out_path);
    csv.header({"consumer_index", "bin_index", "mu_lo_kwh", "mu_hi_kwh", "action_kwh",
                "bin_probability"});
    for (std::size_t n = 0; n < result.partitions.size(); ++n) {
      const Partition& p = result.partitions[n];
      for (int i = 0; i < p.kappa; ++i) {
        csv.row({static_cast<long long>(n), static_cast<long long>(i), p.boundaries[i],
                 p.boundaries[i + 1], p.actions[i], p.probabilities[i]});
      }
    }
    detail::write_manifest(config, ExperimentKind::Equilibrium,
                           {{"price", result.price}, {"kappa", kappa_target}},
                           detail::participation_warnings(config.scenario));
  }
  log << "equilibrium at price " << CsvWriter::format_double(result.price) << " $/kWh:";
  for (std::size_t n = 0; n < result.partitions.size(); ++n) {
    log << " consumer " << n << " kappa=" << result.partitions[n].kappa
        << (result.partitions[n].converged ? "" : " (not converged)");
    log << (n + 1 < result.partitions.size() ? "," : "\n");
  }
  return result;
}

inline void run_experiment(const ExperimentConfig& config, ExperimentKind kind,
                           std::ostream& log = std::cout) {
  switch (kind) {
    case ExperimentKind::Convergence: run_convergence(config, log); return;
    case ExperimentKind::PriceSweep: run_price_sweep(config, log); return;
    case ExperimentKind::KappaSweep: run_kappa_sweep(config, log); return;
    case ExperimentKind::Scaling: run_scaling(config, log); return;
    case ExperimentKind::Price: run_price(config, log); return;
    case ExperimentKind::Equilibrium: run_equilibrium(config, log); return;
  }
  throw std::invalid_argument("unknown experiment");
}

}  // namespace drtalk
