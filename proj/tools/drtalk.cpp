// drtalk: compute cheap-talk partition equilibria for demand-response
// populations, bias-minimizing tariffs, and welfare-recovery experiments.
//
// Exit codes: 0 success, 2 validation/parse error, 3 runtime error.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "drtalk/drtalk.hpp"

namespace {

struct CliOptions {
  std::string scenario_path;
  std::string out_path;
  std::string grid_text;
  std::string curvatures_text;
  std::uint64_t seed = 12345;
  long long mc_samples = 1000000;
  double epsilon = -1.0;  // < 0: per-experiment default
  int kappa = 0;
  int kappa_cap = 64;
  int threads = 0;
  double suboptimal_offset = 0.11;
};

void add_common_options(CLI::App* cmd, CliOptions& opt, bool out_required) {
  cmd->add_option("--scenario", opt.scenario_path, "scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", opt.out_path, "output CSV path");
  if (out_required) out->required();
  cmd->add_option("--seed", opt.seed, "random seed for Monte-Carlo components");
  cmd->add_option("--eps", opt.epsilon, "BRD convergence tolerance");
  cmd->add_option("--kappa", opt.kappa, "number of messages (experiment-specific default)");
  cmd->add_option("--kappa-cap", opt.kappa_cap, "safety cap for the message-count search");
  cmd->add_option("--grid", opt.grid_text, "sweep grid as lo:hi:steps");
  cmd->add_option("--mc-samples", opt.mc_samples, "Monte-Carlo sample count");
  cmd->add_option("--threads", opt.threads, "worker threads (0 = hardware)");
}

drtalk::ExperimentConfig make_config(const CliOptions& opt, double default_epsilon) {
  drtalk::ExperimentConfig config;
  config.scenario_path = opt.scenario_path;
  config.scenario = drtalk::load_scenario(opt.scenario_path);
  config.out_path = opt.out_path;
  config.brd.epsilon = opt.epsilon > 0.0 ? opt.epsilon : default_epsilon;
  config.kappa = opt.kappa;
  if (!opt.grid_text.empty()) config.grid = drtalk::SweepGrid::parse(opt.grid_text);
  config.mc_samples = opt.mc_samples;
  config.seed = opt.seed;
  config.threads = opt.threads > 0 ? opt.threads : drtalk::default_thread_count();
  config.suboptimal_offset = opt.suboptimal_offset;
  config.kappa_cap = opt.kappa_cap;
  if (!opt.curvatures_text.empty()) {
    config.curvatures.clear();
    std::size_t begin = 0;
    while (begin <= opt.curvatures_text.size()) {
      const std::size_t comma = opt.curvatures_text.find(',', begin);
      const std::string token = opt.curvatures_text.substr(
          begin, comma == std::string::npos ? std::string::npos : comma - begin);
      config.curvatures.push_back(std::stod(token));
      if (comma == std::string::npos) break;
      begin = comma + 1;
    }
    if (config.curvatures.empty()) {
      throw CLI::ValidationError("--curvatures", "expected a comma-separated list of numbers");
    }
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cheap-talk demand-response equilibria, pricing, and welfare experiments"};
  app.require_subcommand(1);

  CliOptions opt;
  CLI::App* convergence =
      app.add_subcommand("convergence", "BRD iterations vs population size");
  add_common_options(convergence, opt, true);

  CLI::App* price_sweep =
      app.add_subcommand("price-sweep", "regimes, kappa_max, bias, and welfare vs price");
  add_common_options(price_sweep, opt, true);

  CLI::App* kappa_sweep =
      app.add_subcommand("kappa-sweep", "recovered welfare vs number of messages");
  add_common_options(kappa_sweep, opt, true);
  kappa_sweep->add_option("--suboptimal-offset", opt.suboptimal_offset,
                          "offset added to p* for the suboptimal-price curve");

  CLI::App* scaling =
      app.add_subcommand("scaling", "finite-population price vs the asymptotic limit");
  add_common_options(scaling, opt, true);
  scaling->add_option("--curvatures", opt.curvatures_text,
                      "comma-separated cost curvatures (default 0.05,0.3)");

  CLI::App* price = app.add_subcommand("price", "optimal uniform price and cross-checks");
  add_common_options(price, opt, false);

  CLI::App* equilibrium = app.add_subcommand("equilibrium", "partition dump per consumer");
  add_common_options(equilibrium, opt, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (convergence->parsed()) {
      drtalk::run_convergence(make_config(opt, 1e-4));
    } else if (price_sweep->parsed()) {
      drtalk::run_price_sweep(make_config(opt, 1e-10));
    } else if (kappa_sweep->parsed()) {
      drtalk::run_kappa_sweep(make_config(opt, 1e-10));
    } else if (scaling->parsed()) {
      drtalk::run_scaling(make_config(opt, 1e-10));
    } else if (price->parsed()) {
      drtalk::run_price(make_config(opt, 1e-10));
    } else if (equilibrium->parsed()) {
      drtalk::run_equilibrium(make_config(opt, 1e-10));
    }
  } catch (const drtalk::ScenarioParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
