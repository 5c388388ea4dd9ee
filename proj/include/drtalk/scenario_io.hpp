#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "drtalk/population.hpp"

namespace drtalk {

// Scenario files are JSON with units spelled out in the field names:
//
// {
//   "consumers": [
//     {"prior": {"kind": "uniform", "lo_usd_per_kwh": 12.0, "hi_usd_per_kwh": 13.0},
//      "alpha_usd_per_kwh2": 0.35},
//     {"prior": {"kind": "truncated_normal", "mean_usd_per_kwh": 10.5,
//                "sigma_usd_per_kwh": 0.25, "lo_usd_per_kwh": 10.0,
//                "hi_usd_per_kwh": 11.0},
//      "alpha_usd_per_kwh2": 0.30}
//   ],
//   "cost": {"a_usd_per_kwh2": 0.051, "b_usd_per_kwh": 7.89, "c_usd": 0.0},
//   "price_usd_per_kwh": 9.897            // optional
// }

class ScenarioParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& path,
                             const char* field) {
  if (!j.contains(field) || !j[field].is_number()) {
    throw ScenarioParseError("scenario parse error at " + path + "." + field +
                             ": expected a number");
  }
  return j[field].get<double>();
}

inline Prior parse_prior(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) {
    throw ScenarioParseError("scenario parse error at " + path + ": expected an object");
  }
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw ScenarioParseError("scenario parse error at " + path + ".kind: expected a string");
  }
  const std::string kind = j["kind"].get<std::string>();
  try {
    if (kind == "uniform") {
      return Prior::uniform(require_number(j, path, "lo_usd_per_kwh"),
                            require_number(j, path, "hi_usd_per_kwh"));
    }
    if (kind == "truncated_normal") {
      return Prior::truncated_normal(require_number(j, path, "mean_usd_per_kwh"),
                                     require_number(j, path, "sigma_usd_per_kwh"),
                                     require_number(j, path, "lo_usd_per_kwh"),
                                     require_number(j, path, "hi_usd_per_kwh"));
    }
  } catch (const std::invalid_argument& e) {
    throw ScenarioParseError("scenario parse error at " + path + ": " + e.what());
  }
  throw ScenarioParseError("scenario parse error at " + path +
                           ".kind: expected \"uniform\" or \"truncated_normal\"");
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ScenarioParseError("scenario parse error: root must be an object");
  if (!j.contains("consumers") || !j["consumers"].is_array() || j["consumers"].empty()) {
    throw ScenarioParseError(
        "scenario parse error at consumers: expected a non-empty array of consumers");
  }
  if (!j.contains("cost") || !j["cost"].is_object()) {
    throw ScenarioParseError("scenario parse error at cost: expected an object");
  }

  Scenario s;
  const nlohmann::json& consumers = j["consumers"];
  for (std::size_t i = 0; i < consumers.size(); ++i) {
    const std::string path = "consumers[" + std::to_string(i) + "]";
    const nlohmann::json& cj = consumers[i];
    if (!cj.is_object() || !cj.contains("prior")) {
      throw ScenarioParseError("scenario parse error at " + path + ".prior: missing prior");
    }
    const Prior prior = detail::parse_prior(cj["prior"], path + ".prior");
    const double alpha = detail::require_number(cj, path, "alpha_usd_per_kwh2");
    try {
      s.consumers.emplace_back(prior, alpha);
    } catch (const std::invalid_argument& e) {
      throw ScenarioParseError("scenario parse error at " + path + ": " + e.what());
    }
  }

  try {
    s.cost = CostParams(detail::require_number(j["cost"], "cost", "a_usd_per_kwh2"),
                        detail::require_number(j["cost"], "cost", "b_usd_per_kwh"),
                        detail::require_number(j["cost"], "cost", "c_usd"));
    if (j.contains("price_usd_per_kwh")) {
      if (!j["price_usd_per_kwh"].is_number()) {
        throw ScenarioParseError(
            "scenario parse error at price_usd_per_kwh: expected a number");
      }
      s.price = j["price_usd_per_kwh"].get<double>();
    }
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioParseError(std::string("scenario parse error: ") + e.what());
  }
  return s;
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["consumers"] = nlohmann::json::array();
  for (const ConsumerSpec& consumer : s.consumers) {
    nlohmann::json cj;
    if (consumer.prior.kind == PriorKind::Uniform) {
      cj["prior"] = {{"kind", "uniform"},
                     {"lo_usd_per_kwh", consumer.prior.lo},
                     {"hi_usd_per_kwh", consumer.prior.hi}};
    } else {
      cj["prior"] = {{"kind", "truncated_normal"},
                     {"mean_usd_per_kwh", consumer.prior.mu},
                     {"sigma_usd_per_kwh", consumer.prior.sigma},
                     {"lo_usd_per_kwh", consumer.prior.lo},
                     {"hi_usd_per_kwh", consumer.prior.hi}};
    }
    cj["alpha_usd_per_kwh2"] = consumer.alpha;
    j["consumers"].push_back(cj);
  }
  j["cost"] = {{"a_usd_per_kwh2", s.cost.a},
               {"b_usd_per_kwh", s.cost.b},
               {"c_usd", s.cost.c}};
  if (s.price) j["price_usd_per_kwh"] = *s.price;
  return j;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError("scenario parse error: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioParseError("scenario parse error in " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace drtalk
