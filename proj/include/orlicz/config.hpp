#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "orlicz/grid.hpp"
#include "orlicz/nfunction.hpp"
#include "orlicz/pde.hpp"

namespace orlicz {

using Json = nlohmann::ordered_json;

/// Malformed configuration input.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Registry: build an N-function from a JSON descriptor like
///   {"kind":"power","alpha":2.0}            coef t^alpha, coef default 1/alpha
///   {"kind":"exp_minus"}                    e^t - t - 1
///   {"kind":"exp_power","p":2.0}            e^{t^p} - 1
///   {"kind":"llog"}                         (1+t)log(1+t) - t
///   {"kind":"power_log","alpha":2.0}        t^alpha (ln t + 1)
///   {"kind":"tabulated","nodes":[[t,g],..]} monotone density sample
inline NFunction nfunction_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("nfunction: expected an object with a string 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  auto num = [&](const char* key, std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
      if (fallback) return *fallback;
      throw ConfigError("nfunction '" + kind + "': missing parameter '" + key + "'");
    }
    if (!j.at(key).is_number()) {
      throw ConfigError("nfunction '" + kind + "': parameter '" + std::string(key) +
                        "' must be a number");
    }
    return j.at(key).get<double>();
  };
  try {
    if (kind == "power") return NFunction::power(num("alpha"), num("coef", 0.0));
    if (kind == "exp_minus") return NFunction::exp_minus();
    if (kind == "exp_power") return NFunction::exp_power(num("p", 2.0));
    if (kind == "llog") return NFunction::log_entropy();
    if (kind == "power_log") return NFunction::power_log(num("alpha"));
    if (kind == "tabulated") {
      if (!j.contains("nodes") || !j.at("nodes").is_array()) {
        throw ConfigError("nfunction 'tabulated': missing 'nodes' array");
      }
      std::vector<std::pair<double, double>> nodes;
      for (const auto& row : j.at("nodes")) {
        if (!row.is_array() || row.size() != 2) {
          throw ConfigError("nfunction 'tabulated': nodes must be [t, g] pairs");
        }
        nodes.emplace_back(row[0].get<double>(), row[1].get<double>());
      }
      return NFunction::tabulated(std::move(nodes));
    }
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("nfunction: ") + e.what());
  }
  throw ConfigError("nfunction: unknown kind '" + kind + "'");
}

/// Shorthand "kind" or "kind:param" (e.g. "power:2", "exp_power:2",
/// "exp_minus", "llog", "power_log:2").
inline NFunction nfunction_from_shorthand(const std::string& s) {
  Json j;
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  j["kind"] = kind;
  if (colon != std::string::npos) {
    const std::string param = s.substr(colon + 1);
    double v = 0.0;
    try {
      v = std::stod(param);
    } catch (...) {
      throw ConfigError("nfunction shorthand: bad parameter '" + param + "'");
    }
    if (kind == "exp_power") {
      j["p"] = v;
    } else {
      j["alpha"] = v;
    }
  }
  return nfunction_from_json(j);
}

inline Grid grid_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dim")) throw ConfigError("grid: missing 'dim'");
  const int dim = j.at("dim").get<int>();
  const auto& bounds = j.at("bounds");
  const auto& nodes = j.at("nodes");
  if (dim == 1) {
    return Grid::interval(bounds[0][0].get<double>(), bounds[0][1].get<double>(),
                          nodes[0].get<int>());
  }
  if (dim == 2) {
    return Grid::rectangle(bounds[0][0].get<double>(), bounds[0][1].get<double>(),
                           nodes[0].get<int>(), bounds[1][0].get<double>(),
                           bounds[1][1].get<double>(), nodes[1].get<int>());
  }
  throw ConfigError("grid: dim must be 1 or 2");
}

inline Json grid_to_json(const Grid& g) {
  Json j;
  j["dim"] = g.dim();
  Json bounds = Json::array();
  Json nodes = Json::array();
  for (int a = 0; a < g.dim(); ++a) {
    bounds.push_back({g.lower(a), g.upper(a)});
    nodes.push_back(g.nodes_per_axis(a));
  }
  j["bounds"] = bounds;
  j["nodes"] = nodes;
  return j;
}

inline Json gridfunction_to_json(const GridFunction& u) {
  Json j;
  j["schema"] = 1;
  j["grid"] = grid_to_json(u.grid());
  j["values"] = u.values();  // row-major in 2D
  return j;
}

inline GridFunction gridfunction_from_json(const Json& j) {
  Grid g = grid_from_json(j.at("grid"));
  std::vector<double> vals = j.at("values").get<std::vector<double>>();
  return GridFunction(g, std::move(vals));
}

/// Full problem description; see README for the schema.
inline ProblemSpec problem_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("problem: expected an object");
  if (j.value("schema", 1) != 1) throw ConfigError("problem: unsupported schema version");
  if (!j.contains("phi") || !j.contains("grid")) {
    throw ConfigError("problem: need 'phi' and 'grid'");
  }
  ProblemSpec spec{nfunction_from_json(j.at("phi")),
                   j.value("p", 1.5),
                   j.value("q", 1.2),
                   std::nullopt,
                   grid_from_json(j.at("grid"))};
  if (j.contains("lambda") && !j.at("lambda").is_null()) {
    spec.lambda = j.at("lambda").get<double>();
  }
  spec.eps_a = j.value("eps_a", 1e-8);
  spec.seed = j.value("seed", static_cast<std::uint64_t>(12345));
  spec.separation_tol = j.value("separation_tol", 1e-2);
  if (j.contains("descent")) {
    const auto& d = j.at("descent");
    spec.descent.tol_res = d.value("tol_res", spec.descent.tol_res);
    spec.descent.max_iter = d.value("max_iter", spec.descent.max_iter);
    spec.descent.armijo_c1 = d.value("armijo_c1", spec.descent.armijo_c1);
    spec.descent.backtrack = d.value("backtrack", spec.descent.backtrack);
  }
  if (j.contains("mountain_pass")) {
    const auto& m = j.at("mountain_pass");
    spec.mp.path_nodes = m.value("path_nodes", spec.mp.path_nodes);
    spec.mp.reequidistribute_every =
        m.value("reequidistribute_every", spec.mp.reequidistribute_every);
    spec.mp.max_sweeps = m.value("max_sweeps", spec.mp.max_sweeps);
    spec.mp.sweep_tol = m.value("sweep_tol", spec.mp.sweep_tol);
    spec.mp.polish_max_iter = m.value("polish_max_iter", spec.mp.polish_max_iter);
    spec.mp.max_retries = m.value("max_retries", spec.mp.max_retries);
  }
  return spec;
}

inline Json hypotheses_to_json(const HypothesisReport& h) {
  Json j;
  j["phi0"] = h.phi0;
  j["phi_sup"] = h.phi_sup;
  j["sobolev_limit"] = h.sobolev_limit;
  j["ordering_ok"] = h.ordering_ok;
  j["embedding_ok"] = h.embedding_ok;
  j["sqrt_convex"] = h.sqrt_convex;
  return j;
}

inline Json solve_report_to_json(const SolveReport& rep) {
  Json j;
  j["schema"] = 1;
  j["success"] = rep.success;
  j["message"] = rep.message;
  j["lambda"] = rep.lambda;
  j["lambda_star_estimate"] = rep.lambda_star_estimate;
  Json l1;
  l1["value"] = rep.lambda_1.value;
  l1["best_sample"] = rep.lambda_1.best_sample;
  l1["samples_above_unit_norm"] = rep.lambda_1.samples_above_unit_norm;
  l1["final_above_unit_norm"] = rep.lambda_1.final_above_unit_norm;
  j["lambda_1_estimate"] = l1;
  j["hypotheses"] = hypotheses_to_json(rep.hypotheses);
  Json u1;
  u1["energy"] = rep.energy_u1;
  u1["residual"] = rep.residual_u1;
  u1["iterations"] = rep.minimize_iterations;
  u1["min_value"] = rep.min_u1;
  u1["values"] = rep.u1.values();
  j["u1"] = u1;
  Json u2;
  u2["energy"] = rep.energy_u2;
  u2["residual"] = rep.residual_u2;
  u2["sweeps"] = rep.sweeps;
  u2["polish_iterations"] = rep.polish_iterations;
  u2["retries"] = rep.retries;
  u2["min_value"] = rep.min_u2;
  u2["values"] = rep.u2.values();
  j["u2"] = u2;
  j["mountain_pass_level"] = rep.level;
  j["truncated_vs_full_energy_gap"] = rep.truncated_vs_full_energy_gap;
  j["separation_inf_norm"] = rep.separation_inf;
  j["ordering_max_violation"] = rep.ordering_max_violation;
  j["weak_residual_max"] = rep.weak_residual_max;
  j["grid"] = grid_to_json(rep.u1.grid());
  return j;
}

}  // namespace orlicz
