#include "friedrichs/serialize.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "friedrichs/error.hpp"

namespace friedrichs {

using nlohmann::json;

namespace {

json number(double x) {
  if (std::isfinite(x)) return x;
  return x != x ? "nan" : (x > 0 ? "inf" : "-inf");
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

json grid_json(const GridSpec& s) {
  json j;
  j["dim"] = s.dim;
  if (s.dim == 1) {
    j["cells"] = {s.cells[0]};
    j["domain"] = {s.corners[0], s.corners[1]};
  } else {
    j["cells"] = {s.cells[0], s.cells[1]};
    j["domain"] = {s.corners[0], s.corners[1], s.corners[2], s.corners[3]};
  }
  return j;
}

GridSpec grid_from(const json& j) {
  const int dim = j.at("dim").get<int>();
  const auto cells = j.at("cells").get<std::vector<int>>();
  const auto dom = j.at("domain").get<std::vector<double>>();
  if (dim == 1 && cells.size() == 1 && dom.size() == 2) return GridSpec::interval(dom[0], dom[1], cells[0]);
  if (dim == 2 && cells.size() == 2 && dom.size() == 4) {
    return GridSpec::rectangle(dom[0], dom[1], dom[2], dom[3], cells[0], cells[1]);
  }
  throw Error(ErrorCode::parse_error, "grid description has inconsistent dim/cells/domain");
}

json grid_function_json(const GridFunction& u) {
  json j = grid_json(u.grid().spec());
  j["values"] = vector_json(u.values());
  return j;
}

GridFunction grid_function_from(const json& j) {
  GridPtr grid = build_grid(grid_from(j));
  const auto vals = j.at("values").get<std::vector<double>>();
  if (static_cast<int>(vals.size()) != grid->num_nodes()) {
    throw Error(ErrorCode::length_mismatch, "values length does not match the grid");
  }
  return GridFunction(grid, Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size())));
}

json diagnostics_json(const SolverDiagnostics& d) {
  json j;
  j["iterations"] = d.iterations;
  j["newton_iterations"] = d.newton_iterations;
  j["final_residual"] = number(d.final_residual);
  json h = json::array();
  for (double r : d.residual_history) h.push_back(number(r));
  j["residual_history"] = h;
  j["converged"] = d.converged;
  j["wall_seconds"] = d.wall_seconds;
  j["weight_floor_activations"] = d.weight_floor_activations;
  return j;
}

std::string dump(const json& j, int indent) { return j.dump(indent) + (indent >= 0 ? "\n" : ""); }

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, std::string("byte ") + std::to_string(e.byte) + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_json(const GridFunction& u, int indent) { return dump(grid_function_json(u), indent); }

GridFunction grid_function_from_json(const std::string& text) {
  const json j = parse(text);
  try {
    return grid_function_from(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
}

std::string to_json(const SolverDiagnostics& d, int indent) { return dump(diagnostics_json(d), indent); }

std::string to_json(const EigenPair& pair, const Exponents& exps, int indent) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["lambda1"] = pair.lambda1;
  j["p"] = exps.p;
  j["q"] = exps.q;
  j["norm_q"] = pair.norm_q;
  j["diagnostics"] = diagnostics_json(pair.diagnostics);
  j["phi1"] = grid_function_json(pair.phi1);
  return dump(j, indent);
}

EigenPair eigen_pair_from_json(const std::string& text) {
  const json j = parse(text);
  try {
    SolverDiagnostics d;
    const json& jd = j.at("diagnostics");
    d.iterations = jd.at("iterations").get<int>();
    d.newton_iterations = jd.value("newton_iterations", 0);
    d.final_residual = jd.at("final_residual").get<double>();
    d.converged = jd.at("converged").get<bool>();
    d.wall_seconds = jd.value("wall_seconds", 0.0);
    d.weight_floor_activations = jd.value("weight_floor_activations", 0);
    for (const auto& r : jd.at("residual_history")) d.residual_history.push_back(r.get<double>());
    return EigenPair{j.at("lambda1").get<double>(), grid_function_from(j.at("phi1")), j.at("norm_q").get<double>(), d};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
}

std::string to_json(const DeficitReport& r, int indent) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["inequality"] = r.inequality;
  j["grid"] = grid_json(r.grid);
  j["p"] = r.p;
  j["q"] = r.q;
  j["lambda1"] = r.lambda1;
  j["lspec"] = r.lspec;
  j["seed"] = r.seed;
  j["adversarial_steps"] = r.adversarial_steps;
  j["sample_count"] = r.samples.size();
  j["excluded"] = r.excluded;
  j["min_ratio"] = number(r.min_ratio);
  j["median_ratio"] = number(r.median_ratio);
  j["max_ratio"] = number(r.max_ratio);
  j["min_scaled_lhs"] = number(r.min_scaled_lhs);
  j["modeling_note"] = "polygonal test domain; boundary smoothness not represented";
  json rows = json::array();
  for (const DeficitSample& s : r.samples) {
    rows.push_back({{"index", s.index},
                    {"seed", s.seed},
                    {"style", s.style},
                    {"cone", s.cone},
                    {"lhs", number(s.lhs)},
                    {"rhs", number(s.rhs)},
                    {"ratio", number(s.ratio)},
                    {"scale", number(s.scale)},
                    {"t", s.t},
                    {"excluded", s.excluded}});
  }
  j["samples"] = rows;
  return dump(j, indent);
}

std::string to_csv(const DeficitReport& r) {
  std::string out = "schema_version,index,seed,style,cone,lhs,rhs,ratio,excluded,t\n";
  for (const DeficitSample& s : r.samples) {
    out += std::to_string(kReportSchemaVersion) + ',' + std::to_string(s.index) + ',' + std::to_string(s.seed) + ',' +
           s.style + ',' + s.cone + ',' + format_double(s.lhs) + ',' + format_double(s.rhs) + ',' +
           format_double(s.ratio) + ',' + (s.excluded ? "1" : "0") + ',' + format_double(s.t) + '\n';
  }
  return out;
}

std::string to_json(const ResonantSolution& s, const ResonantProblem& problem, int indent) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["p"] = problem.exps().p;
  j["q"] = problem.exps().q;
  j["lambda1"] = problem.pair().lambda1;
  j["energy"] = s.energy;
  j["residual"] = s.residual;
  j["converged"] = s.converged;
  j["best_restart"] = s.best_restart;
  json h = json::array();
  for (double e : s.energy_history) h.push_back(e);
  j["energy_history"] = h;
  json rs = json::array();
  for (const RestartSummary& r : s.restarts) {
    rs.push_back({{"seed", r.seed}, {"energy", r.energy}, {"residual", r.residual}, {"iterations", r.iterations}});
  }
  j["restarts"] = rs;
  j["forcing"] = grid_function_json(problem.forcing());
  j["u"] = grid_function_json(s.u);
  return dump(j, indent);
}

}  // namespace friedrichs
