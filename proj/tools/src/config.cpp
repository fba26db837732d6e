#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "friedrichs/error.hpp"
#include "friedrichs_cli/cli.hpp"

namespace friedrichs::cli {

using nlohmann::json;

namespace {

std::vector<double> parse_numbers(const std::string& list, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw Error(ErrorCode::parse_error, what + ": '" + item + "' is not a number");
    }
    out.push_back(x);
  }
  return out;
}

// 1-based line and column of a byte offset.
std::pair<int, int> locate(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

template <class T>
void take(const json& j, const char* key, T& field, const std::string& origin) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    field = it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::parse_error, origin + ": key '" + key + "' has the wrong type");
  }
}

}  // namespace

GridSpec parse_domain(const std::string& text, int n, int ny) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::parse_error, "domain '" + text + "': expected interval:a,b or rect:x0,x1,y0,y1");
  }
  const std::string kind = text.substr(0, colon);
  const auto vals = parse_numbers(text.substr(colon + 1), "domain");
  if (kind == "interval" && vals.size() == 2) return GridSpec::interval(vals[0], vals[1], n);
  if (kind == "rect" && vals.size() == 4) {
    return GridSpec::rectangle(vals[0], vals[1], vals[2], vals[3], n, ny > 0 ? ny : n);
  }
  throw Error(ErrorCode::parse_error, "domain '" + text + "': expected interval:a,b or rect:x0,x1,y0,y1");
}

RunConfig config_from_json(const std::string& text, const std::string& origin, RunConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = locate(text, e.byte);
    std::string what = e.what();
    // drop nlohmann's "[json.exception.parse_error.101] " prefix
    if (const auto pos = what.find("] "); pos != std::string::npos) what = what.substr(pos + 2);
    if (const auto pos = what.find("column "); pos != std::string::npos) {
      if (const auto colon = what.find(": ", pos); colon != std::string::npos) what = what.substr(colon + 2);
    }
    throw Error(ErrorCode::parse_error, origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
  if (!j.is_object()) throw Error(ErrorCode::parse_error, origin + ": top level must be an object");

  static const std::vector<std::string> known = {
      "command", "domain", "p", "q", "n", "ny", "seed", "tolerance", "oracle", "mu1", "ineq", "batch",
      "lspec", "lspec2", "adversarial", "t_nodes", "gammas", "gamma", "separation", "forcing", "restarts",
      "residual_tolerance", "out"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorCode::parse_error, origin + ": unknown key '" + key + "'");
    }
  }
  take(j, "command", c.command, origin);
  take(j, "domain", c.domain, origin);
  take(j, "p", c.p, origin);
  take(j, "q", c.q, origin);
  take(j, "n", c.n, origin);
  take(j, "ny", c.ny, origin);
  take(j, "seed", c.seed, origin);
  take(j, "tolerance", c.tolerance, origin);
  take(j, "oracle", c.oracle, origin);
  take(j, "mu1", c.mu1, origin);
  take(j, "ineq", c.ineq, origin);
  take(j, "batch", c.batch, origin);
  take(j, "lspec", c.lspec, origin);
  take(j, "lspec2", c.lspec2, origin);
  take(j, "adversarial", c.adversarial, origin);
  take(j, "t_nodes", c.t_nodes, origin);
  take(j, "gammas", c.gammas, origin);
  take(j, "gamma", c.gamma, origin);
  take(j, "separation", c.separation, origin);
  take(j, "forcing", c.forcing, origin);
  take(j, "restarts", c.restarts, origin);
  take(j, "residual_tolerance", c.residual_tolerance, origin);
  take(j, "out", c.out, origin);
  return c;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::parse_error, path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), path, std::move(base));
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["domain"] = c.domain;
  j["p"] = c.p;
  j["q"] = c.q;
  j["n"] = c.n;
  j["ny"] = c.ny;
  j["seed"] = c.seed;
  j["tolerance"] = c.tolerance;
  j["oracle"] = c.oracle;
  j["mu1"] = c.mu1;
  j["ineq"] = c.ineq;
  j["batch"] = c.batch;
  j["lspec"] = c.lspec;
  j["lspec2"] = c.lspec2;
  j["adversarial"] = c.adversarial;
  j["t_nodes"] = c.t_nodes;
  j["gammas"] = c.gammas;
  j["gamma"] = c.gamma;
  j["separation"] = c.separation;
  j["forcing"] = c.forcing;
  j["restarts"] = c.restarts;
  j["residual_tolerance"] = c.residual_tolerance;
  j["out"] = c.out;
  return j.dump();
}

}  // namespace friedrichs::cli
