#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <friedrichs/grid.hpp>

namespace friedrichs::cli {

enum ExitCode : int { ok = 0, config_error = 1, no_convergence = 2, invariant_failure = 3 };

/// Every knob of every subcommand, with its default. The resolved copy is
/// echoed into each artifact.
struct RunConfig {
  std::string command;
  std::string domain = "interval:0,1";
  double p = 3.0;
  double q = 2.0;
  int n = 128;
  int ny = 0;  // 0: same as n
  std::uint64_t seed = 0;
  double tolerance = 1e-11;
  std::string oracle = "none";
  bool mu1 = false;
  std::string ineq = "friedrichs";
  int batch = 1000;
  std::string lspec = "phi-power";
  std::string lspec2 = "phi-power:1";
  int adversarial = 0;
  int t_nodes = 33;
  std::vector<double> gammas{0.5, 0.2, 0.1, 0.05};
  double gamma = 1.0;
  std::string separation = "both";
  std::string forcing;
  int restarts = 3;
  double residual_tolerance = 1e-9;
  std::string out;
};

/// "interval:a,b" or "rect:x0,x1,y0,y1" with the configured resolution.
GridSpec parse_domain(const std::string& text, int n, int ny);

/// Reads a JSON config; parse errors name line and column.
RunConfig load_config(const std::string& path, RunConfig base);
RunConfig config_from_json(const std::string& text, const std::string& origin, RunConfig base);
std::string config_to_json(const RunConfig& c);

/// Full command line (without argv[0]); returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace friedrichs::cli
