// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <limits>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <friedrichs/random.hpp>
#include <friedrichs/resonant.hpp>
#include <friedrichs/serialize.hpp>
#include <friedrichs/verify.hpp>

using namespace friedrichs;

namespace {

// Tolerances, fixed here and nowhere else.
constexpr double kLinearEigTol = 5e-3;
constexpr double kLinearEigSeconds = 10.0;
constexpr double kShootingTol = 1e-2;
constexpr double kShootingSeconds = 60.0;
constexpr double kMu1Tol = 2e-2;
constexpr double kAlignment = 0.999;
constexpr double kDeficitFloor = 1e-10;
constexpr double kPhiLineDeficit = 1e-8;
constexpr double kDrift = 0.25;
constexpr double kSeparationTolFactor = 10.0;
constexpr double kTaylorTol = 1e-6;
// Per-sample floor: the linear term the eigen-residual leaves in J plus
// round-off of the cancelling integrals, both relative to |J|.
constexpr double kTaylorRoundoffUlps = 100.0;
constexpr double kTaylorFloorFactor = 2.0;
constexpr double kGradientTol = 1e-5;
constexpr double kFdStep = 1e-5;
constexpr double kHiddenSlack = 1e-9;
constexpr double kResidualTol = 1e-6;
constexpr double kInvarianceTol = 1e-10;
constexpr double kRescale = 7.3;

constexpr int kBatch = 1000;
constexpr std::uint64_t kSeed = 20240607;

struct Outcome {
  bool pass;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

GridPtr interval(int n) { return build_grid(GridSpec::interval(0.0, 1.0, n)); }
GridPtr square(int n) { return build_grid(GridSpec::rectangle(0.0, 1.0, 0.0, 1.0, n, n)); }

GridFunction random_nodal(const GridPtr& g, std::uint64_t seed) {
  Rng rng(seed, 11);
  Vector v(g->num_nodes());
  for (int i = 0; i < g->num_nodes(); ++i) v[i] = rng.uniform(-1.0, 1.0);
  return GridFunction(g, std::move(v));
}

/// Smooth positive density with seeded Fourier coefficients, so the same
/// functional is sampled on every resolution.
GridFunction smooth_density(const GridPtr& g, std::uint64_t seed) {
  Rng rng(seed, 13);
  double a[6];
  for (double& c : a) c = rng.uniform(-0.1, 0.1);
  return interpolate(g, [&](double x, double) {
    double s = 1.0;
    for (int k = 0; k < 6; ++k) s += a[k] * std::sin((k + 1) * std::numbers::pi * x);
    return s;
  });
}

Outcome linear_eigenvalue() {
  const auto t0 = std::chrono::steady_clock::now();
  const EigenPair pair = solve_eigenpair(interval(256), Exponents(2.0, 2.0));
  const double secs = seconds_since(t0);
  const double err = rel(pair.lambda1, std::numbers::pi * std::numbers::pi);
  return {err <= kLinearEigTol && secs < kLinearEigSeconds,
          fmt("lambda1=%.8f rel.err=%.2e (tol %.1e) time=%.2fs (limit %.0fs)", pair.lambda1, err, kLinearEigTol, secs,
              kLinearEigSeconds)};
}

Outcome shooting_cross_validation() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string d;
  for (auto [p, q] : {std::pair{3.0, 2.0}, std::pair{3.0, 3.0}, std::pair{4.0, 2.0}}) {
    const Exponents e(p, q);
    const double var = solve_eigenpair(interval(256), e).lambda1;
    const double ode = shooting_oracle_1d(0.0, 1.0, e).lambda1;
    const double err = rel(var, ode);
    ok = ok && err <= kShootingTol;
    d += fmt("(%g,%g) %.6f vs %.6f rel %.1e; ", p, q, var, ode, err);
  }
  const double secs = seconds_since(t0);
  return {ok && secs < kShootingSeconds, d + fmt("tol %.0e, time=%.2fs (limit %.0fs)", kShootingTol, secs, kShootingSeconds)};
}

Outcome mu1_equals_lambda1() {
  bool ok = true;
  std::string d;
  const Exponents e(3.0, 2.0);
  for (const GridPtr& g : {interval(128), square(24)}) {
    const EigenPair pair = solve_eigenpair(g, e);
    const Mu1Result m = solve_mu1(pair, e);
    const double err = rel(m.mu1, pair.lambda1);
    ok = ok && err <= kMu1Tol && m.alignment >= kAlignment;
    d += fmt("%dD mu1=%.6f lambda1=%.6f rel %.1e |cos|=%.6f; ", g->dim(), m.mu1, pair.lambda1, err, m.alignment);
  }
  return {ok, d + fmt("tol %.0e, |cos| >= %.3f", kMu1Tol, kAlignment)};
}

Outcome friedrichs_nonnegativity() {
  bool ok = true;
  double worst = std::numeric_limits<double>::infinity(), worst_line = 0.0;
  for (auto [p, q] : {std::pair{3.0, 2.0}, std::pair{3.0, 3.0}}) {
    const Exponents e(p, q);
    for (const GridPtr& g : {interval(128), square(16)}) {
      const EigenPair pair = solve_eigenpair(g, e);
      const DeficitReport r = check_friedrichs(make_batch(pair, kBatch, kSeed), pair, e);
      for (const auto& s : r.samples) {
        worst = std::min(worst, s.lhs / s.scale);
        ok = ok && s.lhs >= -kDeficitFloor * s.scale;
      }
      Batch line;
      for (double c : {1.0, -1.0, 2.5, -0.3}) line.push_back({pair.phi1 * c, 0, "phi-line"});
      for (const auto& s : check_friedrichs(line, pair, e).samples) {
        worst_line = std::max(worst_line, std::abs(s.lhs) / s.scale);
        ok = ok && std::abs(s.lhs) <= kPhiLineDeficit * s.scale;
      }
    }
  }
  return {ok, fmt("min deficit/scale=%.3e (floor -%.0e); max |deficit|/scale on R phi1=%.3e (tol %.0e)", worst,
                  kDeficitFloor, worst_line, kPhiLineDeficit)};
}

Outcome improved_constant() {
  const Exponents e(3.0, 2.0);
  bool ok = true;
  std::string d;
  for (int variant = 0; variant < 3; ++variant) {
    double c[2];
    int k = 0;
    for (int n : {128, 256}) {
      const EigenPair pair = solve_eigenpair(interval(n), e);
      ImprovedOptions o;
      o.adversarial_steps = 50;
      o.id = variant == 0 ? "improved-1.9" : "generalized-1.14";
      const LinearFunctionalSpec l = variant == 0   ? LinearFunctionalSpec::phi_power(e.q - 1.0)
                                     : variant == 1 ? LinearFunctionalSpec::phi_power(1.0)
                                                    : LinearFunctionalSpec::from_density(smooth_density(pair.grid_ptr(), 5));
      c[k++] = check_improved(make_batch(pair, kBatch, kSeed), pair, e, l, o).constant();
    }
    const double drift = std::abs(c[1] - c[0]) / c[0];
    ok = ok && c[0] > 0.0 && c[1] > 0.0 && drift < kDrift;
    static const char* names[] = {"phi-power(q-1)", "phi-power(1)", "density"};
    d += fmt("%s C=%.4f/%.4f drift %.1f%%; ", names[variant], c[0], c[1], 100 * drift);
  }
  return {ok, d + fmt("drift limit %.0f%%", 100 * kDrift)};
}

Outcome ml_equivalence() {
  const Exponents e(3.0, 3.0);
  const auto l1 = LinearFunctionalSpec::phi_power(2.0);
  const auto l2 = LinearFunctionalSpec::phi_power(1.0);
  double lo[2], hi[2];
  bool ok = true;
  int k = 0;
  for (int n : {128, 256}) {
    const EigenPair pair = solve_eigenpair(interval(n), e);
    const DeficitReport r = check_Ml_equivalence(l1, l2, make_batch(pair, kBatch, kSeed), pair, e);
    const int used = static_cast<int>(r.samples.size()) - r.excluded;
    ok = ok && used == kBatch && r.min_ratio > 0.0 && std::isfinite(r.max_ratio);
    lo[k] = r.min_ratio;
    hi[k++] = r.max_ratio;
  }
  const double dlo = std::abs(lo[1] - lo[0]) / lo[0], dhi = std::abs(hi[1] - hi[0]) / hi[0];
  ok = ok && dlo < kDrift && dhi < kDrift;
  return {ok, fmt("(p,q)=(3,3) [%.4f, %.4f] -> [%.4f, %.4f], drift %.1f%%/%.1f%% (limit %.0f%%)", lo[0], hi[0], lo[1],
                  hi[1], 100 * dlo, 100 * dhi, 100 * kDrift)};
}

Outcome separation_constants() {
  const Exponents e(3.0, 2.0);
  const EigenPair pair = solve_eigenpair(interval(128), e);
  const SeparationConfig cfg;
  const SeparationResult lg = estimate_Lambda_gamma(1.0, pair, e, cfg);
  const std::vector<double> gammas{0.5, 0.2, 0.1, 0.05};
  const auto sweep = sweep_Lambda_tilde(gammas, pair, e, cfg);
  bool gap = false, monotone = true;
  std::string d = fmt("Lambda_1=%.4f gap %.3e (need > %.0e); Lambda~:", lg.value, lg.gap, kSeparationTolFactor * cfg.tolerance);
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    gap = gap || sweep[i].gap > 0.0;
    if (i > 0) monotone = monotone && sweep[i].value >= sweep[i - 1].value;  // gammas descend
    d += fmt(" %.2f->%.3f", sweep[i].gamma, sweep[i].value);
  }
  return {lg.gap > kSeparationTolFactor * cfg.tolerance && gap && monotone,
          d + fmt("; positive gap %s, nonincreasing in gamma %s", gap ? "yes" : "no", monotone ? "yes" : "no")};
}

Outcome taylor_identity() {
  bool ok = true;
  double worst = 0.0;
  double worst_floor = 0.0;
  int decreased = 0, floored = 0;
  const SPathQuadrature s16(16), s32(32);
  for (auto [p, q] : {std::pair{3.0, 2.0}, std::pair{3.0, 3.0}}) {
    const Exponents e(p, q);
    const EigenPair pair = solve_eigenpair(interval(128), e);
    Rng rng(kSeed, 3);
    for (int k = 0; k < 50; ++k) {
      GridFunction v = random_nodal(pair.grid_ptr(), derive_seed(kSeed, k));
      v = v * (rng.uniform(0.01, 0.5) / std::pow(norm_grad_p(v, p), 1.0 / p));
      const double j = deficit_J(pair.phi1 + v, pair, e);
      auto err = [&](const SPathQuadrature& sq) {
        return std::abs(j - (P1_family(1.0, v, pair, e, sq) - pair.lambda1 * P0_family(1.0, v, pair, e, sq))) / std::abs(j);
      };
      const double e16 = err(s16), e32 = err(s32);
      const double floor = kTaylorFloorFactor *
                           (std::abs(dJ(pair.phi1, v, pair, e)) +
                            kTaylorRoundoffUlps * std::numeric_limits<double>::epsilon() * norm_grad_p(pair.phi1 + v, p)) /
                           std::abs(j);
      worst = std::max(worst, e16);
      worst_floor = std::max(worst_floor, floor);
      ok = ok && e16 <= kTaylorTol && e32 <= kTaylorTol;
      if (e32 < e16) {
        ++decreased;
      } else if (e16 <= floor) {
        ++floored;
      } else {
        ok = false;
      }
    }
  }
  return {ok, fmt("max rel.err (16 nodes)=%.2e (tol %.0e); 16->32 decreased %d, at floor %d of 100 (largest floor %.1e)",
                  worst, kTaylorTol, decreased, floored, worst_floor)};
}

Outcome gradient_checks() {
  const Exponents e(3.0, 2.0);
  const EigenPair pair = solve_eigenpair(interval(64), e);
  GridFunction f = random_nodal(pair.grid_ptr(), 77);
  f = project_forcing(f, pair);
  double worst_j = 0.0, worst_e = 0.0;
  for (int k = 0; k < 50; ++k) {
    const GridFunction u = random_nodal(pair.grid_ptr(), derive_seed(kSeed, 1000 + k));
    const GridFunction v = random_nodal(pair.grid_ptr(), derive_seed(kSeed, 2000 + k));
    const double h = kFdStep;
    const double fdj = (deficit_J(u + v * h, pair, e) - deficit_J(u - v * h, pair, e)) / (2 * h);
    const double fde = (energy_E(u + v * h, pair, e, f) - energy_E(u - v * h, pair, e, f)) / (2 * h);
    worst_j = std::max(worst_j, rel(dJ(u, v, pair, e), fdj));
    worst_e = std::max(worst_e, rel(grad_E(u, pair, e, f).dot(v.values()), fde));
  }
  return {worst_j <= kGradientTol && worst_e <= kGradientTol,
          fmt("max rel. diff dJ=%.2e grad_E=%.2e over 50 pairs (tol %.0e)", worst_j, worst_e, kGradientTol)};
}

Outcome hidden_convexity() {
  const Exponents e(3.0, 3.0);
  const EigenPair pair = solve_eigenpair(interval(128), e);
  const Batch b = make_batch(pair, 200, kSeed);
  const DeficitReport r17 = check_hidden_convexity("hidden-1.17", b, pair, e);
  const DeficitReport r18 = check_hidden_convexity("hidden-1.18", b, pair, e);
  const DeficitReport sig = check_hidden_convexity("hidden-sigma-path", b, pair, e);
  const double c = r17.constant();
  double worst = std::numeric_limits<double>::infinity();
  bool computable = true;
  for (const auto& s : r18.samples) {
    computable = computable && std::isfinite(s.rhs);
    worst = std::min(worst, (s.lhs - c * s.rhs) / s.scale);
  }
  bool sigma = sig.min_ratio > 0.0;
  for (const auto& s : sig.samples) sigma = sigma && (s.excluded || s.ratio >= sig.min_ratio);
  return {c > 0.0 && computable && worst >= -kHiddenSlack && sigma,
          fmt("C(1.17)=%.4f; min (lhs - C rhs(1.18))/scale=%.2e (slack %.0e); sigma-path C=%.4f", c, worst, kHiddenSlack,
              sig.min_ratio)};
}

Outcome resonant_solver() {
  const Exponents e(3.0, 2.0);
  const EigenPair pair = solve_eigenpair(interval(128), e);
  const ResonantProblem prob(e, pair, random_nodal(pair.grid_ptr(), 4242));
  const ResonantSolution a = solve_resonant(prob);
  const ResonantSolution b = solve_resonant(prob);
  bool monotone = true;
  for (std::size_t i = 1; i < a.energy_history.size(); ++i) monotone = monotone && a.energy_history[i] <= a.energy_history[i - 1];
  const double res = weak_residual_dual(a.u, prob);
  const bool same = to_json(a, prob) == to_json(b, prob);
  return {res <= kResidualTol && a.energy < 0.0 && monotone && same,
          fmt("residual=%.2e (tol %.0e) E=%.6e monotone %s rerun identical %s", res, kResidualTol, a.energy,
              monotone ? "yes" : "no", same ? "yes" : "no")};
}

Outcome normalization_invariance() {
  const Exponents e(3.0, 3.0);
  const EigenPair pair = solve_eigenpair(interval(128), e);
  const EigenPair big = pair.rescaled(kRescale);
  const Batch b = make_batch(pair, 200, kSeed);
  const auto density = LinearFunctionalSpec::from_density(smooth_density(pair.grid_ptr(), 5));
  std::vector<std::pair<std::string, std::function<double(const EigenPair&)>>> constants = {
      {"friedrichs", [&](const EigenPair& p) { return check_friedrichs(b, p, e).constant(); }},
      {"improved-1.9", [&](const EigenPair& p) { return check_improved(b, p, e, LinearFunctionalSpec::phi_power(2.0)).constant(); }},
      {"generalized-1.14", [&](const EigenPair& p) { return check_improved(b, p, e, LinearFunctionalSpec::phi_power(1.0)).constant(); }},
      {"generalized-1.14/density", [&](const EigenPair& p) { return check_improved(b, p, e, density).constant(); }},
      {"Ml-equivalence/min", [&](const EigenPair& p) {
         return check_Ml_equivalence(LinearFunctionalSpec::phi_power(2.0), LinearFunctionalSpec::phi_power(1.0), b, p, e).min_ratio;
       }},
      {"Ml-equivalence/max", [&](const EigenPair& p) {
         return check_Ml_equivalence(LinearFunctionalSpec::phi_power(2.0), LinearFunctionalSpec::phi_power(1.0), b, p, e).max_ratio;
       }},
  };
  for (const char* id : {"hidden-1.15", "hidden-1.17", "hidden-1.18", "hidden-sigma-path"}) {
    constants.push_back({id, [&, id](const EigenPair& p) { return check_hidden_convexity(id, b, p, e).constant(); }});
  }
  double worst = 0.0;
  std::string worst_id;
  for (const auto& [id, f] : constants) {
    const double d = rel(f(big), f(pair));
    if (d >= worst) worst = d, worst_id = id;
  }
  return {worst < kInvarianceTol,
          fmt("%zu constants, max rel. change %.2e at %s (tol %.0e)", constants.size(), worst, worst_id.c_str(), kInvarianceTol)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"linear eigenvalue vs pi^2", linear_eigenvalue},
      {"nonlinear eigenvalue vs shooting", shooting_cross_validation},
      {"mu1 = lambda1 and alignment", mu1_equals_lambda1},
      {"Friedrichs nonnegativity", friedrichs_nonnegativity},
      {"improved inequality constant", improved_constant},
      {"M_l equivalence interval", ml_equivalence},
      {"separation constants", separation_constants},
      {"Taylor identity", taylor_identity},
      {"gradient checks", gradient_checks},
      {"hidden convexity suite", hidden_convexity},
      {"resonant solver", resonant_solver},
      {"normalization invariance", normalization_invariance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
