#include "friedrichs/verify.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>

#include "friedrichs/parallel.hpp"
#include "friedrichs/random.hpp"
#include "kernels.hpp"
#include "optimize.hpp"

namespace friedrichs {

namespace {

constexpr SampleStyle kStyles[] = {SampleStyle::random_nodal, SampleStyle::smooth_mode, SampleStyle::bump};

GridFunction draw(const EigenPair& pair, std::uint64_t seed, int i, std::string& style) {
  const GridPtr& grid = pair.grid_ptr();
  if (i % 4 != 3) {
    const SampleStyle s = kStyles[i % 4];
    style = to_string(s);
    return sample_test_function(grid, seed, s);
  }
  style = "phi-perturbed";
  Rng rng(seed, 0x7068);
  const double c = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 2.0);
  const double eps = std::pow(10.0, rng.uniform(-3.0, 0.0));
  const GridFunction w = sample_test_function(grid, derive_seed(seed, 1), kStyles[(i / 4) % 3]);
  const double p = 2.0;
  const double ratio = std::sqrt(norm_grad_p(pair.phi1, p) / norm_grad_p(w, p));
  return pair.phi1 * c + w * (c * eps * ratio);
}

Batch build(const EigenPair& pair, int count, std::uint64_t seed, const LinearFunctional* l) {
  if (count < 0) throw Error(ErrorCode::invalid_argument, "batch size must be nonnegative");
  Batch batch;
  batch.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    std::string style;
    GridFunction u = l ? sample_test_function(pair.grid_ptr(), s, kStyles[i % 3]) : draw(pair, s, i, style);
    if (l) {
      style = to_string(kStyles[i % 3]);
      u = project(u, *l, pair).perp;
    }
    batch.push_back(BatchSample{std::move(u), s, std::move(style)});
  }
  return batch;
}

DeficitReport blank_report(const std::string& id, const EigenPair& pair, const Exponents& exps, const Batch& batch) {
  if (batch.empty()) throw Error(ErrorCode::empty_batch, id + " needs at least one sample");
  DeficitReport r;
  r.inequality = id;
  r.grid = pair.grid().spec();
  r.p = exps.p;
  r.q = exps.q;
  r.lambda1 = pair.lambda1;
  r.samples.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!batch[i].u.grid().same_as(pair.grid())) throw Error(ErrorCode::mismatched_grid, "batch sample on another grid");
    r.samples[i].index = static_cast<int>(i);
    r.samples[i].seed = batch[i].seed;
    r.samples[i].style = batch[i].style;
  }
  return r;
}

double friedrichs_deficit(const GridFunction& u, const EigenPair& pair, const Exponents& exps) {
  return exps.p * deficit_J(u, pair, exps);
}

void set_ratio(DeficitSample& s, double lhs, double rhs, double scale) {
  s.lhs = lhs;
  s.rhs = rhs;
  s.scale = scale;
  s.excluded = !(rhs > kCollinearThreshold * scale) || !(rhs > 0.0);
  s.ratio = s.excluded ? 0.0 : lhs / rhs;
}

void require_homogeneous(const std::string& id, const Exponents& exps) {
  if (exps.p != exps.q) throw Error(ErrorCode::invalid_exponents, id + " requires p = q");
}

}  // namespace

Batch make_batch(const EigenPair& pair, int count, std::uint64_t seed) { return build(pair, count, seed, nullptr); }

Batch make_kernel_batch(const EigenPair& pair, const LinearFunctional& l, int count, std::uint64_t seed) {
  return build(pair, count, seed, &l);
}

const std::vector<std::string>& inequality_ids() {
  static const std::vector<std::string> ids = {
      "friedrichs", "improved-1.9", "generalized-1.14", "hidden-1.15",    "hidden-1.17",
      "hidden-1.18", "hidden-sigma-path", "Ml-equivalence", "P1-lower-bound"};
  return ids;
}

void finalize_report(DeficitReport& report) {
  std::vector<double> ratios;
  report.excluded = 0;
  report.min_scaled_lhs = std::numeric_limits<double>::infinity();
  for (const DeficitSample& s : report.samples) {
    const double rel = s.scale > 0.0 ? s.lhs / s.scale : s.lhs;
    report.min_scaled_lhs = std::min(report.min_scaled_lhs, rel);
    if (s.excluded) {
      ++report.excluded;
    } else {
      ratios.push_back(s.ratio);
    }
  }
  if (report.samples.empty()) report.min_scaled_lhs = 0.0;
  if (ratios.empty()) {
    report.min_ratio = report.median_ratio = report.max_ratio = 0.0;
    return;
  }
  std::sort(ratios.begin(), ratios.end());
  report.min_ratio = ratios.front();
  report.max_ratio = ratios.back();
  const std::size_t n = ratios.size();
  report.median_ratio = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
}

DeficitReport check_friedrichs(const Batch& batch, const EigenPair& pair, const Exponents& exps) {
  DeficitReport r = blank_report("friedrichs", pair, exps, batch);
  const LinearFunctional l = LinearFunctional::bind(LinearFunctionalSpec::phi_power(exps.q - 1.0), pair);
  r.lspec = l.spec().describe();
  parallel_for(batch.size(), [&](std::size_t i) {
    const GridFunction& u = batch[i].u;
    const double g = norm_grad_p(u, exps.p);
    set_ratio(r.samples[i], friedrichs_deficit(u, pair, exps), g, g);
    r.samples[i].cone = to_string(cone_classify(u, 1.0, l, pair, exps));
  });
  finalize_report(r);
  return r;
}

namespace {

// Descends on deficit / M_l from u in the K0 metric.
GridFunction adversarial_descent(GridFunction u, int steps, const LinearFunctional& l, const EigenPair& pair,
                                 const Exponents& exps) {
  const Grid& g = u.grid();
  const GridPtr& grid = u.grid_ptr();
  const double target = norm_grad_p(u, exps.p);
  auto ratio = [&](const Vector& x) {
    const GridFunction f(grid, x);
    const double m = M_l(f, l, pair, exps);
    const double s = norm_grad_p(f, exps.p);
    if (!(m > kCollinearThreshold * s)) return std::numeric_limits<double>::infinity();
    return friedrichs_deficit(f, pair, exps) / m;
  };
  auto retract = [&](const Vector& x) -> Vector {
    const double s = kernels::grad_energy(g, x, exps.p);
    if (!(s > 0.0)) return x;
    return x * std::pow(target / s, 1.0 / exps.p);
  };
  optimize::LineSearch ls;
  ls.refine = true;
  ls.step = 1.0;
  Vector x = u.values();
  double value = ratio(x);
  for (int k = 0; k < steps && std::isfinite(value); ++k) {
    const GridFunction f(grid, x);
    const double m = M_l(f, l, pair, exps);
    const Vector gd = exps.p * grad_J(f, pair, exps);
    const Vector gm = grad_M_l(f, l, pair, exps);
    const Vector grad = g.masked((gd - value * gm) / m);
    const Vector d = g.solve_laplacian(grad);
    const double slope = kernels::dot(grad, d);
    if (!(slope > 0.0)) break;
    if (k == 0) ls.step = 0.1 * std::sqrt(kernels::dot(x, x) / std::max(1e-300, kernels::dot(d, d)));
    auto step = optimize::armijo(ratio, retract, x, value, d, slope, ls);
    if (!step.accepted) break;
    x = std::move(step.x);
    value = step.value;
  }
  return GridFunction(grid, x);
}

}  // namespace

DeficitReport check_improved(const Batch& batch, const EigenPair& pair, const Exponents& exps,
                             const LinearFunctionalSpec& lspec, const ImprovedOptions& options) {
  std::string id = options.id;
  if (id.empty()) {
    const bool classic = lspec.kind == LinearFunctionalSpec::Kind::phi_power && lspec.exponent == exps.q - 1.0;
    id = classic ? "improved-1.9" : "generalized-1.14";
  }
  DeficitReport r = blank_report(id, pair, exps, batch);
  const LinearFunctional l = LinearFunctional::bind(lspec, pair);
  r.lspec = lspec.describe();
  r.adversarial_steps = options.adversarial_steps;
  auto evaluate = [&](const GridFunction& u, DeficitSample& s) {
    const double g = norm_grad_p(u, exps.p);
    set_ratio(s, friedrichs_deficit(u, pair, exps), M_l(u, l, pair, exps), g);
    s.cone = to_string(cone_classify(u, options.gamma, l, pair, exps));
  };
  parallel_for(batch.size(), [&](std::size_t i) { evaluate(batch[i].u, r.samples[i]); });
  int worst = -1;
  for (const DeficitSample& s : r.samples) {
    if (!s.excluded && (worst < 0 || s.ratio < r.samples[worst].ratio)) worst = s.index;
  }
  if (worst < 0) throw Error(ErrorCode::all_collinear_batch, id + ": every sample is collinear with phi1");
  if (options.adversarial_steps > 0) {
    const GridFunction u = adversarial_descent(batch[worst].u, options.adversarial_steps, l, pair, exps);
    DeficitSample s;
    s.index = static_cast<int>(r.samples.size());
    s.seed = batch[worst].seed;
    s.style = "adversarial";
    evaluate(u, s);
    r.samples.push_back(s);
  }
  finalize_report(r);
  return r;
}

double hidden_118_rhs(const GridFunction& u, const EigenPair& pair, double p) {
  const Grid& g = u.grid();
  if (!g.same_as(pair.grid())) throw Error(ErrorCode::mismatched_grid, "u and phi1 on different grids");
  const Vector& phi = pair.phi1.values();
  double phimin = std::numeric_limits<double>::infinity();
  for (int i : g.free_nodes()) phimin = std::min(phimin, phi[i]);
  const double floor = 1e-8 * phimin;
  const int d = g.dim();
  // |grad(u/phi)| = |grad(|u|/phi)| a.e.; the nodal |u| keeps P1 elements
  // that straddle a sign change consistent with the R_p form.
  const Vector absu = u.values().cwiseAbs();
  const Vector gu = g.gradient_operator() * absu;
  const Vector gp = g.gradient_operator() * phi;
  const Vector au = g.averaging_operator() * absu;
  const Vector ap = g.averaging_operator() * phi;
  CompensatedSum s;
  for (int e = 0; e < g.num_elements(); ++e) {
    const double ratio = au[e] / std::max(ap[e], floor);
    double n2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double c = gu[e * d + k] - ratio * gp[e * d + k];
      n2 += c * c;
    }
    s += g.measure(e) * std::pow(n2, 0.5 * p);
  }
  return s.value();
}

namespace {

GridFunction abs_of(const GridFunction& u) { return GridFunction(u.grid_ptr(), u.values().cwiseAbs()); }

// argmax over t of f on a uniform grid plus golden-section refinement.
std::pair<double, double> maximize_t(const std::function<double(double)>& f, const HiddenOptions& o) {
  const int n = std::max(3, o.t_nodes);
  double best_t = 0.0, best = -std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (int k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / (n - 1);
    const double v = f(t);
    if (v > best) {
      best = v;
      best_t = t;
      best_k = k;
    }
  }
  double a = static_cast<double>(std::max(0, best_k - 1)) / (n - 1);
  double b = static_cast<double>(std::min(n - 1, best_k + 1)) / (n - 1);
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - ratio * (b - a), d = a + ratio * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < o.refine_iterations; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  if (fc > best) best = fc, best_t = c;
  if (fd > best) best = fd, best_t = d;
  return {best_t, best};
}

}  // namespace

DeficitReport check_hidden_convexity(const std::string& id, const Batch& batch, const EigenPair& pair,
                                     const Exponents& exps, const HiddenOptions& options) {
  DeficitReport r = blank_report(id, pair, exps, batch);
  const double p = exps.p, q = exps.q;
  const GridFunction& phi = pair.phi1;
  const double phi_q = std::pow(norm_q(phi, q), 1.0 / q);
  const double gphi = norm_grad_p(phi, p);
  std::function<void(std::size_t)> body;
  if (id == "hidden-1.15") {
    body = [&](std::size_t i) {
      const GridFunction& u = batch[i].u;
      DeficitSample& s = r.samples[i];
      const double g = norm_grad_p(u, p);
      const double uq = std::pow(norm_q(u, q), 1.0 / q);
      if (!(uq > 0.0)) {
        set_ratio(s, 0.0, 0.0, g);
        return;
      }
      const double sc = phi_q / uq;
      const GridFunction w = abs_of(u) * sc;
      auto f = [&](double t) { return t * (1.0 - t) * integral_R_p(w, phi, t, p); };
      const auto [t, m] = maximize_t(f, options);
      s.t = t;
      set_ratio(s, friedrichs_deficit(u, pair, exps), std::pow(sc, -p) * m, g);
    };
  } else if (id == "hidden-1.17" || id == "hidden-1.18") {
    require_homogeneous(id, exps);
    const bool literal = id == "hidden-1.18";
    body = [&, literal](std::size_t i) {
      const GridFunction& u = batch[i].u;
      const double g = norm_grad_p(u, p);
      const double rhs = literal ? hidden_118_rhs(u, pair, p) : integral_R_p(abs_of(u), phi, 1.0, p);
      r.samples[i].t = 1.0;
      set_ratio(r.samples[i], friedrichs_deficit(u, pair, exps), rhs, g);
    };
  } else if (id == "hidden-sigma-path") {
    body = [&](std::size_t i) {
      const GridFunction& u = batch[i].u;
      DeficitSample& s = r.samples[i];
      const double uq = std::pow(norm_q(u, q), 1.0 / q);
      if (!(uq > 0.0)) {
        set_ratio(s, 0.0, 0.0, 0.0);
        return;
      }
      const GridFunction w = u * (phi_q / uq);
      const GridFunction aw = abs_of(w);
      const double gw = norm_grad_p(w, p);
      const int n = std::max(3, options.t_nodes);
      double best = std::numeric_limits<double>::infinity();
      double bl = 0.0, br = 0.0, bt = 0.0;
      Vector sigma(w.size());
      for (int k = 1; k + 1 < n; ++k) {
        const double t = static_cast<double>(k) / (n - 1);
        for (int j = 0; j < w.size(); ++j) {
          sigma[j] = std::pow((1.0 - t) * kernels::abs_pow(w[j], p) + t * kernels::abs_pow(phi[j], p), 1.0 / p);
        }
        const double lhs = (1.0 - t) * gw + t * gphi - norm_grad_p(GridFunction(w.grid_ptr(), sigma), p);
        const double rhs = t * (1.0 - t) * integral_R_p(aw, phi, t, p);
        if (!(rhs > kCollinearThreshold * gw)) continue;
        if (lhs / rhs < best) best = lhs / rhs, bl = lhs, br = rhs, bt = t;
      }
      s.t = bt;
      if (std::isfinite(best)) {
        set_ratio(s, bl, br, gw);
      } else {
        set_ratio(s, 0.0, 0.0, gw);
      }
    };
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown hidden-convexity id '" + id + "'");
  }
  parallel_for(batch.size(), body);
  finalize_report(r);
  return r;
}

DeficitReport check_Ml_equivalence(const LinearFunctionalSpec& l1, const LinearFunctionalSpec& l2, const Batch& batch,
                                   const EigenPair& pair, const Exponents& exps) {
  DeficitReport r = blank_report("Ml-equivalence", pair, exps, batch);
  const LinearFunctional f1 = LinearFunctional::bind(l1, pair);
  const LinearFunctional f2 = LinearFunctional::bind(l2, pair);
  r.lspec = l1.describe() + "/" + l2.describe();
  parallel_for(batch.size(), [&](std::size_t i) {
    const GridFunction& u = batch[i].u;
    const double g = norm_grad_p(u, exps.p);
    const double m1 = M_l(u, f1, pair, exps);
    const double m2 = M_l(u, f2, pair, exps);
    DeficitSample& s = r.samples[i];
    set_ratio(s, m2, m1, g);
    if (!(m2 > kCollinearThreshold * g)) {
      s.excluded = true;
      s.ratio = 0.0;
    }
    s.cone = to_string(cone_classify(u, 1.0, f1, pair, exps));
  });
  finalize_report(r);
  return r;
}

DeficitReport check_P1_lower_bound(const Batch& kernel_batch, const EigenPair& pair, const Exponents& exps,
                                   double t_max, const SPathQuadrature& squad) {
  DeficitReport r = blank_report("P1-lower-bound", pair, exps, kernel_batch);
  parallel_for(kernel_batch.size(), [&](std::size_t i) {
    const GridFunction& v = kernel_batch[i].u;
    Rng rng(kernel_batch[i].seed, 0x7431);
    const double t = rng.uniform(-t_max, t_max);
    const double nphi = norm_phi1(v, pair, exps.p);
    const double g = norm_grad_p(v, exps.p);
    const double rhs = nphi * nphi + kernels::abs_pow(t, exps.p - 2.0) * g;
    DeficitSample& s = r.samples[i];
    s.t = t;
    set_ratio(s, P1_family(t, v, pair, exps, squad), rhs, rhs);
  });
  finalize_report(r);
  return r;
}

}  // namespace friedrichs
