#include <array>
#include <cmath>
#include <numbers>

#include "friedrichs/eigensolver.hpp"

namespace friedrichs {

namespace {

// State: u, flux |u'|^{p-2}u', running \int |u|^q.
using State = std::array<double, 3>;

struct Shot {
  bool crossed;  // u reached zero before b
  double u_end;
  double flux_end;
  double lq;
};

State rhs(const State& y, double lam, double p, double q) {
  const double du = std::copysign(std::pow(std::abs(y[1]), 1.0 / (p - 1.0)), y[1]);
  const double dflux = -lam * std::copysign(std::pow(std::abs(y[0]), q - 1.0), y[0]);
  return {du, dflux, std::pow(std::abs(y[0]), q)};
}

State rk4(const State& y, double h, double lam, double p, double q) {
  auto axpy = [](const State& a, double s, const State& b) {
    return State{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]};
  };
  const State k1 = rhs(y, lam, p, q);
  const State k2 = rhs(axpy(y, 0.5 * h, k1), lam, p, q);
  const State k3 = rhs(axpy(y, 0.5 * h, k2), lam, p, q);
  const State k4 = rhs(axpy(y, h, k3), lam, p, q);
  State out;
  for (int i = 0; i < 3; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

Shot shoot(double a, double b, double lam, double p, double q, int steps, std::vector<double>* profile) {
  const double h = (b - a) / steps;
  State y{0.0, 1.0, 0.0};
  if (profile) profile->assign(1, 0.0);
  for (int k = 0; k < steps; ++k) {
    y = rk4(y, h, lam, p, q);
    if (profile) profile->push_back(y[0]);
    if (y[0] < 0.0 && k + 1 < steps) return {true, y[0], y[1], y[2]};
  }
  return {y[0] <= 0.0, y[0], y[1], y[2]};
}

}  // namespace

double homogeneous_lambda1_1d(double length, double p) {
  if (!(length > 0.0)) throw Error(ErrorCode::degenerate_domain, "interval length must be positive");
  const double s = 2.0 * std::numbers::pi / (p * std::sin(std::numbers::pi / p));
  return (p - 1.0) * std::pow(s, p) / std::pow(length, p);
}

ShootingResult shooting_oracle_1d(double a, double b, const Exponents& exps, double tolerance, int steps) {
  if (!(b > a)) throw Error(ErrorCode::degenerate_domain, "shooting needs a < b");
  if (steps < 16) throw Error(ErrorCode::invalid_argument, "shooting needs at least 16 steps");
  const double p = exps.p, q = exps.q;
  double lo = 0.0;
  double hi = 1.0;
  int grow = 0;
  while (!shoot(a, b, hi, p, q, steps, nullptr).crossed) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 200) throw Error(ErrorCode::bracket_failure, "no sign change of u(b) found");
  }
  int bisections = 0;
  while (hi - lo > tolerance * hi && bisections < 200) {
    const double mid = 0.5 * (lo + hi);
    if (shoot(a, b, mid, p, q, steps, nullptr).crossed) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++bisections;
  }
  const double lam = 0.5 * (lo + hi);
  ShootingResult out;
  std::vector<double> profile;
  const Shot s = shoot(a, b, lam, p, q, steps, &profile);
  // The running integral misses the tail below zero only at round-off level.
  const double lq = s.lq;
  out.lambda1 = lam * std::pow(lq, (q - p) / q);
  const double scale = std::pow(lq, -1.0 / q);
  out.samples.resize(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i) out.samples[i] = std::max(0.0, profile[i]) * scale;
  out.bracket_lo = lo;
  out.bracket_hi = hi;
  out.bisections = bisections;
  out.end_slope = std::copysign(std::pow(std::abs(s.flux_end), 1.0 / (p - 1.0)), s.flux_end);
  return out;
}

}  // namespace friedrichs
