#include "nlft/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "nlft/parallel.hpp"
#include "quadrature.hpp"

namespace nlft {

cplx weyl_m(cplx a, cplx b) {
  if (std::abs(a) == 0.0) throw Error(ErrorKind::pole, "weyl_m: a = 0");
  const cplx r = b / a;
  if (std::abs(1.0 + r) <= 1e-14) throw Error(ErrorKind::pole, "weyl_m: a + b vanishes");
  return (1.0 - r) / (1.0 + r);
}

namespace {

struct PrefixIntegral {
  const GridFunction* h;
  std::vector<double> abs_values;
  std::vector<double> prefix;

  explicit PrefixIntegral(const GridFunction& g) : h(&g) {
    abs_values.resize(g.values.size());
    for (std::size_t i = 0; i < abs_values.size(); ++i) abs_values[i] = std::abs(g.values[i]);
    prefix.assign(abs_values.size(), 0.0);
    for (std::size_t i = 1; i < abs_values.size(); ++i)
      prefix[i] = prefix[i - 1] + 0.5 * g.dx * (abs_values[i - 1] + abs_values[i]);
  }

  // \int_{x0}^{x} of the piecewise-linear |h|
  double at(double x) const {
    const double pos = (x - h->x0) / h->dx;
    if (pos <= 0.0) return 0.0;
    const std::size_t last = abs_values.size() - 1;
    if (pos >= static_cast<double>(last)) return prefix[last];
    const auto i = static_cast<std::size_t>(pos);
    const double u = pos - static_cast<double>(i);
    const double a = abs_values[i], b = abs_values[i + 1];
    return prefix[i] + h->dx * (a * u + 0.5 * (b - a) * u * u);
  }

  double value(double x) const {
    const double pos = std::clamp((x - h->x0) / h->dx, 0.0, static_cast<double>(abs_values.size() - 1));
    const auto i = std::min(static_cast<std::size_t>(pos), abs_values.size() - 2);
    const double u = pos - static_cast<double>(i);
    return abs_values[i] * (1.0 - u) + abs_values[i + 1] * u;
  }
};

double maximal_with(const PrefixIntegral& p, double s, const MaximalOptions& options) {
  const GridFunction& h = *p.h;
  const double lo = h.x0, hi = h.x_end();
  const double len = hi - lo;
  const double margin = options.inner_fraction * len;
  if (s < lo + margin - 1e-12 * len || s > hi - margin + 1e-12 * len)
    throw Error(ErrorKind::domain, "maximal_function: s outside the inner window");
  double best = p.value(s);
  for (int k = 0;; ++k) {
    const double r = h.dx * std::exp2(static_cast<double>(k) / options.per_octave);
    const double a = std::max(lo, s - r), b = std::min(hi, s + r);
    if (b > a) best = std::max(best, (p.at(b) - p.at(a)) / (b - a));
    if (r >= len) break;
  }
  return best;
}

double simpson(std::span<const double> v, double h) { return detail::simpson(v, h); }

double interpolate(const GridFunction& g, double s) {
  const double pos = std::clamp((s - g.x0) / g.dx, 0.0, static_cast<double>(g.values.size() - 1));
  const auto i = std::min(static_cast<std::size_t>(pos), g.values.size() - 2);
  const double u = pos - static_cast<double>(i);
  return g.values[i] * (1.0 - u) + g.values[i + 1] * u;
}

double log_abs_a(const Potential& f, double x, const SolverOptions& options) {
  const TransferCoefficients tc = integrate_transfer(f, x, f.support_end(), options);
  // log|a| = 1/2 log(1 + |b|^2) avoids cancellation for small b
  return 0.5 * std::log1p(std::norm(tc.b));
}

double integrate_log_a(const Potential& f, double lo, double hi, double dx_target, const SolverOptions& options) {
  std::size_t cells = static_cast<std::size_t>(std::ceil((hi - lo) / dx_target));
  cells += cells % 2;
  cells = std::max<std::size_t>(cells, 2);
  const double dx = (hi - lo) / static_cast<double>(cells);
  std::vector<double> v(cells + 1);
  parallel_for(v.size(), [&](std::size_t i) { v[i] = log_abs_a(f, lo + dx * static_cast<double>(i), options); });
  return simpson(v, dx);
}

}  // namespace

double maximal_function(const GridFunction& h, double s, const MaximalOptions& options) {
  if (h.values.size() < 2) throw Error(ErrorKind::input, "maximal_function needs at least two samples");
  if (options.per_octave < 1) throw Error(ErrorKind::config, "per_octave must be >= 1");
  return maximal_with(PrefixIntegral(h), s, options);
}

double SpectralProfile::inner_lo() const {
  return w.x0 + maximal.inner_fraction * (w.x_end() - w.x0);
}

double SpectralProfile::inner_hi() const {
  return w.x_end() - maximal.inner_fraction * (w.x_end() - w.x0);
}

double SpectralProfile::w_at(double s) const { return interpolate(w, s); }
double SpectralProfile::w_tilde_at(double s) const { return interpolate(w_tilde, s); }

SpectralProfile build_profile(const Potential& f, double X, int n_points, const SolverOptions& options) {
  if (n_points < 8) throw Error(ErrorKind::config, "spectral grid needs at least 8 points");
  if (!(X > 0.0)) throw Error(ErrorKind::config, "spectral window X must be positive");
  SpectralProfile p;
  const auto n = static_cast<std::size_t>(n_points);
  const double dx = 2.0 * X / static_cast<double>(n - 1);
  p.w = {-X, dx, std::vector<double>(n)};
  p.w_tilde = {-X, dx, std::vector<double>(n)};
  p.a.resize(n);
  p.b.resize(n);
  std::vector<double> cross(n);
  const double T = f.support_end();
  parallel_for(n, [&](std::size_t i) {
    const double x = i + 1 == n ? X : -X + dx * static_cast<double>(i);
    const TransferCoefficients tc = integrate_transfer(f, x, T, options);
    p.a[i] = tc.a;
    p.b[i] = tc.b;
    p.w.values[i] = weyl_m(tc.a, tc.b).real();
    p.w_tilde.values[i] = weyl_m(tc.a, -tc.b).real();
    const EvolutionState e = integrate_E(f, x, T, 0, options);
    cross[i] = std::abs(p.w.values[i] * std::exp(2.0 * e.log_abs_E()) - 1.0);
  });
  for (double c : cross) p.cross_residual = std::max(p.cross_residual, c);
  p.l1 = f.l1();
  p.l2 = f.l2();
  return p;
}

EpsMu eps_mu(const SpectralProfile& profile, double s) {
  GridFunction dw = profile.w;
  GridFunction dwt = profile.w_tilde;
  for (double& v : dw.values) v -= 1.0;
  for (double& v : dwt.values) v -= 1.0;
  EpsMu r;
  r.eps = maximal_function(dw, s, profile.maximal);
  r.eps_tilde = maximal_function(dwt, s, profile.maximal);
  r.mu = r.eps + r.eps_tilde;
  return r;
}

double abs_a_from_weights(double w, double w_tilde) {
  return 0.5 * std::sqrt(1.0 / w + 1.0 / w_tilde + 2.0);
}

double sinc_diagonal(double t, cplx lambda) {
  const double y = std::abs(lambda.imag());
  const double u = 2.0 * t * y;
  if (u < 1e-6) return t / pi * (1.0 + u * u / 6.0);
  return std::sinh(u) / (2.0 * pi * y);
}

GeomWeights geom_weights(double s, double t, cplx lambda) {
  if (!(t > 0.0)) throw Error(ErrorKind::domain, "geom_weights needs t > 0");
  GeomWeights g;
  g.X = std::max(1.0, t * std::abs(lambda.real() - s) / (t * std::abs(lambda.imag()) + 1.0));
  g.V = g.X * sinc_diagonal(t, lambda);
  return g;
}

PlancherelResult plancherel_residual(const Potential& f, double X0, double tol, double X_max,
                                     const SolverOptions& options) {
  if (!(X0 > 0.0)) throw Error(ErrorKind::config, "Plancherel window must be positive");
  PlancherelResult r;
  r.rhs = 0.5 * pi * f.l2() * f.l2();
  // log|a| ~ |b|^2/2 is second order in the RK4 error of b, so the window sweep
  // tolerates a four times coarser phase step
  SolverOptions coarse = options;
  coarse.max_phase_step *= 4.0;
  const double dx = pi / (32.0 * f.support_end());
  double X = X0;
  r.lhs = integrate_log_a(f, -X, X, dx, coarse);
  auto record = [&] {
    r.X = X;
    r.rel_err = r.rhs > 0.0 ? std::abs(r.lhs - r.rhs) / r.rhs : std::abs(r.lhs);
    r.window_history.push_back(X);
    r.rel_err_history.push_back(r.rel_err);
  };
  record();
  if (r.rhs == 0.0) return r;
  while (2.0 * X <= X_max) {
    const double inc = integrate_log_a(f, -2.0 * X, -X, dx, coarse) + integrate_log_a(f, X, 2.0 * X, dx, coarse);
    r.lhs += inc;
    X *= 2.0;
    r.tail_increment = inc;
    record();
    if (std::abs(inc) < tol * r.rhs) break;
  }
  return r;
}

CarlesonProfile maximal_log_a_profile(const Potential& f, std::span<const double> x_grid,
                                      std::span<const double> t_grid, std::span<const double> lambdas,
                                      const SolverOptions& options) {
  CarlesonProfile c;
  c.x.assign(x_grid.begin(), x_grid.end());
  c.sup_sqrt_log_a.assign(x_grid.size(), 0.0);
  std::vector<double> ts(t_grid.begin(), t_grid.end());
  std::sort(ts.begin(), ts.end());
  parallel_for(x_grid.size(), [&](std::size_t i) {
    const double x = x_grid[i];
    const int steps = default_steps(f, 2.0 * std::abs(x) + f.max_abs(), f.support_end(), options);
    double best = 0.0;
    for (const TransferCoefficients& tc : transfer_path(f, x, ts, steps))
      best = std::max(best, std::sqrt(std::max(0.0, 0.5 * std::log1p(std::norm(tc.b)))));
    c.sup_sqrt_log_a[i] = best;
  });
  // cell widths of the (possibly non-uniform) x grid, midpoint partition
  std::vector<double> width(x_grid.size(), 0.0);
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double left = i > 0 ? 0.5 * (x_grid[i] - x_grid[i - 1]) : 0.0;
    const double right = i + 1 < x_grid.size() ? 0.5 * (x_grid[i + 1] - x_grid[i]) : 0.0;
    width[i] = left + right;
  }
  const double l2sq = f.l2() * f.l2();
  for (double lambda : lambdas) {
    double measure = 0.0;
    for (std::size_t i = 0; i < x_grid.size(); ++i)
      if (c.sup_sqrt_log_a[i] > lambda) measure += width[i];
    c.lambdas.push_back(lambda);
    c.distribution.push_back(measure);
    c.weak_bound.push_back(lambda > 0.0 ? l2sq / (lambda * lambda) : INFINITY);
  }
  return c;
}

std::optional<double> hausdorff_young_diagnostic(const Potential& f, double p, double X, int n_points,
                                                 const SolverOptions& options) {
  if (!(p >= 1.0 && p <= 2.0)) throw Error(ErrorKind::domain, "Hausdorff-Young exponent must lie in [1, 2]");
  if (n_points < 8) throw Error(ErrorKind::config, "grid needs at least 8 points");
  const double fp = norm(f, p);
  if (fp == 0.0) return std::nullopt;
  const auto n = static_cast<std::size_t>(n_points);
  const double dx = 2.0 * X / static_cast<double>(n - 1);
  std::vector<double> g(n);
  parallel_for(n, [&](std::size_t i) {
    g[i] = std::sqrt(std::max(0.0, log_abs_a(f, -X + dx * static_cast<double>(i), options)));
  });
  double gq = 0.0;
  if (p == 1.0) {
    gq = *std::max_element(g.begin(), g.end());
  } else {
    const double q = p / (p - 1.0);
    for (double& v : g) v = std::pow(v, q);
    gq = std::pow(simpson(g, dx), 1.0 / q);
  }
  return gq / fp;
}

double w_minus_one_l2(const SpectralProfile& profile) {
  std::vector<double> sq(profile.w.values.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (profile.w.values[i] - 1.0) * (profile.w.values[i] - 1.0);
  return std::sqrt(simpson(sq, profile.w.dx));
}

double w_minus_one_sup(const SpectralProfile& profile) {
  double m = 0.0;
  for (double v : profile.w.values) m = std::max(m, std::abs(v - 1.0));
  return m;
}

}  // namespace nlft
