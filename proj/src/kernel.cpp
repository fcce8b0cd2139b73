#include "nlft/kernel.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "nlft/parallel.hpp"
#include "quadrature.hpp"

namespace nlft {

namespace {

constexpr double taylor_radius = 1e-5;  // in units of 1/t
constexpr double pole_radius = 1e-10;

bool close(cplx a, cplx b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

int kernel_steps(const Potential& f, double max_abs_z, const SolverOptions& options) {
  return default_steps(f, e_rate(f, cplx(max_abs_z, 0.0)), f.support_end(), options);
}

}  // namespace

cplx sinc_kernel(double t, cplx lambda, cplx z) {
  const cplx d = z - std::conj(lambda);
  const cplx u = t * d;
  if (std::abs(u) < 1e-4) {
    const cplx u2 = u * u;
    return t / pi * (1.0 - u2 / 6.0 + u2 * u2 / 120.0);
  }
  return std::sin(u) / (pi * d);
}

cplx K_direct(double t, cplx lambda, cplx z, const EvolutionState& at_lambda_bar, const EvolutionState& at_z) {
  const cplx lb = std::conj(lambda);
  if (!close(at_lambda_bar.z, lb) || std::abs(at_lambda_bar.t - t) > 1e-12 * std::max(1.0, t))
    throw Error(ErrorKind::config, "K_direct: state does not sit at (t, conj lambda)");
  const cplx d = z - lb;
  const double ad = std::abs(d);
  const EvolutionState& L = at_lambda_bar;
  const bool near = t * ad < taylor_radius;
  if (near && (L.order >= 2 || (L.order >= 1 && ad < pole_radius))) {
    // N(z) = E(z) E#(lb) - E#(z) E(lb) vanishes at lb; K = -N(z) / (2 pi i d)
    const cplx n1 = L.Ez * L.E_sharp - L.Ez_sharp * L.E;
    const cplx n2 = L.order >= 2 ? L.Ezz * L.E_sharp - L.Ezz_sharp * L.E : cplx(0.0);
    return -(n1 + 0.5 * n2 * d) * std::exp(2.0 * L.log_scale) / (2.0 * pi * I);
  }
  if (ad < pole_radius) throw Error(ErrorKind::config, "K_direct: z = conj(lambda) needs derivative data");
  if (!close(at_z.z, z) || std::abs(at_z.t - t) > 1e-12 * std::max(1.0, t))
    throw Error(ErrorKind::config, "K_direct: state does not sit at (t, z)");
  const cplx num = at_z.E * L.E_sharp - at_z.E_sharp * L.E;
  return num * std::exp(at_z.log_scale + L.log_scale) / (2.0 * pi * I * (lb - z));
}

cplx K_direct(const EvolutionSolver& solver, double t, cplx lambda, cplx z) {
  const cplx lb = std::conj(lambda);
  const bool near = t * std::abs(z - lb) < taylor_radius;
  const EvolutionState at_l = solver.solve(lb, near ? 2 : 0, t);
  if (near) return K_direct(t, lambda, z, at_l, at_l);
  return K_direct(t, lambda, z, at_l, solver.solve(z, 0, t));
}

// -- KernelContext ----------------------------------------------------------

KernelContext::KernelContext(const Potential& f, double t, double s, const SolverOptions& options, double L,
                             double step)
    : f_(&f), t_(t), s_(s), L_(L), step_(step), options_(options) {
  if (!(t > 0.0) || !std::isfinite(s)) throw Error(ErrorKind::domain, "KernelContext needs t > 0 and finite s");
  if (L_ == 0.0) L_ = 40.0 * pi / t;
  if (step_ == 0.0) step_ = pi / (32.0 * t);
  if (!(L_ > 0.0) || !(step_ > 0.0)) throw Error(ErrorKind::config, "KernelContext: bad window or step");
  auto cells = static_cast<std::size_t>(std::ceil(2.0 * L_ / step_ - 1e-9));
  cells += cells % 2;
  step_ = 2.0 * L_ / static_cast<double>(cells);
  x_.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) x_[i] = s - L_ + step_ * static_cast<double>(i);
  x_.back() = s + L_;
  const EvolutionSolver solver(f, kernel_steps(f, std::abs(s) + L_, options_));
  weight_.resize(x_.size());
  states_.resize(x_.size());
  parallel_for(x_.size(), [&](std::size_t i) {
    states_[i] = solver.solve(x_[i], 0, t_);
    weight_[i] = std::exp(-2.0 * states_[i].log_abs_E());
  });
}

std::vector<cplx> kernel_on_grid(const KernelContext& ctx, cplx lambda) {
  const Potential& f = ctx.potential();
  const EvolutionSolver solver(f, kernel_steps(f, std::abs(lambda.real()) + std::abs(lambda.imag()), ctx.options()));
  const EvolutionState at_l = solver.solve(std::conj(lambda), 2, ctx.t());
  std::vector<cplx> out(ctx.x().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = K_direct(ctx.t(), lambda, ctx.x()[i], at_l, ctx.states()[i]);
  return out;
}

KernelContext KernelContext::doubled() const { return KernelContext(*f_, t_, s_, options_, 2.0 * L_, step_); }

InnerProduct debranges_inner(std::span<const cplx> F, std::span<const cplx> G, const KernelContext& ctx) {
  const auto& x = ctx.x();
  const auto& w = ctx.weight();
  if (F.size() != x.size() || G.size() != x.size())
    throw Error(ErrorKind::input, "debranges_inner: samples do not match the context grid");
  std::vector<cplx> v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = F[i] * std::conj(G[i]) * w[i];
  InnerProduct out;
  out.L = ctx.L();
  out.value = detail::simpson<cplx>(v, ctx.step());

  // tail beyond each end modelled as C / (x - s)^2, C read off the outer decade
  const double L = ctx.L(), s = ctx.s();
  double estimate = 0.0;
  cplx extrapolation = 0.0;
  for (int side = 0; side < 2; ++side) {
    double peak = 0.0;
    cplx mean = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = side == 0 ? s - x[i] : x[i] - s;
      if (r < 0.9 * L - 1e-12 * L) continue;
      const double r2 = r * r;
      peak = std::max(peak, r2 * std::abs(F[i]) * std::abs(G[i]) * w[i]);
      mean += r2 * v[i];
      ++count;
    }
    estimate += peak / L;
    if (count > 0) extrapolation += mean / static_cast<double>(count) / L;
  }
  out.truncation_estimate = estimate;
  out.tail_extrapolation = extrapolation;
  out.truncation_warning = estimate > 0.01 * std::abs(out.value);
  return out;
}

InnerProduct debranges_inner(const std::function<cplx(double)>& F, const std::function<cplx(double)>& G,
                             const KernelContext& ctx) {
  auto run = [&](const KernelContext& c) {
    std::vector<cplx> fv(c.x().size()), gv(c.x().size());
    for (std::size_t i = 0; i < fv.size(); ++i) {
      fv[i] = F(c.x()[i]);
      gv[i] = G(c.x()[i]);
    }
    return debranges_inner(fv, gv, c);
  };
  InnerProduct r = run(ctx);
  if (r.truncation_warning) {
    const InnerProduct wide = run(ctx.doubled());
    return wide;
  }
  return r;
}

// -- Christoffel-Darboux -----------------------------------------------------

ChristoffelDarboux K_christoffel_darboux(const Potential& f, double t, cplx lambda, cplx z,
                                         const SolverOptions& options, int panels) {
  if (!(t > 0.0)) throw Error(ErrorKind::domain, "K_christoffel_darboux needs t > 0");
  const double T = f.support_end();
  const double span = 2.0 * t;
  if (panels <= 0) {
    const double per_unit = 8.0 * static_cast<double>(f.size() - 1) / T;
    panels = static_cast<int>(std::max(1024.0, std::ceil(per_unit * std::min(span, T))));
  }
  panels += panels % 2;
  std::vector<double> xi(static_cast<std::size_t>(panels) + 1);
  const double h = span / panels;
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = h * static_cast<double>(i);
  xi.back() = span;

  const EvolutionSolver solver(f, kernel_steps(f, std::max(std::abs(z), std::abs(lambda)) * std::sqrt(2.0), options));
  const auto Ez = solver.solve_path(z, 0, xi);
  const auto El = solver.solve_path(lambda, 0, xi);
  const cplx d = z - std::conj(lambda);
  std::vector<cplx> v(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    // e^{i xi d} E(xi,z) conj E(xi,lambda); the free factors cancel exactly
    const double mag = Ez[i].log_scale + El[i].log_scale - xi[i] * d.imag();
    v[i] = Ez[i].E * std::conj(El[i].E) * std::exp(cplx(mag, xi[i] * d.real()));
  }
  // d/dxi [E(z) E#(conj l) - E#(z) E(conj l)] = -i d (E(z) conj E(l) + E#(z) conj E#(l))
  const std::size_t half = static_cast<std::size_t>(panels / 2) + 1;
  std::vector<cplx> u(half);
  for (std::size_t i = 0; i < half; ++i)
    u[i] = (Ez[i].E * std::conj(El[i].E) + Ez[i].E_sharp * std::conj(El[i].E_sharp)) *
           std::exp(Ez[i].log_scale + El[i].log_scale);
  ChristoffelDarboux out;
  out.derived = detail::simpson<cplx>(u, h) / (2.0 * pi);
  out.printed = 2.0 * std::exp(-I * t * d) * detail::simpson<cplx>(v, h);
  out.fitted = out.printed * sinc_kernel(t, lambda, z) / (4.0 * t * std::exp(-I * t * d));
  out.direct = K_direct(solver, t, lambda, z);
  const double scale = std::max(std::abs(out.direct), 1e-300);
  out.deviation_printed = std::abs(out.printed - out.direct) / scale;
  out.deviation_fitted = std::abs(out.fitted - out.direct) / scale;
  out.deviation_derived = std::abs(out.derived - out.direct) / scale;
  return out;
}

// -- Fejer mean --------------------------------------------------------------

FejerTerms fejer_terms(const Potential& f, double s, double t, const SolverOptions& options) {
  if (!(t > 0.0)) throw Error(ErrorKind::domain, "fejer_terms needs t > 0");
  const double T = f.support_end();
  const double freq = 2.0 * s;
  FejerTerms out;

  const int panels = 2048;
  std::vector<cplx> F(panels + 1);
  const double h = t / panels;
  for (int i = 0; i <= panels; ++i) F[static_cast<std::size_t>(i)] = partial_fourier(f, std::min(h * i, t), freq);
  out.nested = detail::simpson<cplx>(F, h);

  const auto samples = f.samples();
  std::vector<cplx> g(samples.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = f.grid_step() * static_cast<double>(i);
    g[i] = (t - y) * samples[i] * std::exp(-I * freq * y);
  }
  out.fubini = integrate_on_grid(g, f.grid_step(), 0.0, std::min(t, T));

  out.linearized = t / pi * (1.0 + 2.0 / t * out.fubini.real());
  const EvolutionSolver solver(f, kernel_steps(f, std::abs(s), options));
  out.K_diagonal = K_direct(solver, t, s, s).real();
  return out;
}

// -- Gram matrices -----------------------------------------------------------

GramSpectrum kernel_gram(const Potential& f, double t, std::span<const cplx> points, const SolverOptions& options) {
  const std::size_t n = points.size();
  GramSpectrum out;
  if (n == 0) return out;
  double reach = 0.0;
  for (cplx p : points) reach = std::max(reach, std::abs(p.real()) + std::abs(p.imag()));
  const EvolutionSolver solver(f, kernel_steps(f, reach, options));

  // jets at every point and its conjugate; K(p_j, p_i) pairs E(p_i) with E(conj p_j)
  std::vector<EvolutionState> at(n), at_bar(n);
  parallel_for(n, [&](std::size_t i) {
    at[i] = solver.solve(points[i], 0, t);
    at_bar[i] = solver.solve(std::conj(points[i]), 2, t);
  });
  out.matrix.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const cplx lambda = points[j], z = points[i];
      const bool near = t * std::abs(z - std::conj(lambda)) < taylor_radius;
      out.matrix[i * n + j] = K_direct(t, lambda, z, at_bar[j], near ? at_bar[j] : at[i]);
    }
  Eigen::MatrixXcd M(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = out.matrix[i * n + j];
      out.hermitian_defect = std::max(out.hermitian_defect, std::abs(out.matrix[i * n + j] - std::conj(out.matrix[j * n + i])));
    }
  const Eigen::MatrixXcd H = 0.5 * (M + M.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(H, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::convergence, "kernel_gram: eigen solver failed");
  out.min_eigenvalue = eig.eigenvalues().minCoeff();
  out.max_eigenvalue = eig.eigenvalues().maxCoeff();
  return out;
}

}  // namespace nlft
