#include "nlft/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace nlft {

namespace {

constexpr double rescale_hi = 1e6;
constexpr double rescale_lo = 1e-6;

template <std::size_t N>
using Vec = std::array<cplx, N>;

// Interaction picture: E = e^{-izt} P, E# = e^{izt} Q, so that
// P' = g Q, Q' = k P with g = conj(f) e^{2izt}, k = f e^{-2izt}; the z-derivatives
// of (P, Q) ride along in slots 2..5.
template <std::size_t N>
inline Vec<N> p_rhs(const Vec<N>& y, double t, cplx g, cplx k) {
  Vec<N> d;
  d[0] = g * y[1];
  d[1] = k * y[0];
  if constexpr (N >= 4) {
    const cplx it2 = 2.0 * I * t;
    d[2] = g * (y[3] + it2 * y[1]);
    d[3] = k * (y[2] - it2 * y[0]);
    if constexpr (N >= 6) {
      d[4] = g * (y[5] + 2.0 * it2 * y[3] - 4.0 * t * t * y[1]);
      d[5] = k * (y[4] - 2.0 * it2 * y[2] - 4.0 * t * t * y[0]);
    }
  }
  return d;
}

template <std::size_t N>
inline Vec<N> axpy(const Vec<N>& y, double a, const Vec<N>& k) {
  Vec<N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + a * k[i];
  return out;
}

struct Forcing {
  cplx w;  // e^{2izt}
  cplx f;
  cplx g() const { return std::conj(f) * w; }
  cplx k() const { return f / w; }
};

template <std::size_t N>
inline void rk4_step(Vec<N>& y, double t0, double h, const Forcing& a, const Forcing& m, const Forcing& b) {
  const Vec<N> k1 = p_rhs(y, t0, a.g(), a.k());
  const Vec<N> k2 = p_rhs(axpy(y, 0.5 * h, k1), t0 + 0.5 * h, m.g(), m.k());
  const Vec<N> k3 = p_rhs(axpy(y, 0.5 * h, k2), t0 + 0.5 * h, m.g(), m.k());
  const Vec<N> k4 = p_rhs(axpy(y, h, k3), t0 + h, b.g(), b.k());
  for (std::size_t i = 0; i < N; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

template <std::size_t N>
inline void renormalize(Vec<N>& y, double& log_scale) {
  double m = 0.0;
  for (const cplx& v : y) m = std::max(m, std::abs(v));
  if (!std::isfinite(m)) throw Error(ErrorKind::numerical, "E-system blew up");
  if (m > rescale_hi || (m < rescale_lo && m > 0.0)) {
    for (cplx& v : y) v /= m;
    log_scale += std::log(m);
  }
}

template <std::size_t N>
EvolutionState to_state(const Vec<N>& y, double log_scale, double t, cplx z, int order) {
  // e^{-izt} and e^{izt} with the common magnitude e^{t |Im z|} moved into log_scale
  const double c = t * std::abs(z.imag());
  const cplx minus = std::exp(-I * z * t - c);
  const cplx plus = std::exp(I * z * t - c);
  const cplx it(0.0, t);
  Vec<N> v{};
  v[0] = minus * y[0];
  v[1] = plus * y[1];
  if constexpr (N >= 4) {
    v[2] = minus * (y[2] - it * y[0]);
    v[3] = plus * (y[3] + it * y[1]);
  }
  if constexpr (N >= 6) {
    v[4] = minus * (y[4] - 2.0 * it * y[2] - t * t * y[0]);
    v[5] = plus * (y[5] + 2.0 * it * y[3] - t * t * y[1]);
  }
  double ls = log_scale + c;
  renormalize(v, ls);
  EvolutionState s;
  s.t = t;
  s.z = z;
  s.order = order;
  s.E = v[0];
  s.E_sharp = v[1];
  if constexpr (N >= 4) {
    s.Ez = v[2];
    s.Ez_sharp = v[3];
  }
  if constexpr (N >= 6) {
    s.Ezz = v[4];
    s.Ezz_sharp = v[5];
  }
  s.log_scale = ls;
  return s;
}

}  // namespace

int default_steps(const Potential& f, double rate, double span, const SolverOptions& options) {
  if (options.steps_multiplier < 1) throw Error(ErrorKind::config, "steps multiplier must be >= 1");
  if (!(options.max_phase_step > 0.0)) throw Error(ErrorKind::config, "max phase step must be positive");
  const double T = f.support_end();
  span = std::clamp(span, 0.0, T);
  const long pair_cells = static_cast<long>((f.size() - 1) / 2 > 0 ? (f.size() - 1) / 2 : 1);
  const double fraction = span / T;
  long floor_steps = static_cast<long>(std::ceil(pair_cells * fraction - 1e-9));
  long needed = static_cast<long>(std::ceil(rate * span / options.max_phase_step));
  long steps = std::max({floor_steps, needed, 2L});
  if (fraction > 1.0 - 1e-12 && steps > pair_cells) steps = ((steps + pair_cells - 1) / pair_cells) * pair_cells;
  steps *= options.steps_multiplier;
  return static_cast<int>(std::min<long>(steps, 50'000'000L));
}

double e_rate(const Potential& f, cplx z) {
  // the interaction-picture coefficients carry e^{2izt}
  return 2.0 * (std::abs(z.real()) + std::abs(z.imag())) + f.max_abs();
}

// -- EvolutionSolver -------------------------------------------------------

EvolutionSolver::EvolutionSolver(const Potential& f, int steps) : f_(&f), steps_(steps) {
  if (steps < 2) throw Error(ErrorKind::config, "solver needs at least 2 steps");
  h_ = f.support_end() / steps;
  node_f_.resize(static_cast<std::size_t>(steps) + 1);
  mid_f_.resize(static_cast<std::size_t>(steps));
  for (int k = 0; k <= steps; ++k) node_f_[static_cast<std::size_t>(k)] = f(k == steps ? f.support_end() : k * h_);
  for (int k = 0; k < steps; ++k) mid_f_[static_cast<std::size_t>(k)] = f((k + 0.5) * h_);
}

namespace {

template <std::size_t N>
std::vector<EvolutionState> run_path(const Potential& f, int steps, double h, const std::vector<cplx>& node_f,
                                     const std::vector<cplx>& mid_f, cplx z, int order,
                                     std::span<const double> times, double sign) {
  std::vector<EvolutionState> out;
  out.reserve(times.size());
  const double T = f.support_end();
  auto phase = [&](double t) { return std::exp(2.0 * I * z * t); };
  Vec<N> y{};
  y[0] = 1.0;
  y[1] = 1.0;
  double log_scale = 0.0;
  int k = 0;  // y holds the state at t = k h
  Forcing left{phase(0.0), sign * node_f[0]};

  auto advance = [&] {
    const auto kk = static_cast<std::size_t>(k);
    const double t0 = k * h;
    const Forcing mid{phase(t0 + 0.5 * h), sign * mid_f[kk]};
    const Forcing right{phase(k + 1 == steps ? T : t0 + h), sign * node_f[kk + 1]};
    rk4_step(y, t0, h, left, mid, right);
    renormalize(y, log_scale);
    left = right;
    ++k;
  };

  for (std::size_t next = 0; next < times.size(); ++next) {
    const double t = times[next];
    if (!(t >= 0.0)) throw Error(ErrorKind::domain, "negative time");
    if (next > 0 && t < times[next - 1]) throw Error(ErrorKind::domain, "times must be ascending");
    if (t >= T) {
      while (k < steps) advance();
      // beyond the support (P, Q) are frozen
      out.push_back(to_state(y, log_scale, t, z, order));
      continue;
    }
    const int target = std::min(static_cast<int>(std::floor(t / h)), steps);
    while (k < target) advance();
    // partial step from k h to t, leaving the main state untouched
    Vec<N> tmp = y;
    double ls = log_scale;
    const double t0 = k * h;
    const double r = t - t0;
    if (r > 1e-15 * T) {
      const Forcing mid{phase(t0 + 0.5 * r), sign * f(t0 + 0.5 * r)};
      const Forcing right{phase(t), sign * f(t)};
      rk4_step(tmp, t0, r, left, mid, right);
      renormalize(tmp, ls);
    }
    out.push_back(to_state(tmp, ls, t, z, order));
  }
  return out;
}

}  // namespace

std::vector<EvolutionState> EvolutionSolver::solve_path(cplx z, int order, std::span<const double> times,
                                                        double sign) const {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw Error(ErrorKind::input, "non-finite z");
  switch (order) {
    case 0: return run_path<2>(*f_, steps_, h_, node_f_, mid_f_, z, 0, times, sign);
    case 1: return run_path<4>(*f_, steps_, h_, node_f_, mid_f_, z, 1, times, sign);
    case 2: return run_path<6>(*f_, steps_, h_, node_f_, mid_f_, z, 2, times, sign);
    default: throw Error(ErrorKind::config, "order must be 0, 1 or 2");
  }
}

EvolutionState EvolutionSolver::solve(cplx z, int order, double t_end, double sign) const {
  const double times[1] = {t_end};
  return solve_path(z, order, times, sign).front();
}

// -- transfer ----------------------------------------------------------------

std::vector<TransferCoefficients> transfer_path(const Potential& f, double x, std::span<const double> times,
                                                int steps) {
  if (steps < 2) throw Error(ErrorKind::config, "integrate_transfer needs at least 2 steps");
  const double T = f.support_end();
  const double h = T / steps;
  // columns (G11, G21) and (G12, G22)
  using V = std::array<cplx, 4>;
  auto rhs = [](const V& y, cplx fe, cplx fbe) {
    // fe = e^{-2ixt} f, fbe = e^{2ixt} conj(f)
    return V{fe * y[1], fbe * y[0], fe * y[3], fbe * y[2]};
  };
  auto step = [&](V& y, double t0, double dt) {
    const cplx f0 = f(t0), fm = f(t0 + 0.5 * dt), f1 = f(t0 + dt);
    const cplx p0 = std::polar(1.0, 2.0 * x * t0);
    const cplx pm = std::polar(1.0, 2.0 * x * (t0 + 0.5 * dt));
    const cplx p1 = std::polar(1.0, 2.0 * x * (t0 + dt));
    const V k1 = rhs(y, std::conj(p0) * f0, p0 * std::conj(f0));
    V tmp;
    for (int i = 0; i < 4; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    const V k2 = rhs(tmp, std::conj(pm) * fm, pm * std::conj(fm));
    for (int i = 0; i < 4; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    const V k3 = rhs(tmp, std::conj(pm) * fm, pm * std::conj(fm));
    for (int i = 0; i < 4; ++i) tmp[i] = y[i] + dt * k3[i];
    const V k4 = rhs(tmp, std::conj(p1) * f1, p1 * std::conj(f1));
    for (int i = 0; i < 4; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  };
  auto finish = [&](const V& y, double t) {
    if (!std::isfinite(std::abs(y[1])) || !std::isfinite(std::abs(y[3])))
      throw Error(ErrorKind::numerical, "transfer solution is not finite");
    return TransferCoefficients{y[3], y[1], t, x};
  };

  std::vector<TransferCoefficients> out;
  out.reserve(times.size());
  V y{1.0, 0.0, 0.0, 1.0};
  int k = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (t < 0.0) throw Error(ErrorKind::domain, "negative time");
    if (i > 0 && t < times[i - 1]) throw Error(ErrorKind::domain, "times must be ascending");
    const double tc = std::min(t, T);
    const int target = tc >= T ? steps : static_cast<int>(std::floor(tc / h));
    while (k < target) {
      step(y, k * h, h);
      ++k;
    }
    V tmp = y;
    const double r = tc - k * h;
    if (r > 1e-15 * T) step(tmp, k * h, r);
    out.push_back(finish(tmp, t));
  }
  return out;
}

TransferCoefficients integrate_transfer(const Potential& f, double x, double t_end, int steps) {
  const double times[1] = {t_end};
  return transfer_path(f, x, times, steps).front();
}

TransferCoefficients integrate_transfer(const Potential& f, double x, double t_end, const SolverOptions& options) {
  const int steps = default_steps(f, 2.0 * std::abs(x) + f.max_abs(), f.support_end(), options);
  return integrate_transfer(f, x, t_end, steps);
}

EvolutionState integrate_E(const Potential& f, cplx z, double t_end, int steps, int order) {
  if (steps < 2) throw Error(ErrorKind::config, "integrate_E needs at least 2 steps");
  return EvolutionSolver(f, steps).solve(z, order, t_end);
}

EvolutionState integrate_E(const Potential& f, cplx z, double t_end, int order, const SolverOptions& options) {
  return integrate_E(f, z, t_end, default_steps(f, e_rate(f, z), f.support_end(), options), order);
}

PairState evaluate_pair(const EvolutionSolver& solver, cplx z, double t, int order) {
  PairState p;
  p.E = solver.solve(z, order, t, 1.0);
  p.E_tilde = solver.solve(z, order, t, -1.0);
  // E~ = -i E[-f], hence E~# = +i E#[-f]
  EvolutionState& q = p.E_tilde;
  q.E *= -I;
  q.Ez *= -I;
  q.Ezz *= -I;
  q.E_sharp *= I;
  q.Ez_sharp *= I;
  q.Ezz_sharp *= I;
  const cplx det = (p.E.E * q.E_sharp - p.E.E_sharp * q.E) * std::exp(p.E.log_scale + q.log_scale);
  p.det_residual = std::abs(det - 2.0 * I);
  return p;
}

PairState evaluate_pair(const Potential& f, cplx z, double t, int order, const SolverOptions& options) {
  const EvolutionSolver solver(f, default_steps(f, e_rate(f, z), f.support_end(), options));
  return evaluate_pair(solver, z, t, order);
}

cplx scattering(const EvolutionState& state) {
  // e^{itz} = e^{-t Im z} e^{i t Re z}; combine with log_scale before exponentiating
  const double mag = state.log_scale - state.t * state.z.imag();
  return state.E * std::exp(cplx(mag, state.t * state.z.real()));
}

double gronwall_envelope(const Potential& f, cplx z, double t) {
  return std::exp(t * std::abs(z.imag()) + f.cumulative_l1(t));
}

GronwallIncrement gronwall_increment(const Potential& f, cplx z, double t1, double t2, double E_at_t1_conj) {
  if (t2 < t1) throw Error(ErrorKind::domain, "gronwall_increment needs t1 <= t2");
  const double mass = f.l1_between(t1, t2);
  const double y = z.imag();
  const double ay = std::abs(y);
  GronwallIncrement g;
  g.statement = E_at_t1_conj * std::exp((t2 - t1) * (ay - y) + mass) * mass;
  g.appendix = std::exp((2.0 * t2 - t1) * ay + mass) * mass;
  // |d/dt e^{itz}E| = |f| e^{-t Im z} |E(t, conj z)|, and |E(t, conj z)| grows at most
  // like |E(t1, conj z)| e^{(t-t1)|Im z| + \int_{t1}^t |f|}
  const double exponent = y >= 0.0 ? -t1 * y : (2.0 * t2 - t1) * ay;
  g.derived = E_at_t1_conj * std::exp(exponent + mass) * mass;
  return g;
}

// -- polar flow ------------------------------------------------------------

std::vector<PolarSample> magnitude_phase_flow(const Potential& f, double x, std::span<const double> t_grid,
                                              const SolverOptions& options) {
  const double T = f.support_end();
  const int steps = default_steps(f, e_rate(f, x), T, options);
  const double h = T / steps;
  using V = std::array<double, 2>;
  auto rhs = [x](const V& y, cplx fv) {
    const cplx w = std::conj(fv) * std::polar(1.0, -2.0 * y[1]);
    return V{w.real(), -x + w.imag()};
  };
  auto step = [&](V& y, double t0, double dt) {
    const cplx f0 = f(t0), fm = f(t0 + 0.5 * dt), f1 = f(t0 + dt);
    const V k1 = rhs(y, f0);
    const V k2 = rhs({y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]}, fm);
    const V k3 = rhs({y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]}, fm);
    const V k4 = rhs({y[0] + dt * k3[0], y[1] + dt * k3[1]}, f1);
    for (int i = 0; i < 2; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  };

  const EvolutionSolver solver(f, steps);
  const std::vector<EvolutionState> cartesian = solver.solve_path(x, 0, t_grid);

  std::vector<PolarSample> out;
  V y{0.0, 0.0};
  int k = 0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    const double tc = std::min(t, T);
    const int target = tc >= T ? steps : static_cast<int>(std::floor(tc / h));
    while (k < target) {
      step(y, k * h, h);
      ++k;
    }
    V tmp = y;
    const double r = tc - k * h;
    if (r > 1e-15 * T) step(tmp, k * h, r);
    if (t > T) tmp[1] -= x * (t - T);
    PolarSample p;
    p.t = t;
    p.abs_E = std::exp(tmp[0]);
    p.arg_E = tmp[1];
    const cplx e = cartesian[i].true_E();
    if (std::abs(e) == 0.0 || !std::isfinite(std::abs(e)))
      throw Error(ErrorKind::numerical, "E vanished on the real line");
    p.check_abs = std::abs(e);
    p.check_arg = std::arg(e);
    out.push_back(p);
  }
  return out;
}

LinearizationResidual linearization_residual(const Potential& f, std::span<const double> x_grid, double amplitude,
                                             const SolverOptions& options) {
  LinearizationResidual r;
  if (amplitude == 0.0) return r;
  const Potential g = multiply(f, amplitude);
  for (double x : x_grid) {
    const TransferCoefficients tc = integrate_transfer(g, x, g.support_end(), options);
    const cplx linear = std::conj(partial_fourier(g, g.support_end(), 2.0 * x));
    r.b_residual = std::max(r.b_residual, std::abs(tc.b - linear));
    r.a_residual = std::max(r.a_residual, std::abs(tc.a - 1.0));
  }
  return r;
}

}  // namespace nlft
