#include "nlft/zeros.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "nlft/parallel.hpp"

namespace nlft {

const char* to_string(Side side) { return side == Side::left ? "left" : "right"; }

namespace {

// Gauss-Kronrod 7/15 on [-1, 1], nodes x >= 0 (mirrored)
constexpr std::array<double, 8> gk_x = {0.991455371120812639, 0.949107912342758525, 0.864864423359769073,
                                        0.741531185599394440, 0.586087235467691130, 0.405845151377397167,
                                        0.207784955007898468, 0.0};
constexpr std::array<double, 8> gk_w = {0.022935322010529225, 0.063092092629978553, 0.104790010322250184,
                                        0.140653259715525919, 0.169004726639267903, 0.190350578064785410,
                                        0.204432940075298892, 0.209482141084727828};
constexpr std::array<double, 4> g7_w = {0.129484966168869693, 0.279705391489276668, 0.381830050505118945,
                                        0.417959183673469388};  // at gk_x[1], [3], [5], [7]

constexpr double near_contour = -6.9078;  // log(1e-3): a zero within 1e-3/t of the contour

struct Evaluator {
  const EvolutionSolver& solver;
  double t;
  double sign;
  cplx center;
  mutable std::atomic<long> calls{0};

  EvolutionState at(cplx z, int order) const {
    ++calls;
    return solver.solve(z, order, t, sign);
  }
  // log(t |E / E_z|), the Newton distance to the nearest zero in units of 1/t
  double rel(const EvolutionState& st) const { return std::log(t * std::abs(st.E / st.Ez)); }
};

struct Segment {
  cplx dlog{0.0, 0.0};
  std::array<cplx, 4> moment{};  // \int (z - center)^p E_z/E dz, p = 1..4
  double min_rel = std::numeric_limits<double>::infinity();
  bool ok = true;
};

struct Piece {
  Segment kronrod;
  cplx gauss{0.0, 0.0};
};

Piece gk15(const Evaluator& ev, cplx a, cplx b) {
  const cplx m = 0.5 * (a + b), h = 0.5 * (b - a);
  Piece out;
  auto add = [&](cplx z, std::size_t k) {
    const EvolutionState st = ev.at(z, 1);
    const cplx g = st.Ez / st.E;
    out.kronrod.dlog += gk_w[k] * h * g;
    cplx zp = gk_w[k] * h * g;
    for (cplx& m : out.kronrod.moment) m += (zp *= z - ev.center);
    out.kronrod.min_rel = std::min(out.kronrod.min_rel, ev.rel(st));
    if (k % 2 == 1) out.gauss += g7_w[k / 2] * h * g;
  };
  for (std::size_t k = 0; k + 1 < gk_x.size(); ++k) {
    add(m - h * gk_x[k], k);
    add(m + h * gk_x[k], k);
  }
  add(m, gk_x.size() - 1);
  return out;
}

void adaptive(const Evaluator& ev, cplx a, cplx b, int depth, Segment& acc) {
  const Piece p = gk15(ev, a, b);
  // a piece may turn E by a bit more than pi; more than that hints at a zero close by
  const bool converged = std::abs(p.kronrod.dlog - p.gauss) < 1e-7 && std::abs(p.kronrod.dlog.imag()) < 4.0;
  if (converged || depth >= 24) {
    acc.dlog += p.kronrod.dlog;
    for (std::size_t i = 0; i < acc.moment.size(); ++i) acc.moment[i] += p.kronrod.moment[i];
    acc.min_rel = std::min(acc.min_rel, p.kronrod.min_rel);
    if (!converged) acc.ok = false;
    return;
  }
  const cplx m = 0.5 * (a + b);
  adaptive(ev, a, m, depth + 1, acc);
  adaptive(ev, m, b, depth + 1, acc);
}

Segment edge(const Evaluator& ev, cplx a, cplx b, int resolution) {
  const double piece = pi / ev.t;
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / piece - 1e-9))) * resolution;
  Segment acc;
  for (int i = 0; i < n; ++i) {
    const cplx p = a + (b - a) * (static_cast<double>(i) / n);
    const cplx q = i + 1 == n ? b : a + (b - a) * (static_cast<double>(i + 1) / n);
    adaptive(ev, p, q, 0, acc);
  }
  return acc;
}

Segment reversed(Segment s) {
  s.dlog = -s.dlog;
  for (cplx& m : s.moment) m = -m;
  return s;
}

struct Rect {
  double x0, x1, y0, y1;  // y0 < y1 <= 0
};

struct RectResult {
  int winding = 0;
  std::array<cplx, 4> moment{};  // power sums of (zero - center)
  std::array<double, 4> min_rel{};  // bottom, right, top, left
  bool ok = true;
};

// edges in order bottom, right, top, left, counter-clockwise
RectResult combine(const std::array<Segment, 4>& e, const ZeroSearchOptions& o) {
  RectResult out;
  cplx total = 0.0;
  for (int i = 0; i < 4; ++i) {
    total += e[i].dlog;
    for (std::size_t p = 0; p < out.moment.size(); ++p) out.moment[p] += e[i].moment[p];
    out.min_rel[i] = e[i].min_rel;
    out.ok = out.ok && e[i].ok && e[i].min_rel > near_contour;
  }
  const double n = total.imag() / (2.0 * pi);
  out.winding = static_cast<int>(std::lround(n));
  for (cplx& m : out.moment) m /= 2.0 * pi * I;
  if (std::abs(n - out.winding) > o.winding_tol) out.ok = false;
  return out;
}

Segment horizontal(const Evaluator& ev, double x0, double x1, double y, int res) {
  return edge(ev, cplx(x0, y), cplx(x1, y), res);
}
Segment vertical(const Evaluator& ev, double x, double y0, double y1, int res) {
  return edge(ev, cplx(x, y0), cplx(x, y1), res);
}

cplx newton(const Evaluator& ev, cplx z, const ZeroSearchOptions& o) {
  for (int it = 0; it < o.max_newton; ++it) {
    const EvolutionState st = ev.at(z, 1);
    if (st.Ez == cplx(0.0)) throw Error(ErrorKind::convergence, "newton: vanishing derivative");
    const cplx dz = st.E / st.Ez;
    z -= dz;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
    if (std::abs(dz) * ev.t < o.newton_tol) return z;
  }
  std::ostringstream msg;
  msg << "newton did not converge from " << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i";
  throw Error(ErrorKind::convergence, msg.str());
}

// roots of the monic polynomial with the given power sums (Newton's identities)
std::vector<cplx> power_sum_roots(const std::array<cplx, 4>& p, int n) {
  std::array<cplx, 5> e{};
  e[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    cplx acc = 0.0;
    for (int i = 1; i <= k; ++i) acc += (i % 2 == 1 ? 1.0 : -1.0) * e[k - i] * p[i - 1];
    e[k] = acc / static_cast<double>(k);
  }
  if (n == 1) return {e[1]};
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  // z^n = e1 z^{n-1} - e2 z^{n-2} + ...
  for (int k = 1; k <= n; ++k) companion(0, k - 1) = (k % 2 == 1 ? 1.0 : -1.0) * e[k];
  const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, false);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::numerical, "power_sum_roots: eigen solver failed");
  std::vector<cplx> out(n);
  for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()(i);
  return out;
}

struct NearContour {};

// Zeros inside r with known winding; splits until each piece holds one zero.
void resolve(const Evaluator& ev, const Rect& r, const RectResult& rr, const ZeroSearchOptions& o, int level,
             std::vector<cplx>& out) {
  if (rr.winding <= 0) return;
  const double margin = 1e-9 / ev.t;
  if (rr.winding <= static_cast<int>(rr.moment.size())) {
    // zeros from the power sums, then Newton; a failure falls back to splitting
    try {
      std::vector<cplx> zs = power_sum_roots(rr.moment, rr.winding);
      bool good = true;
      for (cplx& z : zs) {
        z = newton(ev, z + ev.center, o);
        good = good && z.real() >= r.x0 - margin && z.real() <= r.x1 + margin && z.imag() >= r.y0 - margin &&
               z.imag() <= r.y1 + margin;
      }
      for (std::size_t i = 0; i < zs.size(); ++i)
        for (std::size_t j = i + 1; j < zs.size(); ++j) good = good && std::abs(zs[i] - zs[j]) * ev.t > 1e-6;
      if (good) {
        out.insert(out.end(), zs.begin(), zs.end());
        return;
      }
    } catch (const Error&) {
      if (level > 40) throw;
    }
  }
  if (level > 40) throw Error(ErrorKind::consistency, "locate_zeros: subdivision did not separate the zeros");
  const bool split_x = (r.x1 - r.x0) >= (r.y1 - r.y0);
  const double mid = split_x ? 0.5 * (r.x0 + r.x1) : 0.5 * (r.y0 + r.y1);
  const double span = split_x ? r.x1 - r.x0 : r.y1 - r.y0;
  const double nudge = std::min(pi / (20.0 * ev.t), 0.2 * span);
  const int res = o.resolution;
  for (int attempt = 0; attempt < 5; ++attempt) {
    const double offset = nudge * ((attempt + 1) / 2) * (attempt % 2 == 1 ? 1.0 : -1.0);
    const double c = mid + offset;
    Rect a, b;
    RectResult ra, rb;
    if (split_x) {
      a = {r.x0, c, r.y0, r.y1};
      b = {c, r.x1, r.y0, r.y1};
      const Segment line = vertical(ev, c, r.y0, r.y1, res);
      ra = combine({horizontal(ev, r.x0, c, r.y0, res), line, horizontal(ev, c, r.x0, r.y1, res),
                    vertical(ev, r.x0, r.y1, r.y0, res)},
                   o);
      if (!ra.ok) continue;
      rb = combine({horizontal(ev, c, r.x1, r.y0, res), vertical(ev, r.x1, r.y0, r.y1, res),
                    horizontal(ev, r.x1, c, r.y1, res), reversed(line)},
                   o);
    } else {
      a = {r.x0, r.x1, r.y0, c};
      b = {r.x0, r.x1, c, r.y1};
      const Segment line = horizontal(ev, r.x0, r.x1, c, res);
      ra = combine({horizontal(ev, r.x0, r.x1, r.y0, res), vertical(ev, r.x1, r.y0, c, res), reversed(line),
                    vertical(ev, r.x0, c, r.y0, res)},
                   o);
      if (!ra.ok) continue;
      rb = combine({line, vertical(ev, r.x1, c, r.y1, res), horizontal(ev, r.x1, r.x0, r.y1, res),
                    vertical(ev, r.x0, r.y1, c, res)},
                   o);
    }
    if (!rb.ok) continue;
    if (ra.winding + rb.winding != rr.winding) continue;
    std::vector<cplx> local;
    resolve(ev, a, ra, o, level + 1, local);
    resolve(ev, b, rb, o, level + 1, local);
    out.insert(out.end(), local.begin(), local.end());
    return;
  }
  throw NearContour{};
}

ZeroRecord make_record(const Evaluator& ev, cplx z, double s, bool tilde) {
  const EvolutionState st = ev.at(z, 0);
  ZeroRecord r;
  r.z0 = z;
  r.t = ev.t;
  r.s = s;
  r.side = z.real() < s ? Side::left : Side::right;
  r.X = ev.t * (z.real() - s);
  r.Y = ev.t * std::abs(z.imag());
  // E~# = +i E#[-f]
  const cplx es = tilde ? I * st.E_sharp : st.E_sharp;
  r.alpha = -I * std::exp(-I * std::arg(es));
  r.tilde = tilde;
  return r;
}

void rank_records(std::vector<ZeroRecord>& zs, double s) {
  std::sort(zs.begin(), zs.end(), [s](const ZeroRecord& a, const ZeroRecord& b) {
    const double da = std::abs(a.z0 - s), db = std::abs(b.z0 - s);
    if (std::abs(da - db) > 1e-12) return da < db;
    return a.z0.real() < b.z0.real();
  });
  for (std::size_t i = 0; i < zs.size(); ++i) zs[i].rank = static_cast<int>(i);
}

int search_steps(const Potential& f, double reach, const SolverOptions& o) {
  return default_steps(f, 2.0 * reach + f.max_abs(), f.support_end(), o);
}

}  // namespace

ZeroScan locate_zeros(const Potential& f, double t, double s, int count, const ZeroSearchOptions& o, bool tilde) {
  if (!(t > 0.0)) throw Error(ErrorKind::domain, "locate_zeros needs t > 0");
  if (count < 1) throw Error(ErrorKind::config, "locate_zeros needs count >= 1");
  double depth = o.depth_cap > 0.0 ? o.depth_cap : 8.0 / t;
  if (depth * t > 20.0 + 1e-12) throw Error(ErrorKind::config, "locate_zeros: depth cap beyond t|Im z| = 20");
  const double W = (count + 2) * pi / t;
  const EvolutionSolver solver(f, search_steps(f, std::abs(s) + W + depth + 1.0 / t, o.solver));
  const Evaluator ev{solver, t, tilde ? -1.0 : 1.0, cplx(s, -0.5 * depth)};

  // vertical strips of width pi/t sharing their sides; a side or the floor
  // passing too close to a zero is moved by pi/(20t)
  const int tiles = 2 * (count + 2);
  const int res = o.resolution;
  std::vector<double> xb(tiles + 1);
  for (int k = 0; k <= tiles; ++k) xb[k] = s - W + k * pi / t;
  const double nudge = pi / (20.0 * t);
  std::vector<Segment> sides(tiles + 1), floors(tiles), tops(tiles);
  parallel_for(static_cast<std::size_t>(tiles), [&](std::size_t k) {
    tops[k] = horizontal(ev, xb[k + 1], xb[k], 0.0, res);
  });
  auto bad = [](const Segment& e) { return !e.ok || e.min_rel <= near_contour; };
  for (int attempt = 0;; ++attempt) {
    parallel_for(static_cast<std::size_t>(tiles + 1),
                 [&](std::size_t k) { sides[k] = vertical(ev, xb[k], -depth, 0.0, res); });
    std::vector<int> moved;
    for (int k = 0; k <= tiles; ++k)
      if (bad(sides[k])) moved.push_back(k);
    if (moved.empty()) break;
    if (attempt >= 4) throw Error(ErrorKind::consistency, "locate_zeros: tile side keeps meeting a zero");
    for (int k : moved) xb[k] += (attempt % 2 == 0 ? 1.0 : -2.0) * nudge;
    // tops depend on xb too
    parallel_for(static_cast<std::size_t>(tiles), [&](std::size_t k) {
      tops[k] = horizontal(ev, xb[k + 1], xb[k], 0.0, res);
    });
  }
  for (int attempt = 0;; ++attempt) {
    parallel_for(static_cast<std::size_t>(tiles),
                 [&](std::size_t k) { floors[k] = horizontal(ev, xb[k], xb[k + 1], -depth, res); });
    if (std::none_of(floors.begin(), floors.end(), bad)) break;
    if (attempt >= 4) throw Error(ErrorKind::consistency, "locate_zeros: floor keeps meeting a zero");
    depth -= nudge;
    parallel_for(static_cast<std::size_t>(tiles + 1),
                 [&](std::size_t k) { sides[k] = vertical(ev, xb[k], -depth, 0.0, res); });
  }
  std::vector<RectResult> tile(tiles);
  for (int k = 0; k < tiles; ++k) tile[k] = combine({floors[k], sides[k + 1], tops[k], reversed(sides[k])}, o);

  ZeroScan scan;
  scan.half_width = W;
  scan.depth = depth;
  std::vector<std::vector<cplx>> found(tiles);
  parallel_for(static_cast<std::size_t>(tiles), [&](std::size_t k) {
    if (!tile[k].ok) {
      std::ostringstream msg;
      msg << "locate_zeros: contour of tile [" << xb[k] << ", " << xb[k + 1] << "] passes through a zero";
      throw Error(ErrorKind::consistency, msg.str());
    }
    try {
      resolve(ev, Rect{xb[k], xb[k + 1], -depth, 0.0}, tile[k], o, 0, found[k]);
    } catch (const NearContour&) {
      throw Error(ErrorKind::consistency, "locate_zeros: could not place a split line away from the zeros");
    }
  });
  for (int k = 0; k < tiles; ++k) {
    scan.winding += tile[k].winding;
    for (cplx z : found[k]) scan.zeros.push_back(make_record(ev, z, s, tilde));
  }
  // distinct zeros only
  for (std::size_t i = 0; i < scan.zeros.size(); ++i)
    for (std::size_t j = i + 1; j < scan.zeros.size(); ++j)
      if (std::abs(scan.zeros[i].z0 - scan.zeros[j].z0) * t < 1e-8)
        throw Error(ErrorKind::consistency, "locate_zeros: two tiles refined to the same zero");
  if (static_cast<int>(scan.zeros.size()) != scan.winding) {
    std::ostringstream msg;
    msg << "locate_zeros: winding " << scan.winding << " but " << scan.zeros.size() << " refined zeros";
    throw Error(ErrorKind::consistency, msg.str());
  }
  for (const ZeroRecord& z : scan.zeros)
    if (!(z.z0.imag() < 0.0)) throw Error(ErrorKind::consistency, "locate_zeros: zero off the lower half-plane");
  rank_records(scan.zeros, s);
  scan.evaluations = ev.calls.load();
  return scan;
}

ZeroRecord refine_zero(const Potential& f, double t, double s, cplx guess, const ZeroSearchOptions& o, bool tilde) {
  const EvolutionSolver solver(f, search_steps(f, std::abs(guess.real()) + std::abs(guess.imag()) + 1.0 / t, o.solver));
  const Evaluator ev{solver, t, tilde ? -1.0 : 1.0, guess};
  return make_record(ev, newton(ev, guess, o), s, tilde);
}

// -- theta -------------------------------------------------------------------

ThetaJet theta_jet(const EvolutionState& st) {
  if (st.order < 2) throw Error(ErrorKind::config, "theta_jet needs a second-order state");
  const cplx E = st.E, Es = st.E_sharp;
  if (std::abs(E) <= 1e-8 * (std::abs(E) + std::abs(Es))) throw Error(ErrorKind::pole, "theta_jet: E vanishes");
  ThetaJet j;
  j.theta = Es / E;
  const cplx w = st.Ez_sharp * E - Es * st.Ez;  // Wronskian-type numerator
  j.theta_z = w / (E * E);
  j.theta_zz = (st.Ezz_sharp * E - Es * st.Ezz) / (E * E) - 2.0 * st.Ez * w / (E * E * E);
  return j;
}

ThetaJet theta_jet(const Potential& f, double t, cplx z, const SolverOptions& options, bool tilde) {
  const EvolutionSolver solver(f, default_steps(f, e_rate(f, z), f.support_end(), options));
  EvolutionState st = solver.solve(z, 2, t, tilde ? -1.0 : 1.0);
  if (tilde) {
    // E~ = -i E[-f], E~# = i E#[-f]; theta~ = -E#[-f]/E[-f]
    st.E_sharp = -st.E_sharp;
    st.Ez_sharp = -st.Ez_sharp;
    st.Ezz_sharp = -st.Ezz_sharp;
  }
  return theta_jet(st);
}

ThetaJet theta_jet_at_conjugate(const EvolutionState& st) {
  if (st.order < 2) throw Error(ErrorKind::config, "theta_jet_at_conjugate needs a second-order state");
  // at conj(zeta): E = conj E#(zeta), E_z = conj E#_z(zeta), E#_z = conj E_z(zeta), E#_zz = conj E_zz(zeta)
  const cplx E = std::conj(st.E_sharp), Ez = std::conj(st.Ez_sharp);
  const cplx Esz = std::conj(st.Ez), Eszz = std::conj(st.Ezz);
  const cplx Es = std::conj(st.E);
  ThetaJet j;
  j.theta = Es / E;
  j.theta_z = (Esz * E - Es * Ez) / (E * E);
  j.theta_zz = (Eszz * E - Es * std::conj(st.Ezz_sharp)) / (E * E) - 2.0 * Ez * (Esz * E - Es * Ez) / (E * E * E);
  return j;
}

// -- Riccati tracking --------------------------------------------------------

namespace {

struct Tracker {
  const Potential& f;
  const EvolutionSolver& solver;
  double sign;

  cplx velocity(double t, cplx zeta) const {
    const EvolutionState st = solver.solve(zeta, 1, t, sign);
    if (st.Ez == cplx(0.0)) throw Error(ErrorKind::numerical, "track_zero: E_z vanishes");
    return -std::conj(sign * f(t)) * st.E_sharp / st.Ez;
  }
  cplx rk4(double t, cplx z, double h) const {
    const cplx k1 = velocity(t, z);
    const cplx k2 = velocity(t + 0.5 * h, z + 0.5 * h * k1);
    const cplx k3 = velocity(t + 0.5 * h, z + 0.5 * h * k2);
    const cplx k4 = velocity(t + h, z + h * k3);
    return z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  cplx anchor(double t, cplx z) const {
    for (int it = 0; it < 50; ++it) {
      const EvolutionState st = solver.solve(z, 1, t, sign);
      const cplx dz = st.E / st.Ez;
      z -= dz;
      if (std::abs(dz) * t < 1e-13) return z;
    }
    throw Error(ErrorKind::convergence, "track_zero: anchor diverged");
  }
};

int tracking_steps(const Potential& f, cplx z, double t1, const SolverOptions& o) {
  return default_steps(f, 2.0 * (std::abs(z.real()) + std::abs(z.imag()) + 2.0 / t1) + f.max_abs(), f.support_end(),
                       o);
}

}  // namespace

ZeroPath track_zero(const Potential& f, double t1, double t2, const ZeroRecord& seed, int steps,
                    const TrackOptions& o) {
  if (!(t1 > 0.0) || !(t2 >= t1)) throw Error(ErrorKind::domain, "track_zero needs 0 < t1 <= t2");
  if (steps < 1) throw Error(ErrorKind::config, "track_zero needs steps >= 1");
  if (std::abs(seed.t - t1) > 1e-12 * t1) throw Error(ErrorKind::config, "track_zero: seed is not at t1");
  const double sign = seed.tilde ? -1.0 : 1.0;
  const EvolutionSolver solver(f, tracking_steps(f, seed.z0, t1, o.solver));
  const Tracker tr{f, solver, sign};

  ZeroPath path;
  path.tilde = seed.tilde;
  path.s = seed.s;
  auto record = [&](double t, cplx z, double residual) {
    const EvolutionState st = solver.solve(z, 2, t, sign);
    EvolutionState adj = st;
    if (seed.tilde) {
      adj.E_sharp = -st.E_sharp;
      adj.Ez_sharp = -st.Ez_sharp;
      adj.Ezz_sharp = -st.Ezz_sharp;
    }
    const ThetaJet j = theta_jet_at_conjugate(adj);
    const double Y = t * std::abs(z.imag());
    if (std::abs(j.theta_z) < 1e-3 * t * std::exp(-2.0 * Y))
      throw Error(ErrorKind::numerical, "track_zero: near-degenerate flow, theta_z too small");
    path.times.push_back(t);
    path.positions.push_back(z);
    path.theta_z.push_back(j.theta_z);
    path.theta_zz.push_back(j.theta_zz);
    path.anchor_residuals.push_back(residual);
  };

  cplx z = o.anchor ? tr.anchor(t1, seed.z0) : seed.z0;
  record(t1, z, std::abs(z - seed.z0));
  const double H = (t2 - t1) / steps;
  for (int k = 0; k < steps; ++k) {
    const double ta = t1 + k * H;
    const double tb = k + 1 == steps ? t2 : t1 + (k + 1) * H;
    if (!o.anchor) {
      z = tr.rk4(ta, z, tb - ta);
      record(tb, z, 0.0);
      continue;
    }
    // anchored: halve until the Newton correction is below 10% of the step displacement
    double t = ta;
    int level = 0;
    double residual = 0.0;
    while (t < tb - 1e-15 * tb) {
      const double h = std::min((tb - ta) / std::ldexp(1.0, level), tb - t);
      const cplx pred = tr.rk4(t, z, h);
      const cplx fixed = tr.anchor(t + h, pred);
      const double corr = std::abs(fixed - pred);
      if (corr > 0.1 * std::abs(pred - z) + 1e-10 / (t + h) && level < o.max_halvings) {
        ++level;
        ++path.halvings;
        continue;
      }
      residual = std::max(residual, corr);
      z = fixed;
      t += h;
    }
    record(tb, z, residual);
  }
  return path;
}

OrderEstimate riccati_order(const Potential& f, double t1, double t2, const ZeroRecord& seed, int steps,
                            const SolverOptions& options) {
  TrackOptions o;
  o.anchor = false;
  o.solver = options;
  const cplx a = track_zero(f, t1, t2, seed, steps, o).xi2();
  const cplx b = track_zero(f, t1, t2, seed, 2 * steps, o).xi2();
  const cplx c = track_zero(f, t1, t2, seed, 4 * steps, o).xi2();
  OrderEstimate e;
  e.diff_coarse = std::abs(a - b);
  e.diff_fine = std::abs(b - c);
  e.endpoint = c;
  e.order = e.diff_fine > 0.0 ? std::log2(e.diff_coarse / e.diff_fine) : std::numeric_limits<double>::infinity();
  return e;
}

// -- regions -----------------------------------------------------------------

RegionFlags region_flags(const ZeroRecord& z, const ZeroRecord& zt, double eps, double eps_tilde, double D) {
  if (!(D > 0.0)) throw Error(ErrorKind::config, "region_flags needs D > 0");
  RegionFlags r;
  r.D = D;
  r.eps = eps;
  r.eps_tilde = eps_tilde;
  r.mu = eps + eps_tilde;
  r.Y = z.t * std::abs(z.z0.imag());
  r.Y_tilde = zt.t * std::abs(zt.z0.imag());
  r.dist = z.t * std::abs(z.z0 - z.s);
  r.dist_tilde = zt.t * std::abs(zt.z0 - zt.s);
  auto margin = [](double lhs, double rhs) {
    return rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
  };
  const double lhs = std::exp(2.0 * z.t * z.z0.imag());
  const double lhs_t = std::exp(2.0 * zt.t * zt.z0.imag());
  const double rhs = D * std::pow(r.dist, 1.5) * eps;
  const double rhs_t = D * std::pow(r.dist_tilde, 1.5) * eps_tilde;
  const double lhs_x = std::exp(4.0 * z.t * z.z0.imag());
  const double rhs_x = D * std::sqrt(z.t * std::abs(z.z0.imag())) * r.mu;
  r.in_Omega = lhs >= rhs;
  r.in_Omega_tilde = lhs_t >= rhs_t;
  r.in_Xi = r.in_Omega && r.in_Omega_tilde && lhs_x >= rhs_x;
  r.omega_margin = margin(lhs, rhs);
  r.omega_tilde_margin = margin(lhs_t, rhs_t);
  r.xi_margin = margin(lhs_x, rhs_x);
  return r;
}

// -- x0, beta ----------------------------------------------------------------

X0Beta x0_beta(const Potential& f, double t, double s, const SolverOptions& options) {
  if (!(t > 0.0)) throw Error(ErrorKind::domain, "x0_beta needs t > 0");
  const double R = 4.0 * pi / t;
  const EvolutionSolver solver(f, default_steps(f, e_rate(f, std::abs(s) + R), f.support_end(), options));
  const int n = 128;
  const double h = 2.0 * R / n;
  std::vector<double> xs(n + 1);
  std::vector<cplx> E(n + 1);
  for (int i = 0; i <= n; ++i) {
    xs[i] = s - R + h * i;
    E[i] = solver.solve(xs[i], 0, t).E;  // scale is positive, signs survive
  }
  std::optional<double> best;
  for (int i = 0; i < n; ++i) {
    const double a = E[i].imag(), b = E[i + 1].imag();
    if (a * b > 0.0 || (E[i].real() <= 0.0 && E[i + 1].real() <= 0.0)) continue;
    double lo = xs[i], hi = xs[i + 1];
    double flo = a;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = solver.solve(mid, 0, t).E.imag();
      if ((fm <= 0.0) == (flo <= 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    const double x = 0.5 * (lo + hi);
    if (solver.solve(x, 0, t).E.real() <= 0.0) continue;
    if (!best || std::abs(x - s) < std::abs(*best - s) - 1e-14) best = x;
  }
  if (!best) throw Error(ErrorKind::numerical, "x0_beta: no point with E(t,x) > 0 within 4 pi/t of s");
  X0Beta out;
  out.x0 = *best;
  out.beta = std::exp(I * t * out.x0);
  out.E_at_x0 = solver.solve(out.x0, 0, t).true_E();
  return out;
}

}  // namespace nlft
