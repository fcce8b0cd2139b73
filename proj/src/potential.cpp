#include "nlft/potential.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace nlft {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input: return "input";
    case ErrorKind::domain: return "domain";
    case ErrorKind::config: return "config";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::pole: return "pole";
    case ErrorKind::consistency: return "consistency";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

const char* to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::box: return "box";
    case PotentialKind::truncated_gaussian: return "truncated_gaussian";
    case PotentialKind::chirp: return "chirp";
    case PotentialKind::random_bandlimited: return "random_bandlimited";
    case PotentialKind::custom: return "custom";
  }
  return "custom";
}

PotentialKind potential_kind_from_string(const std::string& name) {
  if (name == "box") return PotentialKind::box;
  if (name == "truncated_gaussian" || name == "gaussian") return PotentialKind::truncated_gaussian;
  if (name == "chirp") return PotentialKind::chirp;
  if (name == "random_bandlimited" || name == "random") return PotentialKind::random_bandlimited;
  if (name == "custom") return PotentialKind::custom;
  throw Error(ErrorKind::config, "unknown potential kind '" + name + "'");
}

namespace {

// Four-point stencil used for cell [i, i+1]; shifted inward at the ends.
std::size_t stencil_start(std::size_t cell, std::size_t n) {
  if (cell == 0) return 0;
  if (cell + 2 >= n) return n - 4;
  return cell - 1;
}

template <typename T>
T interpolate_in_cell(std::span<const T> v, std::size_t cell, double u) {
  const std::size_t n = v.size();
  if (n < 4) {
    if (n == 1) return v[0];
    return v[cell] * (1.0 - u) + v[cell + 1] * u;
  }
  const std::size_t j = stencil_start(cell, n);
  // local coordinate relative to the first stencil node
  const double x = u + static_cast<double>(cell - j);
  const double l0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
  const double l1 = x * (x - 2.0) * (x - 3.0) / 2.0;
  const double l2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
  const double l3 = x * (x - 1.0) * (x - 2.0) / 6.0;
  return v[j] * l0 + v[j + 1] * l1 + v[j + 2] * l2 + v[j + 3] * l3;
}

// \int over the full cell of the stencil interpolant, in units of the step.
template <typename T>
T cell_integral(std::span<const T> v, std::size_t cell) {
  const std::size_t n = v.size();
  if (n < 4) return (v[cell] + v[cell + 1]) * 0.5;
  if (cell == 0) return (9.0 * v[0] + 19.0 * v[1] - 5.0 * v[2] + v[3]) / 24.0;
  if (cell + 2 >= n)
    return (v[n - 4] - 5.0 * v[n - 3] + 19.0 * v[n - 2] + 9.0 * v[n - 1]) / 24.0;
  return (-v[cell - 1] + 13.0 * v[cell] + 13.0 * v[cell + 1] - v[cell + 2]) / 24.0;
}

// \int_{u0}^{u1} of the stencil interpolant on one cell (local coordinates), 3-point Gauss.
template <typename T>
T partial_cell_integral(std::span<const T> v, std::size_t cell, double u0, double u1) {
  static constexpr double nodes[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr double weights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double half = 0.5 * (u1 - u0);
  const double mid = 0.5 * (u1 + u0);
  T acc{};
  for (int k = 0; k < 3; ++k) acc += weights[k] * interpolate_in_cell(v, cell, mid + half * nodes[k]);
  return acc * half;
}

template <typename T>
T integrate_grid_impl(std::span<const T> v, double step, double lo, double hi) {
  if (v.size() < 2) return T{};
  const double end = step * static_cast<double>(v.size() - 1);
  double sign = 1.0;
  if (hi < lo) {
    std::swap(lo, hi);
    sign = -1.0;
  }
  lo = std::clamp(lo, 0.0, end);
  hi = std::clamp(hi, 0.0, end);
  if (hi <= lo) return T{};
  const std::size_t last_cell = v.size() - 2;
  auto cell_of = [&](double t) {
    return std::min(static_cast<std::size_t>(std::floor(t / step)), last_cell);
  };
  const std::size_t c0 = cell_of(lo);
  const std::size_t c1 = cell_of(hi);
  const double u0 = lo / step - static_cast<double>(c0);
  const double u1 = hi / step - static_cast<double>(c1);
  T acc{};
  if (c0 == c1) {
    acc = partial_cell_integral(v, c0, u0, u1);
  } else {
    acc += u0 == 0.0 ? cell_integral(v, c0) : partial_cell_integral(v, c0, u0, 1.0);
    for (std::size_t c = c0 + 1; c < c1; ++c) acc += cell_integral(v, c);
    acc += u1 == 1.0 ? cell_integral(v, c1) : partial_cell_integral(v, c1, 0.0, u1);
  }
  return acc * (step * sign);
}

double simpson(std::span<const double> v, double h) { return detail::simpson(v, h); }

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

Potential::Potential(double support_end, std::vector<cplx> samples, std::optional<PotentialKind> kind)
    : support_end_(support_end), samples_(std::move(samples)), kind_(kind) {
  if (!(support_end_ > 0.0) || !std::isfinite(support_end_))
    throw Error(ErrorKind::input, "potential support end must be positive and finite");
  if (samples_.size() < 2) throw Error(ErrorKind::input, "potential needs at least two samples");
  for (const cplx& v : samples_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw Error(ErrorKind::input, "potential samples must be finite");
  grid_step_ = support_end_ / static_cast<double>(samples_.size() - 1);

  std::vector<double> mags(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    mags[i] = std::abs(samples_[i]);
    max_abs_ = std::max(max_abs_, mags[i]);
    if (samples_[i].imag() != 0.0) is_real_ = false;
  }
  abs_prefix_.assign(samples_.size(), 0.0);
  std::span<const double> m(mags);
  for (std::size_t c = 0; c + 1 < samples_.size(); ++c)
    abs_prefix_[c + 1] = abs_prefix_[c] + grid_step_ * cell_integral(m, c);
  l1_ = norm(*this, 1.0);
  l2_ = norm(*this, 2.0);
}

cplx Potential::operator()(double t) const {
  if (t < 0.0 || t > support_end_) return {0.0, 0.0};
  const std::size_t last_cell = samples_.size() - 2;
  const double pos = t / grid_step_;
  const std::size_t cell = std::min(static_cast<std::size_t>(pos), last_cell);
  const double u = pos - static_cast<double>(cell);
  if (u == 0.0) return samples_[cell];
  return interpolate_in_cell(std::span<const cplx>(samples_), cell, u);
}

double Potential::cumulative_l1(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= support_end_) return abs_prefix_.back();
  const std::size_t last_cell = samples_.size() - 2;
  const double pos = t / grid_step_;
  const std::size_t cell = std::min(static_cast<std::size_t>(pos), last_cell);
  const double u = pos - static_cast<double>(cell);
  if (u == 0.0) return abs_prefix_[cell];
  std::vector<double> local;
  const std::size_t n = samples_.size();
  const std::size_t j = n < 4 ? cell : stencil_start(cell, n);
  const std::size_t width = n < 4 ? 2 : 4;
  local.reserve(width);
  for (std::size_t k = 0; k < width; ++k) local.push_back(std::abs(samples_[j + k]));
  // integrate |f| interpolated on the local stencil
  std::span<const double> view(local);
  const std::size_t local_cell = cell - j;
  return abs_prefix_[cell] + grid_step_ * partial_cell_integral(view, local_cell, 0.0, u);
}

double norm(const Potential& f, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorKind::domain, "norm exponent must be >= 1");
  std::vector<double> v(f.size());
  const auto s = f.samples();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(s[i].real()) || !std::isfinite(s[i].imag()))
      throw Error(ErrorKind::input, "non-finite potential sample");
    v[i] = p == 1.0 ? std::abs(s[i]) : std::pow(std::abs(s[i]), p);
  }
  const double integral = simpson(v, f.grid_step());
  if (integral <= 0.0) return 0.0;
  return p == 1.0 ? integral : std::pow(integral, 1.0 / p);
}

Potential scale(const Potential& f, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw Error(ErrorKind::domain, "scale factor must be positive");
  if (lambda == 1.0) return f;
  std::vector<cplx> out(f.samples().begin(), f.samples().end());
  for (cplx& v : out) v *= lambda;
  // sample t_i of the new grid maps to lambda t_i = old t_i: the grid is reused
  return Potential(f.support_end() / lambda, std::move(out), f.kind());
}

Potential multiply(const Potential& f, cplx factor) {
  std::vector<cplx> out(f.samples().begin(), f.samples().end());
  for (cplx& v : out) v *= factor;
  return Potential(f.support_end(), std::move(out), f.kind());
}

cplx integrate_on_grid(std::span<const cplx> values, double step, double lo, double hi) {
  return integrate_grid_impl(values, step, lo, hi);
}

double integrate_on_grid(std::span<const double> values, double step, double lo, double hi) {
  return integrate_grid_impl(values, step, lo, hi);
}

cplx partial_fourier(const Potential& f, double xi, double s) {
  const double T = f.support_end();
  if (!(xi >= 0.0 && xi <= T)) throw Error(ErrorKind::domain, "partial_fourier: xi outside [0, T]");
  const auto samples = f.samples();
  std::vector<cplx> g(samples.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double t = f.grid_step() * static_cast<double>(i);
    g[i] = samples[i] * std::exp(cplx(0.0, -t * s));
  }
  return integrate_on_grid(std::span<const cplx>(g), f.grid_step(), 0.0, xi);
}

namespace {

void check_interval(const Potential& f, double lo, double hi) {
  if (!(hi > lo)) throw Error(ErrorKind::domain, "degenerate interval");
  if (lo < 0.0 || hi > f.support_end() * (1.0 + 1e-12))
    throw Error(ErrorKind::domain, "interval outside [0, T]");
}

}  // namespace

bool is_sigma_interval(const Potential& f, double lo, double hi, double sigma) {
  check_interval(f, lo, hi);
  if (!(sigma > 0.0 && sigma < 1.0)) throw Error(ErrorKind::domain, "sigma must lie in (0, 1)");
  const cplx integral = integrate_on_grid(f.samples(), f.grid_step(), lo, hi);
  const double mass = f.l1_between(lo, hi);
  return std::abs(integral) >= (1.0 - sigma) * mass;
}

std::array<cplx, 16> sector_integrals(const Potential& f, double lo, double hi, double* mass) {
  check_interval(f, lo, hi);
  std::array<cplx, 16> v{};
  double total = 0.0;
  std::vector<double> nodes;
  nodes.push_back(lo);
  const double h = f.grid_step();
  for (std::size_t i = static_cast<std::size_t>(std::floor(lo / h)) + 1; i < f.size(); ++i) {
    const double t = h * static_cast<double>(i);
    if (t >= hi) break;
    if (t > lo) nodes.push_back(t);
  }
  nodes.push_back(hi);
  const double sector_width = pi / 8.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double left = k > 0 ? nodes[k] - nodes[k - 1] : 0.0;
    const double right = k + 1 < nodes.size() ? nodes[k + 1] - nodes[k] : 0.0;
    const double weight = 0.5 * (left + right);
    const cplx value = f(nodes[k]);
    const double mag = std::abs(value);
    if (mag == 0.0) continue;  // no phase at zeros of f
    double phase = std::arg(value);
    if (phase < 0.0) phase += 2.0 * pi;
    int sector = static_cast<int>(std::floor(phase / sector_width));
    sector = std::clamp(sector, 0, 15);
    v[static_cast<std::size_t>(sector)] += weight * value;
    total += weight * mag;
  }
  if (mass) *mass = total;
  return v;
}

SectorResult dominant_sector(const Potential& f, const SigmaInterval& interval) {
  SectorResult r;
  r.sectors = sector_integrals(f, interval.lo, interval.hi, &r.total_mass);
  double best = -1.0;
  for (int j = 0; j < 16; ++j) {
    const cplx window = r.sectors[static_cast<std::size_t>(j)] + r.sectors[static_cast<std::size_t>((j + 1) % 16)];
    const double value = std::abs(window);
    if (value > best) {
      best = value;
      r.window = j;
    }
  }
  r.phi = r.window * pi / 8.0;
  r.mass_fraction = r.total_mass > 0.0 ? best / r.total_mass : 0.0;
  r.guaranteed_fraction = 1.0 - 3e4 * interval.sigma;
  r.guaranteed = interval.sigma <= default_sigma &&
                 is_sigma_interval(f, interval.lo, interval.hi, interval.sigma);
  return r;
}

std::vector<SigmaInterval> dyadic_sigma_intervals(const Potential& f, int levels, double sigma) {
  std::vector<SigmaInterval> out;
  const double T = f.support_end();
  for (int level = 0; level <= levels; ++level) {
    const int count = 1 << level;
    const double width = T / count;
    for (int k = 0; k < count; ++k) {
      const double lo = k * width;
      const double hi = (k + 1) * width;
      if (f.l1_between(lo, hi) <= 0.0) continue;
      if (!is_sigma_interval(f, lo, hi, sigma)) continue;
      SigmaInterval si{lo, hi, sigma, std::nullopt};
      si.dominant_phase = dominant_sector(f, si).phi;
      out.push_back(si);
    }
  }
  return out;
}

// -- fixtures ---------------------------------------------------------------

std::string fixture_id(const FixtureSpec& spec) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s_T%g_l1%.4g_n%zu_seed%llu", to_string(spec.kind), spec.support_end,
                spec.target_l1, spec.n_samples, static_cast<unsigned long long>(spec.seed));
  return buf;
}

Potential make_fixture(const FixtureSpec& spec) {
  if (!(spec.support_end > 0.0)) throw Error(ErrorKind::config, "fixture T must be positive");
  if (spec.n_samples < 8) throw Error(ErrorKind::config, "fixture needs at least 8 samples");
  if (!(spec.target_l1 >= 0.0)) throw Error(ErrorKind::config, "fixture target l1 must be >= 0");
  const double T = spec.support_end;
  const std::size_t n = spec.n_samples;
  std::vector<cplx> v(n);
  auto time = [&](std::size_t i) { return T * static_cast<double>(i) / static_cast<double>(n - 1); };

  switch (spec.kind) {
    case PotentialKind::box:
    case PotentialKind::custom:
      std::fill(v.begin(), v.end(), cplx(1.0, 0.0));
      break;
    case PotentialKind::truncated_gaussian: {
      const double width = T / 6.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = time(i) - 0.5 * T;
        v[i] = std::exp(-d * d / (2.0 * width * width));
      }
      break;
    }
    case PotentialKind::chirp:
      for (std::size_t i = 0; i < n; ++i) {
        const double tau = time(i) / T;
        v[i] = std::exp(cplx(0.0, 6.0 * tau + 10.0 * tau * tau));
      }
      break;
    case PotentialKind::random_bandlimited: {
      std::uint64_t state = spec.seed;
      auto uniform = [&] { return static_cast<double>(splitmix(state) >> 11) * 0x1.0p-53; };
      constexpr int modes = 8;
      const double bandwidth = 12.0 / T;
      std::array<double, modes> freq{};
      std::array<cplx, modes> coef{};
      for (int k = 0; k < modes; ++k) {
        freq[static_cast<std::size_t>(k)] = bandwidth * (2.0 * uniform() - 1.0);
        const double r = 0.5 + 0.5 * uniform();
        coef[static_cast<std::size_t>(k)] = std::polar(r, 2.0 * pi * uniform());
      }
      for (std::size_t i = 0; i < n; ++i) {
        cplx acc{};
        for (int k = 0; k < modes; ++k)
          acc += coef[static_cast<std::size_t>(k)] * std::exp(cplx(0.0, freq[static_cast<std::size_t>(k)] * time(i)));
        v[i] = acc;
      }
      break;
    }
  }
  Potential raw(T, v, spec.kind);
  const double l1 = raw.l1();
  const double factor = (spec.target_l1 == 0.0 || l1 == 0.0) ? 0.0 : spec.target_l1 / l1;
  for (cplx& x : v) x *= factor;
  return Potential(T, std::move(v), spec.kind);
}

std::vector<FixtureSpec> standard_fixture_specs(double target_l1, double support_end, std::size_t n_samples,
                                                std::uint64_t seed) {
  if (!(target_l1 > 0.0)) throw Error(ErrorKind::config, "target l1 must be positive");
  std::vector<FixtureSpec> specs;
  for (PotentialKind kind : {PotentialKind::box, PotentialKind::truncated_gaussian, PotentialKind::chirp,
                             PotentialKind::random_bandlimited})
    specs.push_back(FixtureSpec{kind, support_end, n_samples, target_l1, seed});
  return specs;
}

std::vector<Potential> standard_potentials(double target_l1, double support_end, std::size_t n_samples,
                                           std::uint64_t seed) {
  std::vector<Potential> out;
  for (const FixtureSpec& spec : standard_fixture_specs(target_l1, support_end, n_samples, seed))
    out.push_back(make_fixture(spec));
  return out;
}

void write_potential_csv(std::ostream& out, const Potential& f) {
  out << "t,re_f,im_f\n";
  const auto s = f.samples();
  const std::size_t n = s.size();
  char buf[96];
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i + 1 == n ? f.support_end()
                                : f.support_end() * static_cast<double>(i) / static_cast<double>(n - 1);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", t, s[i].real(), s[i].imag());
    out << buf;
  }
}

Potential read_potential_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::input, "empty potential CSV");
  if (line != "t,re_f,im_f") throw Error(ErrorKind::input, "potential CSV header must be 't,re_f,im_f'");
  std::vector<cplx> samples;
  double last_t = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double t = 0.0, re = 0.0, im = 0.0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &re, &im) != 3)
      throw Error(ErrorKind::input, "malformed potential CSV row: " + line);
    samples.emplace_back(re, im);
    last_t = t;
  }
  return Potential(last_t, std::move(samples), PotentialKind::custom);
}

std::string fixture_descriptor_json(const FixtureSpec& spec) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(spec.kind);
  j["T"] = spec.support_end;
  j["n_samples"] = spec.n_samples;
  j["target_l1"] = spec.target_l1;
  j["seed"] = spec.seed;
  return j.dump();
}

FixtureSpec fixture_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, std::string("fixture descriptor: ") + e.what());
  }
  FixtureSpec spec;
  try {
    spec.kind = potential_kind_from_string(j.at("kind").get<std::string>());
    spec.support_end = j.value("T", spec.support_end);
    spec.n_samples = j.value("n_samples", spec.n_samples);
    spec.target_l1 = j.value("target_l1", spec.target_l1);
    spec.seed = j.value("seed", spec.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, std::string("fixture descriptor: ") + e.what());
  }
  return spec;
}

}  // namespace nlft
