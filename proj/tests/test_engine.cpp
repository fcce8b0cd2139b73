#include <doctest.h>

#include <cmath>
#include <vector>

#include "nlft/engine.hpp"

using namespace nlft;

namespace {

Potential constant(cplx c, double T = 1.0, std::size_t n = 1025) {
  return Potential(T, std::vector<cplx>(n, c));
}

// (E, E#) for constant c on [0, t]: y(t) = (cosh(kt) + sinh(kt)/k A) y0,
// A = [[-iz, conj c], [c, iz]], k^2 = |c|^2 - z^2.
cplx closed_E(cplx c, cplx z, double t) {
  const cplx k = std::sqrt(std::norm(c) - z * z);
  const cplx sk = std::abs(k) < 1e-12 ? cplx(t) : std::sinh(k * t) / k;
  return std::cosh(k * t) + sk * (-I * z + std::conj(c));
}

cplx closed_E_sharp(cplx c, cplx z, double t) {
  const cplx k = std::sqrt(std::norm(c) - z * z);
  const cplx sk = std::abs(k) < 1e-12 ? cplx(t) : std::sinh(k * t) / k;
  return std::cosh(k * t) + sk * (c + I * z);
}

// five-point central difference of the closed form in z
template <typename F>
cplx d1(F fn, cplx z, double h) {
  return (-fn(z + 2.0 * h) + 8.0 * fn(z + h) - 8.0 * fn(z - h) + fn(z - 2.0 * h)) / (12.0 * h);
}

template <typename F>
cplx d2(F fn, cplx z, double h) {
  return (-fn(z + 2.0 * h) + 16.0 * fn(z + h) - 30.0 * fn(z) + 16.0 * fn(z - h) - fn(z - 2.0 * h)) / (12.0 * h * h);
}

}  // namespace

TEST_CASE("zero potential: free evolution") {
  const Potential zero = constant(0.0);
  for (double x : {-5.0, 0.0, 3.0}) {
    for (double t : {0.3, 1.0, 2.5}) {
      const TransferCoefficients tc = integrate_transfer(zero, x, t);
      CHECK(std::abs(tc.a - 1.0) == 0.0);
      CHECK(std::abs(tc.b) == 0.0);
    }
  }
  for (cplx z : {cplx(0.7, 0.0), cplx(-2.0, 1.5), cplx(1.0, -3.0)}) {
    for (double t : {0.5, 1.0, 1.7}) {
      const EvolutionState s = integrate_E(zero, z, t, 2);
      const cplx e = std::exp(-I * t * z);
      CHECK(std::abs(s.true_E() - e) < 1e-12 * std::abs(e));
      CHECK(std::abs(s.true_Ez() + I * t * e) < 1e-12 * std::abs(e) * t);
      CHECK(std::abs(s.true_Ezz() + t * t * e) < 1e-12 * std::abs(e) * t * t);
      CHECK(std::abs(scattering(s) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("constant potential oracles") {
  const double c = 0.3;
  const Potential f = constant(c);
  for (double t : {0.5, 1.0}) {
    const TransferCoefficients tc = integrate_transfer(f, 0.0, t);
    CHECK(std::abs(tc.a - std::cosh(c * t)) < 1e-9 * std::cosh(c * t));
    CHECK(std::abs(tc.b - std::sinh(c * t)) < 1e-9 * std::sinh(c * t));
  }
  const EvolutionState s = integrate_E(f, 0.0, 1.0, 0);
  CHECK(std::abs(s.true_E() - std::exp(c)) < 1e-10);

  // complex constant, complex z, with derivatives against the matrix exponential
  const cplx cc(0.25, -0.15);
  const Potential g = constant(cc);
  for (cplx z : {cplx(2.0, 0.5), cplx(-1.0, -2.0), cplx(6.0, -4.0)}) {
    const double t = 0.8;
    const EvolutionState st = integrate_E(g, z, t, 2);
    auto E = [&](cplx w) { return closed_E(cc, w, t); };
    auto Es = [&](cplx w) { return closed_E_sharp(cc, w, t); };
    const double scale = std::abs(E(z)) + std::abs(Es(z));
    CHECK(std::abs(st.true_E() - E(z)) < 1e-9 * scale);
    CHECK(std::abs(st.true_E_sharp() - Es(z)) < 1e-9 * scale);
    CHECK(std::abs(st.true_Ez() - d1(E, z, 1e-3)) < 1e-8 * scale);
    CHECK(std::abs(st.true_Ez_sharp() - d1(Es, z, 1e-3)) < 1e-8 * scale);
    CHECK(std::abs(st.true_Ezz() - d2(E, z, 1e-3)) < 1e-6 * scale);
    CHECK(std::abs(st.true_Ezz_sharp() - d2(Es, z, 1e-3)) < 1e-6 * scale);
  }
}

TEST_CASE("deep lower half-plane stays finite") {
  const Potential zero = constant(0.0);
  const EvolutionState s = integrate_E(zero, cplx(0.5, -20.0), 1.0, 2);
  CHECK(s.log_abs_E() == doctest::Approx(-20.0).epsilon(1e-12));
  CHECK(std::abs(s.E_sharp) <= 1e6);
  CHECK(std::abs(s.E) <= 1e6);
  const Potential f = make_fixture({PotentialKind::chirp, 1.0, 1025, 0.4, 7});
  const EvolutionState d = integrate_E(f, cplx(3.0, -20.0), 1.0, 2);
  CHECK(std::isfinite(d.log_abs_E()));
  CHECK(std::abs(d.E_sharp) <= 1e6);
}

TEST_CASE("identities on fixtures") {
  const std::vector<double> xs = {-12.0, -3.3, -0.5, 0.0, 0.9, 4.0, 10.0};
  const std::vector<double> ts = {0.25, 0.5, 0.75, 1.0, 1.5};
  for (const Potential& f : standard_potentials(0.5)) {
    for (double x : xs) {
      for (const TransferCoefficients& tc : transfer_path(f, x, ts, default_steps(f, 2 * std::abs(x) + f.max_abs(), 1.0))) {
        CHECK(std::abs(std::norm(tc.a) - std::norm(tc.b) - 1.0) < 1e-8);
      }
      for (double t : ts) {
        const PairState p = evaluate_pair(f, x, t, 1);
        CHECK(p.det_residual < 1e-7);
        CHECK(std::abs(p.E.true_E_sharp() - std::conj(p.E.true_E())) < 1e-9);
        const cplx a = std::exp(I * t * x) / 2.0 * (p.E.true_E() + I * p.E_tilde.true_E());
        const TransferCoefficients tc = integrate_transfer(f, x, t);
        CHECK(std::abs(a - tc.a) < 1e-8);
      }
    }
    // Hermite-Biehler and the determinant off the real line
    for (cplx z : {cplx(0.3, 0.4), cplx(-2.0, 2.0), cplx(5.0, 0.05)}) {
      for (double t : {0.5, 1.0}) {
        const EvolutionState up = integrate_E(f, z, t, 0);
        const EvolutionState down = integrate_E(f, std::conj(z), t, 0);
        CHECK(std::abs(up.true_E()) >= std::abs(down.true_E()) - 1e-9);
        CHECK(std::abs(up.true_E_sharp() - std::conj(down.true_E())) < 1e-9 * std::abs(up.true_E()));
        CHECK(evaluate_pair(f, z, t, 0).det_residual < 1e-7);
      }
    }
  }
}

TEST_CASE("step halving converges at fourth order") {
  const Potential f = make_fixture({PotentialKind::truncated_gaussian, 1.0, 1025, 0.5, 7});
  const cplx z(4.0, -1.5);
  const int n = 64;
  const cplx e1 = integrate_E(f, z, 1.0, n, 0).true_E();
  const cplx e2 = integrate_E(f, z, 1.0, 2 * n, 0).true_E();
  const cplx e4 = integrate_E(f, z, 1.0, 4 * n, 0).true_E();
  const double order = std::log2(std::abs(e1 - e2) / std::abs(e2 - e4));
  CHECK(order >= 3.5);

  const TransferCoefficients a1 = integrate_transfer(f, 6.0, 1.0, n);
  const TransferCoefficients a2 = integrate_transfer(f, 6.0, 1.0, 2 * n);
  const TransferCoefficients a4 = integrate_transfer(f, 6.0, 1.0, 4 * n);
  CHECK(std::log2(std::abs(a1.b - a2.b) / std::abs(a2.b - a4.b)) >= 3.5);
}

TEST_CASE("coefficients freeze beyond the support") {
  const Potential f = make_fixture({PotentialKind::random_bandlimited, 1.0, 1025, 0.4, 5});
  const std::vector<double> ts = {1.0, 1.3, 2.0, 4.0};
  const auto path = transfer_path(f, 2.5, ts, 1024);
  for (const auto& tc : path) {
    CHECK(std::abs(tc.a - path[0].a) < 1e-12);
    CHECK(std::abs(tc.b - path[0].b) < 1e-12);
  }
  const EvolutionSolver solver(f, 1024);
  const auto states = solver.solve_path(1.7, 1, ts);
  for (const auto& s : states) CHECK(std::abs(std::abs(s.true_E()) - std::abs(states[0].true_E())) < 1e-12);
  // jet beyond T equals the jet of the free continuation
  const cplx z(1.0, -0.7);
  const EvolutionState at_T = solver.solve(z, 2, 1.0);
  const EvolutionState later = solver.solve(z, 2, 1.6);
  const double dt = 0.6;
  const cplx m = std::exp(-I * z * dt);
  CHECK(std::abs(later.true_E() - m * at_T.true_E()) < 1e-12 * std::abs(later.true_E()));
  CHECK(std::abs(later.true_Ez() - m * (at_T.true_Ez() - I * dt * at_T.true_E())) < 1e-11 * std::abs(later.true_Ez()));
}

TEST_CASE("gronwall envelopes") {
  for (const Potential& f : standard_potentials(0.5)) {
    double worst = 0.0;
    for (cplx z : {cplx(0.0, 0.0), cplx(3.0, 2.0), cplx(-4.0, -3.0), cplx(1.0, -8.0), cplx(-0.5, 6.0)}) {
      for (double t : {0.2, 0.6, 1.0, 1.4}) {
        const EvolutionState s = integrate_E(f, z, t, 0);
        worst = std::max(worst, std::exp(s.log_abs_E() - std::log(gronwall_envelope(f, z, t))));
      }
    }
    CHECK(worst <= 1.0 + 1e-8);

    // derived increment bound always holds
    for (cplx z : {cplx(2.0, 1.0), cplx(-1.0, -2.0), cplx(0.5, 0.0)}) {
      const double t1 = 0.3, t2 = 0.7;
      const EvolutionSolver solver(f, default_steps(f, e_rate(f, z), 1.0));
      const cplx inc = scattering(solver.solve(z, 0, t2)) - scattering(solver.solve(z, 0, t1));
      const double e_conj = std::abs(solver.solve(std::conj(z), 0, t1).true_E());
      const GronwallIncrement g = gronwall_increment(f, z, t1, t2, e_conj);
      CHECK(std::abs(inc) <= g.derived * (1.0 + 1e-8));
    }
  }
  const Potential zero = constant(0.0);
  CHECK(gronwall_envelope(zero, cplx(0, -2), 1.5) == doctest::Approx(std::exp(3.0)));
  const GronwallIncrement g = gronwall_increment(zero, cplx(1, -1), 0.2, 0.9, 1.0);
  CHECK(g.statement == 0.0);
  CHECK(g.derived == 0.0);
}

TEST_CASE("magnitude-phase flow") {
  const std::vector<double> ts = {0.1, 0.4, 0.8, 1.0, 1.5};
  for (const PolarSample& p : magnitude_phase_flow(constant(0.0), 3.0, ts)) {
    CHECK(p.abs_E == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.arg_E == doctest::Approx(-3.0 * p.t).epsilon(1e-12));
  }
  for (const PolarSample& p : magnitude_phase_flow(constant(0.3), 0.0, ts)) {
    CHECK(p.abs_E == doctest::Approx(std::exp(0.3 * std::min(p.t, 1.0))).epsilon(1e-10));
    CHECK(std::abs(p.arg_E) < 1e-14);
  }
  for (const Potential& f : standard_potentials(0.5)) {
    for (double x : {-6.0, 0.0, 2.0, 9.0}) {
      for (const PolarSample& p : magnitude_phase_flow(f, x, ts)) {
        CHECK(std::abs(p.abs_E - p.check_abs) < 1e-6);
        const double k = (p.arg_E - p.check_arg) / (2 * pi);
        CHECK(std::abs(k - std::round(k)) < 1e-6);
      }
    }
  }
}

TEST_CASE("linearization orders") {
  std::vector<double> xs;
  for (int i = -16; i <= 16; ++i) xs.push_back(0.5 * i);
  CHECK(linearization_residual(make_fixture({}), xs, 0.0).b_residual == 0.0);
  for (const Potential& f : standard_potentials(1.0)) {
    const LinearizationResidual r1 = linearization_residual(f, xs, 0.2);
    const LinearizationResidual r2 = linearization_residual(f, xs, 0.1);
    const double rb = r1.b_residual / r2.b_residual;
    const double ra = r1.a_residual / r2.a_residual;
    CHECK(rb >= 6.0);
    CHECK(rb <= 10.0);
    CHECK(ra >= 3.0);
    CHECK(ra <= 5.0);
  }
}

TEST_CASE("argument validation") {
  const Potential f = constant(0.1);
  CHECK_THROWS_AS(integrate_transfer(f, 0.0, 1.0, 1), Error);
  CHECK_THROWS_AS(integrate_E(f, 0.0, 1.0, 1, 0), Error);
  CHECK_THROWS_AS(integrate_E(f, 0.0, 1.0, 10, 3), Error);
  CHECK_THROWS_AS(gronwall_increment(f, 0.0, 0.5, 0.2, 1.0), Error);
}
