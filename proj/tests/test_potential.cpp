#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nlft/potential.hpp"

using namespace nlft;

namespace {

Potential constant(cplx c, double T = 1.0, std::size_t n = 1025) {
  return Potential(T, std::vector<cplx>(n, c));
}

Potential gaussian(std::size_t n) {
  std::vector<cplx> v(n);
  const double sigma = 1.0 / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(i) / static_cast<double>(n - 1) - 0.5;
    v[i] = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  return Potential(1.0, std::move(v));
}

}  // namespace

TEST_CASE("norm of zero and constant potentials") {
  const Potential zero = constant(0.0);
  CHECK(norm(zero, 1.0) == 0.0);
  CHECK(norm(zero, 2.0) == 0.0);
  CHECK(norm(zero, 3.5) == 0.0);
  CHECK(norm(constant(0.3), 1.0) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(constant(0.3).l1() == doctest::Approx(0.3).epsilon(1e-14));
  CHECK_THROWS_AS(norm(zero, 0.5), Error);
}

TEST_CASE("gaussian L2 norm against closed form and refined grid") {
  // \int_0^1 e^{-(t-1/2)^2/sigma^2} dt = sigma sqrt(pi) erf(1/(2 sigma)), sigma = 1/6
  const double exact = std::sqrt((1.0 / 6.0) * std::sqrt(pi) * std::erf(3.0));
  const Potential coarse = gaussian(1025);
  const Potential fine = gaussian(10241);
  CHECK(std::abs(norm(coarse, 2.0) - norm(fine, 2.0)) < 1e-10);
  CHECK(std::abs(norm(coarse, 2.0) - exact) < 1e-10);
  CHECK(std::abs(coarse.l2() - norm(coarse, 2.0)) <= 1e-12 * coarse.l2());
}

TEST_CASE("scale") {
  const Potential box = constant(0.7);
  const Potential s2 = scale(box, 2.0);
  CHECK(s2.support_end() == doctest::Approx(0.5));
  CHECK(std::abs(s2(0.25) - cplx(1.4)) < 1e-14);
  CHECK(s2(0.75) == cplx(0.0));

  const Potential g = make_fixture({PotentialKind::truncated_gaussian, 1.0, 1025, 0.3, 7});
  const Potential g3 = scale(g, 3.0);
  CHECK(std::abs(g3.l1() - g.l1()) < 1e-10 * g.l1());
  CHECK(std::abs(g3.l2() - std::sqrt(3.0) * g.l2()) < 1e-8 * g3.l2());

  const Potential same = scale(g, 1.0);
  CHECK(same.support_end() == g.support_end());
  for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(same.samples()[i] == g.samples()[i]);
  CHECK_THROWS_AS(scale(g, 0.0), Error);
  CHECK_THROWS_AS(scale(g, -1.0), Error);
}

TEST_CASE("partial_fourier") {
  CHECK(std::abs(partial_fourier(constant(0.0), 1.0, 2.0)) == 0.0);
  const cplx c(0.4, -0.2);
  const Potential f = constant(c);
  for (double s : {0.5, 1.0, 3.0, -7.0, 20.0}) {
    const cplx expected = c * (1.0 - std::exp(cplx(0.0, -s))) / (I * s);
    CHECK(std::abs(partial_fourier(f, 1.0, s) - expected) < 1e-10);
  }
  CHECK(std::abs(partial_fourier(f, 1.0, 0.0) - c) < 1e-14);
  // partial interval, xi off the grid
  const double xi = 0.3721;
  const double s = 4.0;
  const cplx expected = c * (1.0 - std::exp(cplx(0.0, -s * xi))) / (I * s);
  CHECK(std::abs(partial_fourier(f, xi, s) - expected) < 1e-10);
  CHECK_THROWS_AS(partial_fourier(f, 1.5, 0.0), Error);
  CHECK_THROWS_AS(partial_fourier(f, -0.1, 0.0), Error);
}

TEST_CASE("sigma intervals") {
  const Potential pos = constant(0.25);
  CHECK(is_sigma_interval(pos, 0.0, 1.0, 1e-5));
  CHECK(is_sigma_interval(pos, 0.1, 0.37, 1e-9));

  std::vector<cplx> v(1025);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(cplx(0.0, 2.0 * pi * i / 1024.0));
  const Potential circle(1.0, v);
  CHECK_FALSE(is_sigma_interval(circle, 0.0, 1.0, 0.1));
  CHECK_THROWS_AS(is_sigma_interval(circle, 0.5, 0.5, 0.1), Error);

  const Potential rnd = make_fixture({PotentialKind::random_bandlimited, 1.0, 1025, 0.3, 11});
  for (auto [lo, hi] : {std::pair{0.0, 1.0}, {0.0, 0.125}, {0.5, 0.5625}, {0.2, 0.21}}) {
    const cplx integral = integrate_on_grid(rnd.samples(), rnd.grid_step(), lo, hi);
    const double mass = rnd.l1_between(lo, hi);
    const bool direct = std::abs(integral) >= (1.0 - 1e-3) * mass;
    CHECK(is_sigma_interval(rnd, lo, hi, 1e-3) == direct);
  }
}

TEST_CASE("dominant sector") {
  const Potential f = constant(std::polar(0.3, 0.1));
  const SectorResult r = dominant_sector(f, {0.0, 1.0, 1e-5, std::nullopt});
  CHECK(r.window == 0);
  CHECK(r.phi <= 0.1);
  CHECK(r.phi + pi / 4 >= 0.1);
  CHECK(r.mass_fraction == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.guaranteed);

  // phases spread over [0, pi/8)
  std::vector<cplx> v(513);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::polar(1.0, (pi / 8) * 0.999 * i / 512.0);
  const SectorResult one = dominant_sector(Potential(1.0, v), {0.0, 1.0, 0.5, std::nullopt});
  CHECK(one.window == 0);
  // the window holds all the mass; the fraction is |\int f| / \int |f| = sinc of the half spread
  const double half = 0.5 * (pi / 8) * 0.999;
  CHECK(one.mass_fraction == doctest::Approx(std::sin(half) / half).epsilon(1e-5));
  CHECK_FALSE(one.guaranteed);

  // two sectors far apart: brute force over all windows from raw samples
  std::vector<cplx> w(257);
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = i % 3 == 0 ? std::polar(2.0, 0.3) : std::polar(1.0, 3.5);
  const Potential two(1.0, w);
  const SectorResult got = dominant_sector(two, {0.0, 1.0, 1e-5, std::nullopt});
  double best = -1.0, mass = 0.0;
  int best_j = -1;
  const double h = two.grid_step();
  for (std::size_t i = 0; i < w.size(); ++i) mass += (i == 0 || i + 1 == w.size() ? 0.5 : 1.0) * h * std::abs(w[i]);
  for (int j = 0; j < 16; ++j) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      double a = std::arg(w[i]);
      if (a < 0) a += 2 * pi;
      double rel = a - j * pi / 8;
      if (rel < 0) rel += 2 * pi;
      if (rel < pi / 4) acc += (i == 0 || i + 1 == w.size() ? 0.5 : 1.0) * h * w[i];
    }
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      best_j = j;
    }
  }
  CHECK(got.window == best_j);
  CHECK(got.mass_fraction == doctest::Approx(best / mass).epsilon(1e-12));
}

TEST_CASE("sector guarantee on sigma intervals of fixtures") {
  for (const Potential& f : standard_potentials(0.3)) {
    const auto intervals = dyadic_sigma_intervals(f, 7, default_sigma);
    for (const SigmaInterval& si : intervals) {
      const SectorResult r = dominant_sector(f, si);
      CHECK(r.guaranteed);
      CHECK(r.mass_fraction >= 1.0 - 3e4 * default_sigma);
    }
  }
}

TEST_CASE("standard fixtures") {
  const auto specs = standard_fixture_specs(0.5);
  REQUIRE(specs.size() == 4);
  const auto fixtures = standard_potentials(0.5);
  for (const Potential& f : fixtures) CHECK(std::abs(f.l1() - 0.5) < 1e-10);
  CHECK(std::abs(fixtures[0](0.4) - cplx(0.5)) < 1e-12);

  const Potential g = make_fixture({PotentialKind::truncated_gaussian, 1.0, 1025, 1.0 / 6.0, 7});
  CHECK(std::abs(norm(g, 1.0) - 1.0 / 6.0) <= 1e-10);

  const FixtureSpec rs{PotentialKind::random_bandlimited, 1.0, 1025, 0.3, 42};
  const Potential r1 = make_fixture(rs);
  const Potential r2 = make_fixture(rs);
  for (std::size_t i = 0; i < r1.size(); ++i) REQUIRE(r1.samples()[i] == r2.samples()[i]);
  const Potential r3 = make_fixture({PotentialKind::random_bandlimited, 1.0, 1025, 0.3, 43});
  CHECK(r3.samples()[100] != r1.samples()[100]);
  CHECK_FALSE(make_fixture({PotentialKind::chirp, 1.0, 1025, 0.3, 1}).is_real());
}

TEST_CASE("l1 quadrature converges under grid doubling") {
  // fixtures are normalized by their quadrature l1, so equal normalization factors on
  // grids N and 2N mean the raw l1 values agree
  for (FixtureSpec spec : standard_fixture_specs(1.0)) {
    spec.n_samples = 1025;
    const Potential coarse = make_fixture(spec);
    spec.n_samples = 2049;
    const Potential fine = make_fixture(spec);
    const double ratio = std::abs(coarse.samples()[512]) / std::abs(fine.samples()[1024]);
    CHECK(std::abs(ratio - 1.0) < 1e-8);
  }
}

TEST_CASE("csv round trip is bit identical") {
  const Potential f = make_fixture({PotentialKind::chirp, 1.5, 257, 0.3, 3});
  std::stringstream ss;
  write_potential_csv(ss, f);
  const Potential g = read_potential_csv(ss);
  REQUIRE(g.size() == f.size());
  CHECK(g.support_end() == f.support_end());
  for (std::size_t i = 0; i < f.size(); ++i) REQUIRE(g.samples()[i] == f.samples()[i]);

  std::stringstream bad("x,y\n1,2\n");
  CHECK_THROWS_AS(read_potential_csv(bad), Error);
}

TEST_CASE("fixture descriptor json") {
  const FixtureSpec spec{PotentialKind::random_bandlimited, 2.0, 513, 0.25, 99};
  const FixtureSpec back = fixture_spec_from_json(fixture_descriptor_json(spec));
  CHECK(back.kind == spec.kind);
  CHECK(back.support_end == spec.support_end);
  CHECK(back.n_samples == spec.n_samples);
  CHECK(back.target_l1 == spec.target_l1);
  CHECK(back.seed == spec.seed);
  CHECK_THROWS_AS(fixture_spec_from_json("{\"kind\":\"nope\"}"), Error);
}
