#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nlft/spectral.hpp"
#include "nlft/zeros.hpp"

using namespace nlft;

namespace {

Potential gaussian(double l1) { return make_fixture({PotentialKind::truncated_gaussian, 1.0, 1025, l1, 7}); }

// nonzero on [0, 0.5] only
Potential front_half(double l1) {
  const Potential g = gaussian(l1);
  std::vector<cplx> v(g.samples().begin(), g.samples().end());
  for (std::size_t i = v.size() / 2 + 1; i < v.size(); ++i) v[i] = 0.0;
  return Potential(1.0, v);
}

}  // namespace

TEST_CASE("free evolution has no zeros") {
  const Potential zero(1.0, std::vector<cplx>(257, 0.0));
  const ZeroScan scan = locate_zeros(zero, 1.0, 0.3, 3);
  CHECK(scan.zeros.empty());
  CHECK(scan.winding == 0);
  CHECK_THROWS_AS(locate_zeros(zero, 1.0, 0.0, 3, ZeroSearchOptions{25.0}), Error);
}

TEST_CASE("zeros of the standard fixtures") {
  for (const Potential& f : standard_potentials(0.4)) {
    const double t = 1.0, s = 0.4;
    const ZeroScan scan = locate_zeros(f, t, s, 3);
    REQUIRE(scan.zeros.size() >= 3);
    for (std::size_t i = 0; i < scan.zeros.size(); ++i) {
      const ZeroRecord& z = scan.zeros[i];
      CHECK(z.rank == static_cast<int>(i));
      CHECK(z.Y > 1.0);
      CHECK(z.z0.imag() < 0.0);
      CHECK(std::abs(std::abs(z.alpha) - 1.0) < 1e-12);
      if (i > 0) CHECK(std::abs(z.z0 - s) >= std::abs(scan.zeros[i - 1].z0 - s) - 1e-12);
      const EvolutionState st = EvolutionSolver(f, 2000).solve(z.z0, 0, t);
      CHECK(std::abs(st.E) < 1e-8 * std::abs(st.E_sharp));
    }
    // refined grid finds the same zeros
    ZeroSearchOptions fine;
    fine.resolution = 2;
    const ZeroScan again = locate_zeros(f, t, s, 3, fine);
    REQUIRE(again.zeros.size() == scan.zeros.size());
    for (std::size_t i = 0; i < scan.zeros.size(); ++i) CHECK(std::abs(again.zeros[i].z0 - scan.zeros[i].z0) < 1e-9);
    // the tilde pipeline runs on -f
    const ZeroScan tilde = locate_zeros(f, t, s, 3, {}, true);
    const ZeroScan minus = locate_zeros(multiply(f, -1.0), t, s, 3);
    REQUIRE(tilde.zeros.size() == minus.zeros.size());
    for (std::size_t i = 0; i < tilde.zeros.size(); ++i) {
      CHECK(std::abs(tilde.zeros[i].z0 - minus.zeros[i].z0) < 1e-10);
      CHECK(tilde.zeros[i].tilde);
    }
  }
}

TEST_CASE("theta jet") {
  const Potential zero(1.0, std::vector<cplx>(257, 0.0));
  const ThetaJet j0 = theta_jet(zero, 0.8, cplx(0.3, 0.2));
  // free theta = e^{2izt}
  CHECK(std::abs(j0.theta - std::exp(2.0 * I * 0.3 * 0.8 - 2.0 * 0.2 * 0.8)) < 1e-13);
  CHECK(std::abs(j0.theta_z - 2.0 * I * 0.8 * j0.theta) < 1e-12);

  for (const Potential& f : standard_potentials(0.4)) {
    const double t = 0.9;
    CHECK(std::abs(std::abs(theta_jet(f, t, 1.3).theta) - 1.0) < 1e-10);
    const cplx z(0.4, 0.25);
    const double h = 1e-5 / t;
    const ThetaJet j = theta_jet(f, t, z);
    const ThetaJet p = theta_jet(f, t, z + h), m = theta_jet(f, t, z - h);
    CHECK(std::abs((p.theta - m.theta) / (2.0 * h) - j.theta_z) < 1e-6 * std::abs(j.theta_z));
    CHECK(std::abs((p.theta_z - m.theta_z) / (2.0 * h) - j.theta_zz) < 1e-5 * std::abs(j.theta_zz));
    // conjugate point of a zero: direct evaluation agrees with the conjugated jet
    const ZeroRecord zr = locate_zeros(f, t, 0.0, 1).zeros.front();
    const EvolutionSolver solver(f, 4000);
    const ThetaJet viaconj = theta_jet_at_conjugate(solver.solve(zr.z0, 2, t));
    const ThetaJet direct = theta_jet(solver.solve(std::conj(zr.z0), 2, t));
    CHECK(std::abs(viaconj.theta_z - direct.theta_z) < 1e-8 * std::abs(direct.theta_z));
    CHECK(std::abs(viaconj.theta_zz - direct.theta_zz) < 1e-8 * std::abs(direct.theta_zz));
    CHECK_THROWS_AS(theta_jet(solver.solve(zr.z0, 2, t)), Error);
  }
}

TEST_CASE("zero tracking") {
  SUBCASE("no forcing, no motion") {
    const Potential f = front_half(0.4);
    const ZeroRecord seed = locate_zeros(f, 0.6, 0.0, 1).zeros.front();
    const ZeroPath p = track_zero(f, 0.6, 0.9, seed, 8);
    CHECK(std::abs(p.xi2() - p.xi1()) < 1e-12);
  }
  for (const Potential& f : standard_potentials(0.4)) {
    const double t1 = 0.9, t2 = 0.95;
    const ZeroRecord seed = locate_zeros(f, t1, 0.2, 1).zeros.front();
    const ZeroPath p = track_zero(f, t1, t2, seed, 16);
    const ZeroRecord again = refine_zero(f, t2, 0.2, p.xi2());
    CHECK(std::abs(again.z0 - p.xi2()) < 1e-8 / t2);
    // the relocated zero is among the scanned ones at t2
    double nearest = 1e300;
    for (const ZeroRecord& z : locate_zeros(f, t2, 0.2, 3).zeros) nearest = std::min(nearest, std::abs(z.z0 - p.xi2()));
    CHECK(nearest < 1e-8 / t2);
    const OrderEstimate o = riccati_order(f, t1, t2, seed, 4);
    CHECK(o.order >= 3.5);
    CHECK(std::abs(o.endpoint - p.xi2()) < 1e-6);
  }
}

TEST_CASE("region flags") {
  ZeroRecord z;
  z.t = 1.0;
  z.s = 0.0;
  z.z0 = cplx(0.5, -1.5);
  ZeroRecord zt = z;
  zt.z0 = cplx(-0.4, -1.4);
  const RegionFlags none = region_flags(z, zt, 0.0, 0.0, 5.0);
  CHECK(none.in_Omega);
  CHECK(none.in_Omega_tilde);
  CHECK(none.in_Xi);
  // larger D only shrinks the regions
  bool was_inside = true;
  for (double D : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    const RegionFlags r = region_flags(z, zt, 1e-2, 2e-2, D);
    if (!was_inside) CHECK_FALSE(r.in_Xi);
    was_inside = r.in_Xi;
    CHECK(r.mu == doctest::Approx(3e-2));
  }
  CHECK_THROWS_AS(region_flags(z, zt, 0.1, 0.1, 0.0), Error);
}

TEST_CASE("x0 and beta") {
  const Potential zero(1.0, std::vector<cplx>(257, 0.0));
  const double t = 0.8;
  const X0Beta free = x0_beta(zero, t, 1.0);
  // E = e^{-ixt} is positive at multiples of 2 pi / t
  CHECK(std::abs(free.x0 - std::round(free.x0 * t / (2 * pi)) * 2 * pi / t) < 1e-12);
  CHECK(std::abs(free.x0 - 1.0) <= pi / t + 1e-12);
  for (const Potential& f : standard_potentials(0.4)) {
    const X0Beta xb = x0_beta(f, 1.0, 0.3);
    CHECK(std::abs(std::arg(xb.E_at_x0)) < 1e-8);
    CHECK(xb.E_at_x0.real() > 0.0);
    CHECK(std::abs(std::abs(xb.beta) - 1.0) < 1e-14);
  }
}
