#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlft/common.hpp"
#include "nlft/engine.hpp"
#include "nlft/potential.hpp"

namespace nlft {

enum class Side { left, right };
const char* to_string(Side side);

/// A zero of E(t,.) (or of E~(t,.) when tilde is set) in the lower half-plane.
struct ZeroRecord {
  cplx z0{0.0, 0.0};
  double t = 0.0;
  double s = 0.0;
  int rank = 0;  // 0 is the closest to s
  Side side = Side::right;
  double X = 0.0;  // t (Re z0 - s)
  double Y = 0.0;  // t |Im z0|
  cplx alpha{1.0, 0.0};  // -i e^{-i arg E#(t, z0)}
  bool tilde = false;
};

struct ZeroSearchOptions {
  double depth_cap = 0.0;       // lower edge of the search box at Im z = -depth_cap; 0 means 8/t
  double winding_tol = 0.05;    // distance of the winding number from an integer
  double newton_tol = 1e-11;    // |dz| * t
  int max_newton = 50;
  int resolution = 1;           // initial edge pieces per pi/t
  SolverOptions solver;
};

struct ZeroScan {
  std::vector<ZeroRecord> zeros;  // sorted by |z - s|, ties toward smaller Re z
  int winding = 0;                // total over the search box
  double half_width = 0.0;        // box is [s - half_width, s + half_width] x [-depth, 0]
  double depth = 0.0;
  long evaluations = 0;
};

/// Argument-principle scan of R(s, (count + 2) pi / t, depth) followed by
/// Newton refinement. The E~ pipeline runs the same code on -f.
ZeroScan locate_zeros(const Potential& f, double t, double s, int count, const ZeroSearchOptions& options = {},
                      bool tilde = false);

/// Newton from a guess; returns the refined record (rank 0, side from s).
ZeroRecord refine_zero(const Potential& f, double t, double s, cplx guess, const ZeroSearchOptions& options = {},
                       bool tilde = false);

struct ThetaJet {
  cplx theta{0.0, 0.0};
  cplx theta_z{0.0, 0.0};
  cplx theta_zz{0.0, 0.0};
};

/// theta = E#/E and its z-derivatives by the quotient rule.
ThetaJet theta_jet(const EvolutionState& state);
ThetaJet theta_jet(const Potential& f, double t, cplx z, const SolverOptions& options = {}, bool tilde = false);

/// theta_z, theta_zz at conj(zeta) for a zero zeta of E, written through the jet at zeta.
ThetaJet theta_jet_at_conjugate(const EvolutionState& at_zero);

struct ZeroPath {
  std::vector<double> times;
  std::vector<cplx> positions;        // zeros of E(t,.) in the lower half-plane
  std::vector<cplx> theta_z;          // theta_z(t, conj xi_t)
  std::vector<cplx> theta_zz;
  std::vector<double> anchor_residuals;  // |Newton correction| after each step
  int halvings = 0;
  bool tilde = false;
  double s = 0.0;

  cplx xi1() const { return positions.front(); }
  cplx xi2() const { return positions.back(); }
};

struct TrackOptions {
  bool anchor = true;
  SolverOptions solver;
  int max_halvings = 12;
};

/// RK4 on zeta' = -conj(f) E#(t,zeta) / E_z(t,zeta), the conjugate form of
/// z' = -f / theta_z(t, z) at z = conj(zeta).
ZeroPath track_zero(const Potential& f, double t1, double t2, const ZeroRecord& seed, int steps,
                    const TrackOptions& options = {});

/// log2 of the ratio of successive endpoint differences for steps, 2 steps, 4 steps (no anchoring).
struct OrderEstimate {
  double order = 0.0;
  double diff_coarse = 0.0;
  double diff_fine = 0.0;
  cplx endpoint{0.0, 0.0};
};
OrderEstimate riccati_order(const Potential& f, double t1, double t2, const ZeroRecord& seed, int steps,
                            const SolverOptions& options = {});

struct RegionFlags {
  bool in_Omega = false;
  bool in_Omega_tilde = false;
  bool in_Xi = false;
  double D = 1.0;
  double Y = 0.0, Y_tilde = 0.0;
  double dist = 0.0, dist_tilde = 0.0;  // t |z - s|
  double eps = 0.0, eps_tilde = 0.0, mu = 0.0;
  // slack of the three inequalities, lhs / rhs (>= 1 means inside)
  double omega_margin = 0.0, omega_tilde_margin = 0.0, xi_margin = 0.0;
};

/// The three region inequalities exactly as displayed:
/// e^{2t Im z} >= D (t|z - s|)^{3/2} eps, the same for z~ with eps~, and
/// Omega and Omega~ together with e^{4t Im z} >= D (t|Im z|)^{1/2} mu.
RegionFlags region_flags(const ZeroRecord& zero, const ZeroRecord& zero_tilde, double eps, double eps_tilde, double D);

struct X0Beta {
  double x0 = 0.0;
  cplx beta{1.0, 0.0};
  cplx E_at_x0{1.0, 0.0};
};

/// Closest real x to s with E(t,x) > 0, searched on (s - 4pi/t, s + 4pi/t).
X0Beta x0_beta(const Potential& f, double t, double s, const SolverOptions& options = {});

}  // namespace nlft
