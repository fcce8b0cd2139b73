#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nlft/common.hpp"
#include "nlft/engine.hpp"
#include "nlft/potential.hpp"

namespace nlft {

/// m = (1 - b/a) / (1 + b/a).
cplx weyl_m(cplx a, cplx b);

/// Real function sampled on x0 + i dx, i = 0..n-1.
struct GridFunction {
  double x0 = 0.0;
  double dx = 1.0;
  std::vector<double> values;

  double x(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
  double x_end() const { return x(values.size() - 1); }
};

struct MaximalOptions {
  int per_octave = 4;          // radii dx 2^{k / per_octave}
  double inner_fraction = 0.125;  // margin on each side, as a fraction of the grid length
};

/// Centered maximal function of |h| at s: sup over the radius ladder of the
/// clipped average of the piecewise-linear |h|, and the point value |h(s)|.
double maximal_function(const GridFunction& h, double s, const MaximalOptions& options = {});

struct SpectralProfile {
  GridFunction w;
  GridFunction w_tilde;
  std::vector<cplx> a;  // a(T, x)
  std::vector<cplx> b;  // b(T, x)
  double cross_residual = 0.0;  // sup |w |E(T,x)|^2 - 1|
  double l1 = 0.0;
  double l2 = 0.0;
  MaximalOptions maximal;

  double X() const { return w.x_end(); }
  double inner_lo() const;
  double inner_hi() const;
  bool in_inner(double s) const { return s >= inner_lo() && s <= inner_hi(); }
  /// w(s), w~(s) by linear interpolation.
  double w_at(double s) const;
  double w_tilde_at(double s) const;
};

/// Terminal coefficients on x_i = -X + 2X i/(n-1); w = Re m, w~ from (a, -b)
/// (the coefficients of -f), cross-checked against 1/|E(T,x)|^2.
SpectralProfile build_profile(const Potential& f, double X, int n_points, const SolverOptions& options = {});

struct EpsMu {
  double eps = 0.0;
  double eps_tilde = 0.0;
  double mu = 0.0;
};

EpsMu eps_mu(const SpectralProfile& profile, double s);

/// |a| recovered from the two densities.
double abs_a_from_weights(double w, double w_tilde);

/// sinc(t, lambda, lambda) = sinh(2t|Im lambda|)/(2 pi |Im lambda|), t/pi on the real line.
double sinc_diagonal(double t, cplx lambda);

struct GeomWeights {
  double X = 1.0;  // max(1, t|Re lambda - s| / (t|Im lambda| + 1))
  double V = 0.0;  // X sinc(t, lambda, lambda)
};
GeomWeights geom_weights(double s, double t, cplx lambda);

struct PlancherelResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_err = 0.0;
  double X = 0.0;          // final window half-width
  double tail_increment = 0.0;  // change of lhs in the last doubling
  std::vector<double> window_history;
  std::vector<double> rel_err_history;
};

/// \int_{-X}^{X} log|a(T,x)| dx against (pi/2)||f||_2^2, doubling X from X0
/// until the increment drops below tol * rhs or X exceeds X_max.
PlancherelResult plancherel_residual(const Potential& f, double X0 = 8.0, double tol = 2e-3, double X_max = 4096.0,
                                     const SolverOptions& options = {});

struct CarlesonProfile {
  std::vector<double> x;
  std::vector<double> sup_sqrt_log_a;  // sup_t sqrt(log|a(t,x)|)
  std::vector<double> lambdas;
  std::vector<double> distribution;  // |{x : profile > lambda}|
  std::vector<double> weak_bound;    // ||f||_2^2 / lambda^2
};

CarlesonProfile maximal_log_a_profile(const Potential& f, std::span<const double> x_grid,
                                      std::span<const double> t_grid, std::span<const double> lambdas,
                                      const SolverOptions& options = {});

/// ||sqrt(log|a|)||_{p'} / ||f||_p on [-X, X]; empty when f = 0.
std::optional<double> hausdorff_young_diagnostic(const Potential& f, double p, double X = 64.0, int n_points = 2049,
                                                 const SolverOptions& options = {});

/// ||w - 1|| in L^2 and sup over the profile window.
double w_minus_one_l2(const SpectralProfile& profile);
double w_minus_one_sup(const SpectralProfile& profile);

}  // namespace nlft
