#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nlft/common.hpp"
#include "nlft/engine.hpp"
#include "nlft/potential.hpp"

namespace nlft {

/// sin(t(z - conj lambda)) / (pi (z - conj lambda)), series near the removable point.
cplx sinc_kernel(double t, cplx lambda, cplx z);

/// (E(z) E#(conj l) - E#(z) E(conj l)) / (2 pi i (conj l - z)) from the jets at
/// conj(lambda) and z. Close to z = conj(lambda) the numerator is expanded
/// around conj(lambda) with the co-integrated derivatives.
cplx K_direct(double t, cplx lambda, cplx z, const EvolutionState& at_lambda_bar, const EvolutionState& at_z);
cplx K_direct(const EvolutionSolver& solver, double t, cplx lambda, cplx z);

/// Line scan of 1/|E(t,x)|^2 on [s - L, s + L].
class KernelContext {
 public:
  /// L defaults to 40 pi / t, the step to pi / (32 t).
  KernelContext(const Potential& f, double t, double s, const SolverOptions& options = {}, double L = 0.0,
                double step = 0.0);

  double t() const noexcept { return t_; }
  double s() const noexcept { return s_; }
  double L() const noexcept { return L_; }
  double step() const noexcept { return step_; }
  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& weight() const noexcept { return weight_; }
  /// E(t, x_i) with order 0.
  const std::vector<EvolutionState>& states() const noexcept { return states_; }
  const Potential& potential() const noexcept { return *f_; }
  const SolverOptions& options() const noexcept { return options_; }

  KernelContext doubled() const;

 private:
  const Potential* f_;
  double t_, s_, L_, step_;
  SolverOptions options_;
  std::vector<double> x_;
  std::vector<double> weight_;
  std::vector<EvolutionState> states_;
};

/// K(t, lambda, x_i) on the context grid.
std::vector<cplx> kernel_on_grid(const KernelContext& ctx, cplx lambda);

struct InnerProduct {
  cplx value{0.0, 0.0};
  double truncation_estimate = 0.0;  // sum over both ends of L * max (x - s)^2 |F G| w in the outer decade
  cplx tail_extrapolation{0.0, 0.0};  // C / L per end, C the outer-decade mean of (x - s)^2 F conj(G) w
  bool truncation_warning = false;    // estimate above 1% of |value|
  double L = 0.0;

  cplx extrapolated() const { return value + tail_extrapolation; }
};

/// \int F conj(G) / |E(t,x)|^2 over the context grid (composite Simpson).
InnerProduct debranges_inner(std::span<const cplx> F, std::span<const cplx> G, const KernelContext& ctx);

/// Function form: samples F and G on the grid and doubles the window once if
/// the truncation estimate exceeds 1%.
InnerProduct debranges_inner(const std::function<cplx(double)>& F, const std::function<cplx(double)>& G,
                             const KernelContext& ctx);

struct ChristoffelDarboux {
  cplx printed{0.0, 0.0};  // 2 e^{-it(z - conj l)} \int_0^{2t} e^{i xi (z - conj l)} E(xi,z) conj E(xi,l) dxi
  cplx fitted{0.0, 0.0};   // printed times sinc / (4t e^{-it(z - conj l)}), the free-case normalization
  cplx derived{0.0, 0.0};  // (1/2pi) \int_0^t E(xi,z) conj E(xi,l) + E#(xi,z) conj E#(xi,l) dxi
  cplx direct{0.0, 0.0};
  double deviation_printed = 0.0;  // relative to |direct|
  double deviation_fitted = 0.0;
  double deviation_derived = 0.0;
};
ChristoffelDarboux K_christoffel_darboux(const Potential& f, double t, cplx lambda, cplx z,
                                         const SolverOptions& options = {}, int panels = 0);

/// Linearized diagonal (t/pi)(1 + (2/t) Re \int_0^t F(xi) dxi), F(xi) = \int_0^xi f e^{-2isy} dy.
struct FejerTerms {
  cplx nested{0.0, 0.0};  // \int_0^t F(xi) dxi by quadrature over xi
  cplx fubini{0.0, 0.0};  // \int_0^t (t - y) f(y) e^{-2isy} dy
  double linearized = 0.0;
  double K_diagonal = 0.0;
};
FejerTerms fejer_terms(const Potential& f, double s, double t, const SolverOptions& options = {});

/// Gram matrix K(t, p_j, p_i) (row i, column j) and its extreme eigenvalues.
struct GramSpectrum {
  std::vector<cplx> matrix;  // row-major
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double hermitian_defect = 0.0;  // max |K_ij - conj K_ji|
};
GramSpectrum kernel_gram(const Potential& f, double t, std::span<const cplx> points,
                         const SolverOptions& options = {});

}  // namespace nlft
