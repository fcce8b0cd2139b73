#pragma once

#include <span>
#include <vector>

#include "nlft/common.hpp"
#include "nlft/potential.hpp"

namespace nlft {

struct SolverOptions {
  double max_phase_step = 0.02;  // bound on h * (oscillation rate) per RK4 step
  int steps_multiplier = 1;
};

/// Step count for [0, span] at the given oscillation rate.
///
/// Never coarser than two potential cells per step; over the full support the
/// count is a multiple of (n-1)/2 so step ends fall on grid nodes.
int default_steps(const Potential& f, double rate, double span, const SolverOptions& options = {});

struct TransferCoefficients {
  cplx a{1.0, 0.0};
  cplx b{0.0, 0.0};
  double t = 0.0;
  double x = 0.0;
};

/// (E, E#, E_z, E#_z, E_zz, E#_zz) at (t, z). Stored values are scaled by
/// e^{-log_scale}; use the accessors for true values.
struct EvolutionState {
  double t = 0.0;
  cplx z{0.0, 0.0};
  int order = 0;
  cplx E{1.0, 0.0};
  cplx E_sharp{1.0, 0.0};
  cplx Ez{0.0, 0.0};
  cplx Ez_sharp{0.0, 0.0};
  cplx Ezz{0.0, 0.0};
  cplx Ezz_sharp{0.0, 0.0};
  double log_scale = 0.0;

  double scale() const { return std::exp(log_scale); }
  cplx true_E() const { return E * scale(); }
  cplx true_E_sharp() const { return E_sharp * scale(); }
  cplx true_Ez() const { return Ez * scale(); }
  cplx true_Ez_sharp() const { return Ez_sharp * scale(); }
  cplx true_Ezz() const { return Ezz * scale(); }
  cplx true_Ezz_sharp() const { return Ezz_sharp * scale(); }
  /// log|E|, safe for any log_scale.
  double log_abs_E() const { return std::log(std::abs(E)) + log_scale; }
};

/// E for f and E~ = -i E[-f] at a shared (t, z).
struct PairState {
  EvolutionState E;
  EvolutionState E_tilde;
  double det_residual = 0.0;  // |E E~# - E# E~ - 2i|
};

/// Fixed-step RK4 integrator for the E-system of one potential.
///
/// The forcing f(t_k), f(t_k + h/2) is tabulated once, so repeated solves at
/// different z share it and see exactly the same discrete map.
class EvolutionSolver {
 public:
  EvolutionSolver(const Potential& f, int steps);

  const Potential& potential() const noexcept { return *f_; }
  int steps() const noexcept { return steps_; }
  double step() const noexcept { return h_; }

  /// sign = -1 integrates the system of -f.
  EvolutionState solve(cplx z, int order, double t_end, double sign = 1.0) const;
  /// States at each of the ascending times.
  std::vector<EvolutionState> solve_path(cplx z, int order, std::span<const double> times,
                                         double sign = 1.0) const;

 private:
  const Potential* f_;
  int steps_;
  double h_;
  std::vector<cplx> node_f_;  // f(k h), k = 0..steps
  std::vector<cplx> mid_f_;   // f((k + 1/2) h)
};

/// Transfer matrix row (G21, G22) = (b, a). Beyond T the coefficients freeze.
TransferCoefficients integrate_transfer(const Potential& f, double x, double t_end, int steps);
TransferCoefficients integrate_transfer(const Potential& f, double x, double t_end,
                                        const SolverOptions& options = {});
std::vector<TransferCoefficients> transfer_path(const Potential& f, double x, std::span<const double> times,
                                                int steps);

EvolutionState integrate_E(const Potential& f, cplx z, double t_end, int steps, int order);
EvolutionState integrate_E(const Potential& f, cplx z, double t_end, int order,
                           const SolverOptions& options = {});

/// Oscillation rate used by the default step rule for the E-system at z.
double e_rate(const Potential& f, cplx z);

PairState evaluate_pair(const Potential& f, cplx z, double t, int order, const SolverOptions& options = {});
PairState evaluate_pair(const EvolutionSolver& solver, cplx z, double t, int order);

/// Scattering function e^{itz} E(t, z).
cplx scattering(const EvolutionState& state);

/// e^{t |Im z| + \int_0^t |f|}.
double gronwall_envelope(const Potential& f, cplx z, double t);

/// Three versions of the bound on |e^{it2 z}E(t2,z) - e^{it1 z}E(t1,z)|.
struct GronwallIncrement {
  double statement = 0.0;  // exponent (t2-t1)(|Im z| - Im z)
  double appendix = 0.0;   // exponent (2 t2 - t1)|Im z| without the |E(t1, conj z)| factor
  double derived = 0.0;    // Gronwall applied from t1 with the e^{-t Im z} weight kept
};
GronwallIncrement gronwall_increment(const Potential& f, cplx z, double t1, double t2, double E_at_t1_conj);

struct PolarSample {
  double t = 0.0;
  double abs_E = 1.0;
  double arg_E = 0.0;        // continuous
  double check_abs = 1.0;    // |E| from the Cartesian system
  double check_arg = 0.0;    // principal arg E from the Cartesian system
};

/// rho = log|E|, phi = arg E on the real line:
/// rho' = Re(conj(f) e^{-2i phi}), phi' = -x + Im(conj(f) e^{-2i phi}).
std::vector<PolarSample> magnitude_phase_flow(const Potential& f, double x, std::span<const double> t_grid,
                                              const SolverOptions& options = {});

struct LinearizationResidual {
  double b_residual = 0.0;  // sup |b - \int conj(eps f) e^{2ixt}|
  double a_residual = 0.0;  // sup |a - 1|
};
LinearizationResidual linearization_residual(const Potential& f, std::span<const double> x_grid, double amplitude,
                                             const SolverOptions& options = {});

}  // namespace nlft
