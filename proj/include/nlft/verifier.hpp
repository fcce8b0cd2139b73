#pragma once

#include <string>
#include <vector>

#include "nlft/common.hpp"
#include "nlft/config.hpp"
#include "nlft/report.hpp"

namespace nlft {

/// Every check id in report order.
const std::vector<std::string>& all_check_ids();
/// Parameter-free identities; any fail among these is an implementation bug.
const std::vector<std::string>& identity_check_ids();
/// Checks whose fitted constant is tested for refinement stability.
const std::vector<std::string>& empirical_check_ids();
/// Hard-constant bounds evaluated on admissible samples.
const std::vector<std::string>& hard_check_ids();
bool is_check_id(const std::string& id);

/// gamma(p) = sqrt(2) / sqrt|sinh 2p|.
double gamma_factor(double p);

/// Halton point in [0,1)^dim; dim <= 6.
std::vector<double> halton(std::size_t index, int dim);

/// Matching E(t,u), E~(t,u) by two shifted sines: solves
/// sqrt(w~/w) sin t(a - xi0) / sin t(a - xi0~) = E(t,u)/E~(t,u) for a (Newton from a = u),
/// then z0 = xi0 + u - a, z0~ = xi0~ + u - a, alpha0 = E(t,u) sqrt(w) / (gamma(t Im z0) sin t(u - z0)).
struct Alignment {
  cplx a{0.0, 0.0};
  cplx z0{0.0, 0.0};
  cplx z0_tilde{0.0, 0.0};
  cplx alpha0{0.0, 0.0};
  int iterations = 0;
  bool converged = false;
  double residual_E = 0.0;        // relative representation residuals
  double residual_E_tilde = 0.0;
  double closed_form_gap = 0.0;   // t |a - a_closed| modulo pi
};
Alignment solve_alignment(cplx E_u, cplx E_tilde_u, cplx u, double t, cplx xi0, cplx xi0_tilde, double w,
                          double w_tilde);

/// Runs the configured checks over fixtures x (t, s) x D. Reports come back
/// ordered by check id, fixture, t, s and D, so output is independent of the
/// thread count. Throws Error(config) for an invalid config.
std::vector<CheckReport> run_suite(const RunConfig& config);

/// True when no report has verdict fail.
bool suite_passed(const std::vector<CheckReport>& reports);

}  // namespace nlft
