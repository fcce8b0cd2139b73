#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlft/common.hpp"

namespace nlft {

enum class PotentialKind { box, truncated_gaussian, chirp, random_bandlimited, custom };

const char* to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(const std::string& name);

/// Complex potential f sampled uniformly on [0, T] and extended by zero.
///
/// Between samples f is read off the local four-point (cubic) interpolant, so
/// point evaluation, sub-interval quadrature and the ODE right-hand sides all
/// see the same function.
class Potential {
 public:
  Potential(double support_end, std::vector<cplx> samples,
            std::optional<PotentialKind> kind = std::nullopt);

  double support_end() const noexcept { return support_end_; }
  double grid_step() const noexcept { return grid_step_; }
  std::size_t size() const noexcept { return samples_.size(); }
  std::span<const cplx> samples() const noexcept { return samples_; }
  std::optional<PotentialKind> kind() const noexcept { return kind_; }

  /// Interpolated value; zero outside [0, T].
  cplx operator()(double t) const;

  double l1() const noexcept { return l1_; }
  double l2() const noexcept { return l2_; }
  double max_abs() const noexcept { return max_abs_; }
  bool is_real() const noexcept { return is_real_; }

  /// \int_0^t |f|, clamped to [0, T].
  double cumulative_l1(double t) const;
  double l1_between(double t1, double t2) const { return cumulative_l1(t2) - cumulative_l1(t1); }

 private:
  double support_end_;
  double grid_step_;
  std::vector<cplx> samples_;
  std::optional<PotentialKind> kind_;
  std::vector<double> abs_prefix_;  // \int_0^{t_i} |f| at grid nodes
  double l1_ = 0.0;
  double l2_ = 0.0;
  double max_abs_ = 0.0;
  bool is_real_ = true;
};

/// Composite Simpson quadrature of |f|^p, then the p-th root.
double norm(const Potential& f, double p);

/// t -> lambda f(lambda t), supported on [0, T / lambda].
Potential scale(const Potential& f, double lambda);

/// c f for a real or complex factor c (c = -1 gives the potential of E~).
Potential multiply(const Potential& f, cplx factor);

/// \int_lo^hi g(t) dt for g sampled on the potential grid, fourth order.
cplx integrate_on_grid(std::span<const cplx> values, double step, double lo, double hi);
double integrate_on_grid(std::span<const double> values, double step, double lo, double hi);

/// \int_0^xi f(y) e^{-i y s} dy.
cplx partial_fourier(const Potential& f, double xi, double s);

struct SigmaInterval {
  double lo = 0.0;
  double hi = 0.0;
  double sigma = 1e-5;
  std::optional<double> dominant_phase;
};

inline constexpr double default_sigma = 1e-5;

/// |\int_I f| >= (1 - sigma) \int_I |f|.
bool is_sigma_interval(const Potential& f, double lo, double hi, double sigma);

struct SectorResult {
  double phi = 0.0;            // window is [phi, phi + pi/4]
  int window = 0;              // phi = window * pi / 8
  double mass_fraction = 0.0;  // |\int_I f 1_window| / \int_I |f|
  bool guaranteed = false;     // precondition of the sector lemma held
  double guaranteed_fraction = 0.0;
  std::array<cplx, 16> sectors{};
  double total_mass = 0.0;
};

/// Best quarter-turn window among the 16 windows starting at j pi/8.
SectorResult dominant_sector(const Potential& f, const SigmaInterval& interval);

/// Sector integrals v_j = \int_I f 1_{j pi/8 <= arg f < (j+1) pi/8} and \int_I |f|.
std::array<cplx, 16> sector_integrals(const Potential& f, double lo, double hi, double* mass = nullptr);

/// Dyadic subintervals [k T 2^-l, (k+1) T 2^-l] for l = 0..levels.
std::vector<SigmaInterval> dyadic_sigma_intervals(const Potential& f, int levels, double sigma);

// -- fixtures ---------------------------------------------------------------

struct FixtureSpec {
  PotentialKind kind = PotentialKind::box;
  double support_end = 1.0;
  std::size_t n_samples = 1025;
  double target_l1 = 0.3;
  std::uint64_t seed = 7;
};

std::string fixture_id(const FixtureSpec& spec);

/// Builds one fixture rescaled so that ||f||_1 = target_l1 (target 0 gives f = 0).
Potential make_fixture(const FixtureSpec& spec);

/// Box, truncated Gaussian, complex chirp and seeded random band-limited.
std::vector<Potential> standard_potentials(double target_l1, double support_end = 1.0,
                                           std::size_t n_samples = 1025, std::uint64_t seed = 7);
std::vector<FixtureSpec> standard_fixture_specs(double target_l1, double support_end = 1.0,
                                                std::size_t n_samples = 1025, std::uint64_t seed = 7);

/// CSV with header "t,re_f,im_f"; values printed with 17 significant digits.
void write_potential_csv(std::ostream& out, const Potential& f);
Potential read_potential_csv(std::istream& in);

std::string fixture_descriptor_json(const FixtureSpec& spec);
FixtureSpec fixture_spec_from_json(const std::string& text);

}  // namespace nlft
