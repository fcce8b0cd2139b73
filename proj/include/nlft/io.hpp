#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nlft/common.hpp"
#include "nlft/engine.hpp"
#include "nlft/spectral.hpp"
#include "nlft/zeros.hpp"

namespace nlft {

// CSV writers. Headers are fixed; numbers use 17 significant digits so reruns are byte-identical.

/// x,re_a,im_a,re_b,im_b,abs_a,log_abs_a
void write_transfer_csv(std::ostream& out, const std::vector<TransferCoefficients>& rows);

/// t,x,log_abs_a
void write_log_a_csv(std::ostream& out, const std::vector<TransferCoefficients>& rows);

/// x,w,w_tilde
void write_spectrum_csv(std::ostream& out, const SpectralProfile& profile);

struct DensityRow {
  double s = 0.0;
  double w = 0.0, w_tilde = 0.0;
  EpsMu em;
};
/// s,w,w_tilde,eps,eps_tilde,mu
void write_density_csv(std::ostream& out, const std::vector<DensityRow>& rows);

struct ZeroRow {
  ZeroRecord zero;
  RegionFlags flags;
};
/// t,s,rank,re_z,im_z,X,Y,re_alpha,im_alpha,in_Omega,in_Omega_tilde,in_Xi,D
void write_zeros_csv(std::ostream& out, const std::vector<ZeroRow>& rows);

struct KernelRow {
  cplx lambda{0.0, 0.0};
  cplx z{0.0, 0.0};
  cplx K{0.0, 0.0};
  double bound_rhs = 0.0;
  double ratio = 0.0;
};
/// re_lambda,im_lambda,re_z,im_z,re_K,im_K,bound_rhs,ratio
void write_kernel_csv(std::ostream& out, const std::vector<KernelRow>& rows);

/// Minimal SVG canvas: polylines and circle markers in data coordinates.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label, int width = 640, int height = 480);

  void polyline(const std::vector<double>& x, const std::vector<double>& y, const std::string& color = "#1f77b4");
  void markers(const std::vector<double>& x, const std::vector<double>& y, const std::string& color = "#d62728");
  std::size_t marker_count() const { return n_markers_; }
  std::string str() const;

 private:
  struct Series {
    std::vector<double> x, y;
    std::string color;
    bool points;
  };
  std::string title_, x_label_, y_label_;
  int width_, height_;
  std::vector<Series> series_;
  std::size_t n_markers_ = 0;
};

/// Writes text to path, throwing Error(io) when the file cannot be written.
void write_file(const std::string& path, const std::string& text);

}  // namespace nlft
