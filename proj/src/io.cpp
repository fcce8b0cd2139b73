#include "nlft/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace nlft {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

void write_transfer_csv(std::ostream& out, const std::vector<TransferCoefficients>& rows) {
  out << "x,re_a,im_a,re_b,im_b,abs_a,log_abs_a\n";
  for (const TransferCoefficients& r : rows)
    out << num(r.x) << ',' << num(r.a.real()) << ',' << num(r.a.imag()) << ',' << num(r.b.real()) << ','
        << num(r.b.imag()) << ',' << num(std::abs(r.a)) << ',' << num(std::log(std::abs(r.a))) << '\n';
}

void write_log_a_csv(std::ostream& out, const std::vector<TransferCoefficients>& rows) {
  out << "t,x,log_abs_a\n";
  for (const TransferCoefficients& r : rows)
    out << num(r.t) << ',' << num(r.x) << ',' << num(std::log(std::abs(r.a))) << '\n';
}

void write_spectrum_csv(std::ostream& out, const SpectralProfile& p) {
  out << "x,w,w_tilde\n";
  for (std::size_t i = 0; i < p.w.values.size(); ++i)
    out << num(p.w.x(i)) << ',' << num(p.w.values[i]) << ',' << num(p.w_tilde.values[i]) << '\n';
}

void write_density_csv(std::ostream& out, const std::vector<DensityRow>& rows) {
  out << "s,w,w_tilde,eps,eps_tilde,mu\n";
  for (const DensityRow& r : rows)
    out << num(r.s) << ',' << num(r.w) << ',' << num(r.w_tilde) << ',' << num(r.em.eps) << ','
        << num(r.em.eps_tilde) << ',' << num(r.em.mu) << '\n';
}

void write_zeros_csv(std::ostream& out, const std::vector<ZeroRow>& rows) {
  out << "t,s,rank,re_z,im_z,X,Y,re_alpha,im_alpha,in_Omega,in_Omega_tilde,in_Xi,D\n";
  for (const ZeroRow& r : rows) {
    const ZeroRecord& z = r.zero;
    out << num(z.t) << ',' << num(z.s) << ',' << z.rank << ',' << num(z.z0.real()) << ',' << num(z.z0.imag()) << ','
        << num(z.X) << ',' << num(z.Y) << ',' << num(z.alpha.real()) << ',' << num(z.alpha.imag()) << ','
        << int(r.flags.in_Omega) << ',' << int(r.flags.in_Omega_tilde) << ',' << int(r.flags.in_Xi) << ','
        << num(r.flags.D) << '\n';
  }
}

void write_kernel_csv(std::ostream& out, const std::vector<KernelRow>& rows) {
  out << "re_lambda,im_lambda,re_z,im_z,re_K,im_K,bound_rhs,ratio\n";
  for (const KernelRow& r : rows)
    out << num(r.lambda.real()) << ',' << num(r.lambda.imag()) << ',' << num(r.z.real()) << ',' << num(r.z.imag())
        << ',' << num(r.K.real()) << ',' << num(r.K.imag()) << ',' << num(r.bound_rhs) << ',' << num(r.ratio) << '\n';
}

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label, int width, int height)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)), width_(width),
      height_(height) {}

void SvgPlot::polyline(const std::vector<double>& x, const std::vector<double>& y, const std::string& color) {
  if (x.size() != y.size()) throw Error(ErrorKind::input, "SvgPlot: x and y differ in length");
  series_.push_back({x, y, color, false});
}

void SvgPlot::markers(const std::vector<double>& x, const std::vector<double>& y, const std::string& color) {
  if (x.size() != y.size()) throw Error(ErrorKind::input, "SvgPlot: x and y differ in length");
  series_.push_back({x, y, color, true});
  n_markers_ += x.size();
}

std::string SvgPlot::str() const {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const Series& s : series_)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-300) y0 -= 0.5, y1 += 0.5;
  const double padx = 0.05 * (x1 - x0), pady = 0.05 * (y1 - y0);
  x0 -= padx, x1 += padx, y0 -= pady, y1 += pady;

  const double left = 70, right = 20, top = 40, bottom = 50;
  const double pw = width_ - left - right, ph = height_ - top - bottom;
  auto X = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto Y = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << width_ / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title_)
    << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    o << "<text x=\"" << short_num(X(xv)) << "\" y=\"" << short_num(top + ph + 16)
      << "\" text-anchor=\"middle\">" << short_num(xv) << "</text>\n";
    o << "<text x=\"" << short_num(left - 6) << "\" y=\"" << short_num(Y(yv) + 4) << "\" text-anchor=\"end\">"
      << short_num(yv) << "</text>\n";
  }
  o << "<text x=\"" << short_num(left + pw / 2) << "\" y=\"" << height_ - 10 << "\" text-anchor=\"middle\">"
    << escape(x_label_) << "</text>\n";
  o << "<text x=\"16\" y=\"" << short_num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << short_num(top + ph / 2) << ")\">" << escape(y_label_) << "</text>\n";
  for (const Series& s : series_) {
    if (s.points) {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        o << "<circle class=\"marker\" cx=\"" << short_num(X(s.x[i])) << "\" cy=\"" << short_num(Y(s.y[i]))
          << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      continue;
    }
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      o << short_num(X(s.x[i])) << ',' << short_num(Y(s.y[i])) << ' ';
    }
    o << "\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

}  // namespace nlft
