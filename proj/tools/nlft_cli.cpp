#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "nlft/config.hpp"
#include "nlft/engine.hpp"
#include "nlft/io.hpp"
#include "nlft/kernel.hpp"
#include "nlft/parallel.hpp"
#include "nlft/potential.hpp"
#include "nlft/report.hpp"
#include "nlft/spectral.hpp"
#include "nlft/verifier.hpp"
#include "nlft/zeros.hpp"

namespace fs = std::filesystem;
using namespace nlft;

namespace {

constexpr int exit_ok = 0, exit_check_failure = 1, exit_usage = 2;

struct Overrides {
  std::string config_path;
  std::string out;
  bool plots = false;
  int threads = -1;
  std::optional<std::uint64_t> seed;
  bool allow_large_l1 = false;
};

// defaults < --config file < flags; validation last
RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? default_config() : load_config(o.config_path);
  if (!o.out.empty()) c.output.dir = o.out;
  if (o.plots) c.output.plots = true;
  if (o.threads >= 0) c.threads = o.threads;
  if (o.seed) c.seed = *o.seed;
  if (o.allow_large_l1) c.allow_large_l1 = true;
  c.validate();
  set_thread_count(c.threads);
  return c;
}

std::string fixture_dir(const RunConfig& c, const FixtureSpec& spec) {
  const fs::path dir = fs::path(c.output.dir) / fixture_id(spec);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::io, "cannot create output directory '" + dir.string() + "'");
  return dir.string();
}

template <typename Fn>
std::string to_text(Fn&& fn) {
  std::ostringstream o;
  fn(o);
  return o.str();
}

std::vector<double> x_grid(const RunConfig& c) {
  std::vector<double> xs(static_cast<std::size_t>(c.grids.n_x));
  for (int i = 0; i < c.grids.n_x; ++i)
    xs[static_cast<std::size_t>(i)] = -c.grids.X + 2.0 * c.grids.X * i / (c.grids.n_x - 1);
  return xs;
}

SolverOptions solver_options(const RunConfig& c) {
  SolverOptions o;
  o.max_phase_step = c.solver.max_phase_step;
  o.steps_multiplier = c.solver.steps_multiplier;
  return o;
}

// -- nlft ---------------------------------------------------------------------

int cmd_nlft(const RunConfig& c) {
  const SolverOptions opts = solver_options(c);
  for (const FixtureSpec& spec : c.fixtures) {
    const Potential f = make_fixture(spec);
    const std::string dir = fixture_dir(c, spec);
    std::vector<double> times = c.grids.t;
    times.push_back(f.support_end());
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    const std::size_t at_T = static_cast<std::size_t>(
        std::find(times.begin(), times.end(), f.support_end()) - times.begin());

    const std::vector<double> xs = x_grid(c);
    std::vector<std::vector<TransferCoefficients>> paths(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
      const int steps = default_steps(f, 2.0 * std::abs(xs[i]) + f.max_abs(), f.support_end(), opts);
      paths[i] = transfer_path(f, xs[i], times, steps);
    });
    std::vector<TransferCoefficients> terminal, sweep;
    for (std::size_t k = 0; k < times.size(); ++k)
      for (const auto& p : paths) (k == at_T ? terminal : sweep).push_back(p[k]);
    sweep.insert(sweep.end(), terminal.begin(), terminal.end());
    std::stable_sort(sweep.begin(), sweep.end(),
                     [](const TransferCoefficients& a, const TransferCoefficients& b) { return a.t < b.t; });

    write_file(dir + "/transfer.csv", to_text([&](std::ostream& o) { write_transfer_csv(o, terminal); }));
    write_file(dir + "/log_abs_a.csv", to_text([&](std::ostream& o) { write_log_a_csv(o, sweep); }));

    if (f.l2() > 0.0) {
      const PlancherelResult pr = plancherel_residual(f, 8.0, 2e-3, 4096.0, opts);
      std::printf("plancherel %s integral_log_a=%.10g half_pi_l2sq=%.10g rel_err=%.3e window=%g\n",
                  fixture_id(spec).c_str(), pr.lhs, pr.rhs, pr.rel_err, pr.X);
    } else {
      std::printf("plancherel %s f=0 integral_log_a=0 half_pi_l2sq=0 rel_err=0\n", fixture_id(spec).c_str());
    }
    if (c.output.plots) {
      SvgPlot plot("log|a(T,x)|  " + fixture_id(spec), "x", "log|a|");
      std::vector<double> y;
      for (const TransferCoefficients& r : terminal) y.push_back(std::log(std::abs(r.a)));
      plot.polyline(xs, y);
      write_file(dir + "/log_abs_a.svg", plot.str());
    }
  }
  return exit_ok;
}

// -- spectrum -----------------------------------------------------------------

int cmd_spectrum(const RunConfig& c) {
  const SolverOptions opts = solver_options(c);
  for (const FixtureSpec& spec : c.fixtures) {
    const Potential f = make_fixture(spec);
    const std::string dir = fixture_dir(c, spec);
    const SpectralProfile p = build_profile(f, c.grids.X, c.grids.n_x, opts);
    write_file(dir + "/spectrum.csv", to_text([&](std::ostream& o) { write_spectrum_csv(o, p); }));

    std::vector<DensityRow> dens;
    for (double s : c.grids.s) dens.push_back({s, p.w_at(s), p.w_tilde_at(s), eps_mu(p, s)});
    write_file(dir + "/density.csv", to_text([&](std::ostream& o) { write_density_csv(o, dens); }));

    // K against sinc / w(s) on Q(s, 2/t) with the bound shape sqrt(V(z) V(lambda)) eps
    std::vector<KernelRow> rows;
    for (double t : c.grids.t)
      for (const DensityRow& d : dens) {
        const double reach = std::abs(d.s) + 4.0 / t;
        const EvolutionSolver solver(f, default_steps(f, 2.0 * reach + f.max_abs(), f.support_end(), opts));
        for (int i = 0; i < c.checks.samples; ++i) {
          const std::vector<double> h = halton(c.seed + 1 + static_cast<std::size_t>(i), 4);
          KernelRow r;
          r.lambda = cplx(d.s + (4.0 * h[0] - 2.0) / t, (4.0 * h[1] - 2.0) / t);
          r.z = cplx(d.s + (4.0 * h[2] - 2.0) / t, (4.0 * h[3] - 2.0) / t);
          r.K = K_direct(solver, t, r.lambda, r.z);
          r.bound_rhs = std::sqrt(geom_weights(d.s, t, r.z).V * geom_weights(d.s, t, r.lambda).V) * d.em.eps;
          const double lhs = std::abs(r.K - sinc_kernel(t, r.lambda, r.z) / d.w);
          r.ratio = r.bound_rhs > 0.0 ? lhs / r.bound_rhs : 0.0;
          rows.push_back(r);
        }
      }
    write_file(dir + "/kernel.csv", to_text([&](std::ostream& o) { write_kernel_csv(o, rows); }));
    std::printf("spectrum %s cross_residual=%.3e |w-1|_inf=%.6g\n", fixture_id(spec).c_str(), p.cross_residual,
                w_minus_one_sup(p));
    if (c.output.plots) {
      SvgPlot plot("w(x), w~(x)  " + fixture_id(spec), "x", "density");
      std::vector<double> xs;
      for (std::size_t i = 0; i < p.w.values.size(); ++i) xs.push_back(p.w.x(i));
      plot.polyline(xs, p.w.values, "#1f77b4");
      plot.polyline(xs, p.w_tilde.values, "#ff7f0e");
      write_file(dir + "/spectrum.svg", plot.str());
    }
  }
  return exit_ok;
}

// -- zeros --------------------------------------------------------------------

int cmd_zeros(const RunConfig& c) {
  const SolverOptions opts = solver_options(c);
  ZeroSearchOptions zo;
  zo.depth_cap = c.solver.depth_cap;
  zo.solver = opts;
  const double D = c.checks.D.front();
  for (const FixtureSpec& spec : c.fixtures) {
    const Potential f = make_fixture(spec);
    const std::string dir = fixture_dir(c, spec);
    const SpectralProfile p = build_profile(f, c.grids.X, c.grids.n_x, opts);
    struct Site {
      double t, s;
      std::vector<ZeroRow> rows;
    };
    std::vector<Site> sites;
    for (double t : c.grids.t)
      for (double s : c.grids.s) sites.push_back({t, s, {}});
    parallel_for(sites.size(), [&](std::size_t i) {
      Site& site = sites[i];
      const ZeroScan e = locate_zeros(f, site.t, site.s, c.checks.zero_count, zo, false);
      const ZeroScan et = locate_zeros(f, site.t, site.s, c.checks.zero_count, zo, true);
      const EpsMu em = eps_mu(p, site.s);
      for (const ZeroRecord& z : e.zeros) {
        ZeroRow row{z, {}};
        if (!et.zeros.empty()) {
          const ZeroRecord& partner = et.zeros[std::min(static_cast<std::size_t>(z.rank), et.zeros.size() - 1)];
          row.flags = region_flags(z, partner, em.eps, em.eps_tilde, D);
        }
        row.flags.D = D;
        site.rows.push_back(row);
      }
    });
    std::vector<ZeroRow> rows;
    for (const Site& s : sites) rows.insert(rows.end(), s.rows.begin(), s.rows.end());
    write_file(dir + "/zeros.csv", to_text([&](std::ostream& o) { write_zeros_csv(o, rows); }));
    std::printf("zeros %s located=%zu\n", fixture_id(spec).c_str(), rows.size());
    if (c.output.plots) {
      SvgPlot plot("zeros of E(t,.) scaled by t  " + fixture_id(spec), "t (Re z - s)", "t Im z");
      std::vector<double> x, y;
      for (const ZeroRow& r : rows) {
        x.push_back(r.zero.X);
        y.push_back(r.zero.t * r.zero.z0.imag());
      }
      plot.markers(x, y);
      write_file(dir + "/zeros.svg", plot.str());
    }
  }
  return exit_ok;
}

// -- verify / report ----------------------------------------------------------

void print_tally(const std::vector<CheckReport>& reports) {
  std::map<std::string, std::map<std::string, int>> tally;
  for (const CheckReport& r : reports) tally[r.check_id][to_string(r.verdict)]++;
  for (const std::string& id : all_check_ids()) {
    auto it = tally.find(id);
    if (it == tally.end()) continue;
    std::printf("%-24s", id.c_str());
    for (const auto& [v, n] : it->second) std::printf(" %s=%d", v.c_str(), n);
    std::printf("\n");
  }
  const auto fails = std::count_if(reports.begin(), reports.end(),
                                   [](const CheckReport& r) { return r.verdict == Verdict::fail; });
  std::printf("reports=%zu fail=%ld\n", reports.size(), static_cast<long>(fails));
}

void write_reports(const std::string& dir, const RunConfig& c, const std::vector<CheckReport>& reports) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::io, "cannot create output directory '" + dir + "'");
  if (c.has_format("json")) write_file(dir + "/report.json", reports_to_json(reports));
  if (c.has_format("csv"))
    write_file(dir + "/summary.csv", to_text([&](std::ostream& o) { write_summary_csv(o, reports); }));
}

int cmd_verify(const RunConfig& c) {
  const std::vector<CheckReport> reports = run_suite(c);
  write_reports(c.output.dir, c, reports);
  print_tally(reports);
  return suite_passed(reports) ? exit_ok : exit_check_failure;
}

int cmd_report(const std::string& input, const std::string& out) {
  std::ifstream in(input);
  if (!in) throw Error(ErrorKind::io, "cannot read report '" + input + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::vector<CheckReport> reports = reports_from_json(ss.str());
  if (!out.empty()) {
    RunConfig c = default_config();
    c.output.formats = {"csv"};
    write_reports(out, c, reports);
  }
  print_tally(reports);
  return suite_passed(reports) ? exit_ok : exit_check_failure;
}

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "output directory (overrides output.dir)");
  sub->add_flag("--plots", o.plots, "also write SVG plots");
  sub->add_option("--threads", o.threads, "worker threads, 0 = hardware")->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", o.seed, "sampling seed");
  sub->add_flag("--allow-large-l1", o.allow_large_l1, "permit fixtures with target l1 above 0.5");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear Fourier transform toolkit and estimate verifier"};
  app.require_subcommand(1);
  Overrides o;
  std::string report_input;

  CLI::App* nlft = app.add_subcommand("nlft", "transfer coefficients a(T,x), b(T,x) and the log|a| sweep");
  CLI::App* spectrum = app.add_subcommand("spectrum", "spectral densities, eps/mu and kernel samples");
  CLI::App* zeros = app.add_subcommand("zeros", "zeros of E(t,.) near each s with region flags");
  CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
  CLI::App* report = app.add_subcommand("report", "summarise an existing report.json");
  for (CLI::App* sub : {nlft, spectrum, zeros, verify}) add_common(sub, o);
  report->add_option("input", report_input, "report.json from verify")->required();
  report->add_option("--out", o.out, "write summary.csv into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (report->parsed()) return cmd_report(report_input, o.out);
    const RunConfig c = resolve(o);
    if (nlft->parsed()) return cmd_nlft(c);
    if (spectrum->parsed()) return cmd_spectrum(c);
    if (zeros->parsed()) return cmd_zeros(c);
    if (verify->parsed()) return cmd_verify(c);
  } catch (const Error& e) {
    std::fprintf(stderr, "nlft: %s error: %s\n", to_string(e.kind()), e.what());
    return exit_usage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "nlft: %s\n", e.what());
    return exit_usage;
  }
  return exit_usage;
}
