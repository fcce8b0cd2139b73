#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nlft/config.hpp"
#include "nlft/engine.hpp"
#include "nlft/kernel.hpp"
#include "nlft/potential.hpp"
#include "nlft/report.hpp"
#include "nlft/spectral.hpp"
#include "nlft/verifier.hpp"
#include "nlft/zeros.hpp"

namespace py = pybind11;
using namespace nlft;

namespace {

SolverOptions options(int steps_multiplier) {
  SolverOptions o;
  o.steps_multiplier = steps_multiplier;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Continuous nonlinear Fourier transform, de Branges functions and estimate checks";

  static py::exception<Error> error(m, "NlftError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<Potential>(m, "Potential")
      .def(py::init([](double T, std::vector<cplx> samples) { return Potential(T, std::move(samples)); }),
           py::arg("T"), py::arg("samples"))
      .def("__call__", &Potential::operator(), py::arg("t"))
      .def_property_readonly("T", &Potential::support_end)
      .def_property_readonly("l1", &Potential::l1)
      .def_property_readonly("l2", &Potential::l2)
      .def_property_readonly("max_abs", &Potential::max_abs)
      .def_property_readonly("samples",
                             [](const Potential& f) { return std::vector<cplx>(f.samples().begin(), f.samples().end()); });

  m.def(
      "fixture",
      [](const std::string& kind, double T, std::size_t n, double l1, std::uint64_t seed) {
        return make_fixture({potential_kind_from_string(kind), T, n, l1, seed});
      },
      py::arg("kind"), py::arg("T") = 1.0, py::arg("n_samples") = 1025, py::arg("target_l1") = 0.3,
      py::arg("seed") = 7);
  m.def(
      "fixture_id",
      [](const std::string& kind, double T, std::size_t n, double l1, std::uint64_t seed) {
        return fixture_id({potential_kind_from_string(kind), T, n, l1, seed});
      },
      py::arg("kind"), py::arg("T") = 1.0, py::arg("n_samples") = 1025, py::arg("target_l1") = 0.3,
      py::arg("seed") = 7);

  m.def(
      "transfer",
      [](const Potential& f, double x, double t, int mult) {
        const TransferCoefficients c = integrate_transfer(f, x, t, options(mult));
        return py::make_tuple(c.a, c.b);
      },
      py::arg("f"), py::arg("x"), py::arg("t"), py::arg("steps_multiplier") = 1, "(a(t,x), b(t,x))");

  m.def(
      "E",
      [](const Potential& f, cplx z, double t, int mult) {
        const PairState p = evaluate_pair(f, z, t, 0, options(mult));
        return py::make_tuple(p.E.true_E(), p.E.true_E_sharp(), p.E_tilde.true_E(), p.det_residual);
      },
      py::arg("f"), py::arg("z"), py::arg("t"), py::arg("steps_multiplier") = 1,
      "(E, E#, E~, determinant residual) at (t, z)");

  m.def("sinc_kernel", &sinc_kernel, py::arg("t"), py::arg("lam"), py::arg("z"));
  m.def(
      "kernel",
      [](const Potential& f, double t, cplx lam, cplx z, int mult) {
        const SolverOptions o = options(mult);
        const EvolutionSolver solver(
            f, default_steps(f, 2.0 * (std::abs(lam) + std::abs(z)) + f.max_abs(), f.support_end(), o));
        return K_direct(solver, t, lam, z);
      },
      py::arg("f"), py::arg("t"), py::arg("lam"), py::arg("z"), py::arg("steps_multiplier") = 1);

  m.def(
      "densities",
      [](const Potential& f, double X, int n, std::vector<double> s) {
        const SpectralProfile p = build_profile(f, X, n);
        py::list out;
        for (double si : s) {
          const EpsMu em = eps_mu(p, si);
          py::dict d;
          d["s"] = si;
          d["w"] = p.w_at(si);
          d["w_tilde"] = p.w_tilde_at(si);
          d["eps"] = em.eps;
          d["eps_tilde"] = em.eps_tilde;
          d["mu"] = em.mu;
          out.append(d);
        }
        return py::make_tuple(p.cross_residual, out);
      },
      py::arg("f"), py::arg("X") = 64.0, py::arg("n_x") = 2048, py::arg("s") = std::vector<double>{0.0},
      "(cross residual, [{s, w, w_tilde, eps, eps_tilde, mu}])");

  m.def(
      "zeros",
      [](const Potential& f, double t, double s, int count, bool tilde) {
        const ZeroScan scan = locate_zeros(f, t, s, count, {}, tilde);
        py::list out;
        for (const ZeroRecord& z : scan.zeros) {
          py::dict d;
          d["z"] = z.z0;
          d["rank"] = z.rank;
          d["X"] = z.X;
          d["Y"] = z.Y;
          d["alpha"] = z.alpha;
          out.append(d);
        }
        return out;
      },
      py::arg("f"), py::arg("t"), py::arg("s"), py::arg("count") = 3, py::arg("tilde") = false);

  m.def("check_ids", &all_check_ids);
  m.def("default_config", [] { return config_to_json(default_config()); }, "default run configuration as JSON");
  m.def(
      "verify",
      [](const std::string& config_json) {
        const RunConfig c = config_from_json(config_json);
        std::vector<CheckReport> reports;
        {
          py::gil_scoped_release release;
          reports = run_suite(c);
        }
        return reports_to_json(reports);
      },
      py::arg("config_json"), "runs the suite and returns the report array as JSON text");
}
