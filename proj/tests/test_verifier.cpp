#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "nlft/config.hpp"
#include "nlft/report.hpp"
#include "nlft/verifier.hpp"

using namespace nlft;

namespace {

RunConfig small_config(std::vector<std::string> ids) {
  RunConfig c = default_config();
  c.fixtures = {{PotentialKind::box, 1.0, 257, 0.3, 7}};
  c.grids.X = 16.0;
  c.grids.n_x = 257;
  c.grids.t = {1.0};
  c.grids.s = {0.2};
  c.checks.ids = std::move(ids);
  c.checks.samples = 8;
  c.checks.D = {1.0, 4.0};
  return c;
}

}  // namespace

TEST_CASE("check registry") {
  const auto& all = all_check_ids();
  CHECK(std::set<std::string>(all.begin(), all.end()).size() == all.size());
  for (const auto* group : {&identity_check_ids(), &empirical_check_ids(), &hard_check_ids()})
    for (const std::string& id : *group) CHECK(is_check_id(id));
  CHECK_FALSE(is_check_id("nope"));
  CHECK(is_check_id("theta_rate"));
}

TEST_CASE("halton") {
  const auto h1 = halton(1, 3);
  CHECK(h1[0] == doctest::Approx(0.5));
  CHECK(h1[1] == doctest::Approx(1.0 / 3.0));
  CHECK(h1[2] == doctest::Approx(0.2));
  const auto h6 = halton(6, 2);
  CHECK(h6[0] == doctest::Approx(0.375));  // 110 -> .011
  CHECK(h6[1] == doctest::Approx(2.0 / 9.0));  // 20 -> .02
  CHECK_THROWS_AS(halton(1, 7), Error);
}

TEST_CASE("gamma factor") {
  CHECK(gamma_factor(0.5) == doctest::Approx(std::sqrt(2.0 / std::sinh(1.0))));
  CHECK(gamma_factor(-0.5) == doctest::Approx(gamma_factor(0.5)));
}

TEST_CASE("alignment recovers synthetic sines") {
  const double t = 1.3, w = 0.9, wt = 1.05;
  const cplx z0(0.4, -1.1), dz(0.35, -0.05), alpha = std::polar(1.0, 0.7);
  const double g = gamma_factor(t * z0.imag());
  const cplx shift(0.02, 0.01);
  for (double u : {-0.3, 0.1, 0.6}) {
    const cplx E = alpha * g / std::sqrt(w) * std::sin(t * (u - z0));
    const cplx Et = alpha * g / std::sqrt(wt) * std::sin(t * (u - (z0 + dz)));
    const Alignment al = solve_alignment(E, Et, u, t, z0 + shift, z0 + dz + shift, w, wt);
    REQUIRE(al.converged);
    CHECK(std::abs(al.z0 - z0) < 1e-10);
    CHECK(std::abs(al.z0_tilde - (z0 + dz)) < 1e-10);
    CHECK(std::abs(al.alpha0 - alpha) < 1e-9);
    CHECK(al.residual_E < 1e-12);
    CHECK(al.residual_E_tilde < 1e-10);
    CHECK(al.closed_form_gap < 1e-9);
  }
  CHECK_THROWS_AS(solve_alignment(1.0, 1.0, 0.0, 1.0, cplx(0, -1), cplx(0.3, -1), -1.0, 1.0), Error);
}

TEST_CASE("config round trip and validation") {
  RunConfig c = default_config();
  c.grids.t = {0.75};
  c.checks.ids = {"su11", "E_sine"};
  c.seed = 11;
  const RunConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK_NOTHROW(back.validate());

  CHECK_THROWS_AS(config_from_json("{\"grids\": {\"bogus\": 1}}"), Error);
  CHECK_THROWS_AS(config_from_json("{\"seed\": \"x\"}"), Error);
  CHECK_THROWS_AS(config_from_json("not json"), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);

  RunConfig big = config_from_json(R"({"fixtures": [{"kind": "box", "target_l1": 0.8}]})");
  CHECK_THROWS_AS(big.validate(), Error);
  big.allow_large_l1 = true;
  CHECK_NOTHROW(big.validate());

  RunConfig bad = default_config();
  bad.checks.ids = {"nope"};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = default_config();
  bad.checks.track_span = 0.6;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = default_config();
  bad.grids.s = {60.0};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("report JSON round trip and CSV") {
  CheckReport r;
  r.check_id = "E_sine";
  r.fixture_id = "box";
  r.parameters = {{"t", 1.0}, {"s", 0.5}};
  r.lhs = 0.25;
  r.rhs_shape = 2.0;
  r.empirical_constant = 0.125;
  r.verdict = Verdict::pass_with_constant;
  r.diagnostics = {{"eps", 0.01}};
  r.notes = "x";
  const std::string js = reports_to_json({r});
  const auto back = reports_from_json(js);
  REQUIRE(back.size() == 1);
  CHECK(back[0].check_id == "E_sine");
  CHECK(back[0].parameter("s") == 0.5);
  CHECK(std::isnan(back[0].refinement_delta));
  CHECK(back[0].verdict == Verdict::pass_with_constant);
  CHECK(reports_to_json(back) == js);
  std::ostringstream csv;
  write_summary_csv(csv, back);
  CHECK(csv.str() == "check_id,fixture,verdict,empirical_constant,refinement_delta\nE_sine,box,pass-with-constant,0.125,\n");
  CHECK_THROWS_AS(reports_from_json("[{}]"), Error);
  CHECK_THROWS_AS(verdict_from_string("maybe"), Error);
}

TEST_CASE("empty check list runs nothing") { CHECK(run_suite(small_config({})).empty()); }

TEST_CASE("small suite is deterministic and ordered") {
  const RunConfig c = small_config({"joint_A", "su11", "K_vs_sinc"});
  const auto a = run_suite(c);
  const auto b = run_suite(c);
  CHECK(reports_to_json(a) == reports_to_json(b));
  // su11 once, K_vs_sinc once, joint_A per D
  REQUIRE(a.size() == 4);
  CHECK(a[0].check_id == "su11");
  CHECK(a[0].verdict == Verdict::pass);
  CHECK(a[1].check_id == "K_vs_sinc");
  CHECK(a[1].verdict == Verdict::pass_with_constant);
  CHECK(a[1].refinement_delta < 0.1);
  CHECK(a[2].check_id == "joint_A");
  CHECK(a[2].parameter("D") == 1.0);
  CHECK(a[3].parameter("D") == 4.0);
  CHECK(suite_passed(a));
}

TEST_CASE("identity checks hold on a small suite") {
  RunConfig c = small_config(identity_check_ids());
  c.checks.refine = false;
  const auto reports = run_suite(c);
  CHECK(reports.size() == identity_check_ids().size());
  for (const CheckReport& r : reports) {
    INFO(r.check_id << ": " << r.notes);
    CHECK(r.verdict == Verdict::pass);
  }
}
