#include "nlft/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nlft/common.hpp"
#include "nlft/verifier.hpp"

namespace nlft {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::config, what); }

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) bad(where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) bad("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json fixture_to_json(const FixtureSpec& f) {
  json j;
  j["kind"] = to_string(f.kind);
  j["T"] = f.support_end;
  j["n_samples"] = f.n_samples;
  j["target_l1"] = f.target_l1;
  j["seed"] = f.seed;
  return j;
}

FixtureSpec fixture_from_json(const json& j) {
  reject_unknown(j, {"kind", "T", "n_samples", "target_l1", "seed"}, "fixture");
  FixtureSpec f;
  if (!j.contains("kind")) bad("fixture needs a kind");
  try {
    f.kind = potential_kind_from_string(j.at("kind").get<std::string>());
  } catch (const Error& e) {
    bad(e.what());
  }
  read(j, "T", f.support_end);
  read(j, "n_samples", f.n_samples);
  read(j, "target_l1", f.target_l1);
  read(j, "seed", f.seed);
  return f;
}

bool finite_all(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

RunConfig default_config() {
  RunConfig c;
  c.fixtures = standard_fixture_specs(0.3);
  c.checks.ids = all_check_ids();
  return c;
}

bool RunConfig::has_format(const std::string& name) const {
  return std::find(output.formats.begin(), output.formats.end(), name) != output.formats.end();
}

void RunConfig::validate() const {
  for (const FixtureSpec& f : fixtures) {
    if (f.kind == PotentialKind::custom) bad("fixture kind 'custom' has no generator");
    if (!(f.support_end > 0.0) || !std::isfinite(f.support_end)) bad("fixture T must be positive");
    if (f.n_samples < 8) bad("fixture n_samples must be >= 8");
    if (!(f.target_l1 >= 0.0) || !std::isfinite(f.target_l1)) bad("fixture target_l1 must be >= 0");
    if (f.target_l1 > 0.5 && !allow_large_l1)
      bad("fixture target_l1 above 0.5 needs allow_large_l1 (--allow-large-l1)");
  }
  if (!(grids.X > 0.0) || !std::isfinite(grids.X)) bad("grids.X must be positive");
  if (grids.n_x < 8) bad("grids.n_x must be >= 8");
  if (grids.t.empty() || grids.s.empty()) bad("grids.t and grids.s must be non-empty");
  if (!finite_all(grids.t) || !finite_all(grids.s)) bad("grid values must be finite");
  for (double t : grids.t)
    if (!(t > 0.0)) bad("grids.t values must be positive");
  for (double s : grids.s)
    if (std::abs(s) > 0.75 * grids.X) bad("grids.s values must lie in the inner spectral window");
  if (solver.steps_multiplier < 1) bad("solver.steps_multiplier must be >= 1");
  if (!(solver.max_phase_step > 0.0) || solver.max_phase_step > 0.5) bad("solver.max_phase_step must be in (0, 0.5]");
  if (!(solver.depth_cap >= 0.0)) bad("solver.depth_cap must be >= 0");
  for (double t : grids.t)
    if (solver.depth_cap * t > 20.0) bad("solver.depth_cap * t must be <= 20");
  const std::vector<std::string> known = all_check_ids();
  for (const std::string& id : checks.ids)
    if (std::find(known.begin(), known.end(), id) == known.end()) bad("unknown check_id '" + id + "'");
  if (checks.D.empty() || !finite_all(checks.D)) bad("checks.D must be a non-empty list");
  for (double d : checks.D)
    if (!(d > 0.0)) bad("checks.D values must be positive");
  if (checks.samples < 8) bad("checks.samples must be >= 8");
  if (checks.zero_count < 1 || checks.zero_count > 10) bad("checks.zero_count must be in [1, 10]");
  if (!(checks.delta > 0.0) || checks.delta >= 1.0) bad("checks.delta must be in (0, 1)");
  if (checks.track_steps < 8) bad("checks.track_steps must be >= 8");
  if (!(checks.track_span > 0.0)) bad("checks.track_span must be positive");
  for (double t : grids.t)
    if (checks.track_span >= t) bad("checks.track_span must be below every t");
  for (const std::string& f : output.formats)
    if (f != "csv" && f != "json") bad("output format '" + f + "' (csv, json)");
  if (output.dir.empty()) bad("output.dir must be non-empty");
  if (threads < 0) bad("threads must be >= 0");
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["fixtures"] = json::array();
  for (const FixtureSpec& f : c.fixtures) j["fixtures"].push_back(fixture_to_json(f));
  j["grids"] = {{"X", c.grids.X}, {"n_x", c.grids.n_x}, {"t", c.grids.t}, {"s", c.grids.s}};
  j["solver"] = {{"steps_multiplier", c.solver.steps_multiplier},
                 {"max_phase_step", c.solver.max_phase_step},
                 {"depth_cap", c.solver.depth_cap}};
  j["checks"] = {{"ids", c.checks.ids},
                 {"D", c.checks.D},
                 {"samples", c.checks.samples},
                 {"zero_count", c.checks.zero_count},
                 {"delta", c.checks.delta},
                 {"track_steps", c.checks.track_steps},
                 {"track_span", c.checks.track_span},
                 {"refine", c.checks.refine}};
  j["output"] = {{"dir", c.output.dir}, {"formats", c.output.formats}, {"plots", c.output.plots}};
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["allow_large_l1"] = c.allow_large_l1;
  return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c = default_config();
  try {
    reject_unknown(j, {"fixtures", "grids", "solver", "checks", "output", "seed", "threads", "allow_large_l1"},
                   "config");
    if (j.contains("fixtures")) {
      if (!j["fixtures"].is_array()) bad("fixtures must be an array");
      c.fixtures.clear();
      for (const json& f : j["fixtures"]) c.fixtures.push_back(fixture_from_json(f));
    }
    if (j.contains("grids")) {
      const json& g = j["grids"];
      reject_unknown(g, {"X", "n_x", "t", "s"}, "grids");
      read(g, "X", c.grids.X);
      read(g, "n_x", c.grids.n_x);
      read(g, "t", c.grids.t);
      read(g, "s", c.grids.s);
    }
    if (j.contains("solver")) {
      const json& s = j["solver"];
      reject_unknown(s, {"steps_multiplier", "max_phase_step", "depth_cap"}, "solver");
      read(s, "steps_multiplier", c.solver.steps_multiplier);
      read(s, "max_phase_step", c.solver.max_phase_step);
      read(s, "depth_cap", c.solver.depth_cap);
    }
    if (j.contains("checks")) {
      const json& k = j["checks"];
      reject_unknown(k, {"ids", "D", "samples", "zero_count", "delta", "track_steps", "track_span", "refine"},
                     "checks");
      read(k, "ids", c.checks.ids);
      read(k, "D", c.checks.D);
      read(k, "samples", c.checks.samples);
      read(k, "zero_count", c.checks.zero_count);
      read(k, "delta", c.checks.delta);
      read(k, "track_steps", c.checks.track_steps);
      read(k, "track_span", c.checks.track_span);
      read(k, "refine", c.checks.refine);
    }
    if (j.contains("output")) {
      const json& o = j["output"];
      reject_unknown(o, {"dir", "formats", "plots"}, "output");
      read(o, "dir", c.output.dir);
      read(o, "formats", c.output.formats);
      read(o, "plots", c.output.plots);
    }
    read(j, "seed", c.seed);
    read(j, "threads", c.threads);
    read(j, "allow_large_l1", c.allow_large_l1);
  } catch (const json::exception& e) {
    bad(std::string("config field has the wrong type: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

}  // namespace nlft
