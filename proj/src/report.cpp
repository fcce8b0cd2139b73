#include "nlft/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "nlft/common.hpp"

namespace nlft {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::pass_with_constant: return "pass-with-constant";
    case Verdict::not_applicable: return "not-applicable";
    case Verdict::fail: return "fail";
  }
  return "fail";
}

Verdict verdict_from_string(const std::string& name) {
  for (Verdict v : {Verdict::pass, Verdict::pass_with_constant, Verdict::not_applicable, Verdict::fail})
    if (name == to_string(v)) return v;
  throw Error(ErrorKind::input, "unknown verdict '" + name + "'");
}

namespace {

double lookup(const std::vector<std::pair<std::string, double>>& kv, const std::string& key, double fallback) {
  for (const auto& [k, v] : kv)
    if (k == key) return v;
  return fallback;
}

nlohmann::ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

double read_number(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

nlohmann::ordered_json pairs(const std::vector<std::pair<std::string, double>>& kv) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [k, v] : kv) out[k] = number(v);
  return out;
}

std::vector<std::pair<std::string, double>> read_pairs(const nlohmann::ordered_json& j) {
  std::vector<std::pair<std::string, double>> out;
  for (auto it = j.begin(); it != j.end(); ++it) out.emplace_back(it.key(), read_number(it.value()));
  return out;
}

}  // namespace

double CheckReport::parameter(const std::string& key, double fallback) const {
  return lookup(parameters, key, fallback);
}
double CheckReport::diagnostic(const std::string& key, double fallback) const {
  return lookup(diagnostics, key, fallback);
}

std::string reports_to_json(const std::vector<CheckReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const CheckReport& r : reports) {
    nlohmann::ordered_json j;
    j["check_id"] = r.check_id;
    j["fixture_id"] = r.fixture_id;
    j["parameters"] = pairs(r.parameters);
    j["lhs"] = number(r.lhs);
    j["rhs_shape"] = number(r.rhs_shape);
    j["empirical_constant"] = number(r.empirical_constant);
    j["refinement_delta"] = number(r.refinement_delta);
    j["verdict"] = to_string(r.verdict);
    j["diagnostics"] = pairs(r.diagnostics);
    j["notes"] = r.notes;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::vector<CheckReport> reports_from_json(const std::string& text) {
  std::vector<CheckReport> out;
  try {
    const auto arr = nlohmann::ordered_json::parse(text);
    for (const auto& j : arr) {
      CheckReport r;
      r.check_id = j.at("check_id").get<std::string>();
      r.fixture_id = j.at("fixture_id").get<std::string>();
      r.parameters = read_pairs(j.at("parameters"));
      r.lhs = read_number(j.at("lhs"));
      r.rhs_shape = read_number(j.at("rhs_shape"));
      r.empirical_constant = read_number(j.at("empirical_constant"));
      r.refinement_delta = read_number(j.at("refinement_delta"));
      r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
      r.diagnostics = read_pairs(j.at("diagnostics"));
      r.notes = j.at("notes").get<std::string>();
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::input, std::string("report JSON: ") + e.what());
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<CheckReport>& reports) {
  out << "check_id,fixture,verdict,empirical_constant,refinement_delta\n";
  char buf[64];
  auto num = [&](double v) -> std::string {
    if (!std::isfinite(v)) return "";
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
  };
  for (const CheckReport& r : reports)
    out << r.check_id << ',' << r.fixture_id << ',' << to_string(r.verdict) << ',' << num(r.empirical_constant) << ','
        << num(r.refinement_delta) << '\n';
}

}  // namespace nlft
