#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace nlft {

enum class Verdict { pass, pass_with_constant, not_applicable, fail };
const char* to_string(Verdict v);
Verdict verdict_from_string(const std::string& name);

struct CheckReport {
  std::string check_id;
  std::string fixture_id;
  std::vector<std::pair<std::string, double>> parameters;  // kept in insertion order
  double lhs = 0.0;
  double rhs_shape = 0.0;
  double empirical_constant = 0.0;
  double refinement_delta = std::numeric_limits<double>::quiet_NaN();  // unset when not refined
  Verdict verdict = Verdict::pass;
  std::vector<std::pair<std::string, double>> diagnostics;
  std::string notes;

  double parameter(const std::string& key, double fallback = 0.0) const;
  double diagnostic(const std::string& key, double fallback = 0.0) const;
};

/// JSON array; key order fixed, NaN and infinities written as null.
std::string reports_to_json(const std::vector<CheckReport>& reports);
std::vector<CheckReport> reports_from_json(const std::string& text);

/// Header "check_id,fixture,verdict,empirical_constant,refinement_delta".
void write_summary_csv(std::ostream& out, const std::vector<CheckReport>& reports);

}  // namespace nlft
