#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlft/potential.hpp"

namespace nlft {

struct GridConfig {
  double X = 64.0;   // spectral window [-X, X]
  int n_x = 2048;    // profile points
  std::vector<double> t{0.5, 1.0};
  std::vector<double> s{0.0, 0.7};
};

struct SolverConfig {
  int steps_multiplier = 1;
  double max_phase_step = 0.02;
  double depth_cap = 0.0;  // 0 means 8/t
};

struct CheckConfig {
  std::vector<std::string> ids;  // empty list runs nothing; see all_check_ids()
  std::vector<double> D{1.0, 4.0, 16.0, 64.0};
  int samples = 64;
  int zero_count = 3;
  double delta = 0.1;        // admissibility parameter of the displacement checks
  int track_steps = 16;
  double track_span = 0.05;  // tracking interval [t - span, t]
  bool refine = true;        // rerun each measurement on refined grids
};

struct OutputConfig {
  std::string dir = "nlft-out";
  std::vector<std::string> formats{"csv", "json"};
  bool plots = false;
};

struct RunConfig {
  std::vector<FixtureSpec> fixtures;
  GridConfig grids;
  SolverConfig solver;
  CheckConfig checks;
  OutputConfig output;
  std::uint64_t seed = 7;
  int threads = 0;
  bool allow_large_l1 = false;

  /// Throws Error(config) on the first violated invariant.
  void validate() const;
  bool has_format(const std::string& name) const;
};

/// The four standard fixture kinds at l1 = 0.3 and every check.
RunConfig default_config();

std::string config_to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected. Value checks
/// are left to validate(), so command-line overrides can be applied first.
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace nlft
