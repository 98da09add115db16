#pragma once

// Named reproducible experiments writing CSV artifacts plus a manifest.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "molab/io.hpp"

namespace molab {

const char* library_version();

/// Names accepted by run_experiment.
const std::vector<std::string>& experiment_names();

/// Smooth bump candidate h * bump(plateau [c - w/2, c + w/2], ramp w/4).
struct BumpCandidate {
  double center = 0.0, width = 0.0, height = 0.0;
  PiecewiseFunction f;
};

/// Seeded sweep: centers at the midpoints of `count` equal strata of
/// [-0.35, 1.35], heights in [0.3, 1.5], widths in [max(0.02, 1.05 s), 0.5]
/// for stratum width s, so consecutive plateaus overlap and cover (0, 1).
std::vector<BumpCandidate> bump_candidates(int count, std::uint64_t seed);

struct ExperimentConfig {
  std::string name;
  std::optional<Json> family;  // family file contents; default per experiment
  std::optional<BoxSet> compact, omega, window;
  std::optional<double> tol, res;
  std::optional<int> n_max;
  int candidates = 50;
  int series_terms = 8;
  std::uint64_t seed = 1;
  AccuracySpec acc;
  std::filesystem::path output_dir = "molab-out";
};

ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& cfg);

struct ExperimentResult {
  int status = 0;  // 0 success, 3 numeric non-convergence
  std::string summary;
  std::vector<std::filesystem::path> artifacts;  // CSVs, then the manifest
  Json manifest;
};

/// Writes per-stage CSVs and manifest.json into cfg.output_dir. On a library
/// error an error.json record is written before the exception propagates.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace molab
