#pragma once

// Grid estimate of the singular set: points x such that for every radius r
// some t makes the integral of Phi(., t) over B(x, r) intersected with the
// domain diverge.

#include <cstdint>
#include <vector>

#include "molab/modular.hpp"

namespace molab {

enum class Evidence { AnalyticPole, Growth, DenseInterval };
enum class MeasureVerdict { Zero, Positive, Undetermined };

const char* to_string(Evidence e);
const char* to_string(MeasureVerdict v);

struct SingularFlag {
  std::size_t node = 0;  // index into SingularSetEstimate::nodes
  Point x{0.0, 0.0};
  Evidence evidence = Evidence::AnalyticPole;
  DivergenceCertificate certificate;
  double radius = 0.0;
  double t = 0.0;
  bool inside_domain = true;
};

struct SingularSetOptions {
  std::vector<double> radii;     // empty: grid_res * 2^-j, 0 <= j <= 8
  std::vector<double> t_values;  // empty: 2^i, 0 <= i <= 8
  AccuracySpec acc;
  std::uint64_t seed = 1;
  int spot_checks = 16;
};

struct SingularSetEstimate {
  int dim = 1;
  Box bounds;
  double grid_res = 0.0;
  std::size_t nx = 0, ny = 1;  // nodes per axis
  std::vector<Point> nodes;    // row-major, x fastest
  std::vector<char> in_window;
  std::vector<char> flagged_mask;
  std::vector<SingularFlag> flagged;
  std::size_t inconclusive = 0;
  std::size_t spot_checked = 0;
  std::size_t spot_failures = 0;
  double cell_volume = 0.0;
  double measure_upper = 0.0;
  std::size_t flagged_outside_domain = 0;
  MeasureVerdict verdict = MeasureVerdict::Undetermined;
};

/// Builds the default radius and t schedules when left empty; throws on
/// explicitly empty ones via the overload below.
SingularSetEstimate estimate_singular_set(const MOFunction& phi, const BoxSet& window, double grid_res,
                                          const SingularSetOptions& opt = {});

/// Entry point with explicit schedules (both must be nonempty).
SingularSetEstimate estimate_singular_set(const MOFunction& phi, const BoxSet& window, double grid_res,
                                          const std::vector<double>& radii, const std::vector<double>& t_values,
                                          const SingularSetOptions& opt = {});

struct ClosednessReport {
  std::vector<Point> violations;
  bool vacuous = true;  // no node was enclosed by flagged neighbors
  bool ok() const { return violations.empty(); }
};

/// Nodes whose neighbors are flagged on all sides must be flagged themselves.
ClosednessReport closedness_check(const SingularSetEstimate& est);

enum class LocalIntegrability { LocallyIntegrable, Singular, Undetermined };

const char* to_string(LocalIntegrability v);

LocalIntegrability local_integrability_probe(const MOFunction& phi, const Point& x, double r,
                                             const std::vector<double>& t_values, const AccuracySpec& acc = {});

}  // namespace molab
