#pragma once

// I_Phi(f) = integral over a region of Phi(x, |f(x)|) with three honest
// outcomes: a finite value with an error bound, certified divergence, or
// inconclusive.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "molab/family.hpp"
#include "molab/function.hpp"
#include "molab/geometry.hpp"

namespace molab {

struct AccuracySpec {
  double abs_err = 1e-8;
  std::size_t budget = 1'000'000;
  /// For families with a dense singular interval, treat every rational there
  /// as a pole (the untruncated weight). When false only the truncated terms
  /// are used, which under-estimates the modular.
  bool full_series = true;
};

/// |f| >= t_lower on `window`, which touches the pole on its active side.
struct PoleEvidence {
  PoleInfo pole;
  Side side = Side::Right;  // side of the pole the window lies on
  Box window;
  double t_lower = 0.0;
};

/// Shaved partial integrals I_k over region minus (s - eps_k, s + eps_k).
struct GrowthRecord {
  Point location{0.0, 0.0};
  std::vector<double> radii;
  std::vector<double> partials;
  double threshold = 1e6;
  double ratio = 0.9;
};

struct DivergenceCertificate {
  enum class Kind { AnalyticPole, Growth };
  Kind kind = Kind::AnalyticPole;
  std::optional<PoleEvidence> pole;
  std::optional<GrowthRecord> growth;
};

const char* to_string(DivergenceCertificate::Kind k);

struct ModularResult {
  enum class Verdict { Finite, Divergent, Inconclusive };

  Verdict verdict = Verdict::Finite;
  double value = 0.0;    // Finite
  double err = 0.0;      // Finite
  double partial = 0.0;  // Inconclusive: what was integrated before stopping
  std::optional<DivergenceCertificate> certificate;
  std::size_t evaluations = 0;
  std::string note;

  bool finite() const { return verdict == Verdict::Finite; }
  bool divergent() const { return verdict == Verdict::Divergent; }
  bool inconclusive() const { return verdict == Verdict::Inconclusive; }

  static ModularResult make_finite(double value, double err);
  static ModularResult make_divergent(DivergenceCertificate cert);
  static ModularResult make_inconclusive(double partial, std::string note);
};

const char* to_string(ModularResult::Verdict v);

/// Adaptive modular over `region` (must lie in the closure of phi's domain).
ModularResult modular(const MOFunction& phi, const PiecewiseFunction& f, const BoxSet& region,
                      const AccuracySpec& acc = {});
/// Over the whole domain.
ModularResult modular(const MOFunction& phi, const PiecewiseFunction& f, const AccuracySpec& acc = {});

/// Sum of exact per-cell closed forms for simple f, using only the truncated
/// terms of series families. Throws when a cell has no closed form.
ModularResult modular_oracle(const MOFunction& phi, const PiecewiseFunction& f, const BoxSet& region);

/// Re-validates a certificate from its own fields.
bool check_certificate(const DivergenceCertificate& cert);

/// Pole of the untruncated series weight at the least-index rational of (a, b).
PoleInfo least_index_pole(double a, double b);

}  // namespace molab
