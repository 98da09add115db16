#pragma once

// Luxemburg norm ||f|| = inf{lambda > 0 : I_Phi(f / lambda) <= 1} by
// geometric bracketing and bisection, plus L/E membership probes.

#include <span>
#include <string>
#include <vector>

#include "molab/modular.hpp"

namespace molab {

enum class Membership { InE, InLOnly, NotInL, Undetermined };

const char* to_string(Membership m);

/// lambda = 2^k for -10 <= k <= 10.
std::vector<double> default_lambda_schedule();

struct NormOptions {
  double tol = 1e-6;  // absolute bracket width
  AccuracySpec acc;
  bool probe_membership = true;
  std::vector<double> lambda_schedule = default_lambda_schedule();
};

struct NormStep {
  double lambda;
  ModularResult modular;  // of f / lambda
};

struct NormResult {
  double value = 0.0;  // may be +inf
  double lo = 0.0;
  double hi = 0.0;
  ModularResult modular_at_value;
  Membership membership = Membership::Undetermined;
  bool inconclusive = false;
  std::string note;
  std::vector<NormStep> trace;
  /// I(f / lambda) was nonincreasing in lambda along the trace.
  bool monotone = true;
};

NormResult luxemburg_norm(const MOFunction& phi, const PiecewiseFunction& f, const NormOptions& opt = {});

/// Schedule-relative classification of f by I(lambda f).
Membership membership_probe(const MOFunction& phi, const PiecewiseFunction& f,
                            const std::vector<double>& schedule = default_lambda_schedule(),
                            const AccuracySpec& acc = {});

struct ConvergenceRow {
  int n = 0;
  double norm = 0.0;             // ||f - f_n||
  std::vector<double> modulars;  // I(lambda (f - f_n)) per lambda; +inf when divergent
};

struct ConvergenceReport {
  std::vector<double> lambdas;
  std::vector<ConvergenceRow> rows;
  bool norms_vanish = false;
  bool modulars_vanish = false;
  bool violation = false;
};

ConvergenceReport norm_modular_convergence_check(const MOFunction& phi, const PiecewiseFunction& f,
                                                 std::span<const PiecewiseFunction> seq,
                                                 const std::vector<double>& lambdas = {0.5, 1.0, 2.0, 10.0},
                                                 double tol = 1e-3, const NormOptions& opt = {});

}  // namespace molab
