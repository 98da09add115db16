#pragma once

// Constructive approximation of indicators and simple functions by smooth
// compactly supported functions, and refutation of smooth candidates near a
// dense singular interval.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "molab/luxemburg.hpp"
#include "molab/singular.hpp"

namespace molab {

/// f = 1 on k, 0 <= f <= 1, support strictly inside the open set u. Every
/// box of k gets a bump whose ramps have width 3/4 of the gap from k to the
/// complement of u.
PiecewiseFunction smooth_urysohn(const BoxSet& k, const BoxSet& u);

struct ApproximationOptions {
  int n_max = 32;
  double tol = 0.05;
  int m_cap = 64;
  NormOptions norm;  // membership probing is disabled for inner norms
  int containment_samples = 1000;
  std::uint64_t seed = 1;
};

struct TraceStep {
  int n = 0;
  int m_n = 0;
  BoxSet k_n, u_n, v_n, w_prime, w_m;
  PiecewiseFunction f_n;
  NormResult dist;               // ||f_n - target||
  double selection_norm = 0.0;   // ||f_n - chi_{K_n}||
  double chi_gap = 0.0;          // ||chi_K - chi_{K_n}||
  double shell_volume = 0.0;     // |W_m \ K_n|
  bool containments_ok = true;
  std::string containment_note;
};

struct ApproximationTrace {
  std::vector<TraceStep> steps;
  PiecewiseFunction target;
  BoxSet u;
  bool converged = false;
  double tol = 0.0;
  std::string status;
  // Per-component traces when approximating a simple function.
  std::vector<ApproximationTrace> components;
  std::vector<double> coefficients;
};

ApproximationTrace approximate_indicator(const MOFunction& phi, const BoxSet& k, const BoxSet& omega,
                                         const SingularSetEstimate& sing, const ApproximationOptions& opt = {});

ApproximationTrace approximate_in_E(const MOFunction& phi, const PiecewiseFunction& f, const BoxSet& omega,
                                    const SingularSetEstimate& sing, const ApproximationOptions& opt = {});

struct WitnessOptions {
  AccuracySpec acc;
  NormOptions norm;
  int scan_points = 1 << 14;
  int refine_points = 1000;
};

struct NondensityWitness {
  enum class Kind { Excluded, DistanceBound, NoneFound };
  Kind kind = Kind::NoneFound;
  // Excluded
  Box ball;
  PoleInfo pole;
  DivergenceCertificate certificate;
  double min_on_ball = 0.0;
  // DistanceBound
  BoxSet region;
  double gap = 0.0;
  double norm_lower_bound = 0.0;
  // NoneFound
  BoxSet ambiguous;
};

const char* to_string(NondensityWitness::Kind k);

/// Uses the family's dense singular interval.
NondensityWitness witness_nondensity(const MOFunction& phi, const PiecewiseFunction& f, const BoxSet& k,
                                     const WitnessOptions& opt = {});
/// Explicit singular interval [s_lo, s_hi]; a degenerate interval probes
/// balls centred at the point.
NondensityWitness witness_nondensity(const MOFunction& phi, const PiecewiseFunction& f, double s_lo, double s_hi,
                                     const BoxSet& k, const WitnessOptions& opt = {});

struct MeasureConvergenceReport {
  double eps = 0.0;
  std::vector<double> volumes;  // |{x in region : |f - f_n| > eps}| per n
};

MeasureConvergenceReport measure_convergence_check(std::span<const PiecewiseFunction> seq, const PiecewiseFunction& f,
                                                   const BoxSet& region, double eps, double grid_res = 1e-4);

}  // namespace molab
