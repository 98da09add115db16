#pragma once

// Musielak-Orlicz functions Phi(x, t) with the analytic metadata the engines
// rely on: pole lists, Delta_2 certificates, closed-form cell integrals.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "molab/descriptor.hpp"
#include "molab/geometry.hpp"
#include "molab/rational.hpp"

namespace molab {

enum class Side { Left, Right, Both };

const char* to_string(Side s);

/// Positive coefficient mantissa * 4^(-exponent); the exponent can be
/// astronomically large for on-demand poles, so positivity is symbolic.
struct PoleCoefficient {
  double mantissa = 1.0;
  BigInt log4_exponent = 0;

  double approx() const;  // may underflow to 0
  bool positive() const { return mantissa > 0.0; }
};

/// Phi(x, t) >= t * coefficient * |x - location|^(-order) on the active side
/// (within `reach` of the pole).
struct PoleInfo {
  double location = 0.0;
  double order = 1.0;
  PoleCoefficient coefficient;
  Side side = Side::Both;
  double reach = std::numeric_limits<double>::infinity();
  std::string scale_in_t = "linear";
  /// Set for poles at rationals, with their enumeration index.
  std::optional<Rational> exact;
  std::optional<BigInt> index;

  bool active_left() const { return side != Side::Right; }
  bool active_right() const { return side != Side::Left; }
};

struct Delta2Certificate {
  enum class Provenance { Analytic, Sampled };
  double C = 2.0;
  Descriptor h;  // nonnegative
  double h_integral = 0.0;
  Provenance provenance = Provenance::Analytic;
  std::string clause;  // which sufficient condition produced it
};

struct Delta2Grid {
  int x_per_axis = 101;
  int t_count = 61;
  double t_min = 1e-3;
  double t_max = 1e3;
};

struct Delta2Report {
  bool pass = true;
  std::size_t samples = 0;
  double worst_excess = 0.0;  // max of (lhs - rhs) / scale, <= slack on pass
  Point worst_x{0.0, 0.0};
  double worst_t = 0.0;
};

struct DoublePhaseVerdict {
  std::optional<Delta2Certificate> certificate;
  std::string clause;                  // "(i)" or "(ii)" on success
  std::vector<std::string> violations;  // one entry per failed clause
};

enum class FamilyKind { Orlicz, WeightedLinear, SeriesWeight, VariableExponent, DoublePhase };

const char* to_string(FamilyKind k);

struct OrliczParams {
  enum class Kind { Power, Exp } kind = Kind::Power;
  double q = 2.0;     // Power: c * t^q
  double c = 1.0;
};

struct WeightParams {
  std::vector<PoleInfo> terms;
  /// Series weights live on an interval; outside it the weight is 1.
  std::optional<std::pair<double, double>> carrier;
  int truncation = 0;  // N for series weights
  std::string enumeration;
};

struct ExponentParams {
  Descriptor p;
};

struct DoublePhaseParams {
  Descriptor p, r, a;
};

/// Result of a closed-form x-integral of Phi(., t) over a box.
struct CellIntegral {
  bool divergent = false;
  double value = 0.0;
  std::optional<PoleInfo> pole;
};

struct WeightRange {
  double inf;
  double sup;
};

class MOFunction {
 public:
  using Params = std::variant<OrliczParams, WeightParams, ExponentParams, DoublePhaseParams>;

  MOFunction(FamilyKind kind, std::string name, BoxSet domain, Params params);

  FamilyKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  int dim() const { return domain_.dim(); }
  const BoxSet& domain() const { return domain_; }
  const Params& params() const { return params_; }

  double operator()(const Point& x, double t) const;

  /// Phi(x, t) = t * w(x) families.
  bool has_scalar_weight() const;
  double weight(const Point& x) const;
  /// Bounds of w over the closed interval [lo, hi] (1D weight families).
  WeightRange weight_range(double lo, double hi) const;
  bool linear_in_t() const { return has_scalar_weight(); }

  std::span<const PoleInfo> poles() const;
  /// Open interval on which every point is singular (Phi_2), if any.
  std::optional<std::pair<double, double>> dense_singular_interval() const { return dense_; }
  void set_dense_singular_interval(std::pair<double, double> s) { dense_ = s; }

  const std::optional<Delta2Certificate>& delta2() const { return delta2_; }
  void set_delta2(Delta2Certificate c) { delta2_ = std::move(c); }

  /// Points of a declared null set where positivity may fail.
  const BoxSet& positivity_exempt() const { return exempt_; }
  void set_positivity_exempt(BoxSet s) { exempt_ = std::move(s); }

  /// Coordinates along `axis` where Phi(., t) is not smooth.
  std::vector<double> breakpoints(int axis) const;

  /// Exact integral of Phi(., t) over `cell`, or nullopt without a closed form
  /// on that cell. The cell must not straddle a breakpoint.
  std::optional<CellIntegral> integrate_cell(const Box& cell, double t) const;

 private:
  FamilyKind kind_;
  std::string name_;
  BoxSet domain_;
  Params params_;
  std::optional<std::pair<double, double>> dense_;
  std::optional<Delta2Certificate> delta2_;
  BoxSet exempt_;
};

BoxSet default_example_domain();  // (-10, 10)

MOFunction make_orlicz_power(double q, double c, BoxSet domain);
MOFunction make_orlicz_exp(BoxSet domain);
MOFunction make_weighted_linear(std::vector<PoleInfo> poles, BoxSet domain);
/// Phi_1(x, t) = t / |x|.
MOFunction make_phi1(BoxSet domain = default_example_domain());
/// Phi_2(x, t) = t * w_N(x) on (0,1), t elsewhere.
MOFunction make_phi2(int n_terms, const std::string& enumeration = "calkin-wilf",
                     BoxSet domain = default_example_domain());
/// Phi(x, t) = t^p(x) / p(x).
MOFunction make_variable_exponent(Descriptor p, BoxSet domain);
/// Phi(x, t) = t^p(x) + a(x) t^r(x).
MOFunction make_double_phase(Descriptor p, Descriptor r, Descriptor a, BoxSet domain);

/// Pole of Phi_2's full weight at the n-th rational of (0,1).
PoleInfo series_pole(const BigInt& n);

Delta2Report verify_delta2(const MOFunction& phi, const Delta2Certificate& cert, const Delta2Grid& grid = {});
DoublePhaseVerdict check_double_phase_delta2(const Descriptor& p, const Descriptor& r, const Descriptor& a,
                                             const BoxSet& domain);

struct AxiomReport {
  std::size_t samples = 0;
  std::size_t zero_failures = 0;
  std::size_t convexity_failures = 0;
  std::size_t monotonicity_failures = 0;
  std::size_t positivity_failures = 0;
  std::size_t pole_bound_failures = 0;
  bool ok() const {
    return zero_failures + convexity_failures + monotonicity_failures + positivity_failures + pole_bound_failures == 0;
  }
};

/// Sampled check of the Musielak-Orlicz axioms: Phi(x, 0) = 0, convexity and
/// monotonicity in t, positivity off the exempt set, declared pole bounds.
AxiomReport validate_axioms(const MOFunction& phi, std::size_t samples = 1000, std::uint64_t seed = 1);

struct LevelSetDecomposition {
  std::vector<BoxSet> levels;  // levels[n - 1] approximates {w in [n - 1, n)}
  BoxSet remainder;            // cells with w beyond n_max
  BoxSet flagged;              // cells whose weight range straddles a threshold
};

LevelSetDecomposition level_set_decomposition(const MOFunction& phi, const BoxSet& a, int n_max, double grid_res);

}  // namespace molab
