#pragma once

// Real-valued functions on boxes: an additive combination of simple pieces
// (value times box indicator), smooth terms (coefficient times a union of
// smoothstep bumps) and opaque callables.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "molab/geometry.hpp"

namespace molab {

/// s(tau) = e(tau) / (e(tau) + e(1 - tau)) with e(tau) = exp(-1/tau);
/// 0 for tau <= 0 and 1 for tau >= 1.
double smoothstep(double tau);

/// Tensor product of per-axis profiles: 1 on the plateau, smoothstep ramps
/// of width ramp[i] outside each face, 0 beyond.
struct Bump {
  Box plateau;
  Point ramp{0.0, 0.0};

  double operator()(const Point& x) const;
  Box support() const;
};

/// coef * (1 - prod_j (1 - b_j(x))): equals coef on every plateau.
struct SmoothTerm {
  double coef = 1.0;
  std::vector<Bump> bumps;

  double operator()(const Point& x) const;
};

struct SimplePiece {
  double value = 0.0;
  Box box;
  bool closed = true;
};

struct OpaquePart {
  std::function<double(const Point&)> fn;
  BoxSet support;  // fn vanishes outside
  bool smooth = false;
  /// Points where fn may blow up; quadrature treats them like poles.
  std::vector<Point> singular_points;
  double scale = 1.0;
  std::string label;
};

class PiecewiseFunction {
 public:
  enum class Kind { Zero, Simple, SmoothComposite, Opaque, Mixed };

  explicit PiecewiseFunction(int dim = 1);

  static PiecewiseFunction simple(int dim, std::vector<SimplePiece> pieces);
  static PiecewiseFunction indicator(const BoxSet& s, double value = 1.0);
  static PiecewiseFunction smooth(int dim, std::vector<SmoothTerm> terms);
  static PiecewiseFunction opaque(int dim, OpaquePart part);

  int dim() const { return dim_; }
  Kind kind() const;
  bool is_zero() const;
  bool is_simple() const { return kind() == Kind::Simple || kind() == Kind::Zero; }
  /// Built only from smooth terms and smooth-flagged opaque parts.
  bool is_smooth() const;

  double operator()(const Point& x) const;

  /// Closed superset of {f != 0}.
  BoxSet support() const;
  std::vector<double> breakpoints(int axis) const;
  std::vector<Point> singular_points() const;

  PiecewiseFunction scaled(double c) const;
  friend PiecewiseFunction operator+(const PiecewiseFunction& a, const PiecewiseFunction& b);
  friend PiecewiseFunction operator-(const PiecewiseFunction& a, const PiecewiseFunction& b);

  std::span<const SimplePiece> pieces() const { return pieces_; }
  std::span<const SmoothTerm> terms() const { return terms_; }
  std::span<const OpaquePart> opaque_parts() const { return opaque_; }

  /// Disjoint constant cells of the simple part (zero cells omitted).
  std::vector<SimplePiece> simple_cells() const;

 private:
  int dim_;
  std::vector<SimplePiece> pieces_;
  std::vector<SmoothTerm> terms_;
  std::vector<OpaquePart> opaque_;
};

}  // namespace molab
