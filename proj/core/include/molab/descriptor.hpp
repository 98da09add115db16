#pragma once

// Closed-form scalar fields p(x), r(x), a(x), h(x) over dimension 1 or 2.
//
// The grammar is deliberately small so that infima and suprema over boxes are
// analytic rather than sampled:
//   const       v
//   affine      c0 + c . x
//   sin         a + b sin(omega x_axis + phase)     (cos is a phase shift)
//   reciprocal  c0 + c1 / |x_axis - s|              (c1 >= 0, +inf at s)
//   piecewise   first matching closed box wins, else the fallback

#include <optional>
#include <string>
#include <vector>

#include "molab/geometry.hpp"

namespace molab {

class Descriptor {
 public:
  enum class Kind { Const, Affine, Sin, Reciprocal, Piecewise };

  struct Range {
    double inf;
    double sup;
  };

  Descriptor() = default;  // the constant 0

  static Descriptor constant(double v);
  static Descriptor affine(double c0, Point slope);
  static Descriptor sine(double a, double b, double omega, double phase, int axis = 0);
  static Descriptor cosine(double a, double b, double omega, double phase, int axis = 0);
  static Descriptor reciprocal(double c0, double c1, double s, int axis = 0);
  static Descriptor piecewise(std::vector<Box> boxes, std::vector<Descriptor> values, Descriptor fallback);

  Kind kind() const { return kind_; }
  double operator()(const Point& x) const;

  /// Exact infimum/supremum over a closed box (inf/sup may be infinite).
  Range range(const Box& b) const;
  /// Over the closure of a set; {+inf, -inf} for an empty set.
  Range range(const BoxSet& s) const;

  std::optional<double> constant_value() const;
  bool is_affine_1d() const { return kind_ == Kind::Affine || kind_ == Kind::Const; }

  /// Conservative superset of {x in domain : value(x) != 0}.
  BoxSet support_within(const BoxSet& domain) const;

  /// Coordinates along `axis` where the field is not smooth.
  std::vector<double> breakpoints(int axis) const;

  // Raw parameters, used by serialization and closed-form integration.
  double c0() const { return c0_; }
  Point slope() const { return slope_; }
  double amplitude() const { return b_; }
  double omega() const { return omega_; }
  double phase() const { return phase_; }
  double pole() const { return s_; }
  int axis() const { return axis_; }
  const std::vector<Box>& piece_boxes() const { return boxes_; }
  const std::vector<Descriptor>& children() const { return children_; }  // pieces, then fallback

  std::string describe() const;

 private:
  Kind kind_ = Kind::Const;
  double c0_ = 0.0;  // const value, affine offset, sin offset a, reciprocal offset
  Point slope_{0.0, 0.0};
  double b_ = 0.0;  // sin amplitude or reciprocal c1
  double omega_ = 1.0;
  double phase_ = 0.0;
  double s_ = 0.0;
  int axis_ = 0;
  std::vector<Box> boxes_;
  std::vector<Descriptor> children_;
};

}  // namespace molab
