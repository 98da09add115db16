#pragma once

// Axis-aligned box sets in dimension 1 and 2.
//
// A BoxSet is a finite union of boxes carrying one open/closed flag for the
// whole set. Sets are *regularized*: a closed set is the closure of the union
// of its boxes, an open set is the interior of that closure. Boundaries and
// lower-dimensional slivers therefore never survive a set operation, which is
// what makes volume representation-independent.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace molab {

using Point = std::array<double, 2>;

inline Point point1(double x) { return Point{x, 0.0}; }

struct Box {
  int dim = 1;
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};

  /// Throws PreconditionError unless lo < hi on every active axis.
  Box(int dim, Point lo, Point hi);
  Box() = default;

  static Box interval(double lo, double hi) { return Box(1, point1(lo), point1(hi)); }
  static Box rect(double x0, double y0, double x1, double y1) {
    return Box(2, Point{x0, y0}, Point{x1, y1});
  }

  double volume() const;
  double extent(int axis) const { return hi[axis] - lo[axis]; }
  Point center() const;

  /// Closed-box membership.
  bool contains_closed(const Point& x) const;
  bool contains_open(const Point& x) const;

  friend bool operator==(const Box&, const Box&) = default;
};

/// L-infinity distance between two closed boxes (0 when they touch or overlap).
double linf_distance(const Box& a, const Box& b);
/// Euclidean distance from a point to a closed box.
double distance(const Point& x, const Box& b);

enum class SetOp { Union, Intersect, Difference };

class BoxSet {
 public:
  BoxSet() = default;
  BoxSet(int dim, bool closed);
  /// Normalizes `boxes` into a canonical list of interior-disjoint boxes.
  BoxSet(int dim, bool closed, const std::vector<Box>& boxes);

  static BoxSet interval(double lo, double hi, bool closed) {
    return BoxSet(1, closed, {Box::interval(lo, hi)});
  }
  static BoxSet rect(double x0, double y0, double x1, double y1, bool closed) {
    return BoxSet(2, closed, {Box::rect(x0, y0, x1, y1)});
  }

  int dim() const { return dim_; }
  bool closed() const { return closed_; }
  bool empty() const { return boxes_.empty(); }
  std::size_t size() const { return boxes_.size(); }
  std::span<const Box> boxes() const { return boxes_; }

  double volume() const;
  /// Smallest box containing the set; throws on an empty set.
  Box bounding_box() const;

  /// Same boxes, reinterpreted as the open interior or the closure.
  BoxSet as_open() const { return reinterpret(false); }
  BoxSet as_closed() const { return reinterpret(true); }

  friend bool operator==(const BoxSet&, const BoxSet&) = default;

 private:
  BoxSet reinterpret(bool closed) const;

  int dim_ = 1;
  bool closed_ = false;
  std::vector<Box> boxes_;
};

/// Regularized boolean operation. The result inherits the closedness of `a`,
/// so closed minus open is closed and open minus closed is open.
BoxSet set_op(const BoxSet& a, const BoxSet& b, SetOp op);
inline BoxSet set_union(const BoxSet& a, const BoxSet& b) { return set_op(a, b, SetOp::Union); }
inline BoxSet set_intersect(const BoxSet& a, const BoxSet& b) {
  return set_op(a, b, SetOp::Intersect);
}
inline BoxSet set_difference(const BoxSet& a, const BoxSet& b) {
  return set_op(a, b, SetOp::Difference);
}

/// Exact membership with open/closed semantics.
bool contains(const BoxSet& s, const Point& x);
/// Euclidean distance to the closure of `s`; +inf for an empty set.
double distance(const Point& x, const BoxSet& s);

/// True when `inner` is contained in `outer` up to a null set.
bool is_subset(const BoxSet& inner, const BoxSet& outer);

/// L-infinity distance from `inner` to the complement of `outer`. Positive iff
/// the closure of `inner` sits strictly inside the open set `outer`.
double linf_gap(const BoxSet& inner, const BoxSet& outer);

/// Grows (margin > 0) or shrinks (margin < 0) every box by `margin` per face.
/// Boxes that would degenerate under shrinking are dropped.
BoxSet inflate(const BoxSet& s, double margin, bool closed);

/// Half of the smallest positive L-infinity gap between boxes of `s`
/// (+inf when there is no such pair).
double half_min_gap(const BoxSet& s);

/// Margin used for the n-th nested open cover of `k` (n may be huge; it is a
/// real number so that dyadic subsequences can be addressed directly).
double cover_margin(const BoxSet& k, double n);

/// The n-th open cover U_n of a compact box set: every box of `k` inflated by
/// `cover_margin(k, n)`.
BoxSet nested_open_cover(const BoxSet& k, double n);

/// U_1, ..., U_{n_max} with K in U_n, |U_n| < |K| + 1/n and closure(U_{n+1}) in U_n.
std::vector<BoxSet> nested_open_covers(const BoxSet& k, int n_max);

}  // namespace molab
