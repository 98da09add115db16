#include "molab/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "molab/error.hpp"

namespace molab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Range of sin over [u, v].
std::pair<double, double> sin_range(double u, double v) {
  if (u > v) std::swap(u, v);
  const double two_pi = 2.0 * std::numbers::pi;
  auto hits = [&](double target) {
    double k = std::ceil((u - target) / two_pi);
    return target + k * two_pi <= v;
  };
  double lo = std::min(std::sin(u), std::sin(v));
  double hi = std::max(std::sin(u), std::sin(v));
  if (hits(std::numbers::pi / 2)) hi = 1.0;
  if (hits(-std::numbers::pi / 2)) lo = -1.0;
  return {lo, hi};
}

void check_axis(int axis) {
  if (axis != 0 && axis != 1) throw PreconditionError("descriptor axis must be 0 or 1", "axis");
}

}  // namespace

Descriptor Descriptor::constant(double v) {
  Descriptor d;
  d.kind_ = Kind::Const;
  d.c0_ = v;
  d.children_.clear();
  return d;
}

Descriptor Descriptor::affine(double c0, Point slope) {
  Descriptor d = constant(c0);
  d.kind_ = Kind::Affine;
  d.slope_ = slope;
  return d;
}

Descriptor Descriptor::sine(double a, double b, double omega, double phase, int axis) {
  check_axis(axis);
  Descriptor d = constant(a);
  d.kind_ = Kind::Sin;
  d.b_ = b;
  d.omega_ = omega;
  d.phase_ = phase;
  d.axis_ = axis;
  return d;
}

Descriptor Descriptor::cosine(double a, double b, double omega, double phase, int axis) {
  return sine(a, b, omega, phase + std::numbers::pi / 2, axis);
}

Descriptor Descriptor::reciprocal(double c0, double c1, double s, int axis) {
  check_axis(axis);
  if (c1 < 0) throw PreconditionError("reciprocal descriptor needs c1 >= 0", "c1");
  Descriptor d = constant(c0);
  d.kind_ = Kind::Reciprocal;
  d.b_ = c1;
  d.s_ = s;
  d.axis_ = axis;
  return d;
}

Descriptor Descriptor::piecewise(std::vector<Box> boxes, std::vector<Descriptor> values, Descriptor fallback) {
  if (boxes.size() != values.size())
    throw PreconditionError("piecewise descriptor needs one value per box", "pieces");
  Descriptor d = constant(0.0);
  d.kind_ = Kind::Piecewise;
  d.boxes_ = std::move(boxes);
  d.children_ = std::move(values);
  d.children_.push_back(std::move(fallback));
  return d;
}

double Descriptor::operator()(const Point& x) const {
  switch (kind_) {
    case Kind::Const:
      return c0_;
    case Kind::Affine:
      return c0_ + slope_[0] * x[0] + slope_[1] * x[1];
    case Kind::Sin:
      return c0_ + b_ * std::sin(omega_ * x[axis_] + phase_);
    case Kind::Reciprocal: {
      double d = std::abs(x[axis_] - s_);
      return d == 0.0 ? (b_ == 0.0 ? c0_ : kInf) : c0_ + b_ / d;
    }
    case Kind::Piecewise:
      for (std::size_t i = 0; i < boxes_.size(); ++i)
        if (boxes_[i].contains_closed(x)) return children_[i](x);
      return children_.back()(x);
  }
  return 0.0;
}

Descriptor::Range Descriptor::range(const Box& b) const {
  switch (kind_) {
    case Kind::Const:
      return {c0_, c0_};
    case Kind::Affine: {
      double lo = c0_, hi = c0_;
      for (int i = 0; i < b.dim; ++i) {
        double u = slope_[i] * b.lo[i], v = slope_[i] * b.hi[i];
        lo += std::min(u, v);
        hi += std::max(u, v);
      }
      return {lo, hi};
    }
    case Kind::Sin: {
      auto [lo, hi] = sin_range(omega_ * b.lo[axis_] + phase_, omega_ * b.hi[axis_] + phase_);
      double u = c0_ + b_ * lo, v = c0_ + b_ * hi;
      return {std::min(u, v), std::max(u, v)};
    }
    case Kind::Reciprocal: {
      double dl = std::abs(b.lo[axis_] - s_), dh = std::abs(b.hi[axis_] - s_);
      double far = std::max(dl, dh);
      if (b_ == 0.0) return {c0_, c0_};
      if (b.lo[axis_] <= s_ && s_ <= b.hi[axis_]) return {c0_ + b_ / far, kInf};
      return {c0_ + b_ / far, c0_ + b_ / std::min(dl, dh)};
    }
    case Kind::Piecewise: {
      Range out{kInf, -kInf};
      BoxSet whole(b.dim, true, {b});
      BoxSet covered(b.dim, true);
      for (std::size_t i = 0; i < boxes_.size(); ++i) {
        if (boxes_[i].dim != b.dim) continue;
        BoxSet part = set_intersect(whole, BoxSet(b.dim, true, {boxes_[i]}));
        part = set_difference(part, covered);
        if (part.empty()) continue;
        Range r = children_[i].range(part);
        out.inf = std::min(out.inf, r.inf);
        out.sup = std::max(out.sup, r.sup);
        covered = set_union(covered, BoxSet(b.dim, true, {boxes_[i]}));
      }
      BoxSet rest = set_difference(whole, covered);
      if (!rest.empty()) {
        Range r = children_.back().range(rest);
        out.inf = std::min(out.inf, r.inf);
        out.sup = std::max(out.sup, r.sup);
      }
      return out;
    }
  }
  return {0.0, 0.0};
}

Descriptor::Range Descriptor::range(const BoxSet& s) const {
  Range out{kInf, -kInf};
  for (const Box& b : s.boxes()) {
    Range r = range(b);
    out.inf = std::min(out.inf, r.inf);
    out.sup = std::max(out.sup, r.sup);
  }
  return out;
}

std::optional<double> Descriptor::constant_value() const {
  if (kind_ == Kind::Const) return c0_;
  if (kind_ == Kind::Affine && slope_[0] == 0.0 && slope_[1] == 0.0) return c0_;
  if (kind_ == Kind::Sin && b_ == 0.0) return c0_;
  if (kind_ == Kind::Reciprocal && b_ == 0.0) return c0_;
  return std::nullopt;
}

BoxSet Descriptor::support_within(const BoxSet& domain) const {
  if (kind_ != Kind::Piecewise) {
    Range r = range(domain);
    bool zero = r.inf == 0.0 && r.sup == 0.0;
    return zero ? BoxSet(domain.dim(), domain.closed()) : domain;
  }
  BoxSet support(domain.dim(), domain.closed());
  BoxSet covered(domain.dim(), true);
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    if (boxes_[i].dim != domain.dim()) continue;
    BoxSet piece = set_difference(set_intersect(domain, BoxSet(domain.dim(), true, {boxes_[i]})), covered);
    if (!piece.empty()) support = set_union(support, children_[i].support_within(piece));
    covered = set_union(covered, BoxSet(domain.dim(), true, {boxes_[i]}));
  }
  BoxSet rest = set_difference(domain, covered);
  if (!rest.empty()) support = set_union(support, children_.back().support_within(rest));
  return support;
}

std::vector<double> Descriptor::breakpoints(int axis) const {
  std::vector<double> out;
  if (kind_ == Kind::Reciprocal && axis == axis_) out.push_back(s_);
  if (kind_ == Kind::Piecewise) {
    for (const Box& b : boxes_) {
      if (axis < b.dim) {
        out.push_back(b.lo[axis]);
        out.push_back(b.hi[axis]);
      }
    }
    for (const Descriptor& c : children_) {
      auto more = c.breakpoints(axis);
      out.insert(out.end(), more.begin(), more.end());
    }
  }
  return out;
}

std::string Descriptor::describe() const {
  switch (kind_) {
    case Kind::Const:
      return fmt::format("{}", c0_);
    case Kind::Affine:
      return fmt::format("{} + {}*x0 + {}*x1", c0_, slope_[0], slope_[1]);
    case Kind::Sin:
      return fmt::format("{} + {}*sin({}*x{} + {})", c0_, b_, omega_, axis_, phase_);
    case Kind::Reciprocal:
      return fmt::format("{} + {}/|x{} - {}|", c0_, b_, axis_, s_);
    case Kind::Piecewise:
      return fmt::format("piecewise({} pieces)", boxes_.size());
  }
  return "?";
}

}  // namespace molab
