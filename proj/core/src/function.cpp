#include "molab/function.hpp"

#include <algorithm>
#include <cmath>

#include "molab/error.hpp"

namespace molab {

namespace {

double edge(double tau) { return tau <= 0.0 ? 0.0 : std::exp(-1.0 / tau); }

double profile(double x, double lo, double hi, double ramp) {
  if (x >= lo && x <= hi) return 1.0;
  if (x < lo) return x <= lo - ramp ? 0.0 : smoothstep((x - (lo - ramp)) / ramp);
  return x >= hi + ramp ? 0.0 : smoothstep((hi + ramp - x) / ramp);
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

double smoothstep(double tau) {
  if (tau <= 0.0) return 0.0;
  if (tau >= 1.0) return 1.0;
  double a = edge(tau), b = edge(1.0 - tau);
  return a / (a + b);
}

double Bump::operator()(const Point& x) const {
  double v = 1.0;
  for (int i = 0; i < plateau.dim && v > 0.0; ++i) v *= profile(x[i], plateau.lo[i], plateau.hi[i], ramp[i]);
  return v;
}

Box Bump::support() const {
  Box b = plateau;
  for (int i = 0; i < b.dim; ++i) {
    b.lo[i] -= ramp[i];
    b.hi[i] += ramp[i];
  }
  return b;
}

double SmoothTerm::operator()(const Point& x) const {
  double miss = 1.0;
  for (const Bump& b : bumps) {
    miss *= 1.0 - b(x);
    if (miss == 0.0) break;
  }
  return coef * (1.0 - miss);
}

PiecewiseFunction::PiecewiseFunction(int dim) : dim_(dim) {
  if (dim != 1 && dim != 2) throw PreconditionError("function dimension must be 1 or 2", "dim");
}

PiecewiseFunction PiecewiseFunction::simple(int dim, std::vector<SimplePiece> pieces) {
  PiecewiseFunction f(dim);
  for (const SimplePiece& p : pieces) {
    if (p.box.dim != dim) throw PreconditionError("piece dimension mismatch", "dim");
    if (!std::isfinite(p.value)) throw PreconditionError("simple function values must be finite", "value");
  }
  f.pieces_ = std::move(pieces);
  return f;
}

PiecewiseFunction PiecewiseFunction::indicator(const BoxSet& s, double value) {
  std::vector<SimplePiece> pieces;
  for (const Box& b : s.boxes()) pieces.push_back({value, b, s.closed()});
  return simple(s.dim(), std::move(pieces));
}

PiecewiseFunction PiecewiseFunction::smooth(int dim, std::vector<SmoothTerm> terms) {
  PiecewiseFunction f(dim);
  for (const SmoothTerm& t : terms) {
    for (const Bump& b : t.bumps) {
      if (b.plateau.dim != dim) throw PreconditionError("bump dimension mismatch", "dim");
      for (int i = 0; i < dim; ++i)
        if (!(b.ramp[i] > 0.0)) throw PreconditionError("bump ramps must be positive", "ramp");
    }
  }
  f.terms_ = std::move(terms);
  return f;
}

PiecewiseFunction PiecewiseFunction::opaque(int dim, OpaquePart part) {
  PiecewiseFunction f(dim);
  if (!part.fn) throw PreconditionError("opaque function needs a callable", "fn");
  if (part.support.dim() != dim) throw PreconditionError("opaque support dimension mismatch", "support");
  f.opaque_.push_back(std::move(part));
  return f;
}

PiecewiseFunction::Kind PiecewiseFunction::kind() const {
  int groups = (pieces_.empty() ? 0 : 1) + (terms_.empty() ? 0 : 1) + (opaque_.empty() ? 0 : 1);
  if (groups == 0) return Kind::Zero;
  if (groups > 1) return Kind::Mixed;
  if (!pieces_.empty()) return Kind::Simple;
  if (!terms_.empty()) return Kind::SmoothComposite;
  return Kind::Opaque;
}

bool PiecewiseFunction::is_zero() const {
  // Pieces may cancel, as in f - f.
  bool pieces_zero = pieces_.empty() || simple_cells().empty();
  bool terms_zero = std::all_of(terms_.begin(), terms_.end(),
                                [](const SmoothTerm& t) { return t.coef == 0.0 || t.bumps.empty(); });
  bool opaque_zero = std::all_of(opaque_.begin(), opaque_.end(),
                                 [](const OpaquePart& o) { return o.scale == 0.0 || o.support.empty(); });
  return pieces_zero && terms_zero && opaque_zero;
}

bool PiecewiseFunction::is_smooth() const {
  if (!pieces_.empty()) return false;
  return std::all_of(opaque_.begin(), opaque_.end(), [](const OpaquePart& o) { return o.smooth; });
}

double PiecewiseFunction::operator()(const Point& x) const {
  double v = 0.0;
  for (const SimplePiece& p : pieces_) {
    if (p.closed ? p.box.contains_closed(x) : p.box.contains_open(x)) v += p.value;
  }
  for (const SmoothTerm& t : terms_) v += t(x);
  for (const OpaquePart& o : opaque_) {
    if (o.scale != 0.0 && contains(o.support.as_closed(), x)) v += o.scale * o.fn(x);
  }
  return v;
}

BoxSet PiecewiseFunction::support() const {
  std::vector<Box> boxes;
  for (const SimplePiece& p : pieces_)
    if (p.value != 0.0) boxes.push_back(p.box);
  for (const SmoothTerm& t : terms_) {
    if (t.coef == 0.0) continue;
    for (const Bump& b : t.bumps) boxes.push_back(b.support());
  }
  for (const OpaquePart& o : opaque_) {
    if (o.scale == 0.0) continue;
    boxes.insert(boxes.end(), o.support.boxes().begin(), o.support.boxes().end());
  }
  return BoxSet(dim_, true, boxes);
}

std::vector<double> PiecewiseFunction::breakpoints(int axis) const {
  std::vector<double> out;
  for (const SimplePiece& p : pieces_) {
    out.push_back(p.box.lo[axis]);
    out.push_back(p.box.hi[axis]);
  }
  for (const SmoothTerm& t : terms_) {
    for (const Bump& b : t.bumps) {
      out.push_back(b.plateau.lo[axis] - b.ramp[axis]);
      out.push_back(b.plateau.lo[axis]);
      out.push_back(b.plateau.hi[axis]);
      out.push_back(b.plateau.hi[axis] + b.ramp[axis]);
    }
  }
  for (const OpaquePart& o : opaque_) {
    for (const Box& b : o.support.boxes()) {
      out.push_back(b.lo[axis]);
      out.push_back(b.hi[axis]);
    }
    for (const Point& s : o.singular_points) out.push_back(s[axis]);
  }
  return sorted_unique(std::move(out));
}

std::vector<Point> PiecewiseFunction::singular_points() const {
  std::vector<Point> out;
  for (const OpaquePart& o : opaque_) out.insert(out.end(), o.singular_points.begin(), o.singular_points.end());
  return out;
}

PiecewiseFunction PiecewiseFunction::scaled(double c) const {
  PiecewiseFunction f = *this;
  for (SimplePiece& p : f.pieces_) p.value *= c;
  for (SmoothTerm& t : f.terms_) t.coef *= c;
  for (OpaquePart& o : f.opaque_) o.scale *= c;
  return f;
}

PiecewiseFunction operator+(const PiecewiseFunction& a, const PiecewiseFunction& b) {
  if (a.dim_ != b.dim_) throw PreconditionError("adding functions of different dimension", "dim");
  PiecewiseFunction f = a;
  f.pieces_.insert(f.pieces_.end(), b.pieces_.begin(), b.pieces_.end());
  f.terms_.insert(f.terms_.end(), b.terms_.begin(), b.terms_.end());
  f.opaque_.insert(f.opaque_.end(), b.opaque_.begin(), b.opaque_.end());
  return f;
}

PiecewiseFunction operator-(const PiecewiseFunction& a, const PiecewiseFunction& b) { return a + b.scaled(-1.0); }

std::vector<SimplePiece> PiecewiseFunction::simple_cells() const {
  std::vector<SimplePiece> out;
  if (pieces_.empty()) return out;
  std::vector<double> xs, ys{0.0, 0.0};
  for (const SimplePiece& p : pieces_) {
    xs.push_back(p.box.lo[0]);
    xs.push_back(p.box.hi[0]);
    if (dim_ == 2) {
      ys.push_back(p.box.lo[1]);
      ys.push_back(p.box.hi[1]);
    }
  }
  xs = sorted_unique(std::move(xs));
  ys = dim_ == 2 ? sorted_unique(std::vector<double>(ys.begin() + 2, ys.end())) : std::vector<double>{0.0, 1.0};
  for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      Box cell = dim_ == 1 ? Box::interval(xs[i], xs[i + 1]) : Box::rect(xs[i], ys[j], xs[i + 1], ys[j + 1]);
      Point c = cell.center();
      double v = 0.0;
      for (const SimplePiece& p : pieces_)
        if (p.box.contains_open(c)) v += p.value;
      if (v != 0.0) out.push_back({v, cell, true});
    }
  }
  return out;
}

}  // namespace molab
