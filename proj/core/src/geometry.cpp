#include "molab/geometry.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <utility>

#include "molab/error.hpp"

namespace molab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Coordinates closer than this (relative) are treated as one grid line, so
// that the same face computed along two arithmetic paths cannot leave slivers.
constexpr double kSnap = 64 * DBL_EPSILON;

double snap_tol(double v) { return kSnap * std::max(1.0, std::abs(v)); }

std::vector<double> grid_lines(const std::vector<const std::vector<Box>*>& lists, int axis) {
  std::vector<double> raw;
  for (const auto* list : lists) {
    for (const Box& b : *list) {
      raw.push_back(b.lo[axis]);
      raw.push_back(b.hi[axis]);
    }
  }
  std::sort(raw.begin(), raw.end());
  std::vector<double> lines;
  for (double v : raw) {
    if (lines.empty() || v - lines.back() > snap_tol(v)) lines.push_back(v);
  }
  return lines;
}

std::size_t line_index(const std::vector<double>& lines, double v) {
  auto it = std::lower_bound(lines.begin(), lines.end(), v - snap_tol(v));
  return static_cast<std::size_t>(it - lines.begin());
}

struct CellGrid {
  int dim;
  std::vector<double> xs, ys;
  std::size_t nx() const { return xs.empty() ? 0 : xs.size() - 1; }
  std::size_t ny() const { return dim == 1 ? 1 : (ys.empty() ? 0 : ys.size() - 1); }

  std::vector<char> mark(const std::vector<Box>& boxes) const {
    std::vector<char> cells(nx() * ny(), 0);
    for (const Box& b : boxes) {
      std::size_t i0 = line_index(xs, b.lo[0]), i1 = line_index(xs, b.hi[0]);
      std::size_t j0 = 0, j1 = 1;
      if (dim == 2) {
        j0 = line_index(ys, b.lo[1]);
        j1 = line_index(ys, b.hi[1]);
      }
      for (std::size_t j = j0; j < j1; ++j)
        for (std::size_t i = i0; i < i1; ++i) cells[j * nx() + i] = 1;
    }
    return cells;
  }

  std::vector<Box> merge(const std::vector<char>& cells) const {
    std::vector<Box> out;
    const std::size_t nx_ = nx();
    if (dim == 1) {
      std::size_t i = 0;
      while (i < nx_) {
        if (!cells[i]) {
          ++i;
          continue;
        }
        std::size_t k = i;
        while (k < nx_ && cells[k]) ++k;
        out.push_back(Box::interval(xs[i], xs[k]));
        i = k;
      }
      return out;
    }
    // Maximal x-runs per strip, stacked while identical runs continue.
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> active;
    for (std::size_t j = 0; j <= ny(); ++j) {
      std::map<std::pair<std::size_t, std::size_t>, std::size_t> next;
      if (j < ny()) {
        std::size_t i = 0;
        while (i < nx_) {
          if (!cells[j * nx_ + i]) {
            ++i;
            continue;
          }
          std::size_t k = i;
          while (k < nx_ && cells[j * nx_ + k]) ++k;
          auto key = std::make_pair(i, k);
          auto it = active.find(key);
          next[key] = it != active.end() ? it->second : j;
          i = k;
        }
      }
      for (const auto& [run, start] : active) {
        if (!next.count(run)) out.push_back(Box::rect(xs[run.first], ys[start], xs[run.second], ys[j]));
      }
      active = std::move(next);
    }
    std::sort(out.begin(), out.end(), [](const Box& a, const Box& b) {
      return std::tie(a.lo[1], a.lo[0]) < std::tie(b.lo[1], b.lo[0]);
    });
    return out;
  }
};

template <class Pred>
std::vector<Box> combine(int dim, const std::vector<Box>& a, const std::vector<Box>& b, Pred pred) {
  CellGrid grid{dim, grid_lines({&a, &b}, 0), {}};
  if (dim == 2) grid.ys = grid_lines({&a, &b}, 1);
  if (grid.nx() == 0 || grid.ny() == 0) return {};
  auto in_a = grid.mark(a);
  auto in_b = grid.mark(b);
  std::vector<char> cells(in_a.size());
  for (std::size_t c = 0; c < cells.size(); ++c) cells[c] = pred(in_a[c] != 0, in_b[c] != 0) ? 1 : 0;
  return grid.merge(cells);
}

void check_dim(int dim) {
  if (dim != 1 && dim != 2) throw PreconditionError("box dimension must be 1 or 2", "dim");
}

}  // namespace

Box::Box(int dim_, Point lo_, Point hi_) : dim(dim_), lo(lo_), hi(hi_) {
  check_dim(dim);
  for (int i = 0; i < dim; ++i) {
    if (!(lo[i] < hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i]))
      throw PreconditionError("box requires finite lo < hi on every axis", "boxes");
  }
  if (dim == 1) lo[1] = hi[1] = 0.0;
}

double Box::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim; ++i) v *= hi[i] - lo[i];
  return v;
}

Point Box::center() const {
  Point c{0.0, 0.0};
  for (int i = 0; i < dim; ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

bool Box::contains_closed(const Point& x) const {
  for (int i = 0; i < dim; ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

bool Box::contains_open(const Point& x) const {
  for (int i = 0; i < dim; ++i)
    if (x[i] <= lo[i] || x[i] >= hi[i]) return false;
  return true;
}

double linf_distance(const Box& a, const Box& b) {
  double d = 0.0;
  for (int i = 0; i < a.dim; ++i) d = std::max({d, b.lo[i] - a.hi[i], a.lo[i] - b.hi[i]});
  return d;
}

double distance(const Point& x, const Box& b) {
  double s = 0.0;
  for (int i = 0; i < b.dim; ++i) {
    double d = std::max({0.0, b.lo[i] - x[i], x[i] - b.hi[i]});
    s += d * d;
  }
  return std::sqrt(s);
}

BoxSet::BoxSet(int dim, bool closed) : dim_(dim), closed_(closed) { check_dim(dim); }

BoxSet::BoxSet(int dim, bool closed, const std::vector<Box>& boxes) : dim_(dim), closed_(closed) {
  check_dim(dim);
  for (const Box& b : boxes)
    if (b.dim != dim) throw PreconditionError("box dimension does not match set dimension", "dim");
  boxes_ = combine(dim, boxes, {}, [](bool in_a, bool) { return in_a; });
}

double BoxSet::volume() const {
  double v = 0.0;
  for (const Box& b : boxes_) v += b.volume();
  return v;
}

Box BoxSet::bounding_box() const {
  if (boxes_.empty()) throw PreconditionError("bounding box of an empty set");
  Box out = boxes_.front();
  for (const Box& b : boxes_) {
    for (int i = 0; i < dim_; ++i) {
      out.lo[i] = std::min(out.lo[i], b.lo[i]);
      out.hi[i] = std::max(out.hi[i], b.hi[i]);
    }
  }
  return out;
}

BoxSet BoxSet::reinterpret(bool closed) const {
  BoxSet out = *this;
  out.closed_ = closed;
  return out;
}

BoxSet set_op(const BoxSet& a, const BoxSet& b, SetOp op) {
  if (a.dim() != b.dim()) throw PreconditionError("set operation on box sets of different dimension", "dim");
  std::vector<Box> la(a.boxes().begin(), a.boxes().end());
  std::vector<Box> lb(b.boxes().begin(), b.boxes().end());
  std::vector<Box> merged;
  switch (op) {
    case SetOp::Union:
      merged = combine(a.dim(), la, lb, [](bool x, bool y) { return x || y; });
      break;
    case SetOp::Intersect:
      merged = combine(a.dim(), la, lb, [](bool x, bool y) { return x && y; });
      break;
    case SetOp::Difference:
      merged = combine(a.dim(), la, lb, [](bool x, bool y) { return x && !y; });
      break;
  }
  // Already canonical; the constructor re-normalizes cheaply.
  return BoxSet(a.dim(), a.closed(), merged);
}

bool contains(const BoxSet& s, const Point& x) {
  const auto boxes = s.boxes();
  if (s.closed()) {
    return std::any_of(boxes.begin(), boxes.end(), [&](const Box& b) { return b.contains_closed(x); });
  }
  // Interior of the union of closed boxes: every orthant at x must be covered.
  const int dim = s.dim();
  for (int orthant = 0; orthant < (1 << dim); ++orthant) {
    bool covered = false;
    for (const Box& b : boxes) {
      bool ok = true;
      for (int i = 0; i < dim && ok; ++i) {
        bool plus = (orthant >> i) & 1;
        ok = plus ? (b.lo[i] <= x[i] && x[i] < b.hi[i]) : (b.lo[i] < x[i] && x[i] <= b.hi[i]);
      }
      if (ok) {
        covered = true;
        break;
      }
    }
    if (!covered) return false;
  }
  return true;
}

double distance(const Point& x, const BoxSet& s) {
  double d = kInf;
  for (const Box& b : s.boxes()) d = std::min(d, distance(x, b));
  return d;
}

bool is_subset(const BoxSet& inner, const BoxSet& outer) {
  double rest = set_difference(inner, outer).volume();
  return rest <= 1e-12 * std::max(1.0, inner.volume());
}

double linf_gap(const BoxSet& inner, const BoxSet& outer) {
  if (inner.dim() != outer.dim()) throw PreconditionError("gap between sets of different dimension", "dim");
  if (inner.empty()) return kInf;
  if (outer.empty()) return 0.0;
  Box frame = set_union(inner, outer).bounding_box();
  for (int i = 0; i < frame.dim; ++i) {
    frame.lo[i] -= 1.0;
    frame.hi[i] += 1.0;
  }
  BoxSet complement = set_difference(BoxSet(frame.dim, true, {frame}), outer);
  double gap = kInf;
  for (const Box& a : inner.boxes())
    for (const Box& c : complement.boxes()) gap = std::min(gap, linf_distance(a, c));
  return gap;
}

BoxSet inflate(const BoxSet& s, double margin, bool closed) {
  std::vector<Box> grown;
  for (const Box& b : s.boxes()) {
    Point lo = b.lo, hi = b.hi;
    bool ok = true;
    for (int i = 0; i < s.dim(); ++i) {
      lo[i] -= margin;
      hi[i] += margin;
      ok = ok && hi[i] - lo[i] > snap_tol(hi[i]);
    }
    if (ok) grown.emplace_back(s.dim(), lo, hi);
  }
  return BoxSet(s.dim(), closed, grown);
}

double half_min_gap(const BoxSet& s) {
  double best = kInf;
  const auto boxes = s.boxes();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      double g = linf_distance(boxes[i], boxes[j]);
      if (g > snap_tol(boxes[i].hi[0])) best = std::min(best, g);
    }
  }
  return 0.5 * best;
}

double cover_margin(const BoxSet& k, double n) {
  if (k.empty()) throw PreconditionError("nested covers of an empty set", "compact");
  if (!(n >= 1.0)) throw PreconditionError("cover index must be >= 1", "n");
  const double count = static_cast<double>(k.size());
  double surface = 1.0;
  if (k.dim() == 2) {
    for (const Box& b : k.boxes()) surface = std::max(surface, b.extent(0) + b.extent(1) + 1.0);
  }
  const double volume_term = 1.0 / (4.0 * n * surface * count);
  const double gamma = half_min_gap(k);
  const double gap_term = std::isinf(gamma) ? kInf : gamma / (n + 1.0);
  return std::min(volume_term, gap_term);
}

BoxSet nested_open_cover(const BoxSet& k, double n) {
  if (!k.closed()) throw PreconditionError("nested covers require a compact (closed) set", "compact");
  return inflate(k, cover_margin(k, n), false);
}

std::vector<BoxSet> nested_open_covers(const BoxSet& k, int n_max) {
  if (n_max < 1) throw PreconditionError("n_max must be >= 1", "n_max");
  std::vector<BoxSet> covers;
  covers.reserve(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) covers.push_back(nested_open_cover(k, n));
  return covers;
}

}  // namespace molab
