#include "molab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace molab {

namespace {

constexpr int kInitialPanels = 8;
constexpr int kMaxDepth = 48;

struct Panel {
  double a, b;
  double fa, fm, fb;
  double whole;
  double tol;
  int depth;
};

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& g, double a, double b, double tol,
                           QuadratureBudget& budget) {
  QuadratureResult res;
  if (!(b > a)) return res;
  const double inner_lo = std::nextafter(a, b), inner_hi = std::nextafter(b, a);
  auto eval = [&](double x) {
    ++budget.used;
    double v = g(std::clamp(x, inner_lo, inner_hi));
    if (!std::isfinite(v)) res.nonfinite = true;
    return v;
  };

  std::vector<Panel> stack;
  const double width = (b - a) / kInitialPanels;
  for (int i = kInitialPanels - 1; i >= 0; --i) {
    double lo = a + width * i;
    double hi = i + 1 == kInitialPanels ? b : a + width * (i + 1);
    double fa = eval(lo), fm = eval(0.5 * (lo + hi)), fb = eval(hi);
    double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    stack.push_back({lo, hi, fa, fm, fb, whole, tol / kInitialPanels, 0});
  }

  while (!stack.empty()) {
    if (res.nonfinite) return res;
    if (budget.exhausted()) {
      res.ok = false;
      return res;
    }
    Panel p = stack.back();
    stack.pop_back();
    double m = 0.5 * (p.a + p.b);
    double flm = eval(0.5 * (p.a + m)), frm = eval(0.5 * (m + p.b));
    double left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    double right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    double diff = left + right - p.whole;
    bool tiny = (p.b - p.a) <= 1e-13 * std::max({1.0, std::abs(p.a), std::abs(p.b)});
    if (std::abs(diff) <= 15.0 * p.tol || p.depth >= kMaxDepth || tiny) {
      res.value += left + right + diff / 15.0;
      res.err += std::abs(diff) / 15.0;
      continue;
    }
    stack.push_back({m, p.b, p.fm, frm, p.fb, right, 0.5 * p.tol, p.depth + 1});
    stack.push_back({p.a, m, p.fa, flm, p.fm, left, 0.5 * p.tol, p.depth + 1});
  }
  if (res.nonfinite) res.value = std::numeric_limits<double>::infinity();
  return res;
}

QuadratureResult integrate2d(const std::function<double(double, double)>& g, const Box& box, double tol,
                             QuadratureBudget& budget) {
  QuadratureResult res;
  const double hy = box.extent(1);
  const double inner_tol = 0.5 * tol / hy;
  double inner_err = 0.0;
  bool inner_ok = true, inner_nonfinite = false;
  auto inner = [&](double y) {
    QuadratureResult r = integrate([&](double x) { return g(x, y); }, box.lo[0], box.hi[0], inner_tol, budget);
    inner_err = std::max(inner_err, r.err);
    inner_ok = inner_ok && r.ok;
    inner_nonfinite = inner_nonfinite || r.nonfinite;
    return r.ok ? r.value : 0.0;
  };
  res = integrate(inner, box.lo[1], box.hi[1], 0.5 * tol, budget);
  res.err += hy * inner_err;
  res.ok = res.ok && inner_ok;
  res.nonfinite = res.nonfinite || inner_nonfinite;
  return res;
}

}  // namespace molab
