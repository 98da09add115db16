#include "molab/modular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "molab/error.hpp"
#include "molab/quadrature.hpp"
#include "molab/rational.hpp"

namespace molab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kShaveSteps = 40;
constexpr double kGrowthThreshold = 1e6;
constexpr double kGrowthRatio = 0.9;

struct Engine {
  const MOFunction& phi;
  const PiecewiseFunction& f;
  const AccuracySpec& acc;
  QuadratureBudget budget;

  double integrand(double x) const { return phi(point1(x), std::abs(f(point1(x)))); }

  QuadratureResult integrate1(double a, double b, double tol) {
    return integrate([this](double x) { return integrand(x); }, a, b, tol, budget);
  }
};

std::vector<double> cuts_within(const std::vector<double>& pts, double lo, double hi) {
  std::vector<double> out{lo, hi};
  for (double p : pts)
    if (p > lo && p < hi) out.push_back(p);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double min_abs_on(const PiecewiseFunction& f, double a, double b, int samples) {
  double m = kInf;
  const double lo = std::nextafter(a, b), hi = std::nextafter(b, a);
  for (int i = 0; i <= samples; ++i) {
    double x = std::clamp(a + (b - a) * i / samples, lo, hi);
    m = std::min(m, std::abs(f(point1(x))));
  }
  return m;
}

struct FloorWindow {
  double lo, hi, floor;
};

// A subinterval of [lo, hi] on which |f| stays above half its sampled maximum.
std::optional<FloorWindow> floor_window(const PiecewiseFunction& f, double lo, double hi) {
  std::vector<double> xs;
  for (int i = 0; i < 257; ++i) xs.push_back(lo + (hi - lo) * (i + 0.5) / 257.0);
  auto cuts = cuts_within(f.breakpoints(0), lo, hi);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) xs.push_back(0.5 * (cuts[i] + cuts[i + 1]));
  double best = 0.0, at = lo;
  for (double x : xs) {
    double v = std::abs(f(point1(x)));
    if (v > best) {
      best = v;
      at = x;
    }
  }
  if (!(best > 0.0)) return std::nullopt;
  double half = 0.5 * (hi - lo);
  for (int it = 0; it < 80; ++it, half *= 0.5) {
    double a = std::max(lo, at - half), b = std::min(hi, at + half);
    if (!(b > a)) break;
    if (min_abs_on(f, a, b, 64) >= 0.5 * best) return FloorWindow{a, b, 0.5 * best};
  }
  return std::nullopt;
}

// |f| near a pole end of the cell, with a window where it stays bounded below.
std::optional<PoleEvidence> pole_evidence(const PiecewiseFunction& f, const PoleInfo& pole, int dir, double length) {
  const double s = pole.location;
  double limit = kInf;
  for (int j = 40; j <= 52; ++j) limit = std::min(limit, std::abs(f(point1(s + dir * length * std::exp2(-j)))));
  if (!(limit > 0.0)) return std::nullopt;
  for (int j = 1; j <= 60; ++j) {
    double w = length * std::exp2(-j);
    double m = kInf;
    for (int i = 1; i <= 32; ++i) m = std::min(m, std::abs(f(point1(s + dir * w * i / 32.0))));
    if (m >= 0.5 * limit) {
      PoleEvidence ev;
      ev.pole = pole;
      ev.side = dir > 0 ? Side::Right : Side::Left;
      double lo = dir > 0 ? s : s - w, hi = dir > 0 ? s + w : s;
      if (pole.exact) {
        if (dir > 0) lo = std::min(lo, pole.exact->round_down());
        if (dir < 0) hi = std::max(hi, pole.exact->round_up());
      }
      ev.window = Box::interval(lo, hi);
      ev.t_lower = 0.5 * limit;
      return ev;
    }
  }
  return std::nullopt;
}

struct Partial {
  ModularResult::Verdict verdict = ModularResult::Verdict::Finite;
  double value = 0.0;
  double err = 0.0;
  std::optional<DivergenceCertificate> cert;
  std::string note;
};

Partial from_quadrature(const QuadratureResult& q) {
  Partial p;
  if (!q.ok) {
    p.verdict = ModularResult::Verdict::Inconclusive;
    p.value = q.value;
    p.note = "evaluation budget exhausted";
  } else if (q.nonfinite) {
    p.verdict = ModularResult::Verdict::Inconclusive;
    p.note = "integrand overflow away from declared singularities";
  } else {
    p.value = q.value;
    p.err = q.err;
  }
  return p;
}

bool growth_rule(const GrowthRecord& g) {
  const auto& I = g.partials;
  if (I.size() < 3) return false;
  for (std::size_t k = 1; k < I.size(); ++k)
    if (!(I[k] > I[k - 1])) return false;
  if (!(I.back() > g.threshold)) return false;
  double last = I[I.size() - 1] - I[I.size() - 2];
  double prev = I[I.size() - 2] - I[I.size() - 3];
  return last >= g.ratio * prev;
}

// Integrates between a singular end s and `far`, shrinking the excluded
// window geometrically and extrapolating the tail.
Partial shave(Engine& e, double s, double far, double tol, bool growth_allowed) {
  const int dir = far > s ? 1 : -1;
  const double eps0 = 0.5 * std::abs(far - s);
  auto span = [&](double near_d, double far_d) {
    double a = s + dir * near_d, b = s + dir * far_d;
    return std::make_pair(std::min(a, b), std::max(a, b));
  };
  auto [b0, b1] = span(eps0, std::abs(far - s));
  const double piece_tol = tol / (kShaveSteps + 1);
  QuadratureResult base = e.integrate1(b0, b1, piece_tol);
  Partial out = from_quadrature(base);
  if (out.verdict != ModularResult::Verdict::Finite) return out;

  GrowthRecord rec;
  rec.location = point1(s);
  rec.threshold = kGrowthThreshold;
  rec.ratio = kGrowthRatio;
  rec.radii.push_back(eps0);
  rec.partials.push_back(base.value);
  double total = base.value, quad_err = base.err;
  double prev_inc = kInf, prev_extrapolated = kInf;
  for (int k = 1; k <= kShaveSteps; ++k) {
    double eps = eps0 * std::exp2(-k);
    auto [a, b] = span(eps, rec.radii.back());
    QuadratureResult shell = e.integrate1(a, b, piece_tol);
    if (!shell.ok) {
      out.verdict = ModularResult::Verdict::Inconclusive;
      out.value = total;
      out.note = "evaluation budget exhausted while shaving";
      return out;
    }
    if (shell.nonfinite) break;
    total += shell.value;
    quad_err += shell.err;
    rec.radii.push_back(eps);
    rec.partials.push_back(total);
    double inc = shell.value;
    double extrapolated = kInf;
    if (inc == 0.0) {
      extrapolated = total;
    } else if (std::isfinite(prev_inc) && prev_inc > 0.0) {
      double rho = inc / prev_inc;
      if (rho >= 0.0 && rho < 1.0) extrapolated = total + inc * rho / (1.0 - rho);
    }
    if (k >= 3 && std::isfinite(extrapolated) && std::isfinite(prev_extrapolated)) {
      double drift = std::abs(extrapolated - prev_extrapolated);
      if (drift <= std::max(tol, 1e-9 * std::abs(extrapolated))) {
        out.value = extrapolated;
        out.err = drift + quad_err + std::abs(extrapolated - total) * 1e-3;
        return out;
      }
    }
    prev_inc = inc;
    prev_extrapolated = extrapolated;
  }
  if (growth_allowed && growth_rule(rec)) {
    out.verdict = ModularResult::Verdict::Divergent;
    DivergenceCertificate cert;
    cert.kind = DivergenceCertificate::Kind::Growth;
    cert.growth = rec;
    out.cert = cert;
    return out;
  }
  out.verdict = ModularResult::Verdict::Inconclusive;
  out.value = total;
  out.note = fmt::format("shaved integrals near {} did not settle", s);
  return out;
}

ModularResult finish(const Partial& p, const Engine& e) {
  ModularResult r;
  switch (p.verdict) {
    case ModularResult::Verdict::Finite:
      r = ModularResult::make_finite(p.value, p.err);
      break;
    case ModularResult::Verdict::Divergent:
      r = ModularResult::make_divergent(*p.cert);
      break;
    case ModularResult::Verdict::Inconclusive:
      r = ModularResult::make_inconclusive(p.value, p.note);
      break;
  }
  r.evaluations = e.budget.used;
  return r;
}

enum class EndKind { None, Pole, Opaque };

struct End {
  EndKind kind = EndKind::None;
  std::vector<PoleInfo> poles;
};

ModularResult modular_1d(Engine& e, const BoxSet& eff) {
  const MOFunction& phi = e.phi;
  const PiecewiseFunction& f = e.f;

  // Every rational of the dense interval is a pole of the untruncated weight.
  if (e.acc.full_series) {
    if (auto dense = phi.dense_singular_interval()) {
      for (const Box& b : eff.boxes()) {
        double a = std::max(b.lo[0], dense->first), c = std::min(b.hi[0], dense->second);
        if (!(c > a)) continue;
        auto fw = floor_window(f, a, c);
        if (!fw) continue;
        PoleEvidence ev;
        ev.pole = least_index_pole(fw->lo, fw->hi);
        ev.side = Side::Right;
        ev.window = Box::interval(ev.pole.exact->round_down(), fw->hi);
        ev.t_lower = fw->floor;
        DivergenceCertificate cert;
        cert.kind = DivergenceCertificate::Kind::AnalyticPole;
        cert.pole = ev;
        Partial p;
        p.verdict = ModularResult::Verdict::Divergent;
        p.cert = cert;
        return finish(p, e);
      }
    }
  }

  std::vector<double> pts = f.breakpoints(0);
  auto more = phi.breakpoints(0);
  pts.insert(pts.end(), more.begin(), more.end());
  const auto singular = f.singular_points();
  for (const Point& s : singular) pts.push_back(s[0]);

  std::vector<std::pair<double, double>> cells;
  for (const Box& b : eff.boxes()) {
    auto cuts = cuts_within(pts, b.lo[0], b.hi[0]);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) cells.emplace_back(cuts[i], cuts[i + 1]);
  }
  const double tol = e.acc.abs_err / static_cast<double>(std::max<std::size_t>(cells.size(), 1));

  auto end_at = [&](double x, int into) {
    End end;
    for (const PoleInfo& p : phi.poles()) {
      if (p.location != x) continue;
      if ((into > 0 && p.active_right()) || (into < 0 && p.active_left())) end.poles.push_back(p);
    }
    if (!end.poles.empty()) {
      end.kind = EndKind::Pole;
      return end;
    }
    for (const Point& s : singular)
      if (s[0] == x) end.kind = EndKind::Opaque;
    return end;
  };

  auto one_sided = [&](double s, double far, const End& end) -> Partial {
    const int dir = far > s ? 1 : -1;
    if (end.kind == EndKind::Pole) {
      for (const PoleInfo& p : end.poles) {
        if (p.order < 1.0 || !p.coefficient.positive()) continue;
        if (auto ev = pole_evidence(f, p, dir, std::abs(far - s))) {
          DivergenceCertificate cert;
          cert.kind = DivergenceCertificate::Kind::AnalyticPole;
          cert.pole = *ev;
          Partial out;
          out.verdict = ModularResult::Verdict::Divergent;
          out.cert = cert;
          return out;
        }
      }
    }
    return shave(e, s, far, tol, end.kind == EndKind::Opaque);
  };

  Partial total;
  auto accumulate = [&](const Partial& p) {
    if (p.verdict != ModularResult::Verdict::Finite) {
      Partial out = p;
      out.value = total.value + p.value;
      total = out;
      return false;
    }
    total.value += p.value;
    total.err += p.err;
    return true;
  };

  for (auto [u, v] : cells) {
    End left = end_at(u, 1), right = end_at(v, -1);
    bool ok = true;
    if (left.kind != EndKind::None && right.kind != EndKind::None) {
      double m = 0.5 * (u + v);
      ok = accumulate(one_sided(u, m, left)) && accumulate(one_sided(v, m, right));
    } else if (left.kind != EndKind::None) {
      ok = accumulate(one_sided(u, v, left));
    } else if (right.kind != EndKind::None) {
      ok = accumulate(one_sided(v, u, right));
    } else {
      ok = accumulate(from_quadrature(e.integrate1(u, v, tol)));
    }
    if (!ok) break;
  }
  return finish(total, e);
}

ModularResult modular_2d(Engine& e, const BoxSet& eff) {
  if (!e.f.singular_points().empty())
    throw PreconditionError("declared singular points are supported in dimension 1 only", "function");
  std::vector<double> px = e.f.breakpoints(0), py = e.f.breakpoints(1);
  auto mx = e.phi.breakpoints(0), my = e.phi.breakpoints(1);
  px.insert(px.end(), mx.begin(), mx.end());
  py.insert(py.end(), my.begin(), my.end());
  std::vector<Box> cells;
  for (const Box& b : eff.boxes()) {
    auto xs = cuts_within(px, b.lo[0], b.hi[0]);
    auto ys = cuts_within(py, b.lo[1], b.hi[1]);
    for (std::size_t j = 0; j + 1 < ys.size(); ++j)
      for (std::size_t i = 0; i + 1 < xs.size(); ++i) cells.push_back(Box::rect(xs[i], ys[j], xs[i + 1], ys[j + 1]));
  }
  const double tol = e.acc.abs_err / static_cast<double>(std::max<std::size_t>(cells.size(), 1));
  Partial total;
  for (const Box& c : cells) {
    auto g = [&](double x, double y) {
      Point p{x, y};
      return e.phi(p, std::abs(e.f(p)));
    };
    Partial p = from_quadrature(integrate2d(g, c, tol, e.budget));
    if (p.verdict != ModularResult::Verdict::Finite) {
      p.value += total.value;
      return finish(p, e);
    }
    total.value += p.value;
    total.err += p.err;
  }
  return finish(total, e);
}

void check_inputs(const MOFunction& phi, const PiecewiseFunction& f, const BoxSet& region, const AccuracySpec& acc) {
  if (acc.budget == 0) throw PreconditionError("evaluation budget must be positive", "budget");
  if (!(acc.abs_err > 0.0)) throw PreconditionError("absolute error target must be positive", "abs_err");
  if (region.dim() != phi.dim() || f.dim() != phi.dim())
    throw PreconditionError("dimension mismatch between family, function and region", "dim");
  if (!is_subset(region, phi.domain())) throw PreconditionError("region outside the family domain", "region");
}

}  // namespace

const char* to_string(DivergenceCertificate::Kind k) {
  return k == DivergenceCertificate::Kind::AnalyticPole ? "analytic_pole" : "growth";
}

const char* to_string(ModularResult::Verdict v) {
  switch (v) {
    case ModularResult::Verdict::Finite:
      return "finite";
    case ModularResult::Verdict::Divergent:
      return "divergent";
    case ModularResult::Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

ModularResult ModularResult::make_finite(double value, double err) {
  ModularResult r;
  r.verdict = Verdict::Finite;
  r.value = value;
  r.err = err;
  return r;
}

ModularResult ModularResult::make_divergent(DivergenceCertificate cert) {
  ModularResult r;
  r.verdict = Verdict::Divergent;
  r.value = kInf;
  r.certificate = std::move(cert);
  return r;
}

ModularResult ModularResult::make_inconclusive(double partial, std::string note) {
  ModularResult r;
  r.verdict = Verdict::Inconclusive;
  r.partial = partial;
  r.value = std::numeric_limits<double>::quiet_NaN();
  r.note = std::move(note);
  return r;
}

PoleInfo least_index_pole(double a, double b) {
  Rational r = least_index_rational(std::max(a, 0.0), std::min(b, 1.0));
  PoleInfo p;
  p.location = r.value();
  p.order = 1.0;
  p.side = Side::Right;
  BigInt n = unit_rational_index(r);
  p.coefficient = PoleCoefficient{1.0, n};
  p.exact = r;
  p.index = n;
  return p;
}

ModularResult modular(const MOFunction& phi, const PiecewiseFunction& f, const BoxSet& region,
                      const AccuracySpec& acc) {
  check_inputs(phi, f, region, acc);
  if (f.is_zero() || region.empty()) return ModularResult::make_finite(0.0, 0.0);
  BoxSet eff = set_intersect(region.as_closed(), f.support());
  if (eff.empty()) return ModularResult::make_finite(0.0, 0.0);
  Engine e{phi, f, acc, QuadratureBudget{acc.budget, 0}};
  return phi.dim() == 1 ? modular_1d(e, eff) : modular_2d(e, eff);
}

ModularResult modular(const MOFunction& phi, const PiecewiseFunction& f, const AccuracySpec& acc) {
  return modular(phi, f, phi.domain(), acc);
}

ModularResult modular_oracle(const MOFunction& phi, const PiecewiseFunction& f, const BoxSet& region) {
  if (!f.is_simple()) throw PreconditionError("the closed-form oracle needs a simple function", "function");
  if (region.dim() != phi.dim() || f.dim() != phi.dim())
    throw PreconditionError("dimension mismatch between family, function and region", "dim");
  const int dim = phi.dim();
  std::vector<double> px = phi.breakpoints(0), py = dim == 2 ? phi.breakpoints(1) : std::vector<double>{};
  double sum = 0.0;
  std::size_t count = 0;
  for (const SimplePiece& cell : f.simple_cells()) {
    BoxSet piece = set_intersect(BoxSet(dim, true, {cell.box}), region.as_closed());
    for (const Box& b : piece.boxes()) {
      auto xs = cuts_within(px, b.lo[0], b.hi[0]);
      auto ys = dim == 2 ? cuts_within(py, b.lo[1], b.hi[1]) : std::vector<double>{0.0, 1.0};
      for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
          Box sub = dim == 1 ? Box::interval(xs[i], xs[i + 1]) : Box::rect(xs[i], ys[j], xs[i + 1], ys[j + 1]);
          const double t = std::abs(cell.value);
          auto ci = phi.integrate_cell(sub, t);
          if (!ci)
            throw PreconditionError(fmt::format("family '{}' has no closed-form antiderivative on a cell", phi.name()),
                                    "family");
          if (ci->divergent) {
            PoleEvidence ev;
            ev.pole = *ci->pole;
            ev.side = sub.lo[0] == ev.pole.location ? Side::Right : Side::Left;
            ev.window = sub;
            ev.t_lower = t;
            DivergenceCertificate cert;
            cert.kind = DivergenceCertificate::Kind::AnalyticPole;
            cert.pole = ev;
            return ModularResult::make_divergent(cert);
          }
          sum += ci->value;
          ++count;
        }
      }
    }
  }
  return ModularResult::make_finite(sum, 4.0 * std::numeric_limits<double>::epsilon() * sum * (count + 1.0));
}

bool check_certificate(const DivergenceCertificate& cert) {
  if (cert.kind == DivergenceCertificate::Kind::Growth) {
    if (!cert.growth) return false;
    const GrowthRecord& g = *cert.growth;
    if (g.radii.size() != g.partials.size()) return false;
    for (std::size_t k = 1; k < g.radii.size(); ++k)
      if (!(g.radii[k] < g.radii[k - 1] && g.radii[k] > 0.0)) return false;
    return growth_rule(g);
  }
  if (!cert.pole) return false;
  const PoleEvidence& ev = *cert.pole;
  const PoleInfo& p = ev.pole;
  // A power |x - s|^(-q) with q >= 1 has a divergent integral on any window
  // touching s; q < 1 is integrable.
  if (!(p.order >= 1.0) || !p.coefficient.positive() || !(ev.t_lower > 0.0) || !(p.reach > 0.0)) return false;
  if (ev.window.dim != 1 || !(ev.window.lo[0] < ev.window.hi[0])) return false;
  if (ev.side == Side::Right && !p.active_right()) return false;
  if (ev.side == Side::Left && !p.active_left()) return false;
  if (ev.side == Side::Both) return false;
  double lo_pos = p.location, hi_pos = p.location;
  if (p.exact) {
    const Rational& r = *p.exact;
    if (r.den <= 0 || gcd(r.num, r.den) != 1) return false;
    if (p.location != r.value()) return false;
    lo_pos = r.round_down();
    hi_pos = r.round_up();
    if (p.index) {
      if (msb(*p.index) < 2'000'000 && unit_rational(*p.index) != r) return false;
      if (p.coefficient.log4_exponent != *p.index) return false;
    }
  }
  // An inexact rational lies strictly between its two roundings.
  const bool inexact = lo_pos < hi_pos;
  if (ev.side == Side::Right)
    return ev.window.lo[0] <= lo_pos && (hi_pos < ev.window.hi[0] || (inexact && hi_pos == ev.window.hi[0]));
  return (ev.window.lo[0] < lo_pos || (inexact && ev.window.lo[0] == lo_pos)) && hi_pos <= ev.window.hi[0];
}

}  // namespace molab
