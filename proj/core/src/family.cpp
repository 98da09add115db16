#include "molab/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "molab/error.hpp"

namespace molab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool term_active(const PoleInfo& p, double x) {
  double d = x - p.location;
  if (d > 0) return p.active_right() && d < p.reach;
  if (d < 0) return p.active_left() && -d < p.reach;
  return false;
}

double term_value(const PoleInfo& p, double x) {
  if (!term_active(p, x)) return 0.0;
  double c = p.coefficient.approx();
  double d = std::abs(x - p.location);
  return p.order == 1.0 ? c / d : c * std::pow(d, -p.order);
}

// Limit of the term magnitude at distance d from the pole.
double term_at_distance(const PoleInfo& p, double d) {
  if (d == 0.0) return kInf;
  double c = p.coefficient.approx();
  return p.order == 1.0 ? c / d : c * std::pow(d, -p.order);
}

bool in_carrier(const WeightParams& w, double x) {
  return !w.carrier || (w.carrier->first < x && x < w.carrier->second);
}

// Integral of c |x - s|^(-q) for x between distances d1 <= d2 from the pole.
double power_integral(double c, double q, double d1, double d2) {
  if (d2 <= d1) return 0.0;
  if (q == 1.0) return c * std::log1p((d2 - d1) / d1);
  return c * (std::pow(d2, 1.0 - q) - std::pow(d1, 1.0 - q)) / (1.0 - q);
}

std::vector<Point> grid_points(const BoxSet& set, int per_axis) {
  std::vector<Point> out;
  for (const Box& b : set.boxes()) {
    int ny = set.dim() == 2 ? per_axis : 1;
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < per_axis; ++i) {
        Point x{b.lo[0] + (i + 0.5) * b.extent(0) / per_axis, 0.0};
        if (set.dim() == 2) x[1] = b.lo[1] + (j + 0.5) * b.extent(1) / per_axis;
        out.push_back(x);
      }
    }
  }
  return out;
}

void require_open_domain(const BoxSet& domain) {
  if (domain.empty()) throw PreconditionError("family domain must be nonempty", "domain");
}

}  // namespace

const char* to_string(Side s) {
  switch (s) {
    case Side::Left:
      return "left";
    case Side::Right:
      return "right";
    case Side::Both:
      return "both";
  }
  return "?";
}

const char* to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::Orlicz:
      return "orlicz";
    case FamilyKind::WeightedLinear:
      return "weighted_linear";
    case FamilyKind::SeriesWeight:
      return "series_weight";
    case FamilyKind::VariableExponent:
      return "variable_exponent";
    case FamilyKind::DoublePhase:
      return "double_phase";
  }
  return "?";
}

double PoleCoefficient::approx() const {
  if (log4_exponent == 0) return mantissa;
  if (log4_exponent > 600) return 0.0;
  return mantissa * std::pow(4.0, -static_cast<double>(log4_exponent));
}

MOFunction::MOFunction(FamilyKind kind, std::string name, BoxSet domain, Params params)
    : kind_(kind), name_(std::move(name)), domain_(std::move(domain)), params_(std::move(params)),
      exempt_(domain_.dim(), false) {
  require_open_domain(domain_);
  if (domain_.closed()) domain_ = domain_.as_open();
}

bool MOFunction::has_scalar_weight() const { return std::holds_alternative<WeightParams>(params_); }

double MOFunction::weight(const Point& x) const {
  const auto* w = std::get_if<WeightParams>(&params_);
  if (!w) throw PreconditionError(fmt::format("family '{}' has no scalar weight", name_), "family");
  if (!in_carrier(*w, x[0])) return 1.0;
  double sum = 0.0;
  for (const PoleInfo& p : w->terms) sum += term_value(p, x[0]);
  return sum;
}

WeightRange MOFunction::weight_range(double lo, double hi) const {
  const auto* w = std::get_if<WeightParams>(&params_);
  if (!w) throw PreconditionError(fmt::format("family '{}' has no scalar weight", name_), "family");
  if (hi < lo) std::swap(lo, hi);
  if (hi == lo) {
    double v = weight(point1(lo));
    return {v, v};
  }
  std::vector<double> cuts{lo, hi};
  auto add_cut = [&](double c) {
    if (c > lo && c < hi) cuts.push_back(c);
  };
  if (w->carrier) {
    add_cut(w->carrier->first);
    add_cut(w->carrier->second);
  }
  for (const PoleInfo& p : w->terms) {
    add_cut(p.location);
    if (std::isfinite(p.reach)) {
      add_cut(p.location - p.reach);
      add_cut(p.location + p.reach);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  WeightRange out{kInf, -kInf};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double u = cuts[i], v = cuts[i + 1], mid = 0.5 * (u + v);
    if (!in_carrier(*w, mid)) {
      out.inf = std::min(out.inf, 1.0);
      out.sup = std::max(out.sup, 1.0);
      continue;
    }
    double inf = 0.0, sup = 0.0;
    for (const PoleInfo& p : w->terms) {
      if (!term_active(p, mid)) continue;
      double a = term_at_distance(p, std::abs(u - p.location));
      double b = term_at_distance(p, std::abs(v - p.location));
      inf += std::min(a, b);
      sup += std::max(a, b);
    }
    out.inf = std::min(out.inf, inf);
    out.sup = std::max(out.sup, sup);
  }
  // Isolated points where terms vanish (the poles themselves) do not change
  // the essential range, so they are ignored.
  return out;
}

double MOFunction::operator()(const Point& x, double t) const {
  if (t == 0.0) return 0.0;
  switch (kind_) {
    case FamilyKind::WeightedLinear:
    case FamilyKind::SeriesWeight: {
      double w = weight(x);
      return w == 0.0 ? 0.0 : t * w;
    }
    case FamilyKind::Orlicz: {
      const auto& o = std::get<OrliczParams>(params_);
      if (o.kind == OrliczParams::Kind::Exp) return std::expm1(t);
      return o.c * std::pow(t, o.q);
    }
    case FamilyKind::VariableExponent: {
      double p = std::get<ExponentParams>(params_).p(x);
      if (std::isinf(p)) return t < 1.0 ? 0.0 : kInf;
      return std::pow(t, p) / p;
    }
    case FamilyKind::DoublePhase: {
      const auto& d = std::get<DoublePhaseParams>(params_);
      double a = d.a(x);
      double v = std::pow(t, d.p(x));
      if (a != 0.0) v += a * std::pow(t, d.r(x));
      return v;
    }
  }
  return 0.0;
}

std::span<const PoleInfo> MOFunction::poles() const {
  if (const auto* w = std::get_if<WeightParams>(&params_)) return w->terms;
  return {};
}

std::vector<double> MOFunction::breakpoints(int axis) const {
  std::vector<double> out;
  if (const auto* w = std::get_if<WeightParams>(&params_)) {
    if (axis != 0) return out;
    if (w->carrier) {
      out.push_back(w->carrier->first);
      out.push_back(w->carrier->second);
    }
    for (const PoleInfo& p : w->terms) {
      out.push_back(p.location);
      if (std::isfinite(p.reach)) {
        out.push_back(p.location - p.reach);
        out.push_back(p.location + p.reach);
      }
    }
  } else if (const auto* e = std::get_if<ExponentParams>(&params_)) {
    out = e->p.breakpoints(axis);
  } else if (const auto* d = std::get_if<DoublePhaseParams>(&params_)) {
    for (const Descriptor* desc : {&d->p, &d->r, &d->a}) {
      auto more = desc->breakpoints(axis);
      out.insert(out.end(), more.begin(), more.end());
    }
  }
  return out;
}

std::optional<CellIntegral> MOFunction::integrate_cell(const Box& cell, double t) const {
  if (t == 0.0) return CellIntegral{};
  const double vol = cell.volume();
  switch (kind_) {
    case FamilyKind::Orlicz:
      return CellIntegral{false, vol * (*this)(cell.center(), t), std::nullopt};
    case FamilyKind::WeightedLinear:
    case FamilyKind::SeriesWeight: {
      const auto& w = std::get<WeightParams>(params_);
      const double u = cell.lo[0], v = cell.hi[0], mid = 0.5 * (u + v);
      if (!in_carrier(w, mid)) return CellIntegral{false, t * (v - u), std::nullopt};
      CellIntegral out;
      for (const PoleInfo& p : w.terms) {
        if (!term_active(p, mid)) continue;
        double c = p.coefficient.approx();
        double d1 = std::min(std::abs(u - p.location), std::abs(v - p.location));
        double d2 = std::max(std::abs(u - p.location), std::abs(v - p.location));
        if (d1 == 0.0 && p.order >= 1.0) {
          out.divergent = true;
          out.pole = p;
          out.value = kInf;
          return out;
        }
        if (d1 == 0.0) {
          out.value += t * c * std::pow(d2, 1.0 - p.order) / (1.0 - p.order);
        } else {
          out.value += t * power_integral(c, p.order, d1, d2);
        }
      }
      return out;
    }
    case FamilyKind::VariableExponent: {
      auto pr = std::get<ExponentParams>(params_).p.range(cell);
      if (pr.inf != pr.sup) return std::nullopt;
      return CellIntegral{false, vol * std::pow(t, pr.inf) / pr.inf, std::nullopt};
    }
    case FamilyKind::DoublePhase: {
      const auto& d = std::get<DoublePhaseParams>(params_);
      auto pr = d.p.range(cell), rr = d.r.range(cell), ar = d.a.range(cell);
      if (pr.inf != pr.sup || ar.inf != ar.sup) return std::nullopt;
      double v = std::pow(t, pr.inf);
      if (ar.inf != 0.0) {
        if (rr.inf != rr.sup) return std::nullopt;
        v += ar.inf * std::pow(t, rr.inf);
      }
      return CellIntegral{false, vol * v, std::nullopt};
    }
  }
  return std::nullopt;
}

BoxSet default_example_domain() { return BoxSet::interval(-10.0, 10.0, false); }

MOFunction make_orlicz_power(double q, double c, BoxSet domain) {
  if (!(q >= 1.0) || !std::isfinite(q)) throw PreconditionError("power Orlicz exponent must be >= 1", "q");
  if (!(c > 0.0)) throw PreconditionError("power Orlicz coefficient must be positive", "c");
  MOFunction phi(FamilyKind::Orlicz, fmt::format("orlicz_power(q={})", q), std::move(domain),
                 OrliczParams{OrliczParams::Kind::Power, q, c});
  phi.set_delta2({std::exp2(q), {}, 0.0, Delta2Certificate::Provenance::Analytic, "power"});
  return phi;
}

MOFunction make_orlicz_exp(BoxSet domain) {
  // e^t - 1 fails Delta_2, so no certificate is attached.
  return MOFunction(FamilyKind::Orlicz, "orlicz_exp", std::move(domain),
                    OrliczParams{OrliczParams::Kind::Exp, 1.0, 1.0});
}

MOFunction make_weighted_linear(std::vector<PoleInfo> poles, BoxSet domain) {
  if (domain.dim() != 1) throw PreconditionError("weighted linear families are one-dimensional", "domain");
  for (const PoleInfo& p : poles) {
    if (!(p.order > 0.0)) throw PreconditionError("pole order must be positive", "order");
    if (!p.coefficient.positive()) throw PreconditionError("pole coefficient must be positive", "coefficient");
  }
  MOFunction phi(FamilyKind::WeightedLinear, "weighted_linear", std::move(domain),
                 WeightParams{std::move(poles), std::nullopt, 0, ""});
  phi.set_delta2({2.0, {}, 0.0, Delta2Certificate::Provenance::Analytic, "linear in t"});
  return phi;
}

MOFunction make_phi1(BoxSet domain) {
  PoleInfo pole;
  pole.location = 0.0;
  pole.order = 1.0;
  pole.side = Side::Both;
  if (domain.dim() != 1) throw PreconditionError("weighted linear families are one-dimensional", "domain");
  MOFunction phi(FamilyKind::WeightedLinear, "phi1", std::move(domain), WeightParams{{pole}, std::nullopt, 0, ""});
  phi.set_delta2({2.0, {}, 0.0, Delta2Certificate::Provenance::Analytic, "linear in t"});
  return phi;
}

PoleInfo series_pole(const BigInt& n) {
  PoleInfo p;
  Rational r = unit_rational(n);
  p.location = r.value();
  p.order = 1.0;
  p.coefficient = PoleCoefficient{1.0, n};
  p.side = Side::Right;
  p.exact = r;
  p.index = n;
  return p;
}

MOFunction make_phi2(int n_terms, const std::string& enumeration, BoxSet domain) {
  if (n_terms < 1) throw PreconditionError("series truncation N must be >= 1", "N");
  if (enumeration != "calkin-wilf")
    throw PreconditionError(fmt::format("unknown rational enumeration '{}'", enumeration), "enumeration");
  if (domain.dim() != 1) throw PreconditionError("series weight families are one-dimensional", "domain");
  WeightParams w;
  w.carrier = std::make_pair(0.0, 1.0);
  w.truncation = n_terms;
  w.enumeration = enumeration;
  double min_r = 1.0;
  for (int n = 1; n <= n_terms; ++n) {
    w.terms.push_back(series_pole(n));
    min_r = std::min(min_r, w.terms.back().location);
  }
  MOFunction phi(FamilyKind::SeriesWeight, "phi2", std::move(domain), std::move(w));
  phi.set_dense_singular_interval({0.0, 1.0});
  phi.set_delta2({2.0, {}, 0.0, Delta2Certificate::Provenance::Analytic, "linear in t"});
  // The truncated weight vanishes left of its first pole; the full series does
  // not, so this interval is exempt from the positivity check.
  phi.set_positivity_exempt(BoxSet::interval(0.0, min_r, false));
  return phi;
}

MOFunction make_variable_exponent(Descriptor p, BoxSet domain) {
  auto range = p.range(domain);
  if (!(range.inf >= 1.0)) throw PreconditionError("variable exponent needs p(x) >= 1", "p");
  for (const Point& x : grid_points(domain, 201)) {
    if (!(p(x) >= 1.0)) throw PreconditionError("variable exponent needs p(x) >= 1", "p");
  }
  MOFunction phi(FamilyKind::VariableExponent, "variable_exponent(" + p.describe() + ")", std::move(domain),
                 ExponentParams{p});
  if (std::isfinite(range.sup))
    phi.set_delta2({std::exp2(range.sup), {}, 0.0, Delta2Certificate::Provenance::Analytic, "p+ < inf"});
  return phi;
}

MOFunction make_double_phase(Descriptor p, Descriptor r, Descriptor a, BoxSet domain) {
  auto ar = a.range(domain);
  if (!(ar.inf >= 0.0)) throw PreconditionError("double phase needs a(x) >= 0", "a");
  if (!std::isfinite(ar.sup)) throw PreconditionError("double phase needs a essentially bounded", "a");
  if (!(p.range(domain).inf >= 1.0)) throw PreconditionError("double phase needs p(x) >= 1", "p");
  for (const Point& x : grid_points(domain, 201)) {
    if (!(p(x) <= r(x))) throw PreconditionError("double phase needs p(x) <= r(x)", "r");
  }
  auto verdict = check_double_phase_delta2(p, r, a, domain);
  MOFunction phi(FamilyKind::DoublePhase, "double_phase", std::move(domain), DoublePhaseParams{p, r, a});
  if (verdict.certificate) phi.set_delta2(*verdict.certificate);
  return phi;
}

Delta2Report verify_delta2(const MOFunction& phi, const Delta2Certificate& cert, const Delta2Grid& grid) {
  constexpr double kSlack = 1e-9;
  Delta2Report report;
  std::vector<Point> xs = grid_points(phi.domain(), grid.x_per_axis);
  // Weighted families concentrate structure on the unit interval and near
  // poles; sample there as well.
  if (phi.dim() == 1) {
    for (double c : phi.breakpoints(0)) {
      for (double off : {1e-6, 1e-3, 0.1}) {
        for (double x : {c - off, c + off})
          if (contains(phi.domain(), point1(x))) xs.push_back(point1(x));
      }
    }
  }
  std::vector<double> ts{0.0};
  for (int i = 0; i < grid.t_count; ++i) {
    double f = grid.t_count == 1 ? 0.0 : static_cast<double>(i) / (grid.t_count - 1);
    ts.push_back(grid.t_min * std::pow(grid.t_max / grid.t_min, f));
  }
  for (const Point& x : xs) {
    double h = cert.h(x);
    for (double t : ts) {
      ++report.samples;
      double lhs = phi(x, 2.0 * t);
      double rhs = cert.C * phi(x, t) + h;
      if (lhs <= rhs) continue;
      if (std::isinf(lhs) && std::isinf(rhs)) continue;
      double scale = std::max({std::abs(lhs), std::abs(rhs), std::numeric_limits<double>::min()});
      double excess = std::isinf(lhs) ? kInf : (lhs - rhs) / scale;
      if (excess > report.worst_excess) {
        report.worst_excess = excess;
        report.worst_x = x;
        report.worst_t = t;
      }
      if (excess > kSlack) report.pass = false;
    }
  }
  return report;
}

DoublePhaseVerdict check_double_phase_delta2(const Descriptor& p, const Descriptor& r, const Descriptor& a,
                                             const BoxSet& domain) {
  DoublePhaseVerdict out;
  const double p_sup = p.range(domain).sup;
  const double r_sup = r.range(domain).sup;
  const BoxSet omega1 = a.support_within(domain);
  const double r1_sup = omega1.empty() ? -kInf : r.range(omega1).sup;

  if (std::isfinite(r_sup) && std::isfinite(p_sup)) {
    out.clause = "(i)";
    out.certificate = Delta2Certificate{std::exp2(std::max(p_sup, r_sup)), {}, 0.0,
                                        Delta2Certificate::Provenance::Analytic, "(i) r+ < inf"};
    return out;
  }
  out.violations.push_back(fmt::format("(i) r+ < inf fails: r+ = {}", r_sup));

  bool strict = true;
  if (!omega1.empty()) {
    auto pr = p.range(omega1), rr = r.range(omega1);
    if (!(pr.sup < rr.inf)) {
      for (const Point& x : grid_points(omega1, 201)) {
        if (!(p(x) < r(x))) {
          strict = false;
          break;
        }
      }
    }
  }
  std::vector<std::string> fails;
  if (!strict) fails.push_back("p < r a.e. on supp a fails");
  if (!std::isfinite(p_sup)) fails.push_back(fmt::format("p+ = {} is not finite", p_sup));
  if (!std::isfinite(r1_sup)) fails.push_back(fmt::format("r+ on supp a = {} is not finite", r1_sup));
  if (fails.empty()) {
    out.violations.clear();
    out.clause = "(ii)";
    out.certificate = Delta2Certificate{std::exp2(std::max(p_sup, r1_sup)), {}, 0.0,
                                        Delta2Certificate::Provenance::Analytic,
                                        "(ii) p < r on supp a, p+ and r+ on supp a finite"};
    return out;
  }
  std::string joined;
  for (const auto& f : fails) joined += (joined.empty() ? "" : "; ") + f;
  out.violations.push_back("(ii) " + joined);
  return out;
}

AxiomReport validate_axioms(const MOFunction& phi, std::size_t samples, std::uint64_t seed) {
  AxiomReport report;
  std::mt19937_64 rng(seed);
  const Box bb = phi.domain().bounding_box();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> log_t(std::log(1e-3), std::log(1e3));
  auto draw_x = [&]() {
    while (true) {
      Point x{0.0, 0.0};
      for (int i = 0; i < phi.dim(); ++i) x[i] = bb.lo[i] + unit(rng) * bb.extent(i);
      if (contains(phi.domain(), x)) return x;
    }
  };
  for (std::size_t k = 0; k < samples; ++k) {
    ++report.samples;
    Point x = draw_x();
    double t1 = std::exp(log_t(rng)), t2 = std::exp(log_t(rng));
    if (t1 > t2) std::swap(t1, t2);
    if (phi(x, 0.0) != 0.0) ++report.zero_failures;
    double a = phi(x, t1), b = phi(x, t2), m = phi(x, 0.5 * (t1 + t2));
    if (std::isfinite(b) && m > 0.5 * (a + b) + 1e-9 * std::max(1.0, std::abs(0.5 * (a + b))))
      ++report.convexity_failures;
    if (a > b * (1.0 + 1e-12)) ++report.monotonicity_failures;
    if (!(a > 0.0) && !contains(phi.positivity_exempt(), x)) ++report.positivity_failures;
  }
  // Declared pole bounds, spot-checked on the active side.
  for (const PoleInfo& p : phi.poles()) {
    double c = p.coefficient.approx();
    for (double d : {1e-6, 1e-4, 1e-2}) {
      for (int sign : {-1, 1}) {
        if ((sign < 0 && !p.active_left()) || (sign > 0 && !p.active_right())) continue;
        if (d >= p.reach) continue;
        Point x = point1(p.location + sign * d);
        if (!contains(phi.domain(), x)) continue;
        const auto* w = std::get_if<WeightParams>(&phi.params());
        if (w && w->carrier && !(w->carrier->first < x[0] && x[0] < w->carrier->second)) continue;
        // Rounding moves x off location + d; bound at the realised distance.
        double bound = c * std::pow(std::abs(x[0] - p.location), -p.order);
        if (phi(x, 1.0) < bound * (1.0 - 1e-12)) ++report.pole_bound_failures;
      }
    }
  }
  return report;
}

LevelSetDecomposition level_set_decomposition(const MOFunction& phi, const BoxSet& a, int n_max, double grid_res) {
  if (!phi.has_scalar_weight())
    throw PreconditionError(fmt::format("family '{}' has no scalar weight", phi.name()), "family");
  if (!(grid_res > 0.0)) throw PreconditionError("grid resolution must be positive", "grid");
  if (n_max < 1) throw PreconditionError("n_max must be >= 1", "n_max");
  LevelSetDecomposition out;
  out.remainder = BoxSet(1, a.closed());
  out.flagged = BoxSet(1, a.closed());
  if (a.empty()) return out;
  std::vector<std::vector<Box>> cells(static_cast<std::size_t>(n_max));
  std::vector<Box> rest, straddle;
  for (const Box& b : a.boxes()) {
    auto count = static_cast<long>(std::ceil(b.extent(0) / grid_res - 1e-9));
    count = std::max(count, 1L);
    for (long i = 0; i < count; ++i) {
      double lo = b.lo[0] + b.extent(0) * static_cast<double>(i) / static_cast<double>(count);
      double hi = i + 1 == count ? b.hi[0] : b.lo[0] + b.extent(0) * static_cast<double>(i + 1) / count;
      WeightRange wr = phi.weight_range(lo, hi);
      double mid = phi.weight(point1(0.5 * (lo + hi)));
      Box cell = Box::interval(lo, hi);
      if (!std::isfinite(wr.sup) || std::floor(wr.inf) != std::floor(wr.sup)) straddle.push_back(cell);
      double level = std::floor(mid) + 1.0;
      if (level <= n_max) {
        cells[static_cast<std::size_t>(level) - 1].push_back(cell);
      } else {
        rest.push_back(cell);
      }
    }
  }
  for (auto& list : cells) out.levels.emplace_back(1, a.closed(), list);
  out.remainder = BoxSet(1, a.closed(), rest);
  out.flagged = BoxSet(1, a.closed(), straddle);
  return out;
}

}  // namespace molab
