#include "molab/density.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <limits>
#include <map>
#include <random>

#include "molab/error.hpp"

namespace molab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Norms along a trace repeat for identical sets, so they are memoized by the
// sets that determine the function.
class NormCache {
 public:
  NormCache(const MOFunction& phi, const NormOptions& opt) : phi_(phi), opt_(opt) { opt_.probe_membership = false; }

  const NormResult& get(const std::vector<BoxSet>& key, const std::function<PiecewiseFunction()>& make) {
    for (const auto& [k, v] : entries_)
      if (k == key) return v;
    entries_.emplace_back(key, luxemburg_norm(phi_, make(), opt_));
    return entries_.back().second;
  }

 private:
  const MOFunction& phi_;
  NormOptions opt_;
  std::vector<std::pair<std::vector<BoxSet>, NormResult>> entries_;
};

BoxSet empty_open(int dim) { return BoxSet(dim, false); }

// Open boxes of half-width h around each point, intersected with u.
BoxSet point_neighborhood(const std::vector<Point>& pts, double h, const BoxSet& u) {
  std::vector<Box> boxes;
  for (const Point& x : pts) {
    if (u.dim() == 1)
      boxes.push_back(Box::interval(x[0] - h, x[0] + h));
    else
      boxes.push_back(Box::rect(x[0] - h, x[1] - h, x[0] + h, x[1] + h));
  }
  if (boxes.empty()) return empty_open(u.dim());
  return set_intersect(BoxSet(u.dim(), false, boxes), u);
}

Point sample_in(const BoxSet& s, std::mt19937_64& rng) {
  std::vector<double> weights;
  for (const Box& b : s.boxes()) weights.push_back(b.volume());
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  const Box& b = s.boxes()[pick(rng)];
  Point x{0.0, 0.0};
  for (int i = 0; i < s.dim(); ++i) x[i] = std::uniform_real_distribution<double>(b.lo[i], b.hi[i])(rng);
  return x;
}

double norm_value(const NormResult& r) { return r.inconclusive ? std::numeric_limits<double>::quiet_NaN() : r.value; }

}  // namespace

PiecewiseFunction smooth_urysohn(const BoxSet& k, const BoxSet& u) {
  if (k.dim() != u.dim()) throw PreconditionError("dimension mismatch", "u");
  if (k.empty()) return PiecewiseFunction(k.dim());
  const double gap = linf_gap(k, u);
  if (!(gap > 0.0)) throw PreconditionError("compact set must lie strictly inside the open set", "u");
  double ramp = std::isfinite(gap) ? 0.75 * gap : 1.0;
  SmoothTerm term;
  term.coef = 1.0;
  for (const Box& b : k.boxes()) term.bumps.push_back(Bump{b, Point{ramp, k.dim() == 2 ? ramp : 0.0}});
  return PiecewiseFunction::smooth(k.dim(), {term});
}

ApproximationTrace approximate_indicator(const MOFunction& phi, const BoxSet& k, const BoxSet& omega_in,
                                         const SingularSetEstimate& sing, const ApproximationOptions& opt) {
  if (opt.n_max < 1) throw PreconditionError("n_max must be at least 1", "n_max");
  if (opt.m_cap < 1) throw PreconditionError("m cap must be at least 1", "m_cap");
  if (k.dim() != phi.dim() || omega_in.dim() != phi.dim()) throw PreconditionError("dimension mismatch", "compact");
  if (k.empty()) throw PreconditionError("compact set must be nonempty", "compact");
  if (!k.closed()) throw PreconditionError("compact set must be closed", "compact");
  const BoxSet omega = omega_in.as_open();
  const double gap = linf_gap(k, omega);
  if (!(gap > 0.0)) throw PreconditionError("compact set must lie strictly inside omega", "compact");
  if (!std::isfinite(gap)) throw PreconditionError("omega must be bounded", "omega");

  const PiecewiseFunction chi_k = PiecewiseFunction::indicator(k);
  Membership mem = membership_probe(phi, chi_k, opt.norm.lambda_schedule, opt.norm.acc);
  if (mem != Membership::InE)
    throw PreconditionError(fmt::format("indicator of the compact set is {}, not in E", to_string(mem)), "membership");
  if (sing.verdict != MeasureVerdict::Zero)
    throw PreconditionError(fmt::format("singular set measure is {}, not zero", to_string(sing.verdict)), "sing");

  ApproximationTrace trace;
  trace.target = chi_k;
  trace.tol = opt.tol;
  const double eta = std::min(1.0, 0.5 * gap);
  trace.u = set_intersect(inflate(k, eta, false), omega);
  const BoxSet& u = trace.u;

  std::vector<Point> sing_points;
  for (const SingularFlag& f : sing.flagged)
    if (distance(f.x, u) <= 0.0) sing_points.push_back(f.x);

  auto u_of = [&](int n) { return point_neighborhood(sing_points, 1.0 / n, u); };

  NormCache sel_cache(phi, opt.norm), dist_cache(phi, opt.norm), chi_cache(phi, opt.norm);
  for (int n = 1; n <= opt.n_max; ++n) {
    TraceStep step;
    step.n = n;
    step.u_n = u_of(n);
    step.k_n = set_difference(k, step.u_n);
    step.v_n = set_difference(u, u_of(n + 1).as_closed());
    const BoxSet& kn = step.k_n;

    if (kn.empty()) {
      step.w_prime = step.w_m = empty_open(k.dim());
      step.f_n = PiecewiseFunction(k.dim());
    } else {
      bool found = false;
      for (int m = 1; m <= opt.m_cap; ++m) {
        BoxSet w_prime = nested_open_cover(kn, std::exp2(m - 1));
        BoxSet w = set_intersect(w_prime, step.v_n);
        if (!(linf_gap(kn, w) > 0.0)) continue;
        PiecewiseFunction f = smooth_urysohn(kn, w);
        const NormResult& sel = sel_cache.get({kn, w}, [&] { return f - PiecewiseFunction::indicator(kn); });
        if (!sel.inconclusive && sel.value < 1.0 / n) {
          step.m_n = m;
          step.w_prime = std::move(w_prime);
          step.w_m = std::move(w);
          step.f_n = std::move(f);
          step.selection_norm = sel.value;
          found = true;
          break;
        }
      }
      if (!found) {
        trace.status = fmt::format("m search exhausted the cap {} at n = {}", opt.m_cap, n);
        break;
      }
    }

    step.dist = dist_cache.get({kn, step.w_m}, [&] { return step.f_n - chi_k; });
    step.chi_gap = norm_value(chi_cache.get({kn}, [&] { return PiecewiseFunction::indicator(set_difference(k, kn)); }));
    step.shell_volume = step.w_m.volume() - kn.volume();

    std::vector<std::string> failures;
    if (!kn.empty() && !(linf_gap(kn, step.w_m) > 0.0)) failures.push_back("K_n not inside W");
    if (!is_subset(step.w_m, step.v_n)) failures.push_back("W not inside V_n");
    if (!is_subset(step.v_n, u)) failures.push_back("V_n not inside U");
    if (!is_subset(u, omega)) failures.push_back("U not inside omega");
    if (!step.f_n.is_zero()) {
      BoxSet supp = step.f_n.support();
      if (!(linf_gap(supp, step.w_m) > 0.0)) failures.push_back("support not inside W");
      if (!(linf_gap(supp, omega) > 0.0)) failures.push_back("support not compact in omega");
      std::mt19937_64 rng(opt.seed + static_cast<std::uint64_t>(n));
      for (int s = 0; s < opt.containment_samples; ++s) {
        Point x = sample_in(kn, rng);
        if (std::abs(step.f_n(x) - 1.0) > 1e-12) {
          failures.push_back("f_n differs from 1 on K_n");
          break;
        }
      }
    }
    step.containments_ok = failures.empty();
    for (const auto& msg : failures) step.containment_note += (step.containment_note.empty() ? "" : "; ") + msg;
    trace.steps.push_back(std::move(step));
  }

  if (!trace.steps.empty()) {
    const NormResult& last = trace.steps.back().dist;
    trace.converged = !last.inconclusive && last.value <= opt.tol;
  }
  if (trace.status.empty()) trace.status = trace.converged ? "converged" : "tolerance not reached";
  return trace;
}

ApproximationTrace approximate_in_E(const MOFunction& phi, const PiecewiseFunction& f, const BoxSet& omega_in,
                                    const SingularSetEstimate& sing, const ApproximationOptions& opt) {
  if (!f.is_simple()) throw PreconditionError("function must be simple", "f");
  if (f.dim() != phi.dim()) throw PreconditionError("dimension mismatch", "f");
  const BoxSet omega = omega_in.as_open();

  std::map<double, std::vector<Box>> groups;
  for (const SimplePiece& c : f.simple_cells()) groups[c.value].push_back(c.box);
  ApproximationTrace trace;
  trace.target = f;
  trace.tol = opt.tol;
  trace.u = empty_open(f.dim());
  if (groups.empty()) {
    for (int n = 1; n <= opt.n_max; ++n) {
      TraceStep step;
      step.n = n;
      step.k_n = BoxSet(f.dim(), true);
      step.u_n = step.v_n = step.w_prime = step.w_m = empty_open(f.dim());
      step.f_n = PiecewiseFunction(f.dim());
      step.dist.modular_at_value = ModularResult::make_finite(0.0, 0.0);
      step.dist.membership = Membership::InE;
      trace.steps.push_back(std::move(step));
    }
    trace.converged = true;
    trace.status = "converged";
    return trace;
  }
  NormOptions no = opt.norm;
  no.probe_membership = false;
  const double count = static_cast<double>(groups.size());

  std::vector<BoxSet> inner;
  for (const auto& [value, boxes] : groups) {
    BoxSet a(f.dim(), true, boxes);
    if (!(linf_gap(a, omega) > 0.0)) throw PreconditionError("support must lie strictly inside omega", "f");
    Membership mem = membership_probe(phi, PiecewiseFunction::indicator(a), opt.norm.lambda_schedule, opt.norm.acc);
    if (mem != Membership::InE)
      throw PreconditionError(fmt::format("component {} (value {}): indicator is {}, not in E", trace.components.size(),
                                          value, to_string(mem)),
                              "membership");
    const double share = opt.tol / (2.0 * count * std::abs(value));
    double mu = kInf;
    for (const Box& b : a.boxes())
      for (int i = 0; i < f.dim(); ++i) mu = std::min(mu, 0.25 * b.extent(i));
    BoxSet kc = inflate(a, -mu, true);
    for (int it = 0; it < 60; ++it) {
      kc = inflate(a, -mu, true);
      if (!kc.empty()) {
        NormResult r = luxemburg_norm(phi, PiecewiseFunction::indicator(set_difference(a, kc)), no);
        if (!r.inconclusive && r.value <= share) break;
      }
      mu *= 0.5;
    }
    ApproximationOptions sub = opt;
    sub.tol = share;
    try {
      trace.components.push_back(approximate_indicator(phi, kc, omega, sing, sub));
    } catch (const PreconditionError& e) {
      throw PreconditionError(fmt::format("component {} (value {}): {}", trace.components.size(), value, e.what()),
                              e.field());
    }
    trace.coefficients.push_back(value);
    trace.u = set_union(trace.u, trace.components.back().u);
    inner.push_back(kc);
  }

  std::size_t len = trace.components.front().steps.size();
  for (const auto& c : trace.components) len = std::min(len, c.steps.size());

  NormCache sel_cache(phi, opt.norm), dist_cache(phi, opt.norm), chi_cache(phi, opt.norm);
  for (std::size_t i = 0; i < len; ++i) {
    TraceStep step;
    step.n = trace.components.front().steps[i].n;
    step.k_n = BoxSet(f.dim(), true);
    step.u_n = step.v_n = step.w_prime = step.w_m = empty_open(f.dim());
    step.f_n = PiecewiseFunction(f.dim());
    PiecewiseFunction chi_sum(f.dim());
    std::vector<BoxSet> key_k, key_kw;
    for (std::size_t c = 0; c < trace.components.size(); ++c) {
      const TraceStep& s = trace.components[c].steps[i];
      const double coef = trace.coefficients[c];
      step.m_n = std::max(step.m_n, s.m_n);
      step.k_n = set_union(step.k_n, s.k_n);
      step.u_n = set_union(step.u_n, s.u_n);
      step.v_n = set_union(step.v_n, s.v_n);
      step.w_prime = set_union(step.w_prime, s.w_prime);
      step.w_m = set_union(step.w_m, s.w_m);
      step.f_n = step.f_n + s.f_n.scaled(coef);
      chi_sum = chi_sum + PiecewiseFunction::indicator(s.k_n).scaled(coef);
      step.shell_volume += s.shell_volume;
      step.containments_ok = step.containments_ok && s.containments_ok;
      if (!s.containment_note.empty())
        step.containment_note += (step.containment_note.empty() ? "" : "; ") + s.containment_note;
      key_k.push_back(s.k_n);
      key_kw.push_back(s.k_n);
      key_kw.push_back(s.w_m);
    }
    step.dist = dist_cache.get(key_kw, [&] { return step.f_n - f; });
    step.selection_norm = norm_value(sel_cache.get(key_kw, [&] { return step.f_n - chi_sum; }));
    step.chi_gap = norm_value(chi_cache.get(key_k, [&] { return f - chi_sum; }));
    trace.steps.push_back(std::move(step));
  }

  if (!trace.steps.empty()) {
    const NormResult& last = trace.steps.back().dist;
    trace.converged = !last.inconclusive && last.value <= opt.tol;
  }
  trace.status = trace.converged ? "converged" : "tolerance not reached";
  for (const auto& c : trace.components)
    if (c.status.rfind("m search", 0) == 0) trace.status = c.status;
  return trace;
}

const char* to_string(NondensityWitness::Kind k) {
  switch (k) {
    case NondensityWitness::Kind::Excluded:
      return "excluded";
    case NondensityWitness::Kind::DistanceBound:
      return "distance_bound";
    case NondensityWitness::Kind::NoneFound:
      return "none_found";
  }
  return "?";
}

namespace {

constexpr double kQuarter = 0.25;

struct Ball {
  double c, r, min_value;
};

double abs_at(const PiecewiseFunction& f, double x) { return std::abs(f(point1(x))); }

// min |f| over refine + 1 equispaced points of [c - r, c + r].
double min_on(const PiecewiseFunction& f, double c, double r, int refine) {
  double m = kInf;
  for (int i = 0; i <= refine; ++i) m = std::min(m, abs_at(f, c - r + 2.0 * r * i / refine));
  return m;
}

std::optional<Ball> verified_ball(const PiecewiseFunction& f, double c, double r, int refine) {
  for (int shrink = 0; shrink < 12; ++shrink, r *= 0.5) {
    double m = min_on(f, c, r, refine);
    if (m >= kQuarter) return Ball{c, r, m};
  }
  return std::nullopt;
}

// Longest run of lattice points in [lo, hi] with |f| >= 1/4, zooming into
// short runs until a ball of radius four lattice steps fits.
std::optional<Ball> scan_ball(const PiecewiseFunction& f, double lo, double hi, int points, int refine, int depth) {
  const double h = (hi - lo) / points;
  std::size_t best_start = 0, best_len = 0, start = 0, len = 0;
  for (int i = 0; i <= points; ++i) {
    bool hit = abs_at(f, lo + h * i) >= kQuarter;
    if (hit) {
      if (len == 0) start = static_cast<std::size_t>(i);
      ++len;
      if (len > best_len) {
        best_len = len;
        best_start = start;
      }
    } else {
      len = 0;
    }
  }
  if (best_len == 0) return std::nullopt;
  const double a = lo + h * static_cast<double>(best_start);
  const double b = lo + h * static_cast<double>(best_start + best_len - 1);
  if (best_len >= 9) return verified_ball(f, 0.5 * (a + b), 0.5 * (b - a), refine);
  if (depth >= 6) return std::nullopt;
  return scan_ball(f, std::max(lo, a - h), std::min(hi, b + h), 1024, refine, depth + 1);
}

std::optional<PoleInfo> pole_in_ball(const MOFunction& phi, double lo, double hi) {
  if (auto d = phi.dense_singular_interval()) {
    double a = std::max(lo, d->first), b = std::min(hi, d->second);
    if (b > a) return least_index_pole(a, b);
  }
  for (const PoleInfo& p : phi.poles())
    if (p.location > lo && p.location < hi) return p;
  return std::nullopt;
}

bool ball_in_domain(const MOFunction& phi, double lo, double hi) {
  return is_subset(BoxSet::interval(lo, hi, false), phi.domain());
}

std::optional<NondensityWitness> excluded_witness(const MOFunction& phi, const Ball& ball) {
  const double lo = ball.c - ball.r, hi = ball.c + ball.r;
  if (!ball_in_domain(phi, lo, hi)) return std::nullopt;
  auto pole = pole_in_ball(phi, lo, hi);
  if (!pole) return std::nullopt;
  PoleEvidence ev;
  ev.pole = *pole;
  ev.t_lower = kQuarter;
  const double s_lo = pole->exact ? pole->exact->round_down() : pole->location;
  const double s_hi = pole->exact ? pole->exact->round_up() : pole->location;
  if (pole->active_right() && hi > s_lo) {
    ev.side = Side::Right;
    ev.window = Box::interval(s_lo, hi);
  } else if (pole->active_left() && s_hi > lo) {
    ev.side = Side::Left;
    ev.window = Box::interval(lo, s_hi);
  } else {
    return std::nullopt;
  }
  NondensityWitness w;
  w.kind = NondensityWitness::Kind::Excluded;
  w.ball = Box::interval(lo, hi);
  w.pole = *pole;
  w.certificate.kind = DivergenceCertificate::Kind::AnalyticPole;
  w.certificate.pole = ev;
  w.min_on_ball = ball.min_value;
  return w;
}

}  // namespace

NondensityWitness witness_nondensity(const MOFunction& phi, const PiecewiseFunction& f, const BoxSet& k,
                                     const WitnessOptions& opt) {
  auto d = phi.dense_singular_interval();
  if (!d) throw PreconditionError("family has no dense singular interval", "phi");
  return witness_nondensity(phi, f, d->first, d->second, k, opt);
}

NondensityWitness witness_nondensity(const MOFunction& phi, const PiecewiseFunction& f, double s_lo, double s_hi,
                                     const BoxSet& k, const WitnessOptions& opt) {
  if (phi.dim() != 1 || f.dim() != 1) throw PreconditionError("witness search is one-dimensional", "phi");
  if (!(s_lo <= s_hi)) throw PreconditionError("singular interval must satisfy lo <= hi", "singular");
  if (opt.scan_points < 16 || opt.refine_points < 2) throw PreconditionError("scan resolution too small", "scan");

  if (s_hi > s_lo) {
    if (auto ball = scan_ball(f, s_lo, s_hi, opt.scan_points, opt.refine_points, 0))
      if (auto w = excluded_witness(phi, *ball)) return *w;
  } else {
    for (int j = 0; j <= 40; ++j) {
      if (auto ball = verified_ball(f, s_lo, std::exp2(-j), opt.refine_points); ball && ball->r == std::exp2(-j))
        if (auto w = excluded_witness(phi, *ball)) return *w;
    }
  }

  NondensityWitness w;
  if (!k.empty()) {
    if (k.dim() != 1) throw PreconditionError("dimension mismatch", "k");
    double max_abs = 0.0;
    std::vector<Box> ambiguous;
    for (const Box& b : k.boxes()) {
      const double h = b.extent(0) / opt.scan_points;
      for (int i = 0; i <= opt.scan_points; ++i) {
        double x = b.lo[0] + h * i, v = abs_at(f, x);
        max_abs = std::max(max_abs, v);
        if (v >= kQuarter && i < opt.scan_points) ambiguous.push_back(Box::interval(x, x + h));
      }
      for (double x : f.breakpoints(0))
        if (x >= b.lo[0] && x <= b.hi[0]) max_abs = std::max(max_abs, abs_at(f, x));
    }
    if (max_abs < kQuarter) {
      w.kind = NondensityWitness::Kind::DistanceBound;
      w.region = k;
      w.gap = 1.0 - max_abs;
      NormOptions no = opt.norm;
      no.acc.full_series = false;
      no.probe_membership = false;
      NormResult r = luxemburg_norm(phi, PiecewiseFunction::indicator(k.as_closed(), 1.0 - kQuarter), no);
      w.norm_lower_bound = r.inconclusive ? 0.0 : (std::isinf(r.value) ? kInf : r.lo);
      return w;
    }
    w.ambiguous = ambiguous.empty() ? BoxSet(1, true) : BoxSet(1, true, ambiguous);
  } else if (s_hi > s_lo) {
    w.ambiguous = BoxSet::interval(s_lo, s_hi, true);
  } else {
    w.ambiguous = BoxSet(1, true);
  }
  w.kind = NondensityWitness::Kind::NoneFound;
  return w;
}

MeasureConvergenceReport measure_convergence_check(std::span<const PiecewiseFunction> seq, const PiecewiseFunction& f,
                                                   const BoxSet& region, double eps, double grid_res) {
  if (!(eps > 0.0)) throw PreconditionError("eps must be positive", "eps");
  if (!(grid_res > 0.0)) throw PreconditionError("grid resolution must be positive", "res");
  MeasureConvergenceReport report;
  report.eps = eps;
  struct Cell {
    Point center;
    double volume;
  };
  std::vector<Cell> cells;
  for (const Box& b : region.boxes()) {
    std::array<long, 2> cnt{1, 1};
    for (int i = 0; i < region.dim(); ++i) cnt[i] = std::max(1L, std::lround(std::ceil(b.extent(i) / grid_res)));
    const double hx = b.extent(0) / cnt[0];
    const double hy = region.dim() == 2 ? b.extent(1) / cnt[1] : 1.0;
    for (long j = 0; j < cnt[1]; ++j)
      for (long i = 0; i < cnt[0]; ++i) {
        Point c{b.lo[0] + (i + 0.5) * hx, region.dim() == 2 ? b.lo[1] + (j + 0.5) * hy : 0.0};
        cells.push_back({c, hx * hy});
      }
  }
  std::vector<double> target;
  target.reserve(cells.size());
  for (const Cell& c : cells) target.push_back(f(c.center));
  for (const PiecewiseFunction& fn : seq) {
    double vol = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (std::abs(target[i] - fn(cells[i].center)) > eps) vol += cells[i].volume;
    report.volumes.push_back(vol);
  }
  return report;
}

}  // namespace molab
