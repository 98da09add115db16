#include "molab/luxemburg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "molab/error.hpp"

namespace molab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLambdaMax = std::exp2(60.0);
const double kLambdaMin = std::exp2(-60.0);

bool feasible(const ModularResult& m) { return m.finite() && m.value <= 1.0; }

bool trace_monotone(std::vector<NormStep> trace) {
  std::sort(trace.begin(), trace.end(), [](const NormStep& a, const NormStep& b) { return a.lambda < b.lambda; });
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const ModularResult& small = trace[i - 1].modular;  // f / smaller lambda: larger modular
    const ModularResult& large = trace[i].modular;
    if (small.inconclusive() || large.inconclusive()) continue;
    if (large.divergent() && !small.divergent()) return false;
    if (small.finite() && large.finite() && large.value > small.value + small.err + large.err + 1e-12) return false;
  }
  return true;
}

}  // namespace

const char* to_string(Membership m) {
  switch (m) {
    case Membership::InE:
      return "in_E";
    case Membership::InLOnly:
      return "in_L_only";
    case Membership::NotInL:
      return "not_in_L";
    case Membership::Undetermined:
      return "undetermined";
  }
  return "?";
}

std::vector<double> default_lambda_schedule() {
  std::vector<double> s;
  for (int k = -10; k <= 10; ++k) s.push_back(std::exp2(k));
  return s;
}

NormResult luxemburg_norm(const MOFunction& phi, const PiecewiseFunction& f, const NormOptions& opt) {
  if (!(opt.tol > 0.0)) throw PreconditionError("norm tolerance must be positive", "tol");
  NormResult res;
  if (f.is_zero()) {
    res.modular_at_value = ModularResult::make_finite(0.0, 0.0);
    res.membership = Membership::InE;
    return res;
  }
  auto eval = [&](double lambda) {
    ModularResult m = modular(phi, f.scaled(1.0 / lambda), opt.acc);
    res.trace.push_back({lambda, m});
    return m;
  };
  auto undetermined = [&](const ModularResult& m) {
    res.inconclusive = true;
    res.membership = Membership::Undetermined;
    res.value = std::numeric_limits<double>::quiet_NaN();
    res.modular_at_value = m;
    res.note = "inconclusive modular during bracketing: " + m.note;
    res.monotone = trace_monotone(res.trace);
    return res;
  };

  double lo = 0.0, hi = 0.0;
  ModularResult at_hi = eval(1.0);
  if (at_hi.inconclusive()) return undetermined(at_hi);
  if (feasible(at_hi)) {
    hi = 1.0;
    double lambda = 0.5;
    while (true) {
      if (lambda < kLambdaMin) {
        lo = 0.0;
        break;
      }
      ModularResult m = eval(lambda);
      if (m.inconclusive()) return undetermined(m);
      if (!feasible(m)) {
        lo = lambda;
        break;
      }
      hi = lambda;
      at_hi = m;
      lambda *= 0.5;
    }
  } else {
    lo = 1.0;
    double lambda = 2.0;
    while (true) {
      if (lambda > kLambdaMax) {
        res.value = kInf;
        res.lo = lo;
        res.hi = kInf;
        res.modular_at_value = res.trace.back().modular;
        res.membership = opt.probe_membership ? membership_probe(phi, f, opt.lambda_schedule, opt.acc)
                                              : Membership::NotInL;
        if (res.membership == Membership::InE) res.membership = Membership::Undetermined;
        res.monotone = trace_monotone(res.trace);
        return res;
      }
      ModularResult m = eval(lambda);
      if (m.inconclusive()) return undetermined(m);
      if (feasible(m)) {
        hi = lambda;
        at_hi = m;
        break;
      }
      lo = lambda;
      lambda *= 2.0;
    }
  }

  std::optional<ModularResult> at_lo;
  while (hi - lo > opt.tol) {
    double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    ModularResult m = eval(mid);
    if (m.inconclusive()) return undetermined(m);
    if (feasible(m)) {
      hi = mid;
      at_hi = m;
    } else {
      lo = mid;
      at_lo = m;
    }
  }
  // g(mu) = I(mu f) is convex, so its chord over [1/hi, 1/lo] lies above it
  // and the chord's crossing of 1 is still feasible.
  if (at_lo && at_lo->finite() && at_hi.finite() && lo > 0.0 && at_lo->value > at_hi.value) {
    const double mu_hi = 1.0 / hi, mu_lo = 1.0 / lo;
    const double mu = mu_hi + (1.0 - at_hi.value) * (mu_lo - mu_hi) / (at_lo->value - at_hi.value);
    const double lambda = 1.0 / mu;
    if (lambda > lo && lambda < hi) {
      // Convexity already certifies feasibility; only reject a clear miss.
      ModularResult m = eval(lambda);
      if (m.finite() && m.value <= 1.0 + m.err + 1e-12) {
        hi = lambda;
        at_hi = m;
      }
    }
  }
  res.value = hi;
  res.lo = lo;
  res.hi = hi;
  res.modular_at_value = at_hi;
  res.monotone = trace_monotone(res.trace);
  res.membership = opt.probe_membership ? membership_probe(phi, f, opt.lambda_schedule, opt.acc)
                                        : Membership::Undetermined;
  return res;
}

Membership membership_probe(const MOFunction& phi, const PiecewiseFunction& f, const std::vector<double>& schedule,
                            const AccuracySpec& acc) {
  if (f.is_zero()) return Membership::InE;
  std::vector<double> lambdas = schedule;
  std::sort(lambdas.begin(), lambdas.end());
  std::vector<ModularResult::Verdict> verdicts;
  for (double lambda : lambdas) {
    // I(lambda f) is nondecreasing in lambda, so divergence propagates upward.
    if (!verdicts.empty() && verdicts.back() == ModularResult::Verdict::Divergent) {
      verdicts.push_back(ModularResult::Verdict::Divergent);
      continue;
    }
    ModularResult m = modular(phi, f.scaled(lambda), acc);
    if (m.inconclusive()) return Membership::Undetermined;
    verdicts.push_back(m.verdict);
  }
  auto finite_count = std::count(verdicts.begin(), verdicts.end(), ModularResult::Verdict::Finite);
  if (finite_count == static_cast<long>(verdicts.size())) return Membership::InE;
  if (finite_count == 0) return Membership::NotInL;
  // Finite exactly on a prefix of small lambdas witnesses L but not E.
  bool prefix = std::is_partitioned(verdicts.begin(), verdicts.end(),
                                    [](ModularResult::Verdict v) { return v == ModularResult::Verdict::Finite; });
  return prefix ? Membership::InLOnly : Membership::Undetermined;
}

ConvergenceReport norm_modular_convergence_check(const MOFunction& phi, const PiecewiseFunction& f,
                                                 std::span<const PiecewiseFunction> seq,
                                                 const std::vector<double>& lambdas, double tol,
                                                 const NormOptions& opt) {
  ConvergenceReport report;
  report.lambdas = lambdas;
  NormOptions no = opt;
  no.probe_membership = false;
  int n = 0;
  for (const PiecewiseFunction& fn : seq) {
    ++n;
    PiecewiseFunction diff = f - fn;
    ConvergenceRow row;
    row.n = n;
    row.norm = luxemburg_norm(phi, diff, no).value;
    for (double lambda : lambdas) {
      ModularResult m = modular(phi, diff.scaled(lambda), opt.acc);
      row.modulars.push_back(m.finite() ? m.value : (m.divergent() ? kInf : std::numeric_limits<double>::quiet_NaN()));
    }
    report.rows.push_back(std::move(row));
  }
  if (!report.rows.empty()) {
    const ConvergenceRow& last = report.rows.back();
    report.norms_vanish = last.norm <= tol;
    report.modulars_vanish =
        std::all_of(last.modulars.begin(), last.modulars.end(), [&](double v) { return v <= tol; });
    report.violation = report.norms_vanish != report.modulars_vanish;
  }
  return report;
}

}  // namespace molab
