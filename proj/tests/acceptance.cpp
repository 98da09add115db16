// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "molab/error.hpp"
#include "molab/experiment.hpp"

using namespace molab;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Verdict {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

PiecewiseFunction chi(double a, double b, double v = 1.0) {
  return PiecewiseFunction::indicator(BoxSet::interval(a, b, true), v);
}

double draw(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Random simple function with 1-3 pieces in [lo, hi] whose closures avoid
// every point of `avoid` by at least `margin`.
PiecewiseFunction random_simple(std::mt19937_64& rng, double lo, double hi, const std::vector<double>& avoid,
                                double margin) {
  const int pieces = 1 + static_cast<int>(rng() % 3);
  PiecewiseFunction f(1);
  for (int i = 0; i < pieces;) {
    double a = draw(rng, lo, hi), len = draw(rng, 0.01, 0.3 * (hi - lo));
    double b = std::min(hi, a + len);
    if (!(b > a)) continue;
    bool clear = std::all_of(avoid.begin(), avoid.end(), [&](double s) { return s < a - margin || s > b + margin; });
    if (!clear) continue;
    double v = draw(rng, 0.1, 3.0) * (rng() % 2 ? 1.0 : -1.0);
    f = f + chi(a, b, v);
    ++i;
  }
  return f;
}

bool dist_nonincreasing_after_two(const ApproximationTrace& tr, std::string& where) {
  // Compare certified brackets so bisection width cannot fake an increase.
  for (std::size_t i = 1; i < tr.steps.size(); ++i) {
    const TraceStep& s = tr.steps[i];
    if (s.n <= 2) continue;
    if (s.dist.lo > tr.steps[i - 1].dist.hi) {
      where = fmt::format("dist rises at n={}: {} > {}", s.n, s.dist.value, tr.steps[i - 1].dist.value);
      return false;
    }
  }
  return true;
}

Verdict density_case(const MOFunction& phi, const BoxSet& k, const BoxSet& omega) {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  SingularSetEstimate sing = estimate_singular_set(phi, omega, 1e-2);
  ApproximationTrace tr = approximate_indicator(phi, k, omega, sing);
  v.require(!tr.steps.empty(), "empty trace");
  if (tr.steps.empty()) return v;
  const TraceStep& last = tr.steps.back();
  v.require(last.n <= 32, fmt::format("trace ran to n={}", last.n));
  v.require(last.dist.value <= 0.05, fmt::format("final dist {}", last.dist.value));
  v.require(tr.converged, tr.status);
  std::string where;
  v.require(dist_nonincreasing_after_two(tr, where), where);
  for (const TraceStep& s : tr.steps)
    v.require(s.containments_ok, fmt::format("containment at n={}: {}", s.n, s.containment_note));
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.require(secs <= 60.0, fmt::format("took {:.1f} s", secs));
  v.detail += fmt::format("{}final dist {:.4g} at n={}", v.detail.empty() ? "" : "; ", last.dist.value, last.n);
  return v;
}

Verdict criterion1() {
  Verdict v;
  MOFunction phi1 = make_phi1();
  NormResult a = luxemburg_norm(phi1, chi(1, 2));
  v.require(std::abs(a.value - std::log(2.0)) <= 1e-6, fmt::format("||chi[1,2]|| = {:.12g}", a.value));
  NormResult b = luxemburg_norm(make_orlicz_power(2.0, 1.0, default_example_domain()), chi(0, 4));
  v.require(std::abs(b.value - 2.0) <= 1e-6, fmt::format("||chi[0,4]|| = {:.12g}", b.value));

  std::mt19937_64 rng(2024);
  NormOptions opt;
  opt.probe_membership = false;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    PiecewiseFunction f = random_simple(rng, -9.0, 9.0, {0.0}, 0.05);
    double c = draw(rng, -10.0, 10.0);
    double nf = luxemburg_norm(phi1, f, opt).value, ncf = luxemburg_norm(phi1, f.scaled(c), opt).value;
    worst = std::max(worst, std::abs(ncf - std::abs(c) * nf));
  }
  v.require(worst <= 2e-6, fmt::format("homogeneity error {:.3g}", worst));
  v.detail += fmt::format("{}homogeneity error {:.3g}", v.detail.empty() ? "" : "; ", worst);
  return v;
}

Verdict criterion2() {
  Verdict v;
  const BoxSet window = BoxSet::interval(-2.0, 2.0, false);
  const double res = 1e-2;
  SingularSetEstimate e1 = estimate_singular_set(make_phi1(), window, res);
  v.require(e1.flagged.size() == 1 && std::abs(e1.flagged[0].x[0]) <= res / 2,
            fmt::format("phi1 flagged {} nodes", e1.flagged.size()));
  v.require(e1.measure_upper <= 2e-2, fmt::format("phi1 measure {}", e1.measure_upper));
  v.require(e1.verdict == MeasureVerdict::Zero, fmt::format("phi1 verdict {}", to_string(e1.verdict)));

  SingularSetEstimate e2 = estimate_singular_set(make_phi2(8), window, res);
  std::size_t missed = 0;
  for (std::size_t i = 0; i < e2.nodes.size(); ++i)
    if (e2.nodes[i][0] >= 0.0 && e2.nodes[i][0] <= 1.0 && !e2.flagged_mask[i]) ++missed;
  v.require(missed == 0, fmt::format("phi2 missed {} nodes of [0,1]", missed));
  v.require(e2.measure_upper >= 0.98 && e2.measure_upper <= 1.02, fmt::format("phi2 measure {}", e2.measure_upper));
  v.require(e2.verdict == MeasureVerdict::Positive, fmt::format("phi2 verdict {}", to_string(e2.verdict)));

  std::size_t bad = 0;
  for (const SingularSetEstimate* e : {&e1, &e2})
    for (const SingularFlag& f : e->flagged)
      if (!check_certificate(f.certificate)) ++bad;
  v.require(bad == 0, fmt::format("{} invalid certificates", bad));
  v.detail += fmt::format("{}phi1 measure {:.3g}, phi2 measure {:.4g}", v.detail.empty() ? "" : "; ",
                          e1.measure_upper, e2.measure_upper);
  return v;
}

Verdict criterion3() {
  Verdict a = density_case(make_phi1(), BoxSet::interval(1, 2, true), BoxSet::interval(-10, 10, false));
  const BoxSet half = BoxSet::interval(0.0, kPi, false);
  Verdict b = density_case(make_variable_exponent(Descriptor::sine(2.0, 1.0, 1.0, 0.0), half),
                           BoxSet::interval(1, 2, true), half);
  Verdict v;
  v.ok = a.ok && b.ok;
  v.detail = "phi1: " + a.detail + " | varexp: " + b.detail;
  return v;
}

Verdict criterion4() {
  Verdict v;
  MOFunction phi = make_phi2(8);
  const BoxSet k = BoxSet::interval(0.25, 0.5, true);
  std::size_t excluded = 0, bounded = 0, none = 0;
  for (const BumpCandidate& c : bump_candidates(50, 1)) {
    // Independent check of whether |f| reaches 1/4 inside (0, 1).
    double peak = 0.0;
    for (int i = 1; i < (1 << 16); ++i) peak = std::max(peak, std::abs(c.f(point1(i * 0x1.0p-16))));
    NondensityWitness w = witness_nondensity(phi, c.f, k);
    if (w.kind == NondensityWitness::Kind::NoneFound) ++none;
    if (peak >= 0.25) {
      bool ok = w.kind == NondensityWitness::Kind::Excluded && check_certificate(w.certificate);
      v.require(ok, fmt::format("candidate at {:.4f} not excluded ({})", c.center, to_string(w.kind)));
      excluded += ok;
    } else {
      double kpeak = 0.0;
      for (int i = 0; i <= 4096; ++i) kpeak = std::max(kpeak, std::abs(c.f(point1(0.25 + 0.25 * i / 4096.0))));
      if (kpeak < 0.25) {
        bool ok = w.kind == NondensityWitness::Kind::DistanceBound && w.norm_lower_bound >= 0.25;
        v.require(ok, fmt::format("candidate at {:.4f}: {} bound {}", c.center, to_string(w.kind),
                                  w.norm_lower_bound));
        bounded += ok;
      }
    }
  }
  v.require(none == 0, fmt::format("{} none_found", none));
  v.detail += fmt::format("{}excluded {}, distance_bound {}, none_found {}", v.detail.empty() ? "" : "; ", excluded,
                          bounded, none);
  return v;
}

Verdict criterion5() {
  Verdict v;
  const BoxSet half = BoxSet::interval(0.0, kPi, false);
  auto check = [&](const MOFunction& phi, double expected_c) {
    if (!phi.delta2()) {
      v.require(false, phi.name() + " has no certificate");
      return;
    }
    v.require(std::abs(phi.delta2()->C - expected_c) <= 1e-12,
              fmt::format("{} C = {} (expected {})", phi.name(), phi.delta2()->C, expected_c));
    Delta2Report r = verify_delta2(phi, *phi.delta2());
    v.require(r.pass, fmt::format("{} fails with excess {}", phi.name(), r.worst_excess));
  };
  check(make_phi1(), 2.0);
  check(make_phi2(8), 2.0);
  check(make_variable_exponent(Descriptor::sine(2.0, 1.0, 1.0, 0.0), half), 8.0);

  DoublePhaseVerdict dp = check_double_phase_delta2(Descriptor::constant(2.0), Descriptor::constant(4.0),
                                                    Descriptor::sine(1.0, 1.0, 1.0, 0.0), half);
  v.require(dp.certificate.has_value() && dp.clause == "(i)", "double phase clause (i) not certified");
  if (dp.certificate) {
    MOFunction phi = make_double_phase(Descriptor::constant(2.0), Descriptor::constant(4.0),
                                       Descriptor::sine(1.0, 1.0, 1.0, 0.0), half);
    Delta2Report r = verify_delta2(phi, *dp.certificate);
    v.require(r.pass, fmt::format("double phase fails with excess {}", r.worst_excess));
  }

  DoublePhaseVerdict bad = check_double_phase_delta2(Descriptor::constant(2.0), Descriptor::reciprocal(3.0, 1.0, 0.0),
                                                     Descriptor::constant(1.0), BoxSet::interval(0.0, 1.0, false));
  bool names_both = bad.violations.size() == 2 && bad.violations[0].rfind("(i)", 0) == 0 &&
                    bad.violations[1].rfind("(ii)", 0) == 0;
  v.require(!bad.certificate && names_both, "violating family not rejected with both clauses named");
  if (names_both) v.detail = "rejection: " + bad.violations[0] + "; " + bad.violations[1];
  return v;
}

Verdict criterion6() {
  Verdict v;
  MOFunction phi = make_phi1();
  const BoxSet omega = BoxSet::interval(-10, 10, false);
  SingularSetEstimate sing = estimate_singular_set(phi, omega, 1e-2);
  ApproximationOptions opt;
  opt.n_max = 1024;
  ApproximationTrace tr = approximate_indicator(phi, BoxSet::interval(1, 2, true), omega, sing, opt);
  std::vector<PiecewiseFunction> distinct;
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    const TraceStep& s = tr.steps[i];
    if (i == 0 || !(s.w_m == tr.steps[i - 1].w_m) || !(s.k_n == tr.steps[i - 1].k_n)) distinct.push_back(s.f_n);
  }
  const std::vector<double> lambdas{0.5, 1.0, 2.0, 10.0};
  ConvergenceReport rep = norm_modular_convergence_check(phi, tr.target, distinct, lambdas, 1e-2);
  v.require(rep.rows.size() >= 2, "too few distinct approximants");
  if (rep.rows.size() < 2) return v;
  const ConvergenceRow &first = rep.rows.front(), &last = rep.rows.back();
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    v.require(last.modulars[j] <= 1e-2, fmt::format("I({} (chi - f_n)) ends at {}", lambdas[j], last.modulars[j]));
    v.require(last.modulars[j] < first.modulars[j], fmt::format("I({} (chi - f_n)) did not decrease", lambdas[j]));
  }
  MeasureConvergenceReport mc = measure_convergence_check(distinct, tr.target, tr.u, 1e-3, 1e-4);
  v.require(mc.volumes.back() <= 1e-2 && mc.volumes.back() < mc.volumes.front(),
            fmt::format("measure convergence ends at {}", mc.volumes.back()));
  v.detail += fmt::format("{}{} approximants, final I(10 (chi - f_n)) = {:.3g}, measure {:.3g}",
                          v.detail.empty() ? "" : "; ", distinct.size(), last.modulars.back(), mc.volumes.back());
  return v;
}

Verdict criterion7() {
  Verdict v;
  const BoxSet dom = default_example_domain();
  std::vector<Rational> truncated;
  UnitRationalSequence seq;
  for (int i = 0; i < 8; ++i) truncated.push_back(seq.next());
  std::vector<double> phi2_poles;
  for (const Rational& r : truncated) phi2_poles.push_back(r.value());

  PoleInfo p1, p2;
  p1.location = 5.0;
  p2.location = -3.0;
  p2.coefficient.mantissa = 0.5;
  Descriptor split =
      Descriptor::piecewise({Box::interval(-10.0, 0.0)}, {Descriptor::constant(1.5)}, Descriptor::constant(3.0));
  Descriptor split_r =
      Descriptor::piecewise({Box::interval(-10.0, 0.0)}, {Descriptor::constant(2.5)}, Descriptor::constant(4.0));
  Descriptor split_a =
      Descriptor::piecewise({Box::interval(2.0, 6.0)}, {Descriptor::constant(0.0)}, Descriptor::constant(2.0));

  struct Case {
    MOFunction phi;
    std::vector<double> avoid;
    bool full_series;
  };
  std::vector<Case> cases{
      {make_phi1(), {0.0}, true},
      {make_phi2(8), phi2_poles, false},
      {make_orlicz_power(2.0, 1.0, dom), {}, true},
      {make_orlicz_power(3.5, 0.25, dom), {}, true},
      {make_weighted_linear({p1, p2}, dom), {5.0, -3.0}, true},
      {make_variable_exponent(split, dom), {}, true},
      {make_double_phase(split, split_r, split_a, dom), {}, true},
  };
  std::mt19937_64 rng(7);
  double worst = 0.0;
  int compared = 0;
  for (int i = 0; i < 200; ++i) {
    const Case& c = cases[static_cast<std::size_t>(i) % cases.size()];
    PiecewiseFunction f = random_simple(rng, -9.5, 9.5, c.avoid, 1e-3);
    AccuracySpec acc;
    acc.full_series = c.full_series;
    ModularResult a = modular(c.phi, f, acc);
    ModularResult o = modular_oracle(c.phi, f, c.phi.domain());
    if (!a.finite() || !o.finite()) {
      v.require(false, fmt::format("case {} ({}): adaptive {} oracle {}", i, c.phi.name(), to_string(a.verdict),
                                   to_string(o.verdict)));
      continue;
    }
    const double tol = std::max(1e-7, 1e-6 * std::abs(o.value));
    const double diff = std::abs(a.value - o.value);
    worst = std::max(worst, diff / tol);
    if (diff > tol) v.require(false, fmt::format("case {} ({}): {} vs {}", i, c.phi.name(), a.value, o.value));
    ++compared;
  }
  v.detail += fmt::format("{}{} cases, worst diff/tol {:.3g}", v.detail.empty() ? "" : "; ", compared, worst);
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Verdict criterion8(const fs::path& out) {
  Verdict v;
  ExperimentConfig cfg;
  cfg.name = "phi2-nondensity";
  cfg.seed = 1;
  std::vector<std::vector<fs::path>> artifacts;
  for (const char* run : {"run1", "run2"}) {
    cfg.output_dir = out / run;
    fs::remove_all(cfg.output_dir);
    artifacts.push_back(run_experiment(cfg).artifacts);
  }
  std::size_t csvs = 0;
  for (const fs::path& p : artifacts[0]) {
    if (p.extension() != ".csv") continue;
    ++csvs;
    std::string a = slurp(p), b = slurp(out / "run2" / p.filename());
    v.require(!a.empty() && a == b, p.filename().string() + " differs between runs");
  }
  v.require(csvs > 0, "no CSV artifacts");
  v.detail += fmt::format("{}{} CSV files compared", v.detail.empty() ? "" : "; ", csvs);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "molab-acceptance";
  fs::create_directories(out);

  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "norm closed forms and homogeneity", 5, criterion1},
      {2, "singular set dichotomy", 30, criterion2},
      {3, "smooth approximation traces", 120, criterion3},
      {4, "phi2 non-density witnesses", 30, criterion4},
      {5, "Delta_2 certificates", 10, criterion5},
      {6, "phi1 modular convergence", 20, criterion6},
      {7, "adaptive modular vs oracle", 30, criterion7},
      {8, "reproducible experiment output", 600, [&] { return criterion8(out); }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_s) {
      v.ok = false;
      v.detail += fmt::format("; took {:.1f} s, limit {:.0f} s", secs, c.limit_s);
    }
    fmt::print("[{}] criterion {}: {} ({:.2f} s) {}\n", v.ok ? "PASS" : "FAIL", c.id, c.name, secs, v.detail);
    std::fflush(stdout);
    failures += v.ok ? 0 : 1;
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
