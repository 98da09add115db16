#include "molab/singular.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "molab/error.hpp"

namespace molab {

namespace {

// Inscribed box of the ball B(x, r), intersected with the domain.
std::optional<BoxSet> ball_region(const MOFunction& phi, const Point& x, double r) {
  const double h = phi.dim() == 1 ? r : r / std::sqrt(2.0);
  Box b = phi.dim() == 1 ? Box::interval(x[0] - h, x[0] + h) : Box::rect(x[0] - h, x[1] - h, x[0] + h, x[1] + h);
  BoxSet region = set_intersect(BoxSet(phi.dim(), false, {b}), phi.domain());
  if (region.empty()) return std::nullopt;
  return region;
}

struct Probe {
  std::optional<DivergenceCertificate> cert;
  double t = 0.0;
  bool inconclusive = false;
};

Probe probe(const MOFunction& phi, const BoxSet& region, const std::vector<double>& t_values,
            const AccuracySpec& acc) {
  Probe out;
  for (double t : t_values) {
    ModularResult m = modular(phi, PiecewiseFunction::indicator(region, t), region, acc);
    if (m.divergent()) {
      out.cert = m.certificate;
      out.t = t;
      return out;
    }
    if (m.inconclusive()) out.inconclusive = true;
  }
  return out;
}

void check_schedules(const std::vector<double>& radii, const std::vector<double>& t_values) {
  if (radii.empty()) throw PreconditionError("radius schedule must be nonempty", "radii");
  if (t_values.empty()) throw PreconditionError("t schedule must be nonempty", "t_schedule");
  for (double r : radii)
    if (!(r > 0.0)) throw PreconditionError("radii must be positive", "radii");
}

}  // namespace

const char* to_string(Evidence e) {
  switch (e) {
    case Evidence::AnalyticPole:
      return "analytic_pole";
    case Evidence::Growth:
      return "growth";
    case Evidence::DenseInterval:
      return "dense_interval";
  }
  return "?";
}

const char* to_string(MeasureVerdict v) {
  switch (v) {
    case MeasureVerdict::Zero:
      return "zero";
    case MeasureVerdict::Positive:
      return "positive";
    case MeasureVerdict::Undetermined:
      return "undetermined";
  }
  return "?";
}

const char* to_string(LocalIntegrability v) {
  switch (v) {
    case LocalIntegrability::LocallyIntegrable:
      return "locally_integrable";
    case LocalIntegrability::Singular:
      return "singular";
    case LocalIntegrability::Undetermined:
      return "undetermined";
  }
  return "?";
}

SingularSetEstimate estimate_singular_set(const MOFunction& phi, const BoxSet& window, double grid_res,
                                          const SingularSetOptions& opt) {
  if (!(grid_res > 0.0)) throw PreconditionError("grid resolution must be positive", "res");
  std::vector<double> radii = opt.radii, ts = opt.t_values;
  if (radii.empty())
    for (int j = 0; j <= 8; ++j) radii.push_back(grid_res * std::exp2(-j));
  if (ts.empty())
    for (int i = 0; i <= 8; ++i) ts.push_back(std::exp2(i));
  return estimate_singular_set(phi, window, grid_res, radii, ts, opt);
}

SingularSetEstimate estimate_singular_set(const MOFunction& phi, const BoxSet& window, double grid_res,
                                          const std::vector<double>& radii, const std::vector<double>& t_values,
                                          const SingularSetOptions& opt) {
  check_schedules(radii, t_values);
  if (!(grid_res > 0.0)) throw PreconditionError("grid resolution must be positive", "res");
  if (window.dim() != phi.dim()) throw PreconditionError("window dimension mismatch", "window");
  if (window.empty()) throw PreconditionError("window must be nonempty", "window");

  SingularSetEstimate est;
  est.dim = phi.dim();
  est.bounds = window.bounding_box();
  est.grid_res = grid_res;
  std::array<std::size_t, 2> counts{1, 1};
  for (int i = 0; i < est.dim; ++i)
    counts[i] = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(est.bounds.extent(i) / grid_res)));
  est.nx = counts[0] + 1;
  est.ny = est.dim == 2 ? counts[1] + 1 : 1;
  est.cell_volume = 1.0;
  for (int i = 0; i < est.dim; ++i) est.cell_volume *= est.bounds.extent(i) / static_cast<double>(counts[i]);

  const BoxSet closed_window = window.as_closed();
  for (std::size_t j = 0; j < est.ny; ++j) {
    for (std::size_t i = 0; i < est.nx; ++i) {
      Point x{est.bounds.lo[0] + est.bounds.extent(0) * static_cast<double>(i) / static_cast<double>(counts[0]), 0.0};
      if (est.dim == 2)
        x[1] = est.bounds.lo[1] + est.bounds.extent(1) * static_cast<double>(j) / static_cast<double>(counts[1]);
      est.nodes.push_back(x);
      est.in_window.push_back(contains(closed_window, x) ? 1 : 0);
    }
  }
  est.flagged_mask.assign(est.nodes.size(), 0);

  const double r_min = *std::min_element(radii.begin(), radii.end());
  const double r_max = *std::max_element(radii.begin(), radii.end());
  const auto dense = opt.acc.full_series ? phi.dense_singular_interval() : std::nullopt;
  const BoxSet closed_domain = phi.domain().as_closed();

  for (std::size_t k = 0; k < est.nodes.size(); ++k) {
    if (!est.in_window[k]) continue;
    const Point& x = est.nodes[k];
    auto region = ball_region(phi, x, r_min);
    if (!region) continue;
    SingularFlag flag;
    flag.node = k;
    flag.x = x;
    flag.radius = r_min;
    flag.inside_domain = contains(closed_domain, x);
    bool flagged = false;
    if (dense && est.dim == 1) {
      // Any ball meeting the dense interval contains a rational pole.
      double a = std::max(x[0] - r_min, dense->first), b = std::min(x[0] + r_min, dense->second);
      BoxSet meet = set_intersect(*region, BoxSet::interval(dense->first, dense->second, false));
      if (b > a && !meet.empty()) {
        Box m = meet.bounding_box();
        PoleEvidence ev;
        ev.pole = least_index_pole(m.lo[0], m.hi[0]);
        ev.side = Side::Right;
        ev.window = Box::interval(ev.pole.exact->round_down(), m.hi[0]);
        ev.t_lower = t_values.front();
        flag.evidence = Evidence::DenseInterval;
        flag.certificate.kind = DivergenceCertificate::Kind::AnalyticPole;
        flag.certificate.pole = ev;
        flag.t = t_values.front();
        flagged = true;
      }
    }
    if (!flagged) {
      Probe p = probe(phi, *region, t_values, opt.acc);
      if (p.inconclusive && !p.cert) ++est.inconclusive;
      if (p.cert) {
        flag.certificate = *p.cert;
        flag.evidence = p.cert->kind == DivergenceCertificate::Kind::Growth ? Evidence::Growth : Evidence::AnalyticPole;
        flag.t = p.t;
        flagged = true;
        // Divergence on the smallest ball must persist on the largest.
        if (auto big = ball_region(phi, x, r_max)) {
          ModularResult m = modular(phi, PiecewiseFunction::indicator(*big, p.t), *big, opt.acc);
          if (!m.divergent()) ++est.spot_failures;
        }
      }
    }
    if (flagged) {
      est.flagged_mask[k] = 1;
      if (!flag.inside_domain) ++est.flagged_outside_domain;
      est.flagged.push_back(std::move(flag));
    }
  }

  // Metadata flags are re-derived by full quadrature on a random subset.
  if (dense && !est.flagged.empty()) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<std::size_t> pick(0, est.flagged.size() - 1);
    for (int s = 0; s < opt.spot_checks; ++s) {
      const SingularFlag& fl = est.flagged[pick(rng)];
      if (fl.evidence != Evidence::DenseInterval) continue;
      ++est.spot_checked;
      auto region = ball_region(phi, fl.x, r_min);
      ModularResult m = modular(phi, PiecewiseFunction::indicator(*region, fl.t), *region, opt.acc);
      if (!m.divergent() || !check_certificate(*m.certificate)) ++est.spot_failures;
    }
  }

  est.measure_upper = est.cell_volume * static_cast<double>(est.flagged.size());
  if (est.flagged.empty()) {
    est.verdict = est.inconclusive == 0 ? MeasureVerdict::Zero : MeasureVerdict::Undetermined;
    return est;
  }
  bool near_poles = std::all_of(est.flagged.begin(), est.flagged.end(), [&](const SingularFlag& f) {
    if (f.evidence != Evidence::AnalyticPole) return false;
    return std::any_of(phi.poles().begin(), phi.poles().end(), [&](const PoleInfo& p) {
      return std::abs(f.x[0] - p.location) <= r_min * (1.0 + 1e-12) && (est.dim == 1 || f.x[1] == 0.0);
    });
  });
  bool analytic = std::all_of(est.flagged.begin(), est.flagged.end(),
                              [](const SingularFlag& f) { return f.evidence != Evidence::Growth; });
  if (near_poles) {
    est.verdict = est.inconclusive == 0 ? MeasureVerdict::Zero : MeasureVerdict::Undetermined;
  } else if (analytic && est.flagged.size() >= 2) {
    est.verdict = MeasureVerdict::Positive;
  } else {
    est.verdict = MeasureVerdict::Undetermined;
  }
  return est;
}

ClosednessReport closedness_check(const SingularSetEstimate& est) {
  ClosednessReport report;
  auto flagged = [&](long i, long j) {
    if (i < 0 || j < 0 || i >= static_cast<long>(est.nx) || j >= static_cast<long>(est.ny)) return false;
    return est.flagged_mask[static_cast<std::size_t>(j) * est.nx + static_cast<std::size_t>(i)] != 0;
  };
  for (std::size_t j = 0; j < est.ny; ++j) {
    for (std::size_t i = 0; i < est.nx; ++i) {
      auto ii = static_cast<long>(i), jj = static_cast<long>(j);
      bool enclosed = flagged(ii - 1, jj) && flagged(ii + 1, jj);
      if (est.dim == 2) enclosed = enclosed && flagged(ii, jj - 1) && flagged(ii, jj + 1);
      if (!enclosed) continue;
      report.vacuous = false;
      if (!flagged(ii, jj)) report.violations.push_back(est.nodes[j * est.nx + i]);
    }
  }
  return report;
}

LocalIntegrability local_integrability_probe(const MOFunction& phi, const Point& x, double r,
                                             const std::vector<double>& t_values, const AccuracySpec& acc) {
  if (t_values.empty()) throw PreconditionError("t schedule must be nonempty", "t_schedule");
  if (!(r > 0.0)) throw PreconditionError("radius must be positive", "r");
  auto region = ball_region(phi, x, r);
  if (!region) throw PreconditionError("ball does not meet the domain", "x");
  Probe p = probe(phi, *region, t_values, acc);
  if (p.cert) return LocalIntegrability::Singular;
  return p.inconclusive ? LocalIntegrability::Undetermined : LocalIntegrability::LocallyIntegrable;
}

}  // namespace molab
