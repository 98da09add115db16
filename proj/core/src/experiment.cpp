#include "molab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <random>

#include "molab/csv.hpp"
#include "molab/error.hpp"

#ifndef MOLAB_VERSION
#define MOLAB_VERSION "unknown"
#endif

namespace molab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Bit-exact uniform draw in [0, 1) independent of the standard library's
// distribution implementations.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }

struct Outcome {
  int status = 0;
  std::string summary;
};

class Run {
 public:
  explicit Run(const ExperimentConfig& cfg) : cfg_(cfg) {}

  void emit(const std::string& file, const CsvTable& t) {
    auto path = cfg_.output_dir / file;
    emit_csv(t, path);
    artifacts_.push_back(path);
  }
  const ExperimentConfig& cfg() const { return cfg_; }
  std::vector<std::filesystem::path>& artifacts() { return artifacts_; }

 private:
  const ExperimentConfig& cfg_;
  std::vector<std::filesystem::path> artifacts_;
};

MOFunction family_or(const ExperimentConfig& cfg, const MOFunction& fallback) {
  return cfg.family ? family_from_json(*cfg.family) : fallback;
}

Outcome density_experiment(Run& run, const MOFunction& phi, const BoxSet& k, const BoxSet& omega, int n_max,
                           double tol, bool convergence_table) {
  const ExperimentConfig& cfg = run.cfg();
  SingularSetOptions so;
  so.acc = cfg.acc;
  so.seed = cfg.seed;
  SingularSetEstimate sing = estimate_singular_set(phi, omega, cfg.res.value_or(1e-2), so);

  ApproximationOptions ao;
  ao.n_max = n_max;
  ao.tol = tol;
  ao.seed = cfg.seed;
  ao.norm.acc = cfg.acc;
  ApproximationTrace tr = approximate_indicator(phi, k, omega, sing, ao);

  CsvTable trace{{"n", "m_n", "dist_n", "vol_shell", "selection_norm", "chi_gap", "containments_ok"}, {}};
  bool containments = true;
  int first_within = 0;
  for (const TraceStep& s : tr.steps) {
    trace.add({std::int64_t{s.n}, std::int64_t{s.m_n}, s.dist.value, s.shell_volume, s.selection_norm, s.chi_gap,
               std::int64_t{s.containments_ok ? 1 : 0}});
    containments = containments && s.containments_ok;
    if (first_within == 0 && s.dist.value <= tol) first_within = s.n;
  }
  run.emit("trace.csv", trace);

  if (convergence_table && !tr.steps.empty()) {
    // Steps sharing W_m carry the same f_n, so each distinct function is
    // evaluated once.
    std::vector<PiecewiseFunction> distinct;
    std::vector<std::size_t> which;
    const BoxSet* last_w = nullptr;
    const BoxSet* last_k = nullptr;
    for (const TraceStep& s : tr.steps) {
      if (!last_w || !(*last_w == s.w_m) || !(*last_k == s.k_n)) {
        distinct.push_back(s.f_n);
        last_w = &s.w_m;
        last_k = &s.k_n;
      }
      which.push_back(distinct.size() - 1);
    }
    NormOptions no;
    no.acc = cfg.acc;
    ConvergenceReport rep = norm_modular_convergence_check(phi, tr.target, distinct, {0.5, 1.0, 2.0, 10.0}, 1e-3, no);
    MeasureConvergenceReport mc = measure_convergence_check(distinct, tr.target, tr.u, 1e-3, 1e-4);
    CsvTable conv{{"n", "norm", "modular_lambda_0.5", "modular_lambda_1", "modular_lambda_2", "modular_lambda_10",
                   "measure_convergence"},
                  {}};
    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
      const ConvergenceRow& row = rep.rows[which[i]];
      conv.add({std::int64_t{tr.steps[i].n}, row.norm, row.modulars[0], row.modulars[1], row.modulars[2],
                row.modulars[3], mc.volumes[which[i]]});
    }
    run.emit("convergence.csv", conv);
  }

  Outcome out;
  const double final_dist = tr.steps.empty() ? std::nan("") : tr.steps.back().dist.value;
  out.status = tr.converged && containments ? 0 : 3;
  out.summary = fmt::format("{}: status={} final_dist={} first_n_within_tol={} steps={} containments_ok={} sing={}",
                            cfg.name, tr.status, format_real(final_dist), first_within, tr.steps.size(), containments,
                            to_string(sing.verdict));
  return out;
}

Outcome phi2_nondensity(Run& run) {
  const ExperimentConfig& cfg = run.cfg();
  MOFunction phi = family_or(cfg, make_phi2(cfg.series_terms));
  BoxSet k = cfg.compact.value_or(BoxSet::interval(0.25, 0.5, true));
  WitnessOptions wo;
  wo.acc = cfg.acc;
  wo.norm.acc = cfg.acc;
  CsvTable t{{"id", "center", "width", "height", "verdict", "ball_lo", "ball_hi", "pole", "min_on_ball",
              "norm_lower_bound", "certificate_valid"},
             {}};
  std::size_t counts[3] = {0, 0, 0};
  for (const BumpCandidate& c : bump_candidates(cfg.candidates, cfg.seed)) {
    NondensityWitness w = witness_nondensity(phi, c.f, k, wo);
    ++counts[static_cast<int>(w.kind)];
    const bool excluded = w.kind == NondensityWitness::Kind::Excluded;
    std::string pole = excluded ? (w.pole.exact ? w.pole.exact->str() : format_real(w.pole.location)) : "";
    t.add({as_int(t.rows.size()), c.center, c.width, c.height, std::string(to_string(w.kind)),
           excluded ? w.ball.lo[0] : std::nan(""), excluded ? w.ball.hi[0] : std::nan(""), pole,
           excluded ? w.min_on_ball : std::nan(""),
           w.kind == NondensityWitness::Kind::DistanceBound ? w.norm_lower_bound : std::nan(""),
           std::int64_t{excluded ? (check_certificate(w.certificate) ? 1 : 0) : 0}});
  }
  run.emit("witness.csv", t);
  Outcome out;
  out.status = counts[2] == 0 ? 0 : 3;
  out.summary = fmt::format("{}: candidates={} excluded={} distance_bound={} none_found={}", cfg.name,
                            cfg.candidates, counts[0], counts[1], counts[2]);
  return out;
}

Outcome doublephase_delta2(Run& run) {
  const ExperimentConfig& cfg = run.cfg();
  const BoxSet half_period = BoxSet::interval(0.0, kPi, false);
  const BoxSet unit = BoxSet::interval(0.0, 1.0, false);
  struct Entry {
    std::string label;
    MOFunction phi;
  };
  std::vector<Entry> entries;
  entries.push_back({"phi1", make_phi1()});
  entries.push_back({"phi2", make_phi2(cfg.series_terms)});
  entries.push_back({"variable_exponent", make_variable_exponent(Descriptor::sine(2.0, 1.0, 1.0, 0.0), half_period)});
  entries.push_back({"double_phase", make_double_phase(Descriptor::constant(2.0), Descriptor::constant(4.0),
                                                       Descriptor::sine(1.0, 1.0, 1.0, 0.0), half_period)});
  CsvTable t{{"family", "C", "clause", "pass", "samples", "worst_excess", "violations"}, {}};
  bool ok = true;
  for (const Entry& e : entries) {
    if (!e.phi.delta2()) {
      t.add({e.label, std::nan(""), std::string("none"), std::int64_t{0}, std::int64_t{0}, std::nan(""), std::string()});
      ok = false;
      continue;
    }
    Delta2Report r = verify_delta2(e.phi, *e.phi.delta2());
    ok = ok && r.pass;
    t.add({e.label, e.phi.delta2()->C, e.phi.delta2()->clause, std::int64_t{r.pass ? 1 : 0}, as_int(r.samples),
           r.worst_excess, std::string()});
  }
  // r is unbounded where a > 0, which breaks both sufficient conditions.
  DoublePhaseVerdict bad = check_double_phase_delta2(Descriptor::constant(2.0), Descriptor::reciprocal(3.0, 1.0, 0.0),
                                                     Descriptor::constant(1.0), unit);
  std::string violations;
  for (const auto& v : bad.violations) violations += (violations.empty() ? "" : "; ") + v;
  t.add({std::string("double_phase_unbounded_r"), std::nan(""), std::string("rejected"),
         std::int64_t{bad.certificate ? 1 : 0}, std::int64_t{0}, std::nan(""), violations});
  ok = ok && !bad.certificate && bad.violations.size() == 2;
  run.emit("delta2.csv", t);
  return {ok ? 0 : 3, fmt::format("{}: all_certificates_verified={} rejection={}", cfg.name, ok, violations)};
}

Outcome singular_dichotomy(Run& run) {
  const ExperimentConfig& cfg = run.cfg();
  const BoxSet window = cfg.window.value_or(BoxSet::interval(-2.0, 2.0, false));
  const double res = cfg.res.value_or(1e-2);
  CsvTable nodes{{"family", "x", "flagged", "evidence"}, {}};
  CsvTable summary{{"family", "flagged", "measure_upper", "verdict", "certificates_valid", "spot_checked",
                    "spot_failures", "inconclusive"},
                   {}};
  std::string line;
  for (const MOFunction& phi : {make_phi1(), make_phi2(cfg.series_terms)}) {
    SingularSetOptions so;
    so.acc = cfg.acc;
    so.seed = cfg.seed;
    SingularSetEstimate e = estimate_singular_set(phi, window, res, so);
    std::vector<const SingularFlag*> by_node(e.nodes.size(), nullptr);
    std::size_t valid = 0;
    for (const SingularFlag& f : e.flagged) {
      by_node[f.node] = &f;
      if (check_certificate(f.certificate)) ++valid;
    }
    for (std::size_t i = 0; i < e.nodes.size(); ++i) {
      if (!e.in_window[i]) continue;
      nodes.add({phi.name(), e.nodes[i][0], std::int64_t{by_node[i] ? 1 : 0},
                 std::string(by_node[i] ? to_string(by_node[i]->evidence) : "")});
    }
    summary.add({phi.name(), as_int(e.flagged.size()), e.measure_upper, std::string(to_string(e.verdict)),
                 as_int(valid), as_int(e.spot_checked), as_int(e.spot_failures), as_int(e.inconclusive)});
    line += fmt::format(" {}: flagged={} measure_upper={} verdict={}", phi.name(), e.flagged.size(),
                        format_real(e.measure_upper), to_string(e.verdict));
  }
  run.emit("singular_nodes.csv", nodes);
  run.emit("singular_summary.csv", summary);
  return {0, cfg.name + ":" + line};
}

std::optional<BoxSet> optional_set(const Json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return boxset_from_json(j[key], std::string("config.") + key);
}

}  // namespace

const char* library_version() { return MOLAB_VERSION; }

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"phi1-density", "phi2-nondensity", "varexp-density",
                                              "doublephase-delta2", "singular-dichotomy"};
  return names;
}

std::vector<BumpCandidate> bump_candidates(int count, std::uint64_t seed) {
  if (count < 1) throw PreconditionError("candidate count must be positive", "candidates");
  std::mt19937_64 rng(seed);
  const double lo = -0.35, span = 1.7, stratum = span / count;
  const double w_min = std::min(0.5, std::max(0.02, 1.05 * stratum));
  std::vector<BumpCandidate> out;
  for (int i = 0; i < count; ++i) {
    BumpCandidate c;
    c.center = lo + stratum * (i + 0.5);
    c.height = 0.3 + 1.2 * unit_draw(rng);
    c.width = w_min + (0.5 - w_min) * unit_draw(rng);
    SmoothTerm t;
    t.coef = c.height;
    t.bumps.push_back(Bump{Box::interval(c.center - 0.5 * c.width, c.center + 0.5 * c.width), Point{0.25 * c.width, 0.0}});
    c.f = PiecewiseFunction::smooth(1, {t});
    out.push_back(std::move(c));
  }
  return out;
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw PreconditionError("config must be an object", "config");
  ExperimentConfig cfg;
  if (!j.contains("name") || !j["name"].is_string()) throw PreconditionError("config.name must be a string", "config.name");
  cfg.name = j["name"].get<std::string>();
  if (std::find(experiment_names().begin(), experiment_names().end(), cfg.name) == experiment_names().end())
    throw PreconditionError(fmt::format("unknown experiment '{}'", cfg.name), "config.name");
  if (j.contains("family")) cfg.family = j["family"];
  cfg.compact = optional_set(j, "compact");
  cfg.omega = optional_set(j, "omega");
  cfg.window = optional_set(j, "window");
  if (j.contains("tol")) cfg.tol = real_from_json(j["tol"], "config.tol");
  if (j.contains("res")) cfg.res = real_from_json(j["res"], "config.res");
  auto int_of = [&](const char* key) {
    if (!j[key].is_number_integer())
      throw PreconditionError(fmt::format("config.{} must be an integer", key), std::string("config.") + key);
    return j[key].get<long long>();
  };
  if (j.contains("n_max")) cfg.n_max = static_cast<int>(int_of("n_max"));
  if (j.contains("candidates")) cfg.candidates = static_cast<int>(int_of("candidates"));
  if (j.contains("terms")) cfg.series_terms = static_cast<int>(int_of("terms"));
  if (j.contains("seed")) cfg.seed = static_cast<std::uint64_t>(int_of("seed"));
  if (j.contains("abs_err")) cfg.acc.abs_err = real_from_json(j["abs_err"], "config.abs_err");
  if (j.contains("budget")) cfg.acc.budget = static_cast<std::size_t>(int_of("budget"));
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw PreconditionError("config.output_dir must be a string", "config.output_dir");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  return cfg;
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json j{{"name", cfg.name},
         {"candidates", cfg.candidates},
         {"terms", cfg.series_terms},
         {"seed", cfg.seed},
         {"abs_err", cfg.acc.abs_err},
         {"budget", cfg.acc.budget},
         {"output_dir", cfg.output_dir.string()}};
  if (cfg.family) j["family"] = *cfg.family;
  if (cfg.compact) j["compact"] = to_json(*cfg.compact);
  if (cfg.omega) j["omega"] = to_json(*cfg.omega);
  if (cfg.window) j["window"] = to_json(*cfg.window);
  if (cfg.tol) j["tol"] = *cfg.tol;
  if (cfg.res) j["res"] = *cfg.res;
  if (cfg.n_max) j["n_max"] = *cfg.n_max;
  return j;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  Run run(cfg);
  Outcome out;
  try {
    if (cfg.name == "phi1-density") {
      MOFunction phi = family_or(cfg, make_phi1());
      out = density_experiment(run, phi, cfg.compact.value_or(BoxSet::interval(1.0, 2.0, true)),
                               cfg.omega.value_or(BoxSet::interval(-10.0, 10.0, false)), cfg.n_max.value_or(1024),
                               cfg.tol.value_or(0.05), true);
    } else if (cfg.name == "varexp-density") {
      const BoxSet omega = cfg.omega.value_or(BoxSet::interval(0.0, kPi, false));
      MOFunction phi = family_or(cfg, make_variable_exponent(Descriptor::sine(2.0, 1.0, 1.0, 0.0), omega));
      out = density_experiment(run, phi, cfg.compact.value_or(BoxSet::interval(1.0, 2.0, true)), omega,
                               cfg.n_max.value_or(32), cfg.tol.value_or(0.05), false);
    } else if (cfg.name == "phi2-nondensity") {
      out = phi2_nondensity(run);
    } else if (cfg.name == "doublephase-delta2") {
      out = doublephase_delta2(run);
    } else if (cfg.name == "singular-dichotomy") {
      out = singular_dichotomy(run);
    } else {
      throw PreconditionError(fmt::format("unknown experiment '{}'", cfg.name), "name");
    }
  } catch (const Error& e) {
    Json err{{"error", e.kind()}, {"message", e.what()}, {"code", e.code()}, {"experiment", cfg.name}};
    if (const auto* pe = dynamic_cast<const PreconditionError*>(&e)) err["field"] = pe->field();
    try {
      write_text_file(cfg.output_dir / "error.json", err.dump(2) + "\n");
    } catch (const IoError&) {
      // The original error is more informative than a failed error record.
    }
    throw;
  }

  ExperimentResult res;
  res.status = out.status;
  res.summary = out.summary;
  res.artifacts = run.artifacts();
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json artifacts = Json::array();
  for (const auto& p : res.artifacts) artifacts.push_back(p.filename().string());
  res.manifest = Json{{"config", config_to_json(cfg)}, {"version", library_version()}, {"wall_time_s", wall},
                      {"status", res.status},          {"summary", res.summary},      {"artifacts", artifacts}};
  auto manifest_path = cfg.output_dir / "manifest.json";
  write_text_file(manifest_path, res.manifest.dump(2) + "\n");
  res.artifacts.push_back(manifest_path);
  return res;
}

}  // namespace molab
