// molab: command-line front end for norms, modulars, singular sets,
// approximation traces, witnesses and named experiments.

#include <CLI11.hpp>
#include <cstdlib>
#include <fmt/format.h>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "molab/csv.hpp"
#include "molab/error.hpp"
#include "molab/experiment.hpp"

namespace {

using namespace molab;

struct Common {
  double abs_err = AccuracySpec{}.abs_err;
  std::size_t budget = AccuracySpec{}.budget;
  std::uint64_t seed = 1;
  std::string out;

  AccuracySpec acc() const {
    if (!(abs_err > 0.0)) throw PreconditionError("--abs-err must be positive", "abs-err");
    if (budget == 0) throw PreconditionError("--budget must be positive", "budget");
    AccuracySpec a;
    a.abs_err = abs_err;
    a.budget = budget;
    return a;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--abs-err", c.abs_err, "Absolute error target for modular integrals");
  app->add_option("--budget", c.budget, "Integrand evaluation budget per modular");
  app->add_option("--seed", c.seed, "Seed for every randomized choice");
  app->add_option("--out", c.out, "Output file (or directory for experiments)");
}

void write_output(const Common& c, const std::string& text) {
  if (c.out.empty())
    std::cout << text;
  else
    write_text_file(c.out, text);
}

void print_json(const Common& c, const Json& j) { write_output(c, j.dump(2) + "\n"); }

void print_error(const char* kind, const std::string& message, const std::string& field, int code) {
  Json j{{"error", kind}, {"message", message}, {"code", code}};
  if (!field.empty()) j["field"] = field;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Musielak-Orlicz modular, norm and density laboratory"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);

  Common common;
  std::string family_file, function_file, region_file, window_file, compact_file, omega_file, candidate_file,
      target_file, config_file, experiment_name, trace_csv;
  double tol = 1e-6, res = 1e-2;
  int n_max = 32;

  auto* norm = app.add_subcommand("norm", "Luxemburg norm of a function");
  norm->add_option("--family", family_file, "Family JSON file")->required();
  norm->add_option("--function", function_file, "Function JSON file")->required();
  norm->add_option("--tol", tol, "Absolute bisection tolerance");
  norm->add_option("--trace-csv", trace_csv, "Write the bisection table (lambda, modular) as CSV");
  add_common(norm, common);

  auto* modular_cmd = app.add_subcommand("modular", "Modular I_Phi(f) with verdict");
  modular_cmd->add_option("--family", family_file, "Family JSON file")->required();
  modular_cmd->add_option("--function", function_file, "Function JSON file")->required();
  modular_cmd->add_option("--region", region_file, "Region BoxSet JSON file (default: whole domain)");
  add_common(modular_cmd, common);

  auto* membership = app.add_subcommand("membership", "Classify f as in_E, in_L_only or not_in_L");
  membership->add_option("--family", family_file, "Family JSON file")->required();
  membership->add_option("--function", function_file, "Function JSON file")->required();
  add_common(membership, common);

  auto* singular = app.add_subcommand("singular-set", "Grid estimate of the singular set");
  singular->add_option("--family", family_file, "Family JSON file")->required();
  singular->add_option("--window", window_file, "Window BoxSet JSON file")->required();
  singular->add_option("--res", res, "Grid resolution");
  add_common(singular, common);

  auto* approximate = app.add_subcommand("approximate", "Smooth approximation trace of an indicator or simple f");
  approximate->add_option("--family", family_file, "Family JSON file")->required();
  auto* compact_opt = approximate->add_option("--compact", compact_file, "Compact BoxSet JSON file");
  auto* fn_opt = approximate->add_option("--function", function_file, "Simple function JSON file");
  compact_opt->excludes(fn_opt);
  approximate->add_option("--omega", omega_file, "Open BoxSet JSON file")->required();
  approximate->add_option("--tol", tol, "Target distance");
  approximate->add_option("--nmax", n_max, "Largest n");
  approximate->add_option("--res", res, "Singular-set grid resolution");
  add_common(approximate, common);

  auto* witness = app.add_subcommand("witness", "Non-density witness against a candidate");
  witness->add_option("--family", family_file, "Family JSON file")->required();
  witness->add_option("--candidate", candidate_file, "Candidate function JSON file")->required();
  witness->add_option("--target", target_file, "Compact BoxSet JSON file")->required();
  add_common(witness, common);

  auto* experiment = app.add_subcommand("experiment", "Run a named experiment");
  auto* cfg_opt = experiment->add_option("--config", config_file, "Experiment config JSON file");
  auto* name_opt = experiment->add_option("--name", experiment_name, "Built-in experiment name")
                       ->check(CLI::IsMember(experiment_names()));
  cfg_opt->excludes(name_opt);
  add_common(experiment, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const AccuracySpec acc = common.acc();
    auto family = [&] { return family_from_json(load_json_file(family_file)); };
    auto function = [&] { return function_from_json(load_json_file(function_file)); };

    if (norm->parsed()) {
      NormOptions opt;
      opt.tol = tol;
      opt.acc = acc;
      NormResult r = luxemburg_norm(family(), function(), opt);
      if (!trace_csv.empty()) {
        CsvTable t{{"lambda", "modular"}, {}};
        for (const NormStep& s : r.trace)
          t.add({s.lambda, s.modular.finite() ? s.modular.value
                                              : (s.modular.divergent() ? std::numeric_limits<double>::infinity()
                                                                       : std::numeric_limits<double>::quiet_NaN())});
        emit_csv(t, trace_csv);
      }
      print_json(common, to_json(r));
      return r.inconclusive ? 3 : 0;
    }
    if (modular_cmd->parsed()) {
      MOFunction phi = family();
      PiecewiseFunction f = function();
      ModularResult m = region_file.empty()
                            ? modular(phi, f, acc)
                            : modular(phi, f, boxset_from_json(load_json_file(region_file), "region"), acc);
      print_json(common, to_json(m));
      return m.inconclusive() ? 3 : 0;
    }
    if (membership->parsed()) {
      Membership m = membership_probe(family(), function(), default_lambda_schedule(), acc);
      print_json(common, Json{{"membership", to_string(m)}});
      return m == Membership::Undetermined ? 3 : 0;
    }
    if (singular->parsed()) {
      SingularSetOptions so;
      so.acc = acc;
      so.seed = common.seed;
      MOFunction phi = family();
      SingularSetEstimate e = estimate_singular_set(phi, boxset_from_json(load_json_file(window_file), "window"), res, so);
      CsvTable t{{"x", "flagged", "evidence_kind"}, {}};
      if (e.dim == 2) t.schema = {"x", "y", "flagged", "evidence_kind"};
      std::vector<const SingularFlag*> by_node(e.nodes.size(), nullptr);
      for (const SingularFlag& f : e.flagged) by_node[f.node] = &f;
      for (std::size_t i = 0; i < e.nodes.size(); ++i) {
        if (!e.in_window[i]) continue;
        std::string ev = by_node[i] ? to_string(by_node[i]->evidence) : "";
        std::int64_t flagged = by_node[i] ? 1 : 0;
        if (e.dim == 2)
          t.add({e.nodes[i][0], e.nodes[i][1], flagged, ev});
        else
          t.add({e.nodes[i][0], flagged, ev});
      }
      write_output(common, to_csv(t));
      std::string summary = fmt::format("measure_upper={} verdict={} flagged={} inconclusive={}\n",
                                        format_real(e.measure_upper), to_string(e.verdict), e.flagged.size(),
                                        e.inconclusive);
      (common.out.empty() ? std::cerr : std::cout) << summary;
      return 0;
    }
    if (approximate->parsed()) {
      if (compact_file.empty() && function_file.empty())
        throw PreconditionError("one of --compact or --function is required", "compact");
      MOFunction phi = family();
      BoxSet omega = boxset_from_json(load_json_file(omega_file), "omega");
      SingularSetOptions so;
      so.acc = acc;
      so.seed = common.seed;
      SingularSetEstimate sing = estimate_singular_set(phi, omega, res, so);
      ApproximationOptions ao;
      ao.n_max = n_max;
      ao.tol = tol;
      ao.seed = common.seed;
      ao.norm.acc = acc;
      ApproximationTrace tr = compact_file.empty()
                                  ? approximate_in_E(phi, function(), omega, sing, ao)
                                  : approximate_indicator(phi, boxset_from_json(load_json_file(compact_file), "compact"),
                                                          omega, sing, ao);
      CsvTable t{{"n", "m_n", "dist_n", "vol_Wm_minus_Kn"}, {}};
      for (const TraceStep& s : tr.steps) t.add({std::int64_t{s.n}, std::int64_t{s.m_n}, s.dist.value, s.shell_volume});
      write_output(common, to_csv(t));
      std::cerr << fmt::format("status={} converged={}\n", tr.status, tr.converged);
      return tr.converged ? 0 : 3;
    }
    if (witness->parsed()) {
      NondensityWitness w = witness_nondensity(family(), function_from_json(load_json_file(candidate_file), "candidate"),
                                               boxset_from_json(load_json_file(target_file), "target"));
      print_json(common, to_json(w));
      return 0;
    }
    if (experiment->parsed()) {
      ExperimentConfig cfg;
      if (!config_file.empty()) {
        cfg = config_from_json(load_json_file(config_file));
      } else if (!experiment_name.empty()) {
        cfg.name = experiment_name;
        cfg.seed = common.seed;
      } else {
        throw PreconditionError("one of --config or --name is required", "config");
      }
      cfg.acc = config_file.empty() ? acc : cfg.acc;
      if (const char* env = std::getenv("MOLAB_OUTPUT_DIR")) cfg.output_dir = env;
      if (!common.out.empty()) cfg.output_dir = common.out;
      ExperimentResult r = run_experiment(cfg);
      std::cout << r.summary << "\n";
      return r.status;
    }
  } catch (const PreconditionError& e) {
    print_error(e.kind(), e.what(), e.field(), e.code());
    return e.code();
  } catch (const Error& e) {
    print_error(e.kind(), e.what(), "", e.code());
    return e.code();
  } catch (const std::exception& e) {
    print_error("internal", e.what(), "", 3);
    return 3;
  }
  return 0;
}
