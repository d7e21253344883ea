// ============================================================================
// csd_sim -- scenario-driven Monte Carlo CLI
//
// Subcommands:
//   run    estimate FAP/MDP curves for one scenario, write curve CSV
//   sweep  re-run a scenario across values of one parameter axis
//   tables periods-to-reach grids over (kappa, q', q'') falsification cells
//
// Exit codes: 0 success, 2 configuration error, 3 when the outlier filter
// removed every report in every single trial.
// ============================================================================
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csd/harness.hpp"
#include "csd/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAllRemoved = 3;

struct CommonArgs {
  std::string scenario_path;
  std::optional<int> trials;
  std::optional<int> periods;
  std::optional<std::uint64_t> seed;
  int workers = 0;  // 0 = hardware concurrency
};

void add_common(CLI::App* cmd, CommonArgs& args, bool scenario_required = true) {
  auto* pos = cmd->add_option("scenario", args.scenario_path, "scenario JSON file");
  if (scenario_required) pos->required();
  cmd->add_option("--trials", args.trials, "override trial count");
  cmd->add_option("--periods", args.periods, "override detection-period count");
  cmd->add_option("--seed", args.seed, "override master seed");
  cmd->add_option("--workers", args.workers, "worker threads (0 = auto); results do not depend on this");
}

csd::ScenarioSpec load_with_overrides(const CommonArgs& args) {
  csd::ScenarioSpec spec = csd::load_scenario(args.scenario_path);
  if (args.trials) spec.trials = *args.trials;
  if (args.periods) spec.max_periods = *args.periods;
  if (args.seed) spec.seed = *args.seed;
  spec.validate();
  return spec;
}

bool every_trial_failed(const csd::RateCurve& curve) {
  const auto n = static_cast<std::uint64_t>(curve.trials);
  return curve.h0_failed_trials == n && curve.h1_failed_trials == n;
}

int run_command(const CommonArgs& args, const std::string& scheme_override, const std::string& out_path,
                const std::string& zscore_path) {
  csd::ScenarioSpec spec = load_with_overrides(args);
  if (!scheme_override.empty()) {
    const auto scheme = csd::scheme_from_string(scheme_override);
    if (!scheme) throw csd::ScenarioError("unknown scheme '" + scheme_override + "'");
    spec.scheme = *scheme;
  }

  csd::EstimateOptions options;
  options.workers = args.workers;
  std::ofstream zscore_file;
  if (!zscore_path.empty()) {
    zscore_file.open(zscore_path);
    if (!zscore_file) throw csd::ScenarioError("cannot open '" + zscore_path + "' for writing");
    options.zscore_debug = &zscore_file;
  }

  const csd::RateCurve curve = csd::estimate_rates(spec, options);

  if (out_path.empty()) {
    csd::write_curve_csv(std::cout, curve);
  } else {
    std::ofstream out(out_path);
    if (!out) throw csd::ScenarioError("cannot open '" + out_path + "' for writing");
    csd::write_curve_csv(out, curve);
    const auto& last = curve.points.back();
    std::cout << "scenario '" << spec.name << "' scheme=" << csd::to_string(spec.scheme)
              << " trials=" << spec.trials << " periods=" << spec.max_periods << " -> " << out_path << '\n';
    std::cout << "final period " << last.period << ": fap=" << last.fap << " mdp=" << last.mdp << '\n';
  }
  if (curve.h0_failed_trials + curve.h1_failed_trials > 0) {
    std::cerr << "note: all-reports-removed occurred in " << curve.h0_failed_trials << " H0 and "
              << curve.h1_failed_trials << " H1 trials\n";
  }
  return every_trial_failed(curve) ? kExitAllRemoved : 0;
}

int sweep_command(const CommonArgs& args, const std::string& axis, const std::vector<double>& values,
                  const std::string& out_dir) {
  const csd::ScenarioSpec spec = load_with_overrides(args);
  csd::EstimateOptions options;
  options.workers = args.workers;
  const auto cells = csd::sweep(spec, axis, values, options);

  std::filesystem::path dir(out_dir.empty() ? "." : out_dir);
  std::filesystem::create_directories(dir);
  bool all_failed = !cells.empty();
  for (const auto& cell : cells) {
    std::ostringstream name;
    name << "sweep_" << axis << '_' << cell.value << ".csv";
    const auto path = dir / name.str();
    std::ofstream out(path);
    if (!out) throw csd::ScenarioError("cannot open '" + path.string() + "' for writing");
    csd::write_curve_csv(out, cell.curve);
    const auto& last = cell.curve.points.back();
    std::cout << axis << '=' << cell.value << ": final fap=" << last.fap << " mdp=" << last.mdp << " -> "
              << path.string() << '\n';
    all_failed = all_failed && every_trial_failed(cell.curve);
  }
  return all_failed && !cells.empty() ? kExitAllRemoved : 0;
}

int tables_command(const CommonArgs& args, const std::string& out_path) {
  const csd::ScenarioSpec base = load_with_overrides(args);
  if (base.malicious_mu_sum() <= 0.0) {
    throw csd::ScenarioError("tables: scenario has no malicious nodes to falsify data");
  }
  csd::EstimateOptions options;
  options.workers = args.workers;

  const std::vector<double> kappas = {2.0, 20.0};
  const std::vector<double> q_primes = {0.2, 0.4, 0.8};
  const std::vector<double> q_dprimes = {0.05, 0.1, 0.15};
  const std::vector<double> targets = {0.10, 0.05, 0.01};

  std::ostringstream csv;
  csv << "table,kappa,q_value,target,periods\n";

  const auto run_cell = [&](csd::RateKind kind, double kappa, double qv, std::uint64_t cell_id) {
    csd::ScenarioSpec spec = base;
    for (auto& node : spec.nodes) {
      if (node.role != csd::NodeRole::Malicious) continue;
      node.strategy->kappa = kappa;
      if (kind == csd::RateKind::Fap) {
        node.strategy->q_prime = qv;
      } else {
        node.strategy->q_dprime = qv;
      }
    }
    spec.seed = csd::derive_seed(base.seed, {csd::kSweepDomain, 0x7461626cull, cell_id});
    const csd::RateCurve curve = csd::estimate_rates(spec, options);
    const char* table = kind == csd::RateKind::Fap ? "fap" : "mdp";
    std::cout << table << " table: kappa=" << kappa << ' '
              << (kind == csd::RateKind::Fap ? "q_prime=" : "q_dprime=") << qv;
    for (double target : targets) {
      const auto periods = csd::periods_to_reach(curve, target, kind);
      std::cout << "  " << target << " -> " << (periods ? std::to_string(*periods) : std::string("not_reached"));
      csv << table << ',' << kappa << ',' << qv << ',' << target << ','
          << (periods ? std::to_string(*periods) : std::string("-1")) << '\n';
    }
    std::cout << '\n';
  };

  std::uint64_t cell_id = 0;
  for (double kappa : kappas) {
    for (double qv : q_primes) run_cell(csd::RateKind::Fap, kappa, qv, cell_id++);
  }
  for (double kappa : kappas) {
    for (double qv : q_dprimes) run_cell(csd::RateKind::Mdp, kappa, qv, cell_id++);
  }

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw csd::ScenarioError("cannot open '" + out_path + "' for writing");
    out << csv.str();
    std::cout << "wrote " << out_path << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cooperative statistical detection simulator"};
  app.require_subcommand(1);

  CommonArgs run_args;
  std::string run_scheme;
  std::string run_out;
  std::string run_zscores;
  auto* run_cmd = app.add_subcommand("run", "estimate FAP/MDP curves for one scenario");
  add_common(run_cmd, run_args);
  run_cmd->add_option("--scheme", run_scheme, "csd|lrt_unfiltered|tbs|sbs (overrides the scenario)");
  run_cmd->add_option("--out", run_out, "curve CSV path (default: stdout)");
  run_cmd->add_option("--debug-zscores", run_zscores, "dump per-period z-score tables to CSV (single-threaded)");

  CommonArgs sweep_args;
  std::string sweep_axis;
  std::vector<double> sweep_values;
  std::string sweep_dir;
  auto* sweep_cmd = app.add_subcommand("sweep", "re-run a scenario across one parameter axis");
  add_common(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--axis", sweep_axis, "z_thr|gamma|q_a|kappa|q_prime|q_dprime")->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated axis values")->required()->delimiter(',');
  sweep_cmd->add_option("--out-dir", sweep_dir, "directory for per-value curve CSVs (default: .)");

  CommonArgs tables_args;
  std::string tables_out;
  auto* tables_cmd = app.add_subcommand("tables", "periods-to-reach grids over falsification cells");
  add_common(tables_cmd, tables_args);
  tables_cmd->add_option("--out", tables_out, "grid CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return run_command(run_args, run_scheme, run_out, run_zscores);
    if (sweep_cmd->parsed()) return sweep_command(sweep_args, sweep_axis, sweep_values, sweep_dir);
    if (tables_cmd->parsed()) return tables_command(tables_args, tables_out);
  } catch (const csd::ScenarioError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
