// Command-line front end: scenario ingestion, solver selection, benchmark
// sweeps over the flight period, structured result export and plot-data
// emission.  Exit codes: 0 success, 2 validation failure, 3 solver
// non-convergence, 4 config error.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "uavplan/channel.hpp"
#include "uavplan/poa.hpp"
#include "uavplan/report.hpp"
#include "uavplan/sca.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace uavplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitConfig = 4;

void write_file(const fs::path& path, const std::string& body) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << body;
}

void emit_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump()
            << std::endl;
}

struct RunArtifacts {
  Solution solution;
  json options;
  double wall_ms = 0.0;
};

void write_run_outputs(const fs::path& dir, const ScenarioConfig& cfg,
                       const RunArtifacts& run, std::uint64_t seed) {
  write_file(dir / "summary.json",
             make_run_report(cfg, run.solution, run.options, seed).dump(2) + "\n");
  write_file(dir / "solution.json", solution_to_json(run.solution).dump(2) + "\n");
  write_file(dir / "slots.csv", slot_table_csv(cfg, run.solution));
  if (!run.solution.diagnostics.poa_trace.empty())
    write_file(dir / "trace.csv", poa_trace_csv(run.solution.diagnostics.poa_trace));
  if (!run.solution.diagnostics.bcd_trace.empty())
    write_file(dir / "trace.csv", bcd_trace_csv(run.solution.diagnostics.bcd_trace));
  write_file(dir / "meta.json", json{{"wall_ms", run.wall_ms}}.dump(2) + "\n");
}

// Re-derives the slot grid for a swept period, keeping the slot length.
ScenarioConfig with_period(const ScenarioConfig& base, double period) {
  ScenarioConfig cfg = base;
  cfg.period_T = period;
  cfg.slot_count_N = std::max(1, static_cast<int>(std::lround(period / base.slot_delta)));
  cfg.slot_delta = period / cfg.slot_count_N;
  cfg.validate();
  return cfg;
}

Solution dispatch_solve(const ScenarioConfig& cfg, const std::string& scheme,
                        const BcdOptions& bcd_opts, const PoaOptions& poa_opts) {
  if (scheme == "poa") {
    const Trajectory traj = init_circular(cfg).trajectory;
    return poa_solve(cfg, traj, poa_opts);
  }
  return run_benchmark_scheme(cfg, parse_scheme(scheme), bcd_opts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-UAV uplink/downlink trajectory and communication planner"};
  app.require_subcommand(1);

  std::string scenario_path, solution_path, scheme = "3d_traj_power";
  std::string out_dir = "out";
  double eps = 1e-2, tol = 1e-6, k_db = 3.0;
  int max_iters = 0, samples = 10000, jobs = 2, dim_guard = 16;
  std::uint64_t seed = 12345;
  std::vector<double> t_list;

  auto* solve = app.add_subcommand("solve", "Run one solver on a scenario");
  solve->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  solve->add_option("--scheme", scheme,
                    "3d_traj_power | 2d_traj_power | 3d_traj_no_power | "
                    "2d_traj_no_power | only_power | poa");
  solve->add_option("--eps", eps, "Convergence tolerance");
  solve->add_option("--max-iters", max_iters, "Outer iteration cap");
  solve->add_option("--seed", seed, "Recorded RNG seed");
  solve->add_option("--out-dir", out_dir, "Output directory");
  solve->add_option("--poa-dim-guard", dim_guard, "POA dimension guard");

  auto* sweep = app.add_subcommand("sweep", "Objective vs period for all schemes");
  sweep->add_option("--scenario", scenario_path)->required();
  sweep->add_option("--T-list", t_list, "Periods in seconds")->required()->delimiter(',');
  sweep->add_option("--eps", eps);
  sweep->add_option("--max-iters", max_iters);
  sweep->add_option("--seed", seed);
  sweep->add_option("--out-dir", out_dir);
  sweep->add_option("--jobs", jobs, "Concurrent sweep entries");

  auto* theorem = app.add_subcommand("validate-theorem1",
                                     "Monte-Carlo sandwich around the "
                                     "expected-rate approximation");
  theorem->add_option("--K-db", k_db, "Rician factor in dB");
  theorem->add_option("--samples", samples, "Sample count");
  theorem->add_option("--seed", seed);
  theorem->add_option("--out-dir", out_dir);

  auto* compare = app.add_subcommand("compare-poa-sca",
                                     "Global vs SCA communication design on "
                                     "the circular initial trajectory");
  compare->add_option("--scenario", scenario_path)->required();
  compare->add_option("--eps", eps);
  compare->add_option("--seed", seed);
  compare->add_option("--out-dir", out_dir);
  compare->add_option("--poa-dim-guard", dim_guard);

  auto* check = app.add_subcommand("check", "Validate a solution file");
  check->add_option("--scenario", scenario_path)->required();
  check->add_option("--solution", solution_path, "Solution JSON file")->required();
  check->add_option("--tol", tol, "Constraint tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      const ScenarioConfig cfg = load_scenario_file(scenario_path);
      BcdOptions bcd_opts{.eps = eps};
      if (max_iters > 0) bcd_opts.max_outer = max_iters;
      PoaOptions poa_opts{.eps = eps, .dim_guard = dim_guard};
      if (max_iters > 0) poa_opts.max_iters = max_iters;

      const auto t0 = std::chrono::steady_clock::now();
      RunArtifacts run;
      run.solution = dispatch_solve(cfg, scheme, bcd_opts, poa_opts);
      run.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
      run.options = {{"scheme", scheme}, {"eps", eps}};
      write_run_outputs(fs::path(out_dir), cfg, run, seed);
      std::cout << "objective " << run.solution.objective_value << " bits/s/Hz ("
                << run.solution.diagnostics.solver_id << ")\n";
      return run.solution.diagnostics.converged ? kExitOk : kExitSolver;
    }

    if (sweep->parsed()) {
      const ScenarioConfig base = load_scenario_file(scenario_path);
      BcdOptions bcd_opts{.eps = eps};
      if (max_iters > 0) bcd_opts.max_outer = max_iters;

      struct Entry {
        double period;
        Scheme scheme;
        double objective = 0.0;
        bool converged = false;
      };
      std::vector<Entry> entries;
      for (double period : t_list)
        for (Scheme s : all_schemes()) entries.push_back({period, s});

      const int batch = std::max(1, jobs);
      for (std::size_t begin = 0; begin < entries.size(); begin += batch) {
        std::vector<std::future<void>> futures;
        const std::size_t end = std::min(entries.size(), begin + batch);
        for (std::size_t i = begin; i < end; ++i)
          futures.push_back(std::async(std::launch::async, [&, i] {
            const ScenarioConfig cfg = with_period(base, entries[i].period);
            const auto t0 = std::chrono::steady_clock::now();
            RunArtifacts run;
            run.solution = run_benchmark_scheme(cfg, entries[i].scheme, bcd_opts);
            run.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
            run.options = {{"scheme", scheme_name(entries[i].scheme)},
                           {"eps", eps},
                           {"T", entries[i].period}};
            // Each job owns its own output directory.
            std::ostringstream leaf;
            leaf << "T" << entries[i].period << "/" << scheme_name(entries[i].scheme);
            write_run_outputs(fs::path(out_dir) / leaf.str(), cfg, run, seed);
            entries[i].objective = run.solution.objective_value;
            entries[i].converged = run.solution.diagnostics.converged;
          }));
        for (auto& f : futures) f.get();
      }

      std::ostringstream csv;
      csv << "T";
      for (Scheme s : all_schemes()) csv << ',' << scheme_name(s);
      csv << '\n';
      json table = json::array();
      bool all_converged = true;
      std::size_t idx = 0;
      for (double period : t_list) {
        csv << period;
        json row{{"T", period}};
        for (Scheme s : all_schemes()) {
          const Entry& e = entries[idx++];
          csv << ',' << e.objective;
          row[scheme_name(s)] = e.objective;
          all_converged = all_converged && e.converged;
        }
        csv << '\n';
        table.push_back(std::move(row));
      }
      write_file(fs::path(out_dir) / "sweep.csv", csv.str());
      write_file(fs::path(out_dir) / "sweep.json",
                 json{{"scenario_digest", scenario_digest(base)},
                      {"eps", eps},
                      {"rows", table}}
                         .dump(2) +
                     "\n");
      std::cout << csv.str();
      return all_converged ? kExitOk : kExitSolver;
    }

    if (theorem->parsed()) {
      if (samples < 1) throw ConfigError("--samples must be >= 1");
      const double k_linear = std::pow(10.0, k_db / 10.0);
      const double noise = 1e-14;
      const double snr_scale = 1e3;  // 30 dB mean SINR operating point
      std::vector<double> x = sample_rician_power(k_linear, seed, samples);
      for (double& v : x) v *= snr_scale * noise;
      const std::vector<double> y(x.size(), noise);
      const SandwichReport rep = theorem1_sandwich(x, y);

      // approx equals upper analytically when y is constant; allow
      // accumulation-order noise in the comparison.
      const bool sandwich_ok = rep.lower <= rep.approx + 1e-12 &&
                               rep.approx <= rep.upper + 1e-12;
      const bool empirical_ok =
          rep.empirical >= rep.lower - 3.0 * rep.empirical_stderr &&
          rep.empirical <= rep.upper + 3.0 * rep.empirical_stderr;
      const json out{{"K_db", k_db},
                     {"K_linear", k_linear},
                     {"samples", samples},
                     {"seed", seed},
                     {"rng", "mt19937_64+box-muller"},
                     {"lower", rep.lower},
                     {"approx", rep.approx},
                     {"upper", rep.upper},
                     {"empirical", rep.empirical},
                     {"empirical_stderr", rep.empirical_stderr},
                     {"sandwich_holds", sandwich_ok},
                     {"empirical_within_bounds", empirical_ok}};
      write_file(fs::path(out_dir) / "theorem1.json", out.dump(2) + "\n");
      std::cout << out.dump(2) << std::endl;
      return sandwich_ok && empirical_ok ? kExitOk : kExitValidation;
    }

    if (compare->parsed()) {
      const ScenarioConfig cfg = load_scenario_file(scenario_path);
      const Trajectory traj = init_circular(cfg).trajectory;
      PoaOptions poa_opts{.eps = eps, .dim_guard = dim_guard};
      const Solution global = poa_solve(cfg, traj, poa_opts);
      const Solution local = solve_comm_design(cfg, traj, BcdOptions{.eps = eps});

      const json out{
          {"scenario_digest", scenario_digest(cfg)},
          {"poa_objective", global.objective_value},
          {"poa_certified", global.diagnostics.certified},
          {"poa_gap", global.diagnostics.gap},
          {"sca_objective", local.objective_value},
          {"gap_abs", global.objective_value - local.objective_value},
          {"gap_rel", global.objective_value > 0.0
                          ? (global.objective_value - local.objective_value) /
                                global.objective_value
                          : 0.0}};
      write_file(fs::path(out_dir) / "compare.json", out.dump(2) + "\n");
      std::cout << out.dump(2) << std::endl;
      return kExitOk;
    }

    if (check->parsed()) {
      const ScenarioConfig cfg = load_scenario_file(scenario_path);
      const Solution sol = load_solution_file(solution_path);
      std::vector<ConstraintViolation> violations = validate_solution(cfg, sol, tol);

      // The stored objective must reproduce under re-evaluation.
      const RateBreakdown rates =
          evaluate_objective(cfg, sol.trajectory, sol.schedule, sol.power);
      const double mismatch = std::abs(rates.objective - sol.objective_value);
      if (mismatch > 1e-9 * std::max(1.0, std::abs(rates.objective)))
        violations.push_back({"objective_mismatch", 0, mismatch});

      if (violations.empty()) {
        std::cout << "OK: solution satisfies all constraints within " << tol << "\n";
        return kExitOk;
      }
      json list = json::array();
      for (const auto& v : violations)
        list.push_back({{"constraint", v.constraint},
                        {"slot", v.slot},
                        {"magnitude", v.magnitude}});
      std::cout << json{{"violations", list}}.dump(2) << std::endl;
      return kExitValidation;
    }
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return kExitConfig;
  } catch (const DimensionError& e) {
    emit_error("dimension", e.what());
    return kExitConfig;
  } catch (const RecoveryError& e) {
    emit_error("recovery", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    emit_error("solver", e.what());
    return kExitSolver;
  }
  return kExitConfig;
}
