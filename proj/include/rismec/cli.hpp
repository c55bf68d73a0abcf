// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rismec/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace rismec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInfeasible = 2;

/// Everything a command needs; also what the manifest records.
struct ExperimentSpec {
  std::string command;
  std::string scenario_path;
  std::string seeds = "10";  // a count n (seeds 1..n) or a comma list
  std::string out = "results";
  std::vector<std::string> overrides;
  std::string alpha_grid, n_grid, pmax_grid, distance_grid;
  std::string baseline = "optimized";
  int jobs = 1;
  int J_max = 10;
};

inline std::vector<double> parse_grid(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(item, what));
  }
  if (out.empty()) throw ConfigError(std::string(what) + " is empty");
  return out;
}

inline std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  if (text.find(',') == std::string::npos) {
    long long n = parse_int(text, "--seeds");
    if (n < 1) throw ConfigError("--seeds must be a positive count or a list");
    for (long long s = 1; s <= n; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
    return seeds;
  }
  for (double v : parse_grid(text, "--seeds")) {
    if (v < 0 || v != std::floor(v)) throw ConfigError("--seeds entries must be non-negative integers");
    seeds.push_back(static_cast<std::uint64_t>(v));
  }
  return seeds;
}

inline Scenario load_scenario(const ExperimentSpec& e) {
  Scenario sc = e.scenario_path.empty() ? Scenario::defaults() : Scenario::from_file(e.scenario_path);
  KeyValues kv;
  for (const auto& o : e.overrides) {
    auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
    kv[trim(o.substr(0, eq))] = trim(o.substr(eq + 1));
  }
  return kv.empty() ? sc : sc.with_overrides(kv);
}

// ---------------------------------------------------------------------------
// output
// ---------------------------------------------------------------------------

class Csv {
 public:
  Csv(const std::filesystem::path& p, const std::vector<std::string>& header) : out_(p) {
    if (!out_) throw ConfigError("cannot write '" + p.string() + "'");
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

inline std::string num(double x) { return fmt_double(x); }
inline std::string num(int x) { return std::to_string(x); }
inline std::string num(std::uint64_t x) { return std::to_string(x); }

inline void write_front(const std::filesystem::path& p, const RunResult& r) {
  Csv csv(p, {"alpha", "beta", "chi", "R_sum_bits", "E_total_J", "EE_bits_per_J", "feasible"});
  for (const auto& pt : r.front)
    csv.row({num(pt.alpha), num(pt.beta), num(pt.chi), num(pt.metrics.R_sum),
             num(pt.metrics.E_total), num(pt.metrics.EE), pt.feasible ? "1" : "0"});
}

inline void write_aggregate(const std::filesystem::path& p, const Aggregate& a) {
  Csv csv(p, {"alpha", "n", "EE_mean", "EE_std", "R_sum_mean", "R_sum_std", "E_total_mean",
              "E_total_std"});
  for (const auto& r : a.rows)
    csv.row({num(r.alpha), num(r.EE.n), num(r.EE.mean), num(r.EE.stddev), num(r.R_sum.mean),
             num(r.R_sum.stddev), num(r.E_total.mean), num(r.E_total.stddev)});
}

inline void write_manifest(const std::filesystem::path& dir, const ExperimentSpec& e,
                           const Scenario& sc, const std::vector<std::uint64_t>& seeds,
                           const std::map<std::string, std::string>& extra = {}) {
  std::ofstream m(dir / "manifest.cfg");
  if (!m) throw ConfigError("cannot write manifest in '" + dir.string() + "'");
  m << "# run manifest; the scenario.* keys reproduce the scenario exactly\n";
  m << "command = " << e.command << "\n";
  m << "scenario_hash = " << hex64(sc.hash()) << "\n";
  m << "seeds = [";
  for (std::size_t i = 0; i < seeds.size(); ++i) m << (i ? "," : "") << seeds[i];
  m << "]\n";
  m << "baseline = " << e.baseline << "\n";
  m << "J_max = " << e.J_max << "\n";
  m << "energy_reference = minimum\n";
  for (const auto& [k, v] : extra) m << k << " = " << v << "\n";
  for (const auto& [k, v] : sc.to_key_values()) m << "scenario." << k << " = " << v << "\n";
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

struct Context {
  ExperimentSpec spec;
  Scenario sc;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path dir;
  PipelineConfig cfg;
};

inline Context make_context(const ExperimentSpec& e) {
  Context c;
  c.spec = e;
  c.sc = load_scenario(e);
  c.seeds = parse_seeds(e.seeds);
  if (e.jobs < 1) throw ConfigError("--jobs must be >= 1");
  if (e.J_max < 0) throw ConfigError("--j-max must be >= 0");
  c.cfg.J_max = e.J_max;
  if (!e.alpha_grid.empty()) {
    c.cfg.alpha_grid = parse_grid(e.alpha_grid, "--alpha-grid");
    for (double a : c.cfg.alpha_grid)
      if (a < 0 || a > 1) throw ConfigError("--alpha-grid values must lie in [0, 1]");
  }
  c.dir = e.out;
  std::filesystem::create_directories(c.dir);
  return c;
}

inline int feasible_or_exit(const std::vector<RunResult>& runs) {
  for (const auto& r : runs)
    if (r.feasible) return kExitOk;
  return kExitInfeasible;
}

inline void report_infeasible(const std::vector<RunResult>& runs) {
  for (const auto& r : runs)
    if (!r.feasible)
      std::cerr << "seed " << r.seed << " (" << r.tag << "): infeasible at " << r.failed_step
                << ": " << r.message << "\n";
}

/// run / sweep-alpha / pareto: one variant over the seeds.
inline int cmd_runs(const Context& c, bool fronts_only) {
  const RunKind kind = parse_run_kind(c.spec.baseline);
  auto mc = monte_carlo(c.sc, c.seeds, kind, c.cfg, c.spec.jobs);
  for (const auto& r : mc.runs) {
    std::string stem = (fronts_only ? "pareto_" : "run_") + std::string(r.tag) + "_seed" +
                       std::to_string(r.seed) + ".csv";
    write_front(c.dir / stem, r);
  }
  if (!fronts_only) write_aggregate(c.dir / "aggregate.csv", mc.table);
  {
    Csv s(c.dir / "runs.csv", {"seed", "kind", "feasible", "EE_peak", "alpha_peak", "R_max",
                               "E_min", "ao_rounds", "rank_ratio"});
    for (const auto& r : mc.runs)
      s.row({num(r.seed), r.tag, r.feasible ? "1" : "0", num(r.EE_peak), num(r.alpha_peak),
             num(r.utopia.R_max), num(r.utopia.E_min), num(static_cast<int>(r.trace.size()) - 1),
             num(r.rank_ratio)});
  }
  write_manifest(c.dir, c.spec, c.sc, c.seeds);
  report_infeasible(mc.runs);
  std::cout << "feasible runs: " << mc.table.feasible << "/" << mc.table.runs
            << "  mean peak EE: " << mc.table.EE_peak.mean << " bits/J\n";
  return feasible_or_exit(mc.runs);
}

/// Parameter sweeps: one scenario per grid value, peak EE over seeds.
inline int cmd_sweep(const Context& c, const std::string& param, const std::vector<double>& grid) {
  const RunKind kind = parse_run_kind(c.spec.baseline);
  Csv csv(c.dir / "sweep.csv", {"value", "kind", "n_feasible", "EE_peak_mean", "EE_peak_std",
                                "EE_peak_stderr", "R_max_mean", "E_min_mean"});
  bool any = false;
  for (double v : grid) {
    Scenario sc = c.sc;
    if (param == "N") {
      if (v < 0 || v != std::floor(v)) throw ConfigError("--n-grid values must be integers >= 0");
      sc = sc.with("N", std::to_string(static_cast<int>(v)));
    } else if (param == "P_max") {
      sc = sc.with("P_max", num(v));
    } else {
      if (c.sc.ris_pos.size() != 2) throw ConfigError("sweep-distance needs ris_pos");
      sc = sc.with("ris_pos", "[" + num(v) + "," + num(c.sc.ris_pos[1]) + "]");
    }
    auto mc = monte_carlo(sc, c.seeds, kind, c.cfg, c.spec.jobs);
    std::vector<double> R, E;
    for (const auto& r : mc.runs)
      if (r.feasible) {
        R.push_back(r.utopia.R_max);
        E.push_back(r.utopia.E_min);
      }
    any = any || mc.table.feasible > 0;
    const Stat& s = mc.table.EE_peak;
    csv.row({num(v), to_string(kind), num(s.n), num(s.mean), num(s.stddev), num(s.sem()),
             num(summarize(R).mean), num(summarize(E).mean)});
    std::cout << param << "=" << v << "  feasible " << s.n << "/" << mc.table.runs
              << "  mean peak EE " << s.mean << "\n";
  }
  write_manifest(c.dir, c.spec, c.sc, c.seeds, {{"sweep_parameter", param}});
  return any ? kExitOk : kExitInfeasible;
}

inline int cmd_baselines(const Context& c) {
  std::vector<RunKind> kinds{RunKind::Optimized,   RunKind::RandomPhase,  RunKind::NoRis,
                             RunKind::BcOnly,      RunKind::BcLocal,      RunKind::NoRisBcOnly,
                             RunKind::NoRisBcLocal};
  std::vector<MonteCarlo> all;
  for (RunKind k : kinds) all.push_back(monte_carlo(c.sc, c.seeds, k, c.cfg, c.spec.jobs));
  // paired comparison: keep the seeds every variant solved
  std::vector<char> keep(c.seeds.size(), 1);
  for (const auto& mc : all)
    for (std::size_t i = 0; i < mc.runs.size(); ++i) keep[i] = keep[i] && mc.runs[i].feasible;
  Csv csv(c.dir / "baselines.csv",
          {"kind", "n_paired", "EE_peak_mean", "EE_peak_std", "EE_peak_stderr"});
  for (std::size_t j = 0; j < kinds.size(); ++j) {
    std::vector<double> ee;
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (keep[i]) ee.push_back(all[j].runs[i].EE_peak);
    Stat s = summarize(ee);
    csv.row({to_string(kinds[j]), num(s.n), num(s.mean), num(s.stddev), num(s.sem())});
    std::cout << to_string(kinds[j]) << ": mean peak EE " << s.mean << " (n=" << s.n << ")\n";
  }
  write_manifest(c.dir, c.spec, c.sc, c.seeds, {{"pairing", "seeds feasible for every kind"}});
  int paired = 0;
  for (char k : keep) paired += k;
  return paired > 0 ? kExitOk : kExitInfeasible;
}

inline int cmd_convergence(const Context& c) {
  PipelineConfig cfg = c.cfg;
  cfg.sweep = false;
  auto runs = parallel_map<RunResult>(static_cast<int>(c.seeds.size()), c.spec.jobs, [&](int i) {
    return run_seed(c.sc, c.seeds[static_cast<std::size_t>(i)], RunKind::Optimized, cfg);
  });
  Csv csv(c.dir / "convergence.csv", {"seed", "iteration", "R_sum_bits"});
  for (const auto& r : runs)
    for (const auto& row : r.trace) csv.row({num(r.seed), num(row.iteration), num(row.R_sum)});
  write_manifest(c.dir, c.spec, c.sc, c.seeds);
  report_infeasible(runs);
  return feasible_or_exit(runs);
}

inline int dispatch(const ExperimentSpec& e) {
  Context c = make_context(e);
  if (e.command == "run" || e.command == "sweep-alpha") return cmd_runs(c, false);
  if (e.command == "pareto") return cmd_runs(c, true);
  if (e.command == "baselines") return cmd_baselines(c);
  if (e.command == "convergence") return cmd_convergence(c);
  if (e.command == "sweep-n")
    return cmd_sweep(c, "N", parse_grid(e.n_grid.empty() ? "10,20,30,40" : e.n_grid, "--n-grid"));
  if (e.command == "sweep-power")
    return cmd_sweep(c, "P_max",
                     parse_grid(e.pmax_grid.empty() ? "0.2,0.4,0.6,0.8,1.0" : e.pmax_grid,
                                "--pmax-grid"));
  if (e.command == "sweep-distance")
    return cmd_sweep(c, "ris_x",
                     parse_grid(e.distance_grid.empty() ? "5,15,30,45,55" : e.distance_grid,
                                "--distance-grid"));
  throw ConfigError("unknown command '" + e.command + "'");
}

/// Full command line entry point; returns the process exit code.
inline int main(int argc, char** argv) {
  CLI::App app{"Energy-efficient resource allocation for RIS-assisted wireless-powered MEC"};
  app.require_subcommand(1);
  ExperimentSpec e;
  const std::vector<std::pair<const char*, const char*>> commands{
      {"run", "full algorithm over seeds: AO, utopia, Pareto sweep"},
      {"sweep-alpha", "Pareto sweep over a custom --alpha-grid"},
      {"sweep-n", "peak EE versus the number of reflecting elements"},
      {"sweep-distance", "peak EE versus the reflector x coordinate"},
      {"sweep-power", "peak EE versus the beacon power"},
      {"baselines", "all variants on paired seeds"},
      {"pareto", "Pareto fronts only"},
      {"convergence", "AO traces"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--scenario", e.scenario_path, "scenario file (key = value)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seeds", e.seeds, "seed count n (1..n) or comma list");
    sub->add_option("--out", e.out, "output directory");
    sub->add_option("--set", e.overrides, "scenario override key=value (repeatable)");
    sub->add_option("--alpha-grid", e.alpha_grid, "comma list of alpha weights");
    sub->add_option("--n-grid", e.n_grid, "comma list of element counts");
    sub->add_option("--pmax-grid", e.pmax_grid, "comma list of beacon powers (W)");
    sub->add_option("--distance-grid", e.distance_grid, "comma list of reflector x positions (m)");
    sub->add_option("--baseline", e.baseline,
                    "optimized|bc_only|bc_local|no_ris|no_ris_bc_only|no_ris_bc_local|random_phase");
    sub->add_option("--jobs", e.jobs, "worker threads");
    sub->add_option("--j-max", e.J_max, "outer AO rounds");
    sub->callback([&e, name = std::string(name)] { e.command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    std::cerr << app.help();
    return kExitConfig;
  }
  try {
    return dispatch(e);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const InfeasibleError& err) {
    std::cerr << "infeasible: " << err.what() << "\n";
    return kExitInfeasible;
  } catch (const std::filesystem::filesystem_error& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace rismec::cli
