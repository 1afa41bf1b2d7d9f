// lcsync: command-line front end for the synchronization experiments.
//
// Exit codes: 0 ok, 1 configuration error, 2 numerical divergence.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "lcsync/config.hpp"
#include "lcsync/errors.hpp"
#include "lcsync/experiments.hpp"
#include "lcsync/io.hpp"

namespace fs = std::filesystem;
using namespace lcsync;

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 1, kDiverged = 2 };

struct Options {
  std::string config;
  std::string out = "./out";
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void write_json(const fs::path& file, json j) {
  j["generated_at"] = utc_timestamp();
  write_file_atomic(file, j.dump(2) + "\n");
}

template <typename Writer>
void write_csv(const fs::path& file, const json& provenance, Writer&& writer) {
  std::ostringstream out;
  writer(out, provenance.dump());
  write_file_atomic(file, out.str());
}

json metrics_summary(const SyncRunConfig& c, const SyncMetrics& m) {
  json j{{"E", m.E},
         {"initial_spread", m.initial_spread},
         {"final_spread", m.final_spread},
         {"normalized_E", m.initial_spread > 0.0 ? m.E / (m.initial_spread * c.R) : 0.0},
         {"sync_threshold", c.sync_threshold},
         {"observed_synchronized", m.observed_synchronized},
         {"divergence_time", nullptr}};
  if (m.divergence_time) j["divergence_time"] = *m.divergence_time;
  if (!std::isfinite(m.E)) j["E"] = nullptr;
  if (!std::isfinite(j["normalized_E"].get<double>())) j["normalized_E"] = nullptr;
  return j;
}

int cmd_simulate(const Options& opt) {
  const SimulateConfig cfg = parse_simulate_config(read_config(opt.config), opt.seed);
  const json resolved = json{{"command", "simulate"}, {"run", resolved_json(cfg.run)},
                             {"write_trajectory", cfg.write_trajectory}};
  const SyncRunResult r = run_sync_experiment(cfg.run);
  const fs::path out(opt.out);
  fs::create_directories(out);

  write_csv(out / "metrics.csv", resolved, [&](std::ostream& os, const std::string& c) {
    write_metrics_csv(os, r.metrics, c);
  });
  if (cfg.write_trajectory)
    write_csv(out / "trajectory.csv", resolved, [&](std::ostream& os, const std::string& c) {
      write_trajectory_csv(os, r.trajectory, c);
    });
  if (r.spectrum) {
    json spec = spectrum_report_to_json(*r.spectrum);
    spec["config"] = resolved;
    write_json(out / "spectrum.json", spec);
  }
  json summary = metrics_summary(cfg.run, r.metrics);
  if (r.spectrum) {
    summary["H"] = r.spectrum->H;
    summary["predicted_synchronized"] = r.spectrum->predicted_synchronized;
  }
  summary["config"] = resolved;
  write_json(out / "summary.json", summary);

  std::cout << "E = " << format_double(r.metrics.E) << ", initial spread = "
            << format_double(r.metrics.initial_spread)
            << (r.metrics.observed_synchronized ? ", synchronized" : ", not synchronized");
  if (r.spectrum) std::cout << ", H = " << format_double(r.spectrum->H);
  std::cout << "\n";
  if (r.metrics.divergence_time) {
    std::cerr << "diverged at t = " << format_double(*r.metrics.divergence_time) << "\n";
    return kDiverged;
  }
  return kOk;
}

int cmd_spectrum(const Options& opt) {
  const SyncRunConfig cfg = parse_spectrum_config(read_config(opt.config), opt.seed);
  const json resolved = json{{"command", "spectrum"}, {"run", resolved_json(cfg)}};
  const SpectrumReport report = run_spectrum(cfg);
  fs::create_directories(opt.out);
  json j = spectrum_report_to_json(report);
  j["config"] = resolved;
  write_json(fs::path(opt.out) / "spectrum.json", j);
  std::cout << "mu = " << format_double(report.mu) << ", varsigma = " << format_double(report.varsigma)
            << ", H = " << format_double(report.H) << "\n";
  return kOk;
}

int cmd_sweep(const Options& opt) {
  SweepConfig cfg = parse_sweep_config(read_config(opt.config), opt.seed);
  cfg.options.threads = opt.threads;
  json grid = json::array();
  for (double s : cfg.sigma_grid) grid.push_back(s);
  const json resolved = json{{"command", "sweep"},
                             {"run", resolved_json(cfg.run)},
                             {"sigma_grid", grid},
                             {"shared_schedule", cfg.options.shared_schedule},
                             {"realizations", cfg.options.realizations}};
  const SweepResult sweep = sweep_sigma(cfg.run, cfg.sigma_grid, cfg.options);
  fs::create_directories(opt.out);
  write_csv(fs::path(opt.out) / "sweep.csv", resolved, [&](std::ostream& os, const std::string& c) {
    write_sweep_csv(os, sweep, c);
  });
  const auto onset = synchronization_onset(sweep);
  std::cout << sweep.rows.size() << " rows, mu = " << format_double(sweep.mu.mu) << ", onset = "
            << (onset ? format_double(*onset) : std::string("none")) << "\n";
  return kOk;
}

int cmd_consensus(const Options& opt) {
  const ConsensusConfig cfg = parse_consensus_config(read_config(opt.config), opt.seed);
  const ConsensusReport report = consensus_equivalence_check(cfg.schedule, cfg.delta, cfg.t_interval,
                                                             cfg.horizon, cfg.h, cfg.tolerance, cfg.x0);
  json resolved{{"command", "consensus"},
                {"schedule", cfg.schedule_source},
                {"delta", cfg.delta},
                {"T_interval", cfg.t_interval},
                {"horizon", cfg.horizon},
                {"h", cfg.h},
                {"tolerance", cfg.tolerance},
                {"seed", nullptr},
                {"x0", nullptr}};
  if (cfg.seed) resolved["seed"] = *cfg.seed;
  if (cfg.x0) resolved["x0"] = std::vector<double>(cfg.x0->data(), cfg.x0->data() + cfg.x0->size());
  json j = consensus_report_to_json(report);
  j["config"] = resolved;
  fs::create_directories(opt.out);
  write_json(fs::path(opt.out) / "consensus.json", j);
  std::cout << "verdict A (spanning trees) = " << std::boolalpha << report.verdict_a
            << ", verdict B (consensus) = " << report.verdict_b << "\n";
  return kOk;
}

int cmd_graph_check(const Options& opt) {
  const GraphCheckConfig cfg = parse_graph_check_config(read_config(opt.config), opt.seed);
  json j{{"config", {{"command", "graph-check"}}}};
  if (cfg.seed) j["config"]["seed"] = *cfg.seed;

  if (cfg.schedule) {
    const double horizon = cfg.horizon.value_or(cfg.schedule->horizon());
    const CouplingSchedule s = cfg.schedule->periodic() && horizon > cfg.schedule->horizon()
                                   ? cfg.schedule->cyclic_extension(horizon)
                                   : *cfg.schedule;
    j["config"]["schedule"] = cfg.schedule_source;
    j["config"]["delta"] = cfg.delta;
    j["config"]["T_interval"] = cfg.t_interval;
    j["config"]["horizon"] = horizon;
    json windows = json::array();
    bool all = true;
    for (int w = 0;; ++w) {
      const double t1 = s.start() + 0.5 * cfg.t_interval * w;
      const double t2 = t1 + cfg.t_interval;
      if (t2 > horizon + 1e-12) break;
      const IntervalGraph g = interval_graph(s, t1, t2, cfg.delta);
      const SpanningTreeResult tree = has_spanning_tree(g.edges);
      all = all && tree.exists;
      windows.push_back({{"t1", t1},
                         {"t2", t2},
                         {"edges", g.edges.count()},
                         {"spanning_tree", tree.exists},
                         {"root", tree.root ? json(*tree.root + 1) : json(nullptr)}});
    }
    j["windows"] = std::move(windows);
    j["every_window_has_spanning_tree"] = all;
  }
  if (cfg.matrix) {
    const Matrix& u = *cfg.matrix;
    const char* norm = cfg.norm == HajnalNorm::L1 ? "l1" : cfg.norm == HajnalNorm::L2 ? "l2" : "linf";
    json mj{{"m", cfg.matrix_m}, {"n", cfg.matrix_n}, {"norm", norm}};
    mj["hajnal_diameter"] = hajnal_diameter_matrix(u, cfg.matrix_m, cfg.matrix_n, cfg.norm);
    if (cfg.matrix_n == 1) {
      try {
        mj["scrambling_coefficient"] = scrambling_coefficient(u);
      } catch (const std::invalid_argument& e) {
        mj["scrambling_coefficient"] = nullptr;
        mj["scrambling_note"] = e.what();
      }
    }
    j["matrix"] = std::move(mj);
    j["config"]["matrix"] = {{"m", cfg.matrix_m}, {"n", cfg.matrix_n}, {"norm", norm}};
  }
  fs::create_directories(opt.out);
  write_json(fs::path(opt.out) / "graph_check.json", j);
  std::cout << j.dump() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synchronization of linearly coupled networks with time-varying coupling"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON configuration file")->required();
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", seed, "Seed (overrides the config)");
    sub->add_option("--threads", opt.threads, "Worker threads for sweeps")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  };
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Command commands[] = {
      {"simulate", "Integrate the coupled network and report e(t), E and H", cmd_simulate},
      {"spectrum", "Compute mu, varsigma, the Hajnal diameter and Floquet data", cmd_spectrum},
      {"sweep", "Sweep the coupling strength", cmd_sweep},
      {"consensus", "Compare the spanning-tree condition with simulated consensus", cmd_consensus},
      {"graph-check", "Interval graphs, spanning trees and matrix diameters", cmd_graph_check},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    subs.push_back(app.add_subcommand(c.name, c.help));
    add_common(subs.back());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    if (subs[i]->count("--seed") > 0) opt.seed = seed;
    try {
      return commands[i].run(opt);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfigError;
    } catch (const DivergenceError& e) {
      std::cerr << "diverged: " << e.what() << "\n";
      return kDiverged;
    } catch (const RankCollapseError& e) {
      std::cerr << "numerical failure: " << e.what() << "\n";
      return kDiverged;
    } catch (const std::invalid_argument& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfigError;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kConfigError;
    }
  }
  return kConfigError;
}
