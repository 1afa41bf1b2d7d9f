#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lcsync/experiments.hpp"
#include "lcsync/io.hpp"

namespace lcsync {

/// Key-checked view of one JSON object. Every key read is recorded;
/// `finish()` rejects whatever was not read.
class ConfigSection {
 public:
  ConfigSection(const json& j, std::string path);

  bool has(const std::string& key) const;
  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  long integer(const std::string& key, std::optional<long> fallback = std::nullopt) const;
  std::uint64_t unsigned64(const std::string& key) const;
  bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt) const;
  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) const;
  std::vector<double> numbers(const std::string& key) const;
  const json& raw(const std::string& key) const;
  ConfigSection child(const std::string& key) const;
  std::string key_path(const std::string& key) const;
  const std::string& path() const noexcept { return path_; }

  void finish() const;

 private:
  const json* j_;
  std::string path_;
  mutable std::set<std::string> used_;
};

struct SimulateConfig {
  SyncRunConfig run;
  bool write_trajectory = false;
};

struct SweepConfig {
  SyncRunConfig run;
  std::vector<double> sigma_grid;
  SweepOptions options;
};

struct ConsensusConfig {
  CouplingSchedule schedule;
  double delta = 0.5;
  double t_interval = 1.0;
  double horizon = 100.0;
  double h = 0.01;
  double tolerance = 1e-6;
  std::optional<Vector> x0;
  std::optional<std::uint64_t> seed;
  json schedule_source;
};

struct GraphCheckConfig {
  std::optional<CouplingSchedule> schedule;
  json schedule_source;
  double delta = 0.5;
  double t_interval = 1.0;
  std::optional<double> horizon;
  std::optional<Matrix> matrix;
  int matrix_m = 0;
  int matrix_n = 1;
  HajnalNorm norm = HajnalNorm::L1;
  std::optional<std::uint64_t> seed;
};

/// Parses a schedule section. Types: blinking {m, k, p, tau},
/// explicit {m, bound, breakpoints, pieces, periodic}, file {path},
/// complete {m, weight, horizon}, ring {m, k, horizon},
/// split {sizes, horizon}, star_alternation {m, duration}.
/// Generated schedules default to `default_horizon`; blinking needs `seed`.
ScheduleSpec parse_schedule(const ConfigSection& section, double default_horizon,
                            std::optional<std::uint64_t> seed);

/// Shared by simulate, spectrum and sweep. `extra_keys` are left for the caller.
SyncRunConfig parse_sync_run(const ConfigSection& root, std::optional<std::uint64_t> seed_override,
                             bool sigma_required);

SimulateConfig parse_simulate_config(const json& j, std::optional<std::uint64_t> seed_override);
SyncRunConfig parse_spectrum_config(const json& j, std::optional<std::uint64_t> seed_override);
SweepConfig parse_sweep_config(const json& j, std::optional<std::uint64_t> seed_override);
ConsensusConfig parse_consensus_config(const json& j, std::optional<std::uint64_t> seed_override);
GraphCheckConfig parse_graph_check_config(const json& j, std::optional<std::uint64_t> seed_override);

/// Fully resolved configuration, defaults filled in.
json resolved_json(const SyncRunConfig& config);

/// Parses JSON text; malformed input becomes a ConfigError.
json parse_config_text(const std::string& text);

}  // namespace lcsync
