#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "lcsync/experiments.hpp"
#include "lcsync/spectra.hpp"
#include "lcsync/topology.hpp"

namespace lcsync {

using json = nlohmann::json;

/// {m, bound, breakpoints, pieces, periodic}; breakpoints has one more entry
/// than pieces and pieces are nested row-major matrices.
json schedule_to_json(const CouplingSchedule& schedule);
/// Accepts nested rows or flat row-major arrays for each piece. Errors are
/// ConfigError carrying the offending key under `path`.
CouplingSchedule schedule_from_json(const json& j, const std::string& path = "schedule");

void save_schedule(const std::filesystem::path& file, const CouplingSchedule& schedule);
CouplingSchedule load_schedule(const std::filesystem::path& file);

json spectrum_options_to_json(const SpectrumOptions& options);
json floquet_to_json(const FloquetResult& floquet);
json spectrum_report_to_json(const SpectrumReport& report);
json consensus_report_to_json(const ConsensusReport& report);

/// `t,e` series.
void write_metrics_csv(std::ostream& out, const SyncMetrics& metrics, const std::string& comment = {});
/// `sigma,E,H,mu,varsigma,predicted,observed`.
void write_sweep_csv(std::ostream& out, const SweepResult& sweep, const std::string& comment = {});

/// Shortest round-trip decimal for a double; non-finite values print as
/// `nan`, `inf`, `-inf`.
std::string format_double(double value);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& file, const std::string& contents);

}  // namespace lcsync
