#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lcsync/dynsys.hpp"
#include "lcsync/flow.hpp"
#include "lcsync/spectra.hpp"
#include "lcsync/topology.hpp"

namespace lcsync {

struct FieldSpec {
  std::string kind = "rossler";  ///< "rossler" or "zero"
  RosslerParams rossler;
  int n = 1;  ///< dimension of the zero field
};

VectorField make_field(const FieldSpec& spec);

/// Either a blinking generator (its seed is derived from the run seed) or
/// an explicit schedule.
struct ScheduleSpec {
  std::optional<BlinkingParams> blinking;
  std::optional<CouplingSchedule> schedule;

  int nodes() const;
};

struct SyncRunConfig {
  FieldSpec field;
  ScheduleSpec schedule;
  double sigma = 0.0;
  double initial_lo = 0.0;
  double initial_hi = 1.0;
  double horizon = 200.0;
  double T = 190.0;
  double R = 10.0;
  double h = 0.01;
  /// Observed synchronization: E < sync_threshold * initial_spread * R.
  double sync_threshold = 1e-3;
  std::uint64_t seed = 0;
  bool compute_spectrum = true;
  SpectrumOptions spectrum;

  /// Throws std::invalid_argument on the first inconsistent parameter.
  void validate() const;
};

struct SyncMetrics {
  std::vector<double> times;
  std::vector<double> e_series;
  double E = 0.0;
  double initial_spread = 0.0;
  double final_spread = 0.0;
  bool observed_synchronized = false;
  std::optional<double> divergence_time;
};

struct SyncRunResult {
  SyncMetrics metrics;
  std::optional<SpectrumReport> spectrum;
  Trajectory trajectory;
};

/// e(t_k) = max_{i<j} ||x_i(t_k) - x_j(t_k)||_2 for a trajectory of m blocks of n.
std::vector<double> sync_error_series(const Trajectory& trajectory, int m, int n);

/// Integral of the piecewise-linear interpolant of e over [T, T + R]
/// (the trapezoid rule when both ends are grid points).
double sync_energy(const std::vector<double>& e_series, const std::vector<double>& times, double T,
                   double R);

/// Realizes the schedule for `config`, covering at least `horizon`. Blinking
/// schedules are generated from derive_seed(seed, "schedule").
CouplingSchedule realize_schedule(const SyncRunConfig& config, double horizon);

SyncRunResult run_sync_experiment(const SyncRunConfig& config,
                                  const std::optional<MuEstimate>& mu = std::nullopt);

/// Spectrum only, on the schedule `run_sync_experiment` would use.
SpectrumReport run_spectrum(const SyncRunConfig& config,
                            const std::optional<MuEstimate>& mu = std::nullopt);

struct SweepRow {
  double sigma = 0.0;
  double E = 0.0;
  double H = 0.0;
  double mu = 0.0;
  double varsigma = 0.0;
  bool predicted = false;
  bool observed = false;
  double initial_spread = 0.0;
  bool diverged = false;
};

struct SweepOptions {
  bool shared_schedule = false;
  int realizations = 1;
  int threads = 1;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  MuEstimate mu;
};

/// One run per sigma (averaged over `realizations`), rows in sigma order.
/// mu is estimated once and shared by every row.
SweepResult sweep_sigma(const SyncRunConfig& config, const std::vector<double>& sigma_grid,
                        const SweepOptions& options = {});

/// First sigma whose row is observed synchronized, if any.
std::optional<double> synchronization_onset(const SweepResult& sweep);

struct ConsensusResult {
  Trajectory trajectory;
  bool consensus = false;
  double residual = 0.0;
};

/// Integrates x' = L(t) x (f = 0, sigma = 1). Consensus when the final
/// spread is below tolerance * initial spread; residual is that ratio.
ConsensusResult run_consensus(const CouplingSchedule& schedule, const Vector& x0, double horizon,
                              double h, double tolerance = 1e-6);

struct ConsensusReport {
  bool verdict_a = false;  ///< every window has a delta-spanning tree
  bool verdict_b = false;  ///< simulated consensus
  std::optional<std::pair<double, double>> counterexample_window;
  double residual = 0.0;
  int windows_checked = 0;
};

/// Compares the spanning-tree condition on windows [s, s + T_interval],
/// s on a T_interval / 2 grid, with a consensus run from a generic state.
ConsensusReport consensus_equivalence_check(const CouplingSchedule& schedule, double delta,
                                            double t_interval, double horizon, double h,
                                            double tolerance = 1e-6,
                                            const std::optional<Vector>& x0 = std::nullopt);

}  // namespace lcsync
