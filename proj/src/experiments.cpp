#include "lcsync/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "lcsync/errors.hpp"
#include "lcsync/random.hpp"

namespace lcsync {

namespace {

constexpr std::uint64_t kConsensusStateSeed = 0x636f6e73656e7375ULL;

double spectrum_horizon(const SyncRunConfig& c) {
  double needed = c.spectrum.varsigma_t_total;
  if (c.spectrum.compute_diameter && !c.spectrum.t0_samples.empty())
    needed = std::max(needed, *std::max_element(c.spectrum.t0_samples.begin(),
                                                c.spectrum.t0_samples.end()) +
                                  c.spectrum.diam_window);
  return needed;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

VectorField make_field(const FieldSpec& spec) {
  if (spec.kind == "rossler") return rossler_field(spec.rossler);
  if (spec.kind == "zero") return zero_field(spec.n);
  throw std::invalid_argument("field.kind: unknown field '" + spec.kind + "'");
}

int ScheduleSpec::nodes() const {
  if (blinking) return blinking->m;
  if (schedule) return schedule->nodes();
  throw std::invalid_argument("schedule: specification is empty");
}

void SyncRunConfig::validate() const {
  require(schedule.blinking.has_value() != schedule.schedule.has_value(),
          "schedule: give exactly one of blinking parameters or an explicit schedule");
  if (schedule.blinking) {
    const auto& b = *schedule.blinking;
    require(b.k >= 0 && b.m > 2 * b.k, "schedule.m: need m > 2k");
    require(b.p >= 0.0 && b.p <= 1.0, "schedule.p: must lie in [0, 1]");
    require(b.tau > 0.0, "schedule.tau: must be positive");
  }
  if (schedule.schedule)
    require(schedule.schedule->periodic() || schedule.schedule->horizon() >= horizon - 1e-9,
            "horizon: exceeds the explicit schedule's horizon");
  require(h > 0.0, "h: must be positive");
  require(sigma >= 0.0 && std::isfinite(sigma), "sigma: must be finite and >= 0");
  require(horizon > 0.0, "horizon: must be positive");
  require(T >= 0.0 && R > 0.0, "T, R: need T >= 0 and R > 0");
  require(T + R <= horizon + 1e-9, "T: T + R must not exceed the horizon");
  require(initial_lo <= initial_hi, "initial_box: lower bound exceeds upper bound");
  require(sync_threshold > 0.0, "sync_threshold: must be positive");
  require(spectrum.h > 0.0, "spectrum.h: must be positive");
  require(spectrum.reorth_interval > 0.0, "spectrum.reorth_interval: must be positive");
  require(spectrum.mu_samples >= 1, "spectrum.mu_samples: must be >= 1");
  require(spectrum.mu_t_total > 0.0 && spectrum.mu_transient >= 0.0,
          "spectrum.mu_t_total: horizons must be positive");
  require(spectrum.varsigma_t_total > 0.0, "spectrum.varsigma_t_total: must be positive");
  require(spectrum.diam_window > 0.0, "spectrum.diam_window: must be positive");
  if (field.kind == "zero") require(field.n >= 1, "field.n: must be >= 1");
}

std::vector<double> sync_error_series(const Trajectory& trajectory, int m, int n) {
  if (trajectory.states.cols() != static_cast<Eigen::Index>(m) * n)
    throw std::invalid_argument("sync_error_series: trajectory is not m blocks of n");
  std::vector<double> e(trajectory.size(), 0.0);
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const auto row = trajectory.states.row(static_cast<Eigen::Index>(k));
    double best = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        best = std::max(best, (row.segment(i * n, n) - row.segment(j * n, n)).squaredNorm());
    e[k] = std::sqrt(best);
  }
  return e;
}

double sync_energy(const std::vector<double>& e, const std::vector<double>& times, double T,
                   double R) {
  if (e.size() != times.size() || e.empty())
    throw std::invalid_argument("sync_energy: series and times must be non-empty and equally long");
  if (!(R >= 0.0)) throw std::invalid_argument("sync_energy: R must be >= 0");
  const double a = T, b = T + R;
  const double tol = 1e-9 * std::max(1.0, std::abs(b));
  if (a < times.front() - tol || b > times.back() + tol)
    throw std::out_of_range("sync_energy: window [" + std::to_string(a) + ", " + std::to_string(b) +
                            "] outside sampled range");
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double t0 = times[k], t1 = times[k + 1];
    const double lo = std::max(a, t0), hi = std::min(b, t1);
    if (hi - lo <= tol) continue;
    const double slope = (e[k + 1] - e[k]) / (t1 - t0);
    const double e_lo = e[k] + slope * (lo - t0);
    const double e_hi = e[k] + slope * (hi - t0);
    total += 0.5 * (e_lo + e_hi) * (hi - lo);
  }
  return total;
}

CouplingSchedule realize_schedule(const SyncRunConfig& config, double horizon) {
  if (config.schedule.blinking) {
    BlinkingParams params = *config.schedule.blinking;
    params.seed = derive_seed(config.seed, "schedule");
    return blinking_schedule(params, horizon);
  }
  if (!config.schedule.schedule) throw std::invalid_argument("schedule: specification is empty");
  const CouplingSchedule& s = *config.schedule.schedule;
  if (s.periodic() && horizon > s.horizon()) return s.cyclic_extension(horizon);
  return s;
}

SyncRunResult run_sync_experiment(const SyncRunConfig& config, const std::optional<MuEstimate>& mu) {
  config.validate();
  const VectorField field = make_field(config.field);
  const int n = field.dim();
  const int m = config.schedule.nodes();

  const double spec_horizon = config.compute_spectrum ? spectrum_horizon(config) : 0.0;
  const bool blinking = config.schedule.blinking.has_value();
  const double horizon = blinking ? std::max(config.horizon, spec_horizon) : config.horizon;
  const CouplingSchedule schedule = realize_schedule(config, horizon);

  std::mt19937_64 rng(derive_seed(config.seed, "initial_state"));
  Vector x0(static_cast<Eigen::Index>(n) * m);
  for (Eigen::Index i = 0; i < x0.size(); ++i) x0[i] = uniform(rng, config.initial_lo, config.initial_hi);

  IntegrationOptions opts;
  opts.on_divergence = DivergencePolicy::Truncate;
  SyncRunResult result;
  result.trajectory = integrate_network(field, schedule, config.sigma, x0, 0.0, config.horizon,
                                        config.h, opts);

  SyncMetrics& met = result.metrics;
  met.times = result.trajectory.times;
  met.e_series = sync_error_series(result.trajectory, m, n);
  met.initial_spread = met.e_series.front();
  met.final_spread = met.e_series.back();
  met.divergence_time = result.trajectory.divergence_time;
  if (met.divergence_time) {
    met.E = INFINITY;
    met.observed_synchronized = false;
  } else {
    met.E = sync_energy(met.e_series, met.times, config.T, config.R);
    met.observed_synchronized =
        met.initial_spread > 0.0 ? met.E < config.sync_threshold * met.initial_spread * config.R
                                 : met.E == 0.0;
  }

  if (config.compute_spectrum) {
    const CouplingSchedule& spectral_schedule = blinking ? schedule : *config.schedule.schedule;
    result.spectrum = compute_spectrum(field, spectral_schedule, config.sigma, config.spectrum,
                                       config.seed, mu);
    if (blinking && spec_horizon > config.horizon)
      result.spectrum->meta.schedule_extension = "blinking-stream";
  }
  return result;
}

SpectrumReport run_spectrum(const SyncRunConfig& config, const std::optional<MuEstimate>& mu) {
  config.validate();
  const VectorField field = make_field(config.field);
  const double spec_horizon = spectrum_horizon(config);
  if (!config.schedule.blinking)
    return compute_spectrum(field, *config.schedule.schedule, config.sigma, config.spectrum,
                            config.seed, mu);
  const CouplingSchedule schedule =
      realize_schedule(config, std::max(config.horizon, spec_horizon));
  SpectrumReport report =
      compute_spectrum(field, schedule, config.sigma, config.spectrum, config.seed, mu);
  if (spec_horizon > config.horizon) report.meta.schedule_extension = "blinking-stream";
  return report;
}

SweepResult sweep_sigma(const SyncRunConfig& config, const std::vector<double>& grid,
                        const SweepOptions& options) {
  if (grid.empty()) throw std::invalid_argument("sweep_sigma: sigma grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("sweep_sigma: sigma grid must increase");
  if (options.realizations < 1) throw std::invalid_argument("sweep_sigma: realizations must be >= 1");
  config.validate();

  SweepResult result;
  const VectorField field = make_field(config.field);
  if (config.compute_spectrum) result.mu = estimate_mu(field, config.spectrum, derive_seed(config.seed, "mu"));

  const std::size_t rows = grid.size();
  const auto reps = static_cast<std::size_t>(options.realizations);
  struct Slot {
    double E = 0.0, varsigma = 0.0, spread = 0.0;
    bool diverged = false;
  };
  std::vector<Slot> slots(rows * reps);
  std::vector<std::exception_ptr> errors(rows * reps);

  auto task = [&](std::size_t idx) {
    const std::size_t row = idx / reps, rep = idx % reps;
    SyncRunConfig c = config;
    c.sigma = grid[row];
    if (!options.shared_schedule)
      c.seed = derive_seed(config.seed, "sweep/" + std::to_string(row) + "/" + std::to_string(rep));
    else if (reps > 1)
      c.seed = derive_seed(config.seed, "realization/" + std::to_string(rep));
    try {
      const SyncRunResult r = run_sync_experiment(c, config.compute_spectrum ? std::optional(result.mu) : std::nullopt);
      slots[idx].E = r.metrics.E;
      slots[idx].spread = r.metrics.initial_spread;
      slots[idx].diverged = r.metrics.divergence_time.has_value();
      slots[idx].varsigma = r.spectrum ? r.spectrum->varsigma : NAN;
    } catch (const DivergenceError&) {
      slots[idx].diverged = true;
      slots[idx].E = INFINITY;
      slots[idx].varsigma = NAN;
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  };

  const int threads = std::max(1, options.threads);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < slots.size(); idx = next++) task(idx);
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t row = 0; row < rows; ++row) {
    SweepRow out;
    out.sigma = grid[row];
    double e_sum = 0.0, v_sum = 0.0, s_sum = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const Slot& s = slots[row * reps + rep];
      e_sum += s.E;
      v_sum += s.varsigma;
      s_sum += s.spread;
      out.diverged = out.diverged || s.diverged;
    }
    const double k = static_cast<double>(reps);
    out.E = e_sum / k;
    out.varsigma = v_sum / k;
    out.initial_spread = s_sum / k;
    out.mu = result.mu.mu;
    if (config.compute_spectrum && std::isfinite(out.varsigma)) {
      const SyncCriterion crit = sync_criterion(out.mu, out.varsigma);
      out.H = crit.H;
      out.predicted = crit.predicted_synchronized;
    } else {
      out.H = NAN;
    }
    out.observed = !out.diverged &&
                   (out.initial_spread > 0.0
                        ? out.E < config.sync_threshold * out.initial_spread * config.R
                        : out.E == 0.0);
    result.rows.push_back(out);
  }
  return result;
}

std::optional<double> synchronization_onset(const SweepResult& sweep) {
  for (const auto& row : sweep.rows)
    if (row.observed) return row.sigma;
  return std::nullopt;
}

ConsensusResult run_consensus(const CouplingSchedule& schedule, const Vector& x0, double horizon,
                              double h, double tolerance) {
  if (x0.size() != schedule.nodes())
    throw std::invalid_argument("run_consensus: x0 must have one entry per node");
  const CouplingSchedule& s = schedule;
  const double end = s.start() + horizon;
  const CouplingSchedule extended = s.periodic() ? s.cyclic_extension(end) : s;
  ConsensusResult result;
  result.trajectory = integrate_network(zero_field(1), extended, 1.0, x0, s.start(), end, h);
  const double spread0 = x0.maxCoeff() - x0.minCoeff();
  const auto last = result.trajectory.states.row(result.trajectory.states.rows() - 1);
  const double spread1 = last.maxCoeff() - last.minCoeff();
  result.residual = spread0 > 0.0 ? spread1 / spread0 : 0.0;
  result.consensus = spread0 == 0.0 || result.residual < tolerance;
  return result;
}

ConsensusReport consensus_equivalence_check(const CouplingSchedule& schedule, double delta,
                                            double t_interval, double horizon, double h,
                                            double tolerance, const std::optional<Vector>& x0) {
  if (!(delta > 0.0) || !(t_interval > 0.0) || !(horizon >= t_interval))
    throw std::invalid_argument("consensus_equivalence_check: need delta > 0 and 0 < T_interval <= horizon");
  const double start = schedule.start();
  const double end = start + horizon;
  const CouplingSchedule extended = schedule.periodic() ? schedule.cyclic_extension(end) : schedule;

  ConsensusReport report;
  report.verdict_a = true;
  const double stride = 0.5 * t_interval;
  for (long k = 0;; ++k) {
    const double a = start + static_cast<double>(k) * stride;
    const double b = a + t_interval;
    if (b > end + 1e-9 * std::max(1.0, end)) break;
    ++report.windows_checked;
    const IntervalGraph g = interval_graph(extended, a, b, delta);
    if (!has_spanning_tree(g.edges).exists) {
      report.verdict_a = false;
      report.counterexample_window = std::make_pair(a, b);
      break;
    }
  }

  Vector state;
  if (x0) {
    state = *x0;
  } else {
    std::mt19937_64 rng(kConsensusStateSeed);
    state.resize(schedule.nodes());
    for (Eigen::Index i = 0; i < state.size(); ++i) state[i] = uniform01(rng);
  }
  const ConsensusResult run = run_consensus(extended, state, horizon, h, tolerance);
  report.verdict_b = run.consensus;
  report.residual = run.residual;
  return report;
}

}  // namespace lcsync
