#include "lcsync/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "lcsync/errors.hpp"
#include "lcsync/random.hpp"
#include "step_grid.hpp"

namespace lcsync {

namespace {

constexpr std::uint64_t kFrameSeed = 0x6c6a7073796e63ULL;

std::vector<double> sorted_descending(std::vector<double> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

// Row differences d_i = v_i - v_1 (i >= 2) of V' = A V obey D' = C A E D.
Matrix difference_left(int m) {
  Matrix c = Matrix::Zero(m - 1, m);
  for (int i = 1; i < m; ++i) {
    c(i - 1, i) = 1.0;
    c(i - 1, 0) = -1.0;
  }
  return c;
}

Matrix difference_right(int m) {
  Matrix e = Matrix::Zero(m, m - 1);
  for (int i = 1; i < m; ++i) e(i, i - 1) = 1.0;
  return e;
}

// l1 Hajnal diameter of V given D (rows v_i - v_1); row v_1 - v_1 = 0 is implicit.
double diameter_from_differences(const Matrix& d) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    best = std::max(best, d.row(i).cwiseAbs().sum());
    for (Eigen::Index j = i + 1; j < d.rows(); ++j)
      best = std::max(best, (d.row(i) - d.row(j)).cwiseAbs().sum());
  }
  return best;
}

// One RK4 step of y' = B y is y <- S y with S the degree-4 Taylor polynomial of hB.
Matrix rk4_step_matrix(const Matrix& b, double h) {
  const Matrix hb = h * b;
  const Matrix hb2 = hb * hb;
  const Matrix hb3 = hb2 * hb;
  return Matrix::Identity(b.rows(), b.cols()) + hb + hb2 / 2.0 + hb3 / 6.0 + hb3 * hb / 24.0;
}

Matrix matrix_power(Matrix base, long exponent) {
  Matrix result = Matrix::Identity(base.rows(), base.cols());
  while (exponent > 0) {
    if (exponent & 1) result = result * base;
    exponent >>= 1;
    if (exponent > 0) base = base * base;
  }
  return result;
}

}  // namespace

ProjectionBasis projection_basis(int m, int n) {
  if (m < 2 || n < 1) throw std::invalid_argument("projection_basis: need m >= 2 and n >= 1");
  const Vector u = Vector::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
  Vector v = -u;
  v[0] += 1.0;
  const Matrix q = Matrix::Identity(m, m) - (2.0 / v.squaredNorm()) * v * v.transpose();

  ProjectionBasis basis;
  basis.m = m;
  basis.n = n;
  basis.P = Matrix::Zero(m * n, m * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      basis.P.block(i * n, j * n, n, n) = q(i, j) * Matrix::Identity(n, n);
  basis.P1 = basis.P.leftCols(n);
  basis.P2 = basis.P.rightCols((m - 1) * n);
  return basis;
}

std::vector<double> lyapunov_spectrum(const LinearFlow& flow, double t_total,
                                      double reorth_interval, double h,
                                      const LyapunovOptions& options) {
  if (!(reorth_interval > 0.0)) throw std::invalid_argument("lyapunov_spectrum: reorth_interval must be positive");
  if (!(t_total > 0.0)) throw std::invalid_argument("lyapunov_spectrum: t_total must be positive");
  if (!(options.transient >= 0.0 && options.transient < t_total))
    throw std::invalid_argument("lyapunov_spectrum: transient must lie in [0, t_total)");
  const int d = flow.dim();
  const int count = options.count > 0 ? std::min(options.count, d) : d;

  Matrix frame;
  if (options.initial_frame) {
    if (options.initial_frame->rows() != d || options.initial_frame->cols() != count)
      throw std::invalid_argument("lyapunov_spectrum: initial frame must be dim x count");
    Eigen::HouseholderQR<Matrix> qr(*options.initial_frame);
    frame = qr.householderQ() * Matrix::Identity(d, count);
  } else {
    frame = Matrix::Identity(d, count);
  }

  std::vector<double> sums(count, 0.0);
  const detail::StepGrid segments(options.t0, options.t0 + t_total, reorth_interval);
  // Accumulation starts at the first reorthonormalization at or after the transient.
  const double accumulate_from = options.t0 + options.transient - 1e-9 * std::max(1.0, t_total);
  double averaged_over = 0.0;
  for (long k = 0; k < segments.steps(); ++k) {
    const double a = segments.time(k);
    const double b = segments.time(k + 1);
    frame = propagate_linear(flow, std::move(frame), a, b, h);
    Eigen::HouseholderQR<Matrix> qr(frame);
    const Matrix& r = qr.matrixQR();
    for (int i = 0; i < count; ++i) {
      const double rii = std::abs(r(i, i));
      if (rii < 1e-300) throw RankCollapseError("lyapunov_spectrum: frame lost rank", b);
      if (a >= accumulate_from) sums[i] += std::log(rii);
    }
    if (a >= accumulate_from) averaged_over += b - a;
    frame = qr.householderQ() * Matrix::Identity(d, count);
  }
  for (double& s : sums) s /= averaged_over;
  return sorted_descending(std::move(sums));
}

std::vector<double> synchronized_spectrum(const VectorField& field, const Vector& s0,
                                          double transient, double t_total, double h,
                                          double reorth_interval) {
  if (!(transient >= 0.0) || !(t_total > 0.0) || !(reorth_interval > 0.0))
    throw std::invalid_argument("synchronized_spectrum: invalid horizons");
  const int n = field.dim();
  Vector s = s0;
  if (transient > 0.0) {
    const Trajectory warm = integrate_ode(field, s0, 0.0, transient, h);
    s = warm.state(warm.size() - 1);
  }
  Matrix frame = Matrix::Identity(n, n);
  std::vector<double> sums(n, 0.0);
  const detail::StepGrid segments(transient, transient + t_total, reorth_interval);
  for (long k = 0; k < segments.steps(); ++k) {
    const double a = segments.time(k);
    const double b = segments.time(k + 1);
    propagate_variational(field, s, frame, a, b, h);
    Eigen::HouseholderQR<Matrix> qr(frame);
    const Matrix& r = qr.matrixQR();
    for (int i = 0; i < n; ++i) {
      const double rii = std::abs(r(i, i));
      if (rii < 1e-300) throw RankCollapseError("synchronized_spectrum: frame lost rank", b);
      sums[i] += std::log(rii);
    }
    frame = qr.householderQ() * Matrix::Identity(n, n);
  }
  for (double& v : sums) v /= t_total;
  return sorted_descending(std::move(sums));
}

double largest_lyapunov_mu(const VectorField& field, const Vector& s0, double transient,
                           double t_total, double h, double reorth_interval) {
  return synchronized_spectrum(field, s0, transient, t_total, h, reorth_interval).front();
}

double transverse_exponent(const CouplingSchedule& schedule, double sigma, double t_total,
                           double reorth_interval, double h) {
  const int m = schedule.nodes();
  if (m < 2) throw std::invalid_argument("transverse_exponent: need at least two nodes");
  const bool cyclic = schedule.periodic() || schedule.start() + t_total > schedule.horizon() + 1e-9;
  const ProjectionBasis basis = projection_basis(m, 1);
  const LinearFlow projected =
      LinearFlow::from_schedule(schedule, sigma, cyclic).conjugated(basis.P2.transpose(), basis.P2);

  std::mt19937_64 rng(kFrameSeed);
  Matrix start(m - 1, 1);
  for (int i = 0; i < m - 1; ++i) start(i, 0) = uniform(rng, -1.0, 1.0);
  LyapunovOptions options;
  options.count = 1;
  options.initial_frame = start;
  options.t0 = schedule.start();
  options.transient = 0.1 * t_total;
  return lyapunov_spectrum(projected, t_total, reorth_interval, h, options).front();
}

DiameterEstimate hajnal_diameter_linear(const CouplingSchedule& schedule, double sigma,
                                        double window, const std::vector<double>& t0_samples,
                                        double h) {
  if (!(window > 0.0)) throw std::invalid_argument("hajnal_diameter_linear: window must be positive");
  if (t0_samples.empty()) throw std::invalid_argument("hajnal_diameter_linear: no start times");
  const int m = schedule.nodes();
  DiameterEstimate result;
  if (m < 2) {
    result.per_sample.assign(t0_samples.size(), 0.0);
    result.log_diameters.assign(t0_samples.size(), -INFINITY);
    return result;
  }
  const double latest = *std::max_element(t0_samples.begin(), t0_samples.end()) + window;
  const bool cyclic = schedule.periodic() || latest > schedule.horizon() + 1e-9;
  const LinearFlow diff =
      LinearFlow::from_schedule(schedule, sigma, cyclic).conjugated(difference_left(m), difference_right(m));

  const double bp_start = diff.breakpoints().front();
  const double span = diff.breakpoints().back() - bp_start;
  std::map<std::pair<std::size_t, long>, Matrix> cache;

  result.estimate = 0.0;
  for (double t0 : t0_samples) {
    if (t0 < schedule.start() - 1e-9)
      throw std::out_of_range("hajnal_diameter_linear: start time precedes the schedule");
    diff.check_grid(t0, t0 + window, h);
    Matrix d = difference_left(m);
    double log_scale = 0.0;
    const double t_end = t0 + window;
    double t = t0;
    while (t < t_end - 1e-9 * std::max(1.0, t_end)) {
      const std::size_t piece = diff.piece_index(t + 0.5 * h);
      // End of the current piece in absolute time.
      double local_end;
      if (cyclic) {
        const double cycle = std::floor((t + 0.5 * h - bp_start) / span);
        local_end = diff.breakpoints()[piece + 1] + cycle * span;
      } else {
        local_end = diff.breakpoints()[piece + 1];
      }
      const double seg_end = std::min(local_end, t_end);
      const detail::StepGrid grid(t, seg_end, h);
      if (grid.full_steps > 0) {
        auto key = std::make_pair(piece, grid.full_steps);
        auto it = cache.find(key);
        if (it == cache.end())
          it = cache.emplace(key, matrix_power(rk4_step_matrix(diff.piece(piece), h), grid.full_steps)).first;
        d = it->second * d;
      }
      if (grid.last_step > 0.0) d = rk4_step_matrix(diff.piece(piece), grid.last_step) * d;
      const double scale = d.cwiseAbs().maxCoeff();
      if (!std::isfinite(scale)) throw DivergenceError("hajnal_diameter_linear: diverged", seg_end);
      if (scale == 0.0) {
        log_scale = -INFINITY;
        break;
      }
      d /= scale;
      log_scale += std::log(scale);
      t = seg_end;
    }
    const double log_diam = std::isfinite(log_scale) ? log_scale + std::log(diameter_from_differences(d))
                                                     : -INFINITY;
    const double value = std::exp(log_diam / window);
    result.log_diameters.push_back(log_diam);
    result.per_sample.push_back(value);
    result.estimate = std::max(result.estimate, value);
  }
  return result;
}

FloquetResult floquet_multipliers(const CouplingSchedule& periodic_schedule, double sigma, double h) {
  if (!periodic_schedule.periodic())
    throw std::invalid_argument("floquet_multipliers: schedule is not declared periodic");
  const double t0 = periodic_schedule.start();
  const double t1 = periodic_schedule.horizon();
  const LinearFlow flow = LinearFlow::from_schedule(periodic_schedule, sigma, false);
  const Matrix monodromy = fundamental_matrix(flow, t0, t1, h).matrix;

  Eigen::EigenSolver<Matrix> solver(monodromy, false);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("floquet_multipliers: eigenvalue computation failed");
  FloquetResult result;
  result.period = t1 - t0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
    result.multipliers.push_back(solver.eigenvalues()[i]);
  std::stable_sort(result.multipliers.begin(), result.multipliers.end(),
                   [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
  for (const auto& z : result.multipliers) result.moduli.push_back(std::abs(z));
  result.diameter_per_period = result.moduli.size() > 1 ? result.moduli[1] : 0.0;
  result.diameter_rate = std::pow(result.diameter_per_period, 1.0 / result.period);
  return result;
}

SyncCriterion sync_criterion(double mu, double varsigma) {
  if (!std::isfinite(mu) || !std::isfinite(varsigma))
    throw std::invalid_argument("sync_criterion: mu and varsigma must be finite");
  const double h = mu + varsigma;
  return {h, h < 0.0};
}

MuEstimate estimate_mu(const VectorField& field, const SpectrumOptions& options, std::uint64_t seed) {
  if (options.mu_samples < 1) throw std::invalid_argument("estimate_mu: need at least one sample");
  std::mt19937_64 rng(seed);
  MuEstimate est;
  est.mu = -INFINITY;
  for (int s = 0; s < options.mu_samples; ++s) {
    Vector s0(field.dim());
    for (int i = 0; i < field.dim(); ++i) s0[i] = uniform(rng, options.initial_lo, options.initial_hi);
    std::vector<double> spectrum = synchronized_spectrum(field, s0, options.mu_transient,
                                                         options.mu_t_total, options.h,
                                                         options.reorth_interval);
    est.per_sample.push_back(spectrum.front());
    est.initial_states.emplace_back(s0.data(), s0.data() + s0.size());
    if (spectrum.front() > est.mu) {
      est.mu = spectrum.front();
      est.exponents = std::move(spectrum);
    }
  }
  return est;
}

SpectrumReport compute_spectrum(const VectorField& field, const CouplingSchedule& schedule,
                                double sigma, const SpectrumOptions& options, std::uint64_t seed,
                                const std::optional<MuEstimate>& mu) {
  SpectrumReport report;
  report.meta.options = options;
  report.meta.seed = seed;

  const MuEstimate mu_est = mu ? *mu : estimate_mu(field, options, derive_seed(seed, "mu"));
  report.mu = mu_est.mu;
  report.exponents = mu_est.exponents;
  report.meta.mu_per_sample = mu_est.per_sample;
  report.meta.mu_initial_states = mu_est.initial_states;

  double needed = schedule.start() + options.varsigma_t_total;
  if (options.compute_diameter && !options.t0_samples.empty())
    needed = std::max(needed, *std::max_element(options.t0_samples.begin(), options.t0_samples.end()) +
                                  options.diam_window);
  if (needed > schedule.horizon() + 1e-9) report.meta.schedule_extension = "cyclic";

  report.varsigma = schedule.nodes() >= 2
                        ? transverse_exponent(schedule, sigma, options.varsigma_t_total,
                                              options.reorth_interval, options.h)
                        : -INFINITY;
  report.lambda_p = report.varsigma;
  report.meta.lemma7_degenerate = std::abs(report.varsigma) < 1e-3;

  if (options.compute_diameter && schedule.nodes() >= 2) {
    DiameterEstimate diam =
        hajnal_diameter_linear(schedule, sigma, options.diam_window, options.t0_samples, options.h);
    report.diam_estimate = diam.estimate;
    report.meta.diam_per_sample = std::move(diam.per_sample);
  }
  if (options.compute_floquet && schedule.periodic())
    report.floquet = floquet_multipliers(schedule, sigma, options.h);

  if (std::isfinite(report.varsigma)) {
    const SyncCriterion crit = sync_criterion(report.mu, report.varsigma);
    report.H = crit.H;
    report.predicted_synchronized = crit.predicted_synchronized;
  } else {
    report.H = -INFINITY;
    report.predicted_synchronized = true;
  }
  return report;
}

}  // namespace lcsync
