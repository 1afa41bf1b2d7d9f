#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lcsync/dynsys.hpp"
#include "lcsync/flow.hpp"
#include "lcsync/topology.hpp"
#include "lcsync/types.hpp"

namespace lcsync {

/// Orthogonal P = Q (x) I_n whose first n columns span the synchronization
/// directions 1_m (x) R^n. P2 spans the transverse space.
struct ProjectionBasis {
  int m = 0;
  int n = 0;
  Matrix P;
  Matrix P1;
  Matrix P2;
};

/// Q is the Householder reflection sending e_1 to 1_m / sqrt(m).
ProjectionBasis projection_basis(int m, int n);

struct LyapunovOptions {
  /// Number of leading exponents to track; 0 tracks all of them.
  int count = 0;
  /// Initial frame (dim x count); orthonormalized before use. Defaults to
  /// the leading columns of the identity.
  std::optional<Matrix> initial_frame;
  double t0 = 0.0;
  /// Leading part of t_total excluded from the average, so the frame can
  /// settle onto the dominant directions first.
  double transient = 0.0;
};

/// Benettin estimate: evolve an orthonormal frame, QR-factorize every
/// `reorth_interval`, average log|R_kk| over the elapsed time. Sorted
/// descending. Throws RankCollapseError when |R_kk| < 1e-300.
std::vector<double> lyapunov_spectrum(const LinearFlow& flow, double t_total,
                                      double reorth_interval, double h,
                                      const LyapunovOptions& options = {});

/// Exponents of u' = Df(s(t)) u after discarding `transient`.
std::vector<double> synchronized_spectrum(const VectorField& field, const Vector& s0,
                                          double transient, double t_total, double h,
                                          double reorth_interval = 1.0);

/// Largest exponent of the synchronized system s' = f(s).
double largest_lyapunov_mu(const VectorField& field, const Vector& s0, double transient,
                           double t_total, double h, double reorth_interval = 1.0);

/// Top exponent of z' = P2^T sigma L(t) P2 z. Schedules shorter than
/// t_total are repeated cyclically. The first tenth of t_total is discarded.
double transverse_exponent(const CouplingSchedule& schedule, double sigma, double t_total,
                           double reorth_interval, double h);

struct DiameterEstimate {
  double estimate = 0.0;               ///< max over start times
  std::vector<double> per_sample;      ///< diam(V(t0 + window, t0))^(1/window)
  std::vector<double> log_diameters;   ///< log diam(V(t0 + window, t0))
};

/// max over t0 of diam(V(t0 + window, t0))^(1/window) for y' = sigma L(t) y.
/// Row differences of V are propagated through their own closed linear
/// system and renormalized per piece, so tiny diameters keep full precision.
DiameterEstimate hajnal_diameter_linear(const CouplingSchedule& schedule, double sigma,
                                        double window, const std::vector<double>& t0_samples,
                                        double h);

struct FloquetResult {
  double period = 0.0;
  std::vector<std::complex<double>> multipliers;  ///< sorted by modulus, descending
  std::vector<double> moduli;
  double diameter_per_period = 0.0;  ///< max_{i>=2} |multiplier|
  double diameter_rate = 0.0;        ///< diameter_per_period^(1/period)
};

/// Eigenvalues of the monodromy matrix V(T_p, 0) of y' = sigma L(t) y.
/// The schedule must be flagged periodic; it is taken as exactly one period.
FloquetResult floquet_multipliers(const CouplingSchedule& periodic_schedule, double sigma, double h);

struct SyncCriterion {
  double H = 0.0;
  bool predicted_synchronized = false;
};

/// H = mu + varsigma; synchronization is predicted iff H < 0.
SyncCriterion sync_criterion(double mu, double varsigma);

struct SpectrumOptions {
  double h = 0.01;
  double reorth_interval = 1.0;
  double mu_transient = 100.0;
  double mu_t_total = 2000.0;
  int mu_samples = 5;
  double initial_lo = 0.0;
  double initial_hi = 1.0;
  double varsigma_t_total = 2000.0;
  bool compute_diameter = true;
  double diam_window = 100.0;
  std::vector<double> t0_samples{0.0, 25.0, 50.0, 75.0, 100.0};
  bool compute_floquet = true;
};

struct MuEstimate {
  double mu = 0.0;                       ///< max over samples
  std::vector<double> per_sample;
  std::vector<double> exponents;         ///< full spectrum of the maximizing sample
  std::vector<std::vector<double>> initial_states;
};

/// mu over `mu_samples` post-transient states; initial states are drawn
/// uniformly from the options' box using `seed`.
MuEstimate estimate_mu(const VectorField& field, const SpectrumOptions& options, std::uint64_t seed);

struct SpectrumMeta {
  SpectrumOptions options;
  std::uint64_t seed = 0;
  std::vector<double> mu_per_sample;
  std::vector<std::vector<double>> mu_initial_states;
  std::vector<double> diam_per_sample;
  std::string schedule_extension = "none";
  /// varsigma numerically equals the synchronized-direction exponent 0, so
  /// the transverse/projection identity gives no verdict.
  bool lemma7_degenerate = false;
};

struct SpectrumReport {
  std::vector<double> exponents;  ///< synchronized-space spectrum, descending
  double mu = 0.0;
  double varsigma = 0.0;
  double lambda_p = 0.0;
  std::optional<double> diam_estimate;
  double H = 0.0;
  bool predicted_synchronized = false;
  std::optional<FloquetResult> floquet;
  SpectrumMeta meta;
};

/// Everything for one (field, schedule, sigma): mu, varsigma, diameter,
/// Floquet data when the schedule is periodic, and H. A precomputed mu may
/// be passed in to share it across a sweep.
SpectrumReport compute_spectrum(const VectorField& field, const CouplingSchedule& schedule,
                                double sigma, const SpectrumOptions& options, std::uint64_t seed,
                                const std::optional<MuEstimate>& mu = std::nullopt);

}  // namespace lcsync
