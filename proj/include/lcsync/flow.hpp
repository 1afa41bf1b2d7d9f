#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lcsync/dynsys.hpp"
#include "lcsync/topology.hpp"
#include "lcsync/types.hpp"

namespace lcsync {

/// States with any |component| above this abort integration.
inline constexpr double kDivergenceThreshold = 1e8;

/// Sampled solution. Row k of `states` is the stacked state (node-major,
/// m blocks of n) at `times[k]`.
struct Trajectory {
  std::vector<double> times;
  RowMatrix states;
  int nodes = 1;
  int node_dim = 1;
  /// Set when integration stopped early on divergence (truncate policy).
  std::optional<double> divergence_time;

  std::size_t size() const noexcept { return times.size(); }
  Vector state(std::size_t k) const { return states.row(static_cast<Eigen::Index>(k)).transpose(); }
};

enum class DivergencePolicy { Throw, Truncate };

struct IntegrationOptions {
  DivergencePolicy on_divergence = DivergencePolicy::Throw;
  double divergence_threshold = kDivergenceThreshold;
};

/// Solution matrix V(t1, t0) of a linear system, V(t0, t0) = I.
struct FundamentalMatrix {
  double t0 = 0.0;
  double t1 = 0.0;
  Matrix matrix;
};

/// Coefficient A(t) of a linear system y' = A(t) y, either a continuous
/// supplier or piecewise constant on right-open intervals.
///
/// Inside one RK4 step a piecewise flow uses the piece that contains the
/// step midpoint, so a step never straddles a switch as long as every
/// breakpoint lies on the step grid (checked by `check_grid`).
class LinearFlow {
 public:
  using Supplier = std::function<Matrix(double)>;

  static LinearFlow continuous(int dim, Supplier coefficient);
  /// `breakpoints.size() == pieces.size() + 1`. A cyclic flow repeats with
  /// period breakpoints.back() - breakpoints.front().
  static LinearFlow piecewise(std::vector<double> breakpoints, std::vector<Matrix> pieces,
                              bool cyclic = false);
  /// A(t) = sigma * L(t).
  static LinearFlow from_schedule(const CouplingSchedule& schedule, double sigma,
                                  bool cyclic = false);

  int dim() const noexcept { return dim_; }
  bool is_piecewise() const noexcept { return !supplier_; }
  bool cyclic() const noexcept { return cyclic_; }
  double start() const;
  /// Last time covered; +inf for continuous or cyclic flows.
  double horizon() const;

  /// left * A(t) * right. Both factors must be conformable with dim().
  LinearFlow conjugated(const Matrix& left, const Matrix& right) const;

  std::size_t piece_count() const noexcept { return pieces_.size(); }
  const Matrix& piece(std::size_t k) const { return pieces_[k]; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  /// Piece index for time t, wrapping cyclic flows.
  std::size_t piece_index(double t) const;
  /// Evaluate a continuous supplier.
  Matrix evaluate(double t) const;

  /// Throws std::invalid_argument if a breakpoint inside [t0, t1] is off the
  /// h-grid anchored at t0, and std::out_of_range if [t0, t1] exceeds the flow.
  void check_grid(double t0, double t1, double h) const;

 private:
  LinearFlow() = default;
  int dim_ = 0;
  Supplier supplier_;
  std::vector<double> breakpoints_;
  std::vector<Matrix> pieces_;
  bool cyclic_ = false;
};

/// Classical RK4 for x' = f(x) with fixed step h; the last step is shortened
/// to land on t1. Throws DivergenceError on non-finite or runaway states.
Trajectory integrate_ode(const VectorField& field, const Vector& x0, double t0, double t1, double h,
                         const IntegrationOptions& options = {});

/// RK4 on the stacked network x_i' = f(x_i) + sigma * sum_j l_ij(t) x_j.
/// X0 is node-major with size n * m. Breakpoints must sit on the step grid.
Trajectory integrate_network(const VectorField& field, const CouplingSchedule& schedule,
                             double sigma, const Vector& x0, double t0, double t1, double h,
                             const IntegrationOptions& options = {});

/// Advances y' = A(t) y from t0 to t1 (column-wise RK4).
Matrix propagate_linear(const LinearFlow& flow, Matrix y, double t0, double t1, double h);

/// Co-integrates s' = f(s) and Y' = Df(s(t)) Y from t0 to t1, in place.
void propagate_variational(const VectorField& field, Vector& s, Matrix& y, double t0, double t1,
                           double h);

FundamentalMatrix fundamental_matrix(const LinearFlow& flow, double t0, double t1, double h);
FundamentalMatrix fundamental_matrix(const LinearFlow::Supplier& a, int dim, double t0, double t1,
                                     double h);
/// V(t1, t0) for y' = sigma L(t) y.
FundamentalMatrix fundamental_matrix(const CouplingSchedule& schedule, double sigma, double t0,
                                     double t1, double h);

/// Solution matrix of u' = Df(s(t)) u along s(t0) = s0 (the synchronized-space factor).
FundamentalMatrix synchronized_variational_matrix(const VectorField& field, const Vector& s0,
                                                  double t0, double t1, double h);

/// Solution matrix U(t1, t0, s0) of the network variational system
/// [I_m (x) Df(s(t)) + sigma L(t) (x) I_n] U, co-integrated with s(t).
FundamentalMatrix variational_matrix_lcode(const VectorField& field,
                                           const CouplingSchedule& schedule, double sigma,
                                           const Vector& s0, double t0, double t1, double h);

/// CSV with header `t,x_1_1,...,x_m_n`, 17 significant digits. An optional
/// comment is emitted first as a `# ` line.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory,
                          const std::string& comment = {});

}  // namespace lcsync
