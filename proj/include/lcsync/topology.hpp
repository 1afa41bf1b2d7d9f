#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lcsync/types.hpp"

namespace lcsync {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Nonnegative weighted digraph. weights(i, j) > 0 means node i receives
/// from node j (a directed edge j -> i). The diagonal must be zero.
class WeightedDigraph {
 public:
  explicit WeightedDigraph(Matrix weights);

  int size() const noexcept { return static_cast<int>(weights_.rows()); }
  const Matrix& weights() const noexcept { return weights_; }

 private:
  Matrix weights_;
};

/// Coupling matrix with nonnegative off-diagonals and zero row sums.
///
/// The diagonal is always recomputed as minus the compensated sum of the
/// off-diagonal row entries, so `row_sum(i)` is exactly zero.
class LaplacianMatrix {
 public:
  /// Validates a full matrix: off-diagonals >= 0, diagonal consistent with
  /// the row sums to 1e-9 relative. The diagonal is then re-derived.
  explicit LaplacianMatrix(const Matrix& entries);

  /// Builds from the off-diagonal part only; the given diagonal is ignored.
  static LaplacianMatrix from_offdiagonal(const Matrix& entries);

  int size() const noexcept { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const noexcept { return entries_; }
  double max_abs() const { return entries_.cwiseAbs().maxCoeff(); }

  /// Compensated row sum; zero by construction.
  double row_sum(int i) const;

 private:
  struct Unchecked {};
  LaplacianMatrix(const Matrix& entries, Unchecked);
  Matrix entries_;
};

/// l_ij = a_ij for i != j, l_ii = -sum_j a_ij.
LaplacianMatrix laplacian_from_graph(const WeightedDigraph& graph);

/// Piecewise-constant L(t): L(t) = pieces[k] on [breakpoints[k], breakpoints[k+1]).
/// `breakpoints` has one more entry than `pieces`; the last entry is the horizon.
class CouplingSchedule {
 public:
  CouplingSchedule(std::vector<double> breakpoints, std::vector<LaplacianMatrix> pieces,
                   std::optional<double> bound = std::nullopt, bool periodic = false);

  static CouplingSchedule constant(const LaplacianMatrix& laplacian, double t0, double t1);

  int nodes() const noexcept { return pieces_.front().size(); }
  double start() const noexcept { return breakpoints_.front(); }
  double horizon() const noexcept { return breakpoints_.back(); }
  double span() const noexcept { return horizon() - start(); }
  double bound() const noexcept { return bound_; }
  bool periodic() const noexcept { return periodic_; }

  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<LaplacianMatrix>& pieces() const noexcept { return pieces_; }

  /// Index of the piece containing t (right-open intervals; t == horizon maps
  /// to the last piece). Throws std::out_of_range outside [start, horizon].
  std::size_t piece_index(double t) const;
  const Matrix& at(double t) const { return pieces_[piece_index(t)].matrix(); }

  /// Repeats the schedule until it covers [start, new_horizon].
  CouplingSchedule cyclic_extension(double new_horizon) const;

  /// Same pieces, flagged as one period of a periodic schedule.
  CouplingSchedule as_periodic() const;

 private:
  std::vector<double> breakpoints_;
  std::vector<LaplacianMatrix> pieces_;
  double bound_;
  bool periodic_;
};

struct BlinkingParams {
  int m = 50;
  int k = 3;
  double p = 0.04;
  double tau = 1.0;
  std::uint64_t seed = 0;
};

/// Symmetric unit-weight ring where each node links to its 2k nearest neighbours.
WeightedDigraph ring_graph(int m, int k);

/// Blinking small-world schedule: intervals of length tau on [0, horizon],
/// each piece the ring plus independent symmetric unit shortcuts on every
/// non-ring pair with probability p. Pieces are drawn sequentially from one
/// stream, so a longer horizon extends a shorter one without changing it.
CouplingSchedule blinking_schedule(const BlinkingParams& params, double horizon);

/// Exact integral of l_ij over [t1, t2].
Matrix integrate_coupling(const CouplingSchedule& schedule, double t1, double t2);

struct IntervalGraph {
  double t1 = 0.0;
  double t2 = 0.0;
  double delta = 0.0;
  BoolMatrix edges;  ///< edges(i, j): delta-edge j -> i
};

/// Edge j -> i iff the integral of l_ij over [t1, t2] is strictly above delta.
IntervalGraph interval_graph(const CouplingSchedule& schedule, double t1, double t2, double delta);

struct SpanningTreeResult {
  bool exists = false;
  std::optional<int> root;
};

/// True iff some root reaches every vertex along edge direction j -> i.
/// Returns the smallest such root.
SpanningTreeResult has_spanning_tree(const BoolMatrix& edges);

enum class HajnalNorm { L1, L2, LInf };

/// max over block-row pairs of ||U_i - U_j||, U_i being the i-th n x nm block
/// row. The norm is the induced norm of the transposed block (nm x n), so
/// for n = 1 it reduces to the plain vector norm of the row difference.
double hajnal_diameter_matrix(const Matrix& u, int m, int n, HajnalNorm norm = HajnalNorm::L1);

/// min over row pairs of sum_k min(v_ik, v_jk). Rejects non-stochastic input
/// with std::invalid_argument naming the offending row.
double scrambling_coefficient(const Matrix& v);

}  // namespace lcsync
