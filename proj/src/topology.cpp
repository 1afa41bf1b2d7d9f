#include "lcsync/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>
#include <string>

#include "lcsync/random.hpp"

namespace lcsync {

namespace {

// Neumaier summation of the off-diagonal entries of row i.
double offdiag_row_sum(const Matrix& a, int i) {
  double sum = 0.0, comp = 0.0;
  for (int j = 0; j < a.cols(); ++j) {
    if (j == i) continue;
    const double x = a(i, j);
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double time_eps(double scale) { return 1e-9 * std::max(1.0, std::abs(scale)); }

}  // namespace

WeightedDigraph::WeightedDigraph(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() != weights_.cols() || weights_.rows() < 1)
    throw std::invalid_argument("WeightedDigraph: weight matrix must be square and non-empty");
  for (int i = 0; i < weights_.rows(); ++i) {
    for (int j = 0; j < weights_.cols(); ++j) {
      const double w = weights_(i, j);
      if (!std::isfinite(w) || w < 0.0)
        throw std::invalid_argument("WeightedDigraph: negative or non-finite weight at (" +
                                    std::to_string(i) + ", " + std::to_string(j) + ")");
      if (i == j && w != 0.0)
        throw std::invalid_argument("WeightedDigraph: self-loop at node " + std::to_string(i));
    }
  }
}

LaplacianMatrix::LaplacianMatrix(const Matrix& entries, Unchecked) : entries_(entries) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1)
    throw std::invalid_argument("LaplacianMatrix: matrix must be square and non-empty");
  for (int i = 0; i < entries_.rows(); ++i) {
    for (int j = 0; j < entries_.cols(); ++j) {
      if (i == j) continue;
      const double w = entries_(i, j);
      if (!std::isfinite(w) || w < 0.0)
        throw std::invalid_argument("LaplacianMatrix: negative or non-finite off-diagonal at (" +
                                    std::to_string(i) + ", " + std::to_string(j) + ")");
    }
  }
  for (int i = 0; i < entries_.rows(); ++i) entries_(i, i) = 0.0 - offdiag_row_sum(entries_, i);
}

LaplacianMatrix::LaplacianMatrix(const Matrix& entries) : LaplacianMatrix(entries, Unchecked{}) {
  for (int i = 0; i < entries.rows(); ++i) {
    const double expected = entries_(i, i);
    if (std::abs(entries(i, i) - expected) > 1e-9 * (1.0 + std::abs(expected)))
      throw std::invalid_argument("LaplacianMatrix: row " + std::to_string(i) +
                                  " does not sum to zero");
  }
}

LaplacianMatrix LaplacianMatrix::from_offdiagonal(const Matrix& entries) {
  return LaplacianMatrix(entries, Unchecked{});
}

double LaplacianMatrix::row_sum(int i) const { return offdiag_row_sum(entries_, i) + entries_(i, i); }

LaplacianMatrix laplacian_from_graph(const WeightedDigraph& graph) {
  return LaplacianMatrix::from_offdiagonal(graph.weights());
}

CouplingSchedule::CouplingSchedule(std::vector<double> breakpoints,
                                   std::vector<LaplacianMatrix> pieces, std::optional<double> bound,
                                   bool periodic)
    : breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)), bound_(0.0),
      periodic_(periodic) {
  if (pieces_.empty()) throw std::invalid_argument("CouplingSchedule: at least one piece required");
  if (breakpoints_.size() != pieces_.size() + 1)
    throw std::invalid_argument("CouplingSchedule: need exactly one more breakpoint than pieces");
  for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k) {
    if (!(breakpoints_[k] < breakpoints_[k + 1]) || !std::isfinite(breakpoints_[k + 1]))
      throw std::invalid_argument("CouplingSchedule: breakpoints must be strictly increasing");
  }
  const int m = pieces_.front().size();
  double actual = 0.0;
  for (const auto& p : pieces_) {
    if (p.size() != m) throw std::invalid_argument("CouplingSchedule: pieces differ in node count");
    actual = std::max(actual, p.max_abs());
  }
  if (bound) {
    if (*bound < actual)
      throw std::invalid_argument("CouplingSchedule: bound " + std::to_string(*bound) +
                                  " is below max |l_ij| = " + std::to_string(actual));
    bound_ = *bound;
  } else {
    bound_ = actual;
  }
}

CouplingSchedule CouplingSchedule::constant(const LaplacianMatrix& laplacian, double t0, double t1) {
  return CouplingSchedule({t0, t1}, {laplacian});
}

std::size_t CouplingSchedule::piece_index(double t) const {
  if (t < start() - time_eps(start()) || t > horizon() + time_eps(horizon()) || std::isnan(t))
    throw std::out_of_range("CouplingSchedule: time " + std::to_string(t) + " outside [" +
                            std::to_string(start()) + ", " + std::to_string(horizon()) + "]");
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  if (it == breakpoints_.begin()) return 0;
  const auto idx = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return std::min(idx, pieces_.size() - 1);
}

CouplingSchedule CouplingSchedule::cyclic_extension(double new_horizon) const {
  if (new_horizon <= horizon() + time_eps(horizon())) return *this;
  std::vector<double> bps{start()};
  std::vector<LaplacianMatrix> pieces;
  const double period = span();
  for (long cycle = 0; bps.back() < new_horizon - time_eps(new_horizon); ++cycle) {
    const double offset = static_cast<double>(cycle) * period;
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
      const double end = breakpoints_[k + 1] + offset;
      pieces.push_back(pieces_[k]);
      if (end >= new_horizon - time_eps(new_horizon)) {
        bps.push_back(std::max(end, new_horizon));
        break;
      }
      bps.push_back(end);
    }
  }
  return CouplingSchedule(std::move(bps), std::move(pieces), bound_, periodic_);
}

CouplingSchedule CouplingSchedule::as_periodic() const {
  return CouplingSchedule(breakpoints_, pieces_, bound_, true);
}

WeightedDigraph ring_graph(int m, int k) {
  if (k < 0 || m <= 2 * k)
    throw std::invalid_argument("ring_graph: need m > 2k (m = " + std::to_string(m) +
                                ", k = " + std::to_string(k) + ")");
  Matrix a = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int d = 1; d <= k; ++d) {
      const int j = (i + d) % m;
      a(i, j) = 1.0;
      a(j, i) = 1.0;
    }
  }
  return WeightedDigraph(std::move(a));
}

CouplingSchedule blinking_schedule(const BlinkingParams& params, double horizon) {
  if (params.m <= 2 * params.k || params.k < 0)
    throw std::invalid_argument("blinking_schedule: need m > 2k");
  if (!(params.p >= 0.0 && params.p <= 1.0))
    throw std::invalid_argument("blinking_schedule: p must lie in [0, 1]");
  if (!(params.tau > 0.0)) throw std::invalid_argument("blinking_schedule: tau must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("blinking_schedule: horizon must be positive");

  const int m = params.m;
  const Matrix ring = ring_graph(m, params.k).weights();
  std::vector<std::pair<int, int>> candidates;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (ring(i, j) == 0.0) candidates.emplace_back(i, j);

  std::mt19937_64 rng(params.seed);
  const auto count = static_cast<long>(std::ceil(horizon / params.tau - 1e-9));
  std::vector<double> bps;
  std::vector<LaplacianMatrix> pieces;
  bps.reserve(count + 1);
  pieces.reserve(count);
  for (long k = 0; k < count; ++k) {
    Matrix a = ring;
    for (const auto& [i, j] : candidates) {
      if (uniform01(rng) < params.p) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
      }
    }
    bps.push_back(static_cast<double>(k) * params.tau);
    pieces.push_back(LaplacianMatrix::from_offdiagonal(a));
  }
  bps.push_back(horizon);
  return CouplingSchedule(std::move(bps), std::move(pieces));
}

Matrix integrate_coupling(const CouplingSchedule& schedule, double t1, double t2) {
  if (t1 > t2) throw std::invalid_argument("integrate_coupling: t1 must not exceed t2");
  if (t1 < schedule.start() - time_eps(schedule.start()) ||
      t2 > schedule.horizon() + time_eps(schedule.horizon()))
    throw std::out_of_range("integrate_coupling: interval outside schedule horizon");
  const int m = schedule.nodes();
  Matrix total = Matrix::Zero(m, m);
  const auto& bps = schedule.breakpoints();
  for (std::size_t k = 0; k < schedule.pieces().size(); ++k) {
    const double overlap = std::min(t2, bps[k + 1]) - std::max(t1, bps[k]);
    if (overlap > 0.0) total += overlap * schedule.pieces()[k].matrix();
  }
  return total;
}

IntervalGraph interval_graph(const CouplingSchedule& schedule, double t1, double t2, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("interval_graph: delta must be positive");
  const Matrix integral = integrate_coupling(schedule, t1, t2);
  const int m = schedule.nodes();
  IntervalGraph g{t1, t2, delta, BoolMatrix::Constant(m, m, false)};
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j && integral(i, j) > delta) g.edges(i, j) = true;
  return g;
}

SpanningTreeResult has_spanning_tree(const BoolMatrix& edges) {
  if (edges.rows() != edges.cols())
    throw std::invalid_argument("has_spanning_tree: adjacency must be square");
  const int m = static_cast<int>(edges.rows());
  if (m == 0) return {};
  std::vector<char> seen(m);
  std::deque<int> queue;
  for (int root = 0; root < m; ++root) {
    std::fill(seen.begin(), seen.end(), 0);
    seen[root] = 1;
    queue.assign(1, root);
    int reached = 1;
    while (!queue.empty()) {
      const int j = queue.front();
      queue.pop_front();
      for (int i = 0; i < m; ++i) {
        if (!seen[i] && edges(i, j)) {
          seen[i] = 1;
          ++reached;
          queue.push_back(i);
        }
      }
    }
    if (reached == m) return {true, root};
  }
  return {};
}

double hajnal_diameter_matrix(const Matrix& u, int m, int n, HajnalNorm norm) {
  if (m < 1 || n < 1 || u.rows() != static_cast<Eigen::Index>(m) * n)
    throw std::invalid_argument("hajnal_diameter_matrix: matrix has " + std::to_string(u.rows()) +
                                " rows, expected m*n = " + std::to_string(m * n));
  double diam = 0.0;
  Matrix diff(n, u.cols());
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      diff = u.middleRows(i * n, n) - u.middleRows(j * n, n);
      double value = 0.0;
      switch (norm) {
        case HajnalNorm::L1:
          value = diff.cwiseAbs().rowwise().sum().maxCoeff();
          break;
        case HajnalNorm::LInf:
          value = diff.cwiseAbs().colwise().sum().maxCoeff();
          break;
        case HajnalNorm::L2:
          value = n == 1 ? diff.norm() : Eigen::JacobiSVD<Matrix>(diff).singularValues()(0);
          break;
      }
      diam = std::max(diam, value);
    }
  }
  return diam;
}

double scrambling_coefficient(const Matrix& v) {
  if (v.rows() != v.cols() || v.rows() < 1)
    throw std::invalid_argument("scrambling_coefficient: matrix must be square and non-empty");
  const int m = static_cast<int>(v.rows());
  for (int i = 0; i < m; ++i) {
    if ((v.row(i).array() < -1e-12).any() || !v.row(i).allFinite() ||
        std::abs(v.row(i).sum() - 1.0) > 1e-6)
      throw std::invalid_argument("scrambling_coefficient: row " + std::to_string(i) +
                                  " is not stochastic");
  }
  double eta = 1.0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      eta = std::min(eta, v.row(i).cwiseMin(v.row(j)).cwiseMax(0.0).sum());
  return std::clamp(eta, 0.0, 1.0);
}

}  // namespace lcsync
