#include "lcsync/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "lcsync/errors.hpp"
#include "step_grid.hpp"

namespace lcsync {

using detail::StepGrid;

namespace {

bool runaway(const double* data, Eigen::Index size, double threshold) {
  for (Eigen::Index i = 0; i < size; ++i)
    if (!(std::abs(data[i]) <= threshold)) return true;
  return false;
}

template <class Derived>
void check_finite(const Eigen::MatrixBase<Derived>& y, double t, const char* what) {
  if (runaway(y.derived().data(), y.size(), kDivergenceThreshold))
    throw DivergenceError(std::string(what) + ": solution diverged", t);
}

}  // namespace

// ---------------------------------------------------------------------------
// LinearFlow

LinearFlow LinearFlow::continuous(int dim, Supplier coefficient) {
  if (dim < 1) throw std::invalid_argument("LinearFlow: dimension must be >= 1");
  if (!coefficient) throw std::invalid_argument("LinearFlow: empty coefficient supplier");
  LinearFlow flow;
  flow.dim_ = dim;
  flow.supplier_ = std::move(coefficient);
  return flow;
}

LinearFlow LinearFlow::piecewise(std::vector<double> breakpoints, std::vector<Matrix> pieces,
                                 bool cyclic) {
  if (pieces.empty() || breakpoints.size() != pieces.size() + 1)
    throw std::invalid_argument("LinearFlow: need one more breakpoint than pieces");
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k)
    if (!(breakpoints[k] < breakpoints[k + 1]))
      throw std::invalid_argument("LinearFlow: breakpoints must be strictly increasing");
  const auto d = pieces.front().rows();
  for (const auto& p : pieces)
    if (p.rows() != d || p.cols() != d)
      throw std::invalid_argument("LinearFlow: pieces must be square and equally sized");
  LinearFlow flow;
  flow.dim_ = static_cast<int>(d);
  flow.breakpoints_ = std::move(breakpoints);
  flow.pieces_ = std::move(pieces);
  flow.cyclic_ = cyclic;
  return flow;
}

LinearFlow LinearFlow::from_schedule(const CouplingSchedule& schedule, double sigma, bool cyclic) {
  std::vector<Matrix> pieces;
  pieces.reserve(schedule.pieces().size());
  for (const auto& p : schedule.pieces()) pieces.push_back(sigma * p.matrix());
  return piecewise(schedule.breakpoints(), std::move(pieces), cyclic || schedule.periodic());
}

double LinearFlow::start() const {
  return is_piecewise() ? breakpoints_.front() : -std::numeric_limits<double>::infinity();
}

double LinearFlow::horizon() const {
  if (!is_piecewise() || cyclic_) return std::numeric_limits<double>::infinity();
  return breakpoints_.back();
}

LinearFlow LinearFlow::conjugated(const Matrix& left, const Matrix& right) const {
  if (left.cols() != dim_ || right.rows() != dim_ || left.rows() != right.cols())
    throw std::invalid_argument("LinearFlow::conjugated: non-conformable factors");
  if (!is_piecewise()) {
    auto inner = supplier_;
    return continuous(static_cast<int>(left.rows()),
                      [inner, left, right](double t) -> Matrix { return left * inner(t) * right; });
  }
  std::vector<Matrix> pieces;
  pieces.reserve(pieces_.size());
  for (const auto& p : pieces_) pieces.push_back(left * p * right);
  return piecewise(breakpoints_, std::move(pieces), cyclic_);
}

std::size_t LinearFlow::piece_index(double t) const {
  if (!is_piecewise()) throw std::logic_error("LinearFlow::piece_index on a continuous flow");
  const double t_start = breakpoints_.front();
  const double span = breakpoints_.back() - t_start;
  if (cyclic_) {
    double local = std::fmod(t - t_start, span);
    if (local < 0.0) local += span;
    t = t_start + local;
  }
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  if (it == breakpoints_.begin()) return 0;
  return std::min(static_cast<std::size_t>(it - breakpoints_.begin()) - 1, pieces_.size() - 1);
}

Matrix LinearFlow::evaluate(double t) const {
  if (is_piecewise()) return pieces_[piece_index(t)];
  Matrix a = supplier_(t);
  if (a.rows() != dim_ || a.cols() != dim_)
    throw std::invalid_argument("LinearFlow: supplier returned a matrix of the wrong size");
  return a;
}

void LinearFlow::check_grid(double t0, double t1, double h) const {
  if (!is_piecewise()) return;
  const double tol = 1e-9 * std::max(1.0, std::abs(t1));
  if (!cyclic_ && (t0 < breakpoints_.front() - tol || t1 > breakpoints_.back() + tol))
    throw std::out_of_range("LinearFlow: interval [" + std::to_string(t0) + ", " +
                            std::to_string(t1) + "] exceeds the schedule horizon " +
                            std::to_string(breakpoints_.back()));
  auto on_grid = [h](double offset) {
    const double r = offset / h;
    return std::abs(r - std::round(r)) < 1e-6;
  };
  for (double b : breakpoints_) {
    if (!cyclic_ && (b <= t0 || b >= t1)) continue;
    if (!on_grid(b - t0))
      throw std::invalid_argument("LinearFlow: breakpoint " + std::to_string(b) +
                                  " is not on the step grid (h = " + std::to_string(h) + ")");
  }
  if (cyclic_ && !on_grid(breakpoints_.back() - breakpoints_.front()))
    throw std::invalid_argument("LinearFlow: period is not a multiple of the step size");
}

// ---------------------------------------------------------------------------
// Nonlinear integration

Trajectory integrate_ode(const VectorField& field, const Vector& x0, double t0, double t1, double h,
                         const IntegrationOptions& options) {
  const int n = field.dim();
  if (x0.size() != n) throw std::invalid_argument("integrate_ode: initial state dimension mismatch");
  const StepGrid grid(t0, t1, h);
  const long steps = grid.steps();

  Trajectory traj;
  traj.nodes = 1;
  traj.node_dim = n;
  traj.times.reserve(steps + 1);
  traj.states.resize(steps + 1, n);

  Vector x = x0, k1(n), k2(n), k3(n), k4(n), tmp(n);
  traj.times.push_back(t0);
  traj.states.row(0) = x.transpose();
  for (long k = 0; k < steps; ++k) {
    const double dt = grid.step(k);
    field.eval(x, k1);
    tmp = x + 0.5 * dt * k1;
    field.eval(tmp, k2);
    tmp = x + 0.5 * dt * k2;
    field.eval(tmp, k3);
    tmp = x + dt * k3;
    field.eval(tmp, k4);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t = grid.time(k + 1);
    if (runaway(x.data(), n, options.divergence_threshold)) {
      if (options.on_divergence == DivergencePolicy::Throw)
        throw DivergenceError("integrate_ode: state diverged", t);
      traj.divergence_time = t;
      traj.states.conservativeResize(static_cast<Eigen::Index>(traj.times.size()), n);
      return traj;
    }
    traj.times.push_back(t);
    traj.states.row(k + 1) = x.transpose();
  }
  return traj;
}

Trajectory integrate_network(const VectorField& field, const CouplingSchedule& schedule,
                             double sigma, const Vector& x0, double t0, double t1, double h,
                             const IntegrationOptions& options) {
  const int n = field.dim();
  const int m = schedule.nodes();
  const Eigen::Index dim = static_cast<Eigen::Index>(n) * m;
  if (x0.size() != dim)
    throw std::invalid_argument("integrate_network: initial state must have n*m = " +
                                std::to_string(dim) + " entries");
  if (!(sigma >= 0.0)) throw std::invalid_argument("integrate_network: sigma must be >= 0");
  const StepGrid grid(t0, t1, h);
  LinearFlow::from_schedule(schedule, 1.0).check_grid(t0, t1, h);

  using ConstStateMap = Eigen::Map<const RowMatrix>;
  using StateMap = Eigen::Map<RowMatrix>;

  Vector x = x0, k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  RowMatrix coupled(m, n);
  auto rhs = [&](const Vector& state, const Matrix& lap, Vector& out) {
    for (int i = 0; i < m; ++i) field.eval(state.segment(i * n, n), out.segment(i * n, n));
    if (sigma != 0.0) {
      coupled.noalias() = lap * ConstStateMap(state.data(), m, n);
      StateMap(out.data(), m, n) += sigma * coupled;
    }
  };

  const long steps = grid.steps();
  Trajectory traj;
  traj.nodes = m;
  traj.node_dim = n;
  traj.times.reserve(steps + 1);
  traj.states.resize(steps + 1, dim);
  traj.times.push_back(t0);
  traj.states.row(0) = x.transpose();

  for (long k = 0; k < steps; ++k) {
    const double t = grid.time(k);
    const double dt = grid.step(k);
    const Matrix& lap = schedule.at(t + 0.5 * dt);
    rhs(x, lap, k1);
    tmp = x + 0.5 * dt * k1;
    rhs(tmp, lap, k2);
    tmp = x + 0.5 * dt * k2;
    rhs(tmp, lap, k3);
    tmp = x + dt * k3;
    rhs(tmp, lap, k4);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t_next = grid.time(k + 1);
    if (runaway(x.data(), dim, options.divergence_threshold)) {
      if (options.on_divergence == DivergencePolicy::Throw)
        throw DivergenceError("integrate_network: state diverged", t_next);
      traj.divergence_time = t_next;
      traj.states.conservativeResize(static_cast<Eigen::Index>(traj.times.size()), dim);
      return traj;
    }
    traj.times.push_back(t_next);
    traj.states.row(k + 1) = x.transpose();
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Linear and variational integration

Matrix propagate_linear(const LinearFlow& flow, Matrix y, double t0, double t1, double h) {
  if (y.rows() != flow.dim())
    throw std::invalid_argument("propagate_linear: state has " + std::to_string(y.rows()) +
                                " rows, flow dimension is " + std::to_string(flow.dim()));
  const StepGrid grid(t0, t1, h);
  flow.check_grid(t0, t1, h);
  Matrix k1(y.rows(), y.cols()), k2(y.rows(), y.cols()), k3(y.rows(), y.cols()),
      k4(y.rows(), y.cols());
  for (long k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    const double dt = grid.step(k);
    if (flow.is_piecewise()) {
      const Matrix& a = flow.piece(flow.piece_index(t + 0.5 * dt));
      k1.noalias() = a * y;
      k2.noalias() = a * (y + 0.5 * dt * k1);
      k3.noalias() = a * (y + 0.5 * dt * k2);
      k4.noalias() = a * (y + dt * k3);
    } else {
      const Matrix a0 = flow.evaluate(t);
      const Matrix ah = flow.evaluate(t + 0.5 * dt);
      const Matrix a1 = flow.evaluate(t + dt);
      k1.noalias() = a0 * y;
      k2.noalias() = ah * (y + 0.5 * dt * k1);
      k3.noalias() = ah * (y + 0.5 * dt * k2);
      k4.noalias() = a1 * (y + dt * k3);
    }
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite(y, grid.time(k + 1), "propagate_linear");
  }
  return y;
}

void propagate_variational(const VectorField& field, Vector& s, Matrix& y, double t0, double t1,
                           double h) {
  const int n = field.dim();
  if (s.size() != n || y.rows() != n)
    throw std::invalid_argument("propagate_variational: dimension mismatch");
  const StepGrid grid(t0, t1, h);
  Vector ks1(n), ks2(n), ks3(n), ks4(n), stmp(n);
  Matrix j(n, n), ky1(n, y.cols()), ky2(n, y.cols()), ky3(n, y.cols()), ky4(n, y.cols());
  for (long k = 0; k < grid.steps(); ++k) {
    const double dt = grid.step(k);
    field.eval(s, ks1);
    field.jacobian(s, j);
    ky1.noalias() = j * y;

    stmp = s + 0.5 * dt * ks1;
    field.eval(stmp, ks2);
    field.jacobian(stmp, j);
    ky2.noalias() = j * (y + 0.5 * dt * ky1);

    stmp = s + 0.5 * dt * ks2;
    field.eval(stmp, ks3);
    field.jacobian(stmp, j);
    ky3.noalias() = j * (y + 0.5 * dt * ky2);

    stmp = s + dt * ks3;
    field.eval(stmp, ks4);
    field.jacobian(stmp, j);
    ky4.noalias() = j * (y + dt * ky3);

    s += (dt / 6.0) * (ks1 + 2.0 * ks2 + 2.0 * ks3 + ks4);
    y += (dt / 6.0) * (ky1 + 2.0 * ky2 + 2.0 * ky3 + ky4);
    check_finite(s, grid.time(k + 1), "propagate_variational");
    check_finite(y, grid.time(k + 1), "propagate_variational");
  }
}

FundamentalMatrix fundamental_matrix(const LinearFlow& flow, double t0, double t1, double h) {
  return {t0, t1, propagate_linear(flow, Matrix::Identity(flow.dim(), flow.dim()), t0, t1, h)};
}

FundamentalMatrix fundamental_matrix(const LinearFlow::Supplier& a, int dim, double t0, double t1,
                                     double h) {
  return fundamental_matrix(LinearFlow::continuous(dim, a), t0, t1, h);
}

FundamentalMatrix fundamental_matrix(const CouplingSchedule& schedule, double sigma, double t0,
                                     double t1, double h) {
  return fundamental_matrix(LinearFlow::from_schedule(schedule, sigma), t0, t1, h);
}

FundamentalMatrix synchronized_variational_matrix(const VectorField& field, const Vector& s0,
                                                  double t0, double t1, double h) {
  Vector s = s0;
  Matrix y = Matrix::Identity(field.dim(), field.dim());
  propagate_variational(field, s, y, t0, t1, h);
  return {t0, t1, std::move(y)};
}

FundamentalMatrix variational_matrix_lcode(const VectorField& field,
                                           const CouplingSchedule& schedule, double sigma,
                                           const Vector& s0, double t0, double t1, double h) {
  const int n = field.dim();
  const int m = schedule.nodes();
  const int d = n * m;
  if (s0.size() != n) throw std::invalid_argument("variational_matrix_lcode: s0 dimension mismatch");
  const StepGrid grid(t0, t1, h);
  LinearFlow::from_schedule(schedule, 1.0).check_grid(t0, t1, h);

  Vector s = s0, ks1(n), ks2(n), ks3(n), ks4(n), stmp(n);
  Matrix u = Matrix::Identity(d, d);
  Matrix ku1(d, d), ku2(d, d), ku3(d, d), ku4(d, d), utmp(d, d), jac(n, n);

  // [I_m (x) J + sigma L (x) I_n] * Y, without forming the Kronecker products.
  auto apply = [&](const Matrix& lap, const Matrix& j, const Matrix& y, Matrix& out) {
    for (int i = 0; i < m; ++i) out.middleRows(i * n, n).noalias() = j * y.middleRows(i * n, n);
    if (sigma == 0.0) return;
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < m; ++k) {
        const double w = sigma * lap(i, k);
        if (w != 0.0) out.middleRows(i * n, n) += w * y.middleRows(k * n, n);
      }
  };

  for (long k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    const double dt = grid.step(k);
    const Matrix& lap = schedule.at(t + 0.5 * dt);

    field.eval(s, ks1);
    field.jacobian(s, jac);
    apply(lap, jac, u, ku1);

    stmp = s + 0.5 * dt * ks1;
    field.eval(stmp, ks2);
    field.jacobian(stmp, jac);
    utmp = u + 0.5 * dt * ku1;
    apply(lap, jac, utmp, ku2);

    stmp = s + 0.5 * dt * ks2;
    field.eval(stmp, ks3);
    field.jacobian(stmp, jac);
    utmp = u + 0.5 * dt * ku2;
    apply(lap, jac, utmp, ku3);

    stmp = s + dt * ks3;
    field.eval(stmp, ks4);
    field.jacobian(stmp, jac);
    utmp = u + dt * ku3;
    apply(lap, jac, utmp, ku4);

    s += (dt / 6.0) * (ks1 + 2.0 * ks2 + 2.0 * ks3 + ks4);
    u += (dt / 6.0) * (ku1 + 2.0 * ku2 + 2.0 * ku3 + ku4);
    check_finite(u, grid.time(k + 1), "variational_matrix_lcode");
  }
  return {t0, t1, std::move(u)};
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory,
                          const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << 't';
  for (int i = 1; i <= trajectory.nodes; ++i)
    for (int j = 1; j <= trajectory.node_dim; ++j) out << ",x_" << i << '_' << j;
  out << '\n';
  char buf[32];
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", trajectory.times[k]);
    out << buf;
    for (Eigen::Index c = 0; c < trajectory.states.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", trajectory.states(static_cast<Eigen::Index>(k), c));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace lcsync
