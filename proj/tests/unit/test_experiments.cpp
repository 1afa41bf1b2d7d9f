#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "lcsync/experiments.hpp"

using namespace lcsync;

namespace {

Trajectory single_row(const std::vector<double>& state, int m, int n) {
  Trajectory t;
  t.times = {0.0};
  t.states = Eigen::Map<const RowMatrix>(state.data(), 1, static_cast<Eigen::Index>(state.size()));
  t.nodes = m;
  t.node_dim = n;
  return t;
}

Matrix complete_adjacency(int m) {
  Matrix a = Matrix::Ones(m, m);
  a.diagonal().setZero();
  return a;
}

CouplingSchedule constant_schedule(const Matrix& adjacency, double horizon) {
  return CouplingSchedule::constant(laplacian_from_graph(WeightedDigraph(adjacency)), 0.0, horizon);
}

Matrix split_adjacency(const std::vector<int>& sizes) {
  const int m = std::accumulate(sizes.begin(), sizes.end(), 0);
  Matrix a = Matrix::Zero(m, m);
  int off = 0;
  for (int s : sizes) {
    a.block(off, off, s, s).setOnes();
    off += s;
  }
  a.diagonal().setZero();
  return a;
}

CouplingSchedule star_alternation(int m, double duration) {
  Matrix a0 = Matrix::Zero(m, m), a1 = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    if (i != 0) a0(i, 0) = 1.0;
    if (i != 1) a1(i, 1) = 1.0;
  }
  return CouplingSchedule({0.0, duration, 2.0 * duration},
                          {laplacian_from_graph(WeightedDigraph(a0)), laplacian_from_graph(WeightedDigraph(a1))},
                          std::nullopt, true);
}

SyncRunConfig small_config(double sigma, std::uint64_t seed) {
  SyncRunConfig c;
  c.schedule.blinking = BlinkingParams{10, 2, 0.1, 1.0, 0};
  c.sigma = sigma;
  c.horizon = 60.0;
  c.T = 50.0;
  c.R = 10.0;
  c.seed = seed;
  c.spectrum.mu_samples = 2;
  c.spectrum.mu_transient = 50.0;
  c.spectrum.mu_t_total = 300.0;
  c.spectrum.varsigma_t_total = 300.0;
  c.spectrum.diam_window = 100.0;
  c.spectrum.t0_samples = {0.0, 100.0};
  return c;
}

}  // namespace

TEST_CASE("sync error series") {
  CHECK(sync_error_series(single_row({0.5, 0.5, 0.5}, 3, 1), 3, 1)[0] == 0.0);
  CHECK(sync_error_series(single_row({0.0, 3.0}, 2, 1), 2, 1)[0] == 3.0);
  CHECK(sync_error_series(single_row({0, 0, 3, 4, 0, 1}, 3, 2), 3, 2)[0] == 5.0);
  CHECK_THROWS_AS(sync_error_series(single_row({0, 0, 3}, 2, 2), 2, 2), std::invalid_argument);
}

TEST_CASE("property: sync error is permutation equivariant") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + trial % 6, n = 1 + trial % 3;
    std::vector<double> state(m * n);
    for (double& v : state) v = u(rng);
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> permuted(m * n);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < n; ++k) permuted[i * n + k] = state[perm[i] * n + k];
    CHECK(sync_error_series(single_row(state, m, n), m, n)[0] == sync_error_series(single_row(permuted, m, n), m, n)[0]);
  }
}

TEST_CASE("sync energy") {
  std::vector<double> times, zeros, fives, ramp;
  for (int k = 0; k <= 100; ++k) {
    times.push_back(0.01 * k);
    zeros.push_back(0.0);
    fives.push_back(5.0);
    ramp.push_back(0.01 * k);
  }
  CHECK(sync_energy(zeros, times, 0.0, 1.0) == 0.0);
  CHECK(std::abs(sync_energy(fives, times, 0.25, 0.5) - 2.5) < 1e-14);
  CHECK(std::abs(sync_energy(ramp, times, 0.0, 1.0) - 0.5) < 1e-6);
  // Off-grid window ends use the linear interpolant, exact for a ramp.
  CHECK(std::abs(sync_energy(ramp, times, 0.123, 0.5) - 0.5 * (0.623 * 0.623 - 0.123 * 0.123)) < 1e-12);
  CHECK_THROWS_AS(sync_energy(ramp, times, 0.8, 0.5), std::out_of_range);
}

TEST_CASE("property: E is monotone under pointwise domination") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> times;
  for (int k = 0; k <= 200; ++k) times.push_back(0.05 * k);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> e1(times.size()), e2(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
      e1[k] = u(rng);
      e2[k] = e1[k] + u(rng) * (u(rng) < 0.5 ? 0.0 : 1.0);
    }
    const double t = 8.0 * u(rng);
    const double r = 0.1 + u(rng) * (10.0 - t - 0.1);
    CHECK(sync_energy(e1, times, t, r) <= sync_energy(e2, times, t, r));
  }
}

TEST_CASE("config validation") {
  SyncRunConfig c = small_config(0.3, 1);
  CHECK_NOTHROW(c.validate());
  c.T = 55.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config(0.3, 1);
  c.schedule.blinking->m = 4;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config(0.3, 1);
  c.h = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config(0.3, 1);
  c.schedule.blinking.reset();
  c.schedule.schedule = constant_schedule(complete_adjacency(3), 30.0);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.schedule.schedule = c.schedule.schedule->as_periodic();
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("sync run basics") {
  SyncRunConfig coupled = small_config(2.0, 3);
  const SyncRunResult sync = run_sync_experiment(coupled);
  CHECK(sync.metrics.observed_synchronized);
  REQUIRE(sync.spectrum.has_value());
  CHECK(sync.spectrum->H == sync.spectrum->mu + sync.spectrum->varsigma);
  CHECK(sync.spectrum->predicted_synchronized);
  CHECK(sync.metrics.times.size() == sync.metrics.e_series.size());
  CHECK(sync.metrics.initial_spread == sync.metrics.e_series.front());

  SyncRunConfig uncoupled = small_config(0.0, 3);
  const SyncRunResult free_run = run_sync_experiment(uncoupled);
  CHECK_FALSE(free_run.metrics.observed_synchronized);
  CHECK(free_run.metrics.final_spread > 0.1 * free_run.metrics.initial_spread);
  CHECK_FALSE(free_run.spectrum->predicted_synchronized);
  CHECK(free_run.spectrum->H == free_run.spectrum->mu);

  // Reproducible bit for bit.
  const SyncRunResult again = run_sync_experiment(coupled);
  CHECK(again.metrics.E == sync.metrics.E);
  CHECK(again.spectrum->varsigma == sync.spectrum->varsigma);
}

TEST_CASE("single node run is trivially synchronized") {
  SyncRunConfig c;
  c.schedule.schedule = constant_schedule(Matrix::Zero(1, 1), 60.0);
  c.sigma = 0.5;
  c.horizon = 60.0;
  c.T = 50.0;
  c.R = 10.0;
  c.compute_spectrum = false;
  const SyncRunResult r = run_sync_experiment(c);
  CHECK(r.metrics.E == 0.0);
  CHECK(std::all_of(r.metrics.e_series.begin(), r.metrics.e_series.end(), [](double e) { return e == 0.0; }));
  CHECK(r.metrics.observed_synchronized);
}

TEST_CASE("sweep rows are ordered and independent of thread count") {
  SyncRunConfig c = small_config(0.0, 11);
  c.spectrum.compute_diameter = false;
  const std::vector<double> grid{0.0, 0.5, 2.0};
  const SweepResult serial = sweep_sigma(c, grid);
  SweepOptions par;
  par.threads = 3;
  const SweepResult parallel = sweep_sigma(c, grid, par);
  REQUIRE(serial.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(serial.rows[i].sigma == grid[i]);
    CHECK(serial.rows[i].E == parallel.rows[i].E);
    CHECK(serial.rows[i].H == parallel.rows[i].H);
    CHECK(serial.rows[i].mu == serial.mu.mu);
  }
  CHECK_FALSE(serial.rows[0].observed);
  CHECK(serial.rows[0].H > 0.0);
  CHECK(serial.rows[2].observed);
  REQUIRE(synchronization_onset(serial).has_value());
  CHECK(*synchronization_onset(serial) > 0.0);

  CHECK_THROWS_AS(sweep_sigma(c, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(sweep_sigma(c, {}), std::invalid_argument);
  const SweepResult one = sweep_sigma(c, {0.3});
  CHECK(one.rows.size() == 1);
}

TEST_CASE("consensus runs") {
  const CouplingSchedule complete = constant_schedule(complete_adjacency(3), 10.0);
  const ConsensusResult r = run_consensus(complete, (Vector(3) << 1, 0, 0).finished(), 10.0, 0.01);
  CHECK(r.consensus);
  CHECK(r.residual < std::exp(-30.0) * 1.01);

  const CouplingSchedule split = constant_schedule(split_adjacency({2, 2}), 10.0);
  const Vector x0 = (Vector(4) << 1.0, 0.0, 3.0, 5.0).finished();
  const ConsensusResult s = run_consensus(split, x0, 10.0, 0.01);
  CHECK_FALSE(s.consensus);
  CHECK(std::abs(s.residual - (4.0 - 0.5) / 5.0) < 1e-6);

  const ConsensusResult flat = run_consensus(complete, Vector::Constant(3, 2.5), 10.0, 0.01);
  CHECK(flat.consensus);
  CHECK(flat.residual == 0.0);
}

TEST_CASE("zero field conserves the mean under symmetric coupling") {
  const CouplingSchedule ring = blinking_schedule({12, 2, 0.2, 1.0, 3}, 20.0);
  const Vector x0 = Vector::LinSpaced(12, -1.0, 2.0);
  const ConsensusResult r = run_consensus(ring, x0, 20.0, 0.01);
  const Vector last = r.trajectory.state(r.trajectory.size() - 1);
  CHECK(std::abs(last.mean() - x0.mean()) < 1e-12);
}

TEST_CASE("consensus equivalence harness") {
  const CouplingSchedule blink = blinking_schedule({20, 2, 0.05, 1.0, 8}, 100.0);
  const ConsensusReport ring = consensus_equivalence_check(blink, 0.5, 1.0, 100.0, 0.01);
  CHECK(ring.verdict_a);
  CHECK(ring.verdict_b);
  CHECK(ring.windows_checked == 199);

  const ConsensusReport split = consensus_equivalence_check(constant_schedule(split_adjacency({3, 3}), 100.0), 0.5, 1.0, 100.0, 0.01);
  CHECK_FALSE(split.verdict_a);
  CHECK_FALSE(split.verdict_b);
  REQUIRE(split.counterexample_window.has_value());
  CHECK(split.counterexample_window->first == 0.0);

  const ConsensusReport stars = consensus_equivalence_check(star_alternation(3, 1.0), 0.5, 2.0, 100.0, 0.01);
  CHECK(stars.verdict_a);
  CHECK(stars.verdict_b);
}
