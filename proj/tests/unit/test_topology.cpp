#include <cmath>
#include <random>

#include "doctest.h"
#include "lcsync/topology.hpp"

using namespace lcsync;

namespace {

Matrix complete_adjacency(int m) {
  Matrix a = Matrix::Ones(m, m);
  a.diagonal().setZero();
  return a;
}

// Independent reachability oracle: Floyd-Warshall transitive closure.
bool brute_force_tree(const BoolMatrix& edges) {
  const int m = static_cast<int>(edges.rows());
  // reach(i, j): i is reachable from j along j -> i edges.
  BoolMatrix reach = edges;
  for (int i = 0; i < m; ++i) reach(i, i) = true;
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (reach(i, k) && reach(k, j)) reach(i, j) = true;
  for (int r = 0; r < m; ++r) {
    bool all = true;
    for (int i = 0; i < m; ++i) all = all && reach(i, r);
    if (all) return true;
  }
  return false;
}

Matrix random_stochastic(std::mt19937_64& rng, int m, double sparsity) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix v(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) v(i, j) = u(rng) < sparsity ? 0.0 : u(rng);
    v(i, i) += 1e-3;
    v.row(i) /= v.row(i).sum();
  }
  return v;
}

}  // namespace

TEST_CASE("laplacian from graph") {
  const LaplacianMatrix l = laplacian_from_graph(WeightedDigraph(complete_adjacency(3)));
  Matrix expected(3, 3);
  expected << -2, 1, 1, 1, -2, 1, 1, 1, -2;
  CHECK(l.matrix() == expected);

  CHECK(laplacian_from_graph(WeightedDigraph(Matrix::Zero(3, 3))).matrix().isZero(0.0));

  // Star: node 1 influences nodes 2 and 3 (a21 = a31 = 1).
  Matrix star = Matrix::Zero(3, 3);
  star(1, 0) = 1.0;
  star(2, 0) = 1.0;
  const Matrix ls = laplacian_from_graph(WeightedDigraph(star)).matrix();
  CHECK(ls.row(0) == Eigen::RowVector3d(0, 0, 0));
  CHECK(ls.row(1) == Eigen::RowVector3d(1, -1, 0));
  CHECK(ls.row(2) == Eigen::RowVector3d(1, 0, -1));

  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = -1.0;
  CHECK_THROWS_AS(WeightedDigraph{bad}, std::invalid_argument);
}

TEST_CASE("property: laplacian rows sum to zero with nonnegative off-diagonals") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + trial % 9;
    Matrix a(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = (i == j || u(rng) < 2.0) ? 0.0 : u(rng);
    const LaplacianMatrix l = laplacian_from_graph(WeightedDigraph(a));
    for (int i = 0; i < m; ++i) {
      CHECK(l.row_sum(i) == 0.0);
      CHECK(std::abs(l.matrix().row(i).sum()) <= 1e-14 * (1.0 + a.row(i).sum()));
      for (int j = 0; j < m; ++j)
        if (i != j) CHECK(l.matrix()(i, j) >= 0.0);
    }
  }
}

TEST_CASE("laplacian validation of explicit matrices") {
  Matrix ok(2, 2);
  ok << -1, 1, 2, -2;
  CHECK_NOTHROW(LaplacianMatrix{ok});
  Matrix inconsistent = ok;
  inconsistent(0, 0) = -3.0;
  CHECK_THROWS_AS(LaplacianMatrix{inconsistent}, std::invalid_argument);
}

TEST_CASE("schedule lookup is right-open and bounded") {
  const LaplacianMatrix a = laplacian_from_graph(WeightedDigraph(complete_adjacency(3)));
  const LaplacianMatrix b = LaplacianMatrix::from_offdiagonal(2.0 * complete_adjacency(3));
  const CouplingSchedule s({0.0, 1.0, 2.0}, {a, b});
  CHECK(s.piece_index(0.0) == 0);
  CHECK(s.piece_index(0.999) == 0);
  CHECK(s.piece_index(1.0) == 1);
  CHECK(s.piece_index(2.0) == 1);
  CHECK(s.bound() == 4.0);
  CHECK_THROWS_AS(s.piece_index(2.5), std::out_of_range);
  CHECK_THROWS_AS(CouplingSchedule({0.0, 1.0, 2.0}, {a, b}, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(CouplingSchedule({0.0, 2.0, 1.0}, {a, b}), std::invalid_argument);

  const CouplingSchedule ext = s.cyclic_extension(5.0);
  CHECK(ext.horizon() == 5.0);
  CHECK(ext.at(2.5) == a.matrix());
  CHECK(ext.at(3.5) == b.matrix());
  CHECK(ext.at(4.2) == a.matrix());
}

TEST_CASE("integrate coupling") {
  const LaplacianMatrix la = laplacian_from_graph(WeightedDigraph(complete_adjacency(3)));
  Matrix adj_b = Matrix::Zero(3, 3);
  adj_b(1, 0) = 3.0;
  const LaplacianMatrix lb = laplacian_from_graph(WeightedDigraph(adj_b));

  const CouplingSchedule constant = CouplingSchedule::constant(la, 0.0, 2.0);
  CHECK((integrate_coupling(constant, 0.0, 2.0) - 2.0 * la.matrix()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(integrate_coupling(constant, 0.7, 0.7).isZero(0.0));

  const CouplingSchedule two({0.0, 1.0, 2.0}, {la, lb});
  const Matrix expected = 0.5 * la.matrix() + 0.5 * lb.matrix();
  CHECK((integrate_coupling(two, 0.5, 1.5) - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(integrate_coupling(two, 0.5, 2.5), std::out_of_range);
  CHECK_THROWS_AS(integrate_coupling(two, 1.5, 0.5), std::invalid_argument);
}

TEST_CASE("interval graph thresholds strictly") {
  const CouplingSchedule s =
      CouplingSchedule::constant(laplacian_from_graph(WeightedDigraph(complete_adjacency(4))), 0.0, 1.0);
  const IntervalGraph g = interval_graph(s, 0.0, 1.0, 0.5);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(g.edges(i, j) == (i != j));
  CHECK(interval_graph(s, 0.0, 1.0, 1.0).edges.count() == 0);
  CHECK_THROWS_AS(interval_graph(s, 0.0, 1.0, 0.0), std::invalid_argument);

  const CouplingSchedule ring = blinking_schedule({10, 2, 0.0, 1.0, 9}, 5.0);
  const Matrix ring_adj = ring_graph(10, 2).weights();
  const IntervalGraph rg = interval_graph(ring, 1.0, 3.0, 0.5);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) CHECK(rg.edges(i, j) == (ring_adj(i, j) > 0.0));
}

TEST_CASE("property: small delta reproduces piece support") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 3 + trial % 5;
    Matrix a(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = (i == j || u(rng) < 0.5) ? 0.0 : 0.1 + u(rng);
    const double len = 0.5 + u(rng);
    const CouplingSchedule s = CouplingSchedule::constant(laplacian_from_graph(WeightedDigraph(a)), 0.0, len);
    double min_pos = INFINITY;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (a(i, j) > 0.0) min_pos = std::min(min_pos, a(i, j));
    const double delta = std::isfinite(min_pos) ? 0.9 * min_pos * len : 1.0;
    const IntervalGraph g = interval_graph(s, 0.0, len, delta);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) CHECK(g.edges(i, j) == (a(i, j) > 0.0));
  }
}

TEST_CASE("spanning trees") {
  BoolMatrix path = BoolMatrix::Constant(3, 3, false);
  path(1, 0) = true;  // 1 -> 2
  path(2, 1) = true;  // 2 -> 3
  const auto r = has_spanning_tree(path);
  CHECK(r.exists);
  REQUIRE(r.root.has_value());
  CHECK(*r.root == 0);

  BoolMatrix cycles = BoolMatrix::Constant(4, 4, false);
  cycles(0, 1) = cycles(1, 0) = true;
  cycles(2, 3) = cycles(3, 2) = true;
  const auto split = has_spanning_tree(cycles);
  CHECK_FALSE(split.exists);
  CHECK_FALSE(split.root.has_value());
}

TEST_CASE("property: spanning-tree detection matches transitive-closure oracle") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int positives = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    BoolMatrix e(6, 6);
    const double density = 0.1 + 0.3 * u(rng);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) e(i, j) = i != j && u(rng) < density;
    const bool expected = brute_force_tree(e);
    const auto got = has_spanning_tree(e);
    CHECK(got.exists == expected);
    if (got.exists) {
      ++positives;
      BoolMatrix only_root = e;
      // The returned root must itself reach every vertex.
      BoolMatrix reach = e;
      for (int i = 0; i < 6; ++i) reach(i, i) = true;
      for (int k = 0; k < 6; ++k)
        for (int i = 0; i < 6; ++i)
          for (int j = 0; j < 6; ++j)
            if (reach(i, k) && reach(k, j)) reach(i, j) = true;
      for (int i = 0; i < 6; ++i) CHECK(reach(i, *got.root));
      for (int r = 0; r < *got.root; ++r) {
        bool all = true;
        for (int i = 0; i < 6; ++i) all = all && reach(i, r);
        CHECK_FALSE(all);
      }
    }
  }
  CHECK(positives > 100);
  CHECK(positives < 900);
}

TEST_CASE("hajnal diameter of matrices") {
  CHECK(hajnal_diameter_matrix(Matrix::Identity(2, 2), 2, 1) == 2.0);
  CHECK(hajnal_diameter_matrix(Matrix::Ones(4, 4) / 4.0, 4, 1) == 0.0);
  Matrix v(3, 3);
  v << 0.5, 0.3, 0.2, 0.2, 0.5, 0.3, 0.2, 0.3, 0.5;
  CHECK(hajnal_diameter_matrix(v, 3, 1) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(hajnal_diameter_matrix(v, 3, 1, HajnalNorm::LInf) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(hajnal_diameter_matrix(v, 3, 1, HajnalNorm::L2) ==
        doctest::Approx(std::sqrt(0.18)).epsilon(1e-14));
  CHECK_THROWS_AS(hajnal_diameter_matrix(v, 2, 1), std::invalid_argument);

  // Block rows: n = 2, m = 2.
  Matrix blocks = Matrix::Identity(4, 4);
  CHECK(hajnal_diameter_matrix(blocks, 2, 2) == 2.0);
}

TEST_CASE("scrambling coefficient") {
  CHECK(scrambling_coefficient(Matrix::Identity(3, 3)) == 0.0);
  CHECK(scrambling_coefficient(Matrix::Constant(5, 5, 0.2)) == doctest::Approx(1.0).epsilon(1e-15));
  Matrix v(2, 2);
  v << 0.8, 0.2, 0.3, 0.7;
  CHECK(scrambling_coefficient(v) == doctest::Approx(0.5).epsilon(1e-15));

  Matrix bad(2, 2);
  bad << 0.5, 0.5, 0.9, 0.3;
  try {
    scrambling_coefficient(bad);
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("property: diameter contracts under stochastic products and obeys the scrambling bound") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(2, 6), len(1, 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const int m = size(rng);
    const double sparsity = 0.6 * u(rng);
    const Matrix a = random_stochastic(rng, m, sparsity);
    const Matrix b = random_stochastic(rng, m, sparsity);
    CHECK(hajnal_diameter_matrix(a * b, m, 1) <= hajnal_diameter_matrix(b, m, 1) + 1e-9);

    const int p = len(rng);
    Matrix prod = Matrix::Identity(m, m);
    double bound = 2.0;
    for (int l = 0; l < p; ++l) {
      const Matrix v = random_stochastic(rng, m, sparsity);
      prod = prod * v;
      const double eta = scrambling_coefficient(v);
      CHECK(eta >= 0.0);
      CHECK(eta <= 1.0);
      bound *= 1.0 - eta;
    }
    CHECK(hajnal_diameter_matrix(prod, m, 1) <= bound + 1e-9);
  }
}

TEST_CASE("property: eta equals one exactly for identical rows") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + trial % 6;
    Matrix v = random_stochastic(rng, m, 0.3);
    Matrix same = v.row(0).replicate(m, 1);
    CHECK(scrambling_coefficient(same) == doctest::Approx(1.0).epsilon(1e-12));
    if (hajnal_diameter_matrix(v, m, 1) > 1e-6) CHECK(scrambling_coefficient(v) < 1.0 - 1e-12);
  }
}

TEST_CASE("blinking schedule structure") {
  CHECK_THROWS_AS(blinking_schedule({6, 3, 0.1, 1.0, 1}, 10.0), std::invalid_argument);

  const CouplingSchedule ring_only = blinking_schedule({12, 2, 0.0, 1.0, 5}, 10.0);
  CHECK(ring_only.pieces().size() == 10);
  const Matrix ring_l = laplacian_from_graph(ring_graph(12, 2)).matrix();
  for (const auto& p : ring_only.pieces()) CHECK(p.matrix() == ring_l);

  const CouplingSchedule full = blinking_schedule({12, 2, 1.0, 1.0, 5}, 3.0);
  const Matrix complete_l = laplacian_from_graph(WeightedDigraph(complete_adjacency(12))).matrix();
  for (const auto& p : full.pieces()) CHECK(p.matrix() == complete_l);

  const CouplingSchedule partial = blinking_schedule({12, 2, 0.3, 0.5, 5}, 2.2);
  CHECK(partial.pieces().size() == 5);
  CHECK(partial.horizon() == 2.2);
  for (const auto& p : partial.pieces()) {
    CHECK(p.matrix() == p.matrix().transpose());
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j)
        if (ring_l(i, j) > 0.0) CHECK(p.matrix()(i, j) == 1.0);
  }
}

TEST_CASE("blinking schedule shortcut counts match the binomial expectation") {
  // 0.04 * (1225 - 150) = 43 per piece; variance 1075 * 0.04 * 0.96.
  const double expected = 0.04 * (50.0 * 49.0 / 2.0 - 150.0);
  const double sd_piece = std::sqrt(1075.0 * 0.04 * 0.96);
  const Matrix ring = ring_graph(50, 3).weights();
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const CouplingSchedule s = blinking_schedule({50, 3, 0.04, 1.0, seed}, 200.0);
    CHECK(s.pieces().size() == 200);
    double total = 0.0;
    for (const auto& p : s.pieces()) {
      const Matrix adj = p.matrix() - Matrix(p.matrix().diagonal().asDiagonal());
      total += ((adj - ring).array() > 0.0).count() / 2.0;
    }
    const double mean = total / 200.0;
    CHECK(std::abs(mean - expected) < 3.0 * sd_piece / std::sqrt(200.0));
  }
}

TEST_CASE("blinking schedule is reproducible and prefix-stable") {
  const BlinkingParams params{20, 2, 0.1, 1.0, 77};
  const CouplingSchedule a = blinking_schedule(params, 30.0);
  const CouplingSchedule b = blinking_schedule(params, 30.0);
  const CouplingSchedule longer = blinking_schedule(params, 60.0);
  for (std::size_t k = 0; k < a.pieces().size(); ++k) {
    CHECK(a.pieces()[k].matrix() == b.pieces()[k].matrix());
    CHECK(a.pieces()[k].matrix() == longer.pieces()[k].matrix());
  }
  BlinkingParams other = params;
  other.seed = 78;
  const CouplingSchedule c = blinking_schedule(other, 30.0);
  bool differs = false;
  for (std::size_t k = 0; k < a.pieces().size(); ++k) differs = differs || a.pieces()[k].matrix() != c.pieces()[k].matrix();
  CHECK(differs);
}
