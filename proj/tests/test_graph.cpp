#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "dufs/error.hpp"
#include "dufs/evalkit.hpp"
#include "dufs/graph.hpp"
#include "dufs/synth.hpp"

using namespace dufs;

namespace {

Matrix random_matrix(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

// k-th smallest distance among all other points, by full sort
double brute_local_bandwidth(const Matrix& x, int k, double c) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<double> d;
    for (Eigen::Index j = 0; j < x.rows(); ++j) {
      if (j != i) d.push_back((x.row(i) - x.row(j)).squaredNorm());
    }
    std::sort(d.begin(), d.end());
    best = std::max(best, c * d[static_cast<std::size_t>(k - 1)]);
  }
  return best;
}

}  // namespace

TEST_SUITE("graph") {
  TEST_CASE("preprocess scales an already centered column by its norm") {
    const auto out = preprocess(column({1, -1, 0}));
    CHECK(out.values(0, 0) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(out.values(1, 0) == doctest::Approx(-1 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(out.values(2, 0) == 0.0);
    CHECK(out.constant_columns.empty());
  }

  TEST_CASE("preprocess zeroes and flags a constant column") {
    Matrix raw(3, 2);
    raw << 2, 0, 2, 1, 2, 2;
    const auto out = preprocess(raw);
    CHECK(out.values.col(0).isZero(0.0));
    REQUIRE(out.constant_columns.size() == 1);
    CHECK(out.constant_columns[0] == 0);
    // column (0, 1, 2): mean 1, centered norm sqrt(2)
    CHECK(out.values(0, 1) == doctest::Approx(-1 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(out.values(1, 1) == doctest::Approx(0.0));
    CHECK(out.values(2, 1) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-14));
  }

  TEST_CASE("preprocess rejects empty input and single rows") {
    CHECK_THROWS_AS(preprocess(Matrix(0, 3)), InvalidInput);
    CHECK_THROWS_AS(preprocess(Matrix(3, 0)), InvalidInput);
    CHECK_THROWS_AS(preprocess(Matrix::Ones(1, 3)), InvalidInput);
  }

  TEST_CASE("preprocess leaves centered unit-norm columns") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Matrix raw = random_matrix(7 + static_cast<int>(seed), 5, seed);
      raw.col(1) = raw.col(1) * 1e4 + Vector::Constant(raw.rows(), 3e5);
      const auto out = preprocess(raw);
      for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
        CHECK(std::abs(out.values.col(j).sum()) <= 1e-9);
        CHECK(std::abs(out.values.col(j).norm() - 1.0) <= 1e-9);
      }
    }
  }

  TEST_CASE("pairwise distances are exact zeros for duplicate rows") {
    Matrix x = random_matrix(5, 3, 1);
    x.row(3) = x.row(1);
    const Matrix s = pairwise_sq_distances(x);
    CHECK(s(1, 3) == 0.0);
    CHECK(s(3, 1) == 0.0);
    CHECK(s.diagonal().isZero(0.0));
    CHECK(s(0, 2) == doctest::Approx((x.row(0) - x.row(2)).squaredNorm()).epsilon(1e-14));
  }

  TEST_CASE("local bandwidth on three collinear points") {
    const Matrix x = column({0, 1, 3});
    CHECK(local_bandwidth(x, 1, 1.0) == doctest::Approx(4.0));
    CHECK(local_bandwidth(x, 2, 2.0) == doctest::Approx(18.0));
  }

  TEST_CASE("local bandwidth matches a full-sort oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Matrix x = random_matrix(12, 3, seed + 100);
      for (int k : {1, 2, 5}) {
        CHECK(local_bandwidth(x, k, 2.5) == doctest::Approx(brute_local_bandwidth(x, k, 2.5)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("local bandwidth errors") {
    CHECK_THROWS_AS(local_bandwidth(column({1, 1}), 1, 3.0), DegenerateBandwidth);
    CHECK_THROWS_AS(local_bandwidth(column({0, 1, 3}), 3, 1.0), InvalidInput);
    CHECK_THROWS_AS(local_bandwidth(column({0, 1, 3}), 0, 1.0), InvalidInput);
    KernelConfig bad{LocalMaxBandwidth{1, 6.0}, Denominator::SigmaHat};
    CHECK_THROWS_AS(gaussian_kernel(column({0, 1, 3}), bad), InvalidInput);
    KernelConfig neg{GlobalBandwidth{0.0}, Denominator::SigmaHat};
    CHECK_THROWS_AS(gaussian_kernel(column({0, 1, 3}), neg), InvalidInput);
  }

  TEST_CASE("kernel entries for identical rows and at distance beta") {
    Matrix x(3, 2);
    x << 0, 0, 0, 0, 1, 1;  // squared distance 2 to the origin
    const auto g = gaussian_kernel(x, {GlobalBandwidth{2.0}, Denominator::SigmaHat});
    CHECK(g.kernel(0, 1) == 1.0);
    CHECK(g.kernel(0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    const auto h = gaussian_kernel(x, {GlobalBandwidth{1.0}, Denominator::TwoSigmaSquared});
    CHECK(h.denominator == 2.0);
    CHECK(h.kernel(0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  }

  TEST_CASE("three-point kernel, degrees and random-walk Laplacian by hand") {
    const auto g = gaussian_kernel(column({0, 1, 2}), {GlobalBandwidth{2.0}, Denominator::SigmaHat});
    const double a = std::exp(-0.5), b = std::exp(-2.0);
    Matrix k(3, 3);
    k << 1, a, b, a, 1, a, b, a, 1;
    CHECK((g.kernel - k).cwiseAbs().maxCoeff() <= 1e-15);
    const Vector d = Eigen::Vector3d(1 + a + b, 1 + 2 * a, 1 + a + b);
    CHECK((g.degree - d).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(g.random_walk(0, 1) == doctest::Approx(a / (1 + a + b)).epsilon(1e-14));
    CHECK(g.random_walk(1, 0) == doctest::Approx(a / (1 + 2 * a)).epsilon(1e-14));
    CHECK(g.unnormalized(1, 1) == doctest::Approx(2 * a).epsilon(1e-14));
    CHECK(g.unnormalized(0, 2) == doctest::Approx(-b).epsilon(1e-14));
  }

  TEST_CASE("graph artifacts satisfy their invariants") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const Matrix x = preprocess(random_matrix(6 + static_cast<int>(seed), 4, seed)).values;
      const auto g = gaussian_kernel(x, KernelConfig{});
      const Eigen::Index n = x.rows();
      CHECK((g.kernel - g.kernel.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(g.kernel.diagonal().isOnes(0.0));
      CHECK(g.kernel.minCoeff() > 0.0);
      CHECK(g.kernel.maxCoeff() <= 1.0);
      CHECK(is_row_stochastic(g.random_walk, 1e-10));
      CHECK((g.unnormalized * Vector::Ones(n)).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(unnormalized_spectrum(g).values.minCoeff() >= -1e-10);
    }
  }

  TEST_CASE("quadratic form identity of the unnormalized Laplacian") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int inst = 0; inst < 30; ++inst) {
      const Matrix x = random_matrix(10, 3, 200 + inst);
      const auto g = gaussian_kernel(x, KernelConfig{});
      Vector f(10);
      for (auto& v : f) v = gauss(rng);
      double brute = 0.0;
      for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) brute += 0.5 * g.kernel(i, j) * (f[i] - f[j]) * (f[i] - f[j]);
      CHECK(std::abs(f.dot(g.unnormalized * f) - brute) <= 1e-8);
    }
  }

  TEST_CASE("trace equals the spectral expansion") {
    for (int inst = 0; inst < 10; ++inst) {
      const Matrix x = random_matrix(9, 2, 300 + inst);
      const Matrix f = random_matrix(9, 3, 400 + inst);
      const auto g = gaussian_kernel(x, KernelConfig{});
      const auto s = unnormalized_spectrum(g);
      double expansion = 0.0;
      for (Eigen::Index i = 0; i < s.values.size(); ++i) {
        expansion += s.values[i] * (s.vectors.col(i).transpose() * f).squaredNorm();
      }
      CHECK(std::abs((f.transpose() * g.unnormalized * f).trace() - expansion) <= 1e-8);
    }
  }

  TEST_CASE("kernel is permutation equivariant") {
    const Matrix x = random_matrix(8, 3, 9);
    std::vector<int> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
    Matrix px(8, 3);
    for (int i = 0; i < 8; ++i) px.row(i) = x.row(perm[i]);
    const auto a = gaussian_kernel(x, KernelConfig{});
    const auto b = gaussian_kernel(px, KernelConfig{});
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) CHECK(b.kernel(i, j) == doctest::Approx(a.kernel(perm[i], perm[j])).epsilon(1e-14));
  }

  TEST_CASE("laplacian powers") {
    Matrix l(2, 2);
    l << 0.6, 0.4, 0.4, 0.6;
    CHECK(laplacian_power(l, 1) == l);
    Matrix sq(2, 2);
    sq << 0.52, 0.48, 0.48, 0.52;
    CHECK((laplacian_power(l, 2) - sq).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK_THROWS_AS(laplacian_power(l, 0), InvalidInput);
    const auto g = gaussian_kernel(random_matrix(10, 3, 4), KernelConfig{});
    CHECK(is_row_stochastic(laplacian_power(g.random_walk, 2), 1e-10));
    CHECK(is_row_stochastic(laplacian_power(g.random_walk, 5), 1e-10));
  }

  TEST_CASE("random-walk spectrum has top eigenvalue one with a constant eigenvector") {
    const auto g = gaussian_kernel(random_matrix(12, 3, 8), KernelConfig{});
    const auto s = random_walk_spectrum(g);
    CHECK(s.values[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.values.minCoeff() >= -1.0 - 1e-12);
    const Vector v = s.vectors.col(0) / s.vectors(0, 0);
    CHECK((v.array() - 1.0).abs().maxCoeff() <= 1e-9);
    // eigen-equation of L_rw itself
    for (int i = 0; i < 3; ++i) {
      CHECK((g.random_walk * s.vectors.col(i) - s.values[i] * s.vectors.col(i)).norm() <= 1e-10);
    }
    const auto u = unnormalized_spectrum(g);
    CHECK(std::abs(u.values[0]) <= 1e-10);
    const Vector c = u.vectors.col(0) / u.vectors(0, 0);
    CHECK((c.array() - 1.0).abs().maxCoeff() <= 1e-9);
  }

  TEST_CASE("two disconnected cliques give a double top eigenvalue") {
    Matrix s = Matrix::Constant(4, 4, 1e6);
    s(0, 1) = s(1, 0) = 0.5;
    s(2, 3) = s(3, 2) = 0.5;
    s.diagonal().setZero();
    const auto g = graph_from_distances(s, 1.0);
    const auto spec = random_walk_spectrum(g);
    CHECK(spec.values[0] == doctest::Approx(1.0));
    CHECK(spec.values[1] == doctest::Approx(1.0));
    CHECK(spec.values[2] < 0.99);
  }

  TEST_CASE("zero degree is a degenerate graph") {
    GraphArtifacts g;
    g.kernel = Matrix::Identity(2, 2);
    g.degree = Vector::Zero(2);
    CHECK_THROWS_AS(random_walk_spectrum(g), DegenerateGraph);
    CHECK_THROWS_AS(graph_from_distances(Matrix::Zero(2, 2), 0.0), DegenerateBandwidth);
  }

  TEST_CASE("uniform nuisance dimensions shrink lambda_2 on two moons") {
    auto mean_l2 = [](std::size_t nuisance) {
      double s = 0.0;
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        TwoMoonsConfig mc;
        mc.d_nuisance = nuisance;
        mc.nuisance = NuisanceDistribution::Uniform01;
        mc.seed = seed;
        s += second_eigenvalue(preprocess(gen_two_moons(mc).x).values, KernelConfig{});
      }
      return s / 20.0;
    };
    CHECK(mean_l2(16) < mean_l2(0));
  }
}
