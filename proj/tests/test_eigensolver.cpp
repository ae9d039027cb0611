#include <doctest.h>

#include <cmath>
#include <random>

#include "oscdmrg/eigensolver.hpp"
#include "oscdmrg/errors.hpp"

using namespace oscdmrg;

namespace {

Matrix random_symmetric(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = g(rng);
  return 0.5 * (a + a.transpose());
}

LinearMap dense_map(const Matrix& m) {
  return [&m](const Vector& x, Vector& y) { y.noalias() = m * x; };
}

void check_invariants(const Matrix& m, const EigResult& r, double tol) {
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (i > 0) CHECK(r.values[i] >= r.values[i - 1]);
    const double resid = (m * r.vectors[i] - r.values[i] * r.vectors[i]).norm();
    CHECK(resid <= tol * std::max(1.0, std::abs(r.values[i])) * 1.01);
    for (std::size_t j = 0; j <= i; ++j) {
      CHECK(std::abs(r.vectors[i].dot(r.vectors[j]) - (i == j ? 1.0 : 0.0)) < 1e-8);
    }
  }
}

}  // namespace

TEST_CASE("diagonal operator") {
  const Matrix m = Vector((Vector(5) << 1, 2, 3, 4, 5).finished()).asDiagonal();
  const auto r = lowest_k(dense_map(m), 5, 2);
  REQUIRE(r.values.size() == 2);
  CHECK(r.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.values[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("two by two exchange") {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  const auto r = lowest_k(dense_map(m), 2, 2);
  CHECK(r.values[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r.values[1] == doctest::Approx(1.0).epsilon(1e-12));
  check_invariants(m, r, 1e-10);
}

TEST_CASE("random 60x60 against the dense decomposition") {
  std::mt19937_64 rng(2024);
  const Matrix m = random_symmetric(60, rng);
  const auto r = lowest_k(dense_map(m), 60, 5);
  const auto dense = dense_sym_eig(m);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(r.values[i] - dense.values[i]) <= 1e-9);
  check_invariants(m, r, 1e-10);
}

TEST_CASE("lanczos agrees with dense on random matrices up to dim 200") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 2 + static_cast<int>(rng() % 199);
    const int k = 1 + static_cast<int>(rng() % std::min(dim, 6));
    const Matrix m = random_symmetric(dim, rng);
    LanczosOptions opts;
    opts.seed = rng();
    const auto r = lowest_k(dense_map(m), dim, k, opts);
    const auto dense = dense_sym_eig(m);
    for (int i = 0; i < k; ++i) CHECK(std::abs(r.values[i] - dense.values[i]) <= 1e-8);
    check_invariants(m, r, opts.tol);
  }
}

TEST_CASE("small restart basis still converges") {
  std::mt19937_64 rng(5);
  const Matrix m = random_symmetric(150, rng);
  LanczosOptions opts;
  opts.max_basis = 12;
  opts.max_iter = 20000;
  const auto r = lowest_k(dense_map(m), 150, 3, opts);
  const auto dense = dense_sym_eig(m);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(r.values[i] - dense.values[i]) <= 1e-8);
  check_invariants(m, r, opts.tol);
}

TEST_CASE("degenerate cluster") {
  const Matrix m = Vector((Vector(8) << 0, 0, 0, 1, 2, 3, 4, 5).finished()).asDiagonal();
  const auto r = lowest_k(dense_map(m), 8, 3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(r.values[i]) < 1e-12);
  // Only rotation-invariant content: the projector onto the cluster.
  Matrix proj = Matrix::Zero(8, 8);
  for (const auto& v : r.vectors) proj += v * v.transpose();
  CHECK(proj.topLeftCorner(3, 3).isApprox(Matrix::Identity(3, 3), 1e-10));
}

TEST_CASE("start vector") {
  std::mt19937_64 rng(8);
  const Matrix m = random_symmetric(80, rng);
  const auto dense = dense_sym_eig(m);
  LanczosOptions opts;
  opts.start = dense.vectors[0];
  const auto r = lowest_k(dense_map(m), 80, 2, opts);
  CHECK(std::abs(r.values[0] - dense.values[0]) <= 1e-9);
  CHECK(std::abs(r.values[1] - dense.values[1]) <= 1e-9);
  opts.start = Vector::Ones(3);
  CHECK_THROWS_AS(lowest_k(dense_map(m), 80, 2, opts), ArgumentError);
}

TEST_CASE("determinism for a fixed seed") {
  std::mt19937_64 rng(1);
  const Matrix m = random_symmetric(120, rng);
  LanczosOptions opts;
  opts.seed = 42;
  const auto a = lowest_k(dense_map(m), 120, 3, opts);
  const auto b = lowest_k(dense_map(m), 120, 3, opts);
  for (int i = 0; i < 3; ++i) CHECK(a.values[i] == b.values[i]);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("argument and convergence errors") {
  const Matrix m = Matrix::Identity(4, 4);
  CHECK_THROWS_AS(lowest_k(dense_map(m), 4, 5), ArgumentError);
  CHECK_THROWS_AS(lowest_k(dense_map(m), 4, 0), ArgumentError);
  LanczosOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(lowest_k(dense_map(m), 4, 1, bad), ArgumentError);

  std::mt19937_64 rng(4);
  const Matrix big = random_symmetric(300, rng);
  LanczosOptions tight;
  tight.max_iter = 5;
  tight.max_basis = 4;
  try {
    lowest_k(dense_map(big), 300, 2, tight);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual_norms().size() == 2);
    CHECK(e.residual_norms()[0] > 0.0);
  }
}

TEST_CASE("dense decomposition") {
  const auto id = dense_sym_eig(Matrix::Identity(4, 4));
  for (double v : id.values) CHECK(v == doctest::Approx(1.0));

  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 3;
  d(1, 1) = 1;
  d(2, 2) = 2;
  const auto r = dense_sym_eig(d);
  CHECK(r.values == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(std::abs(r.vectors[0][1]) == doctest::Approx(1.0));
  CHECK(std::abs(r.vectors[1][2]) == doctest::Approx(1.0));
  CHECK(std::abs(r.vectors[2][0]) == doctest::Approx(1.0));

  std::mt19937_64 rng(30);
  const Matrix m = random_symmetric(30, rng);
  const auto full = dense_sym_eig(m);
  Matrix v(30, 30);
  for (int i = 0; i < 30; ++i) v.col(i) = full.vectors[i];
  const Vector lambda = Eigen::Map<const Vector>(full.values.data(), 30);
  CHECK((v * lambda.asDiagonal() * v.transpose() - m).cwiseAbs().maxCoeff() <= 1e-9);

  Matrix nan = Matrix::Identity(2, 2);
  nan(0, 1) = std::nan("");
  CHECK_THROWS_AS(dense_sym_eig(nan), ArgumentError);
  CHECK_THROWS_AS(dense_sym_eig(Matrix::Identity(2, 3)), ArgumentError);
}
