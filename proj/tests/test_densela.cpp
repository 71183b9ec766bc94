#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "support.hpp"
#include "unroll/densela.hpp"
#include "unroll/errors.hpp"

using namespace unroll;

using testing::code_of;

TEST_CASE("vector construction rejects non-finite entries") {
  CHECK(code_of([] { Vector{1.0, std::numeric_limits<double>::quiet_NaN()}; }) ==
        ErrorCode::NonFiniteValue);
  CHECK(code_of([] { Vector(3, std::numeric_limits<double>::infinity()); }) ==
        ErrorCode::NonFiniteValue);
  CHECK(code_of([] { Matrix(1, 1, std::vector<double>{HUGE_VAL}); }) ==
        ErrorCode::NonFiniteValue);
}

TEST_CASE("vector arithmetic") {
  const Vector a{1, 2, 3};
  const Vector b{4, 5, 6};
  CHECK(a + b == Vector{5, 7, 9});
  CHECK(b - a == Vector{3, 3, 3});
  CHECK(2.0 * a == Vector{2, 4, 6});
  CHECK(-a == Vector{-1, -2, -3});
  CHECK(dot(a, b) == 32.0);
  CHECK(norm(Vector{3, 4}) == doctest::Approx(5.0));
  CHECK(norm(Vector{3e200, 4e200}) == doctest::Approx(5e200));
  Vector y{1, 1, 1};
  axpy(2.0, a, y);
  CHECK(y == Vector{3, 5, 7});
  CHECK(concat(Vector{1}, Vector{2, 3}) == Vector{1, 2, 3});
  CHECK(slice(Vector{1, 2, 3, 4}, 1, 2) == Vector{2, 3});
  CHECK(code_of([&] { (void)dot(a, Vector{1}); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { (void)slice(a, 2, 2); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("matvec examples") {
  CHECK(matvec(Matrix::identity(2), Vector{3, 4}) == Vector{3, 4});
  CHECK(matvec(Matrix(2, 2), Vector{3, 4}) == Vector{0, 0});
  CHECK(matvec(Matrix{{1, 2}, {3, 4}}, Vector{1, 1}) == Vector{3, 7});
  CHECK(matvec_transposed(Matrix{{1, 2}, {3, 4}}, Vector{1, 1}) == Vector{4, 6});
  CHECK(code_of([] { (void)matvec(Matrix(2, 3), Vector{1, 2}); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { (void)matvec_transposed(Matrix(2, 3), Vector{1, 2, 3}); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("matrix helpers") {
  const Matrix a{{1, 2, 3}, {4, 5, 6}};
  CHECK(transpose(a) == Matrix{{1, 4}, {2, 5}, {3, 6}});
  CHECK(matmul(transpose(a), a) == gram(a));
  CHECK(Matrix::diagonal(Vector{1, 2}) == Matrix{{1, 0}, {0, 2}});
  CHECK(Matrix::from_columns({Vector{1, 4}, Vector{2, 5}, Vector{3, 6}}) == a);
  CHECK(frobenius_norm(Matrix{{3, 0}, {0, 4}}) == doctest::Approx(5.0));
  CHECK(code_of([&] { (void)matmul(a, a); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("solve_linear examples") {
  CHECK(solve_linear(Matrix::identity(3), Vector{1, 2, 3}) == Vector{1, 2, 3});
  const Vector x = solve_linear(Matrix{{2, 0}, {0, 4}}, Vector{2, 8});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(2.0));
  CHECK(code_of([] { (void)solve_linear(Matrix{{1, 2}, {2, 4}}, Vector{1, 1}); }) ==
        ErrorCode::SingularMatrix);
  CHECK(code_of([] { (void)solve_linear(Matrix(2, 3), Vector{1, 1}); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("solve_linear reproduces b on random well-conditioned systems") {
  oracle::Gen gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 12;
    const Matrix b = gen.normal_matrix(n, n);
    Matrix spd = gram(b) + Matrix::identity(n);
    const Vector rhs = gen.normal_vector(n);
    const Vector x = solve_linear(spd, rhs);
    CHECK(norm(matvec(spd, x) - rhs) <= 1e-10 * (1.0 + norm(rhs)));

    // General (non-symmetric) matrices with condition number well below 1e6.
    Matrix g = gen.normal_matrix(n, n) + 3.0 * static_cast<double>(n) * Matrix::identity(n);
    const Vector y = solve_linear(g, rhs);
    CHECK(norm(matvec(g, y) - rhs) <= 1e-10 * (1.0 + norm(rhs)));
  }
}

TEST_CASE("spectral_extremes_sym examples") {
  auto e = spectral_extremes_sym(Matrix::diagonal(Vector{1, 4}));
  CHECK(e.lambda_min == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.lambda_max == doctest::Approx(4.0).epsilon(1e-12));
  e = spectral_extremes_sym(Matrix::identity(3));
  CHECK(e.lambda_min == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.lambda_max == doctest::Approx(1.0).epsilon(1e-12));
  e = spectral_extremes_sym(Matrix{{5}});
  CHECK(e.lambda_min == 5.0);
  CHECK(e.lambda_max == 5.0);
  e = spectral_extremes_sym(Matrix(4, 4));
  CHECK(e.lambda_min == 0.0);
  CHECK(e.lambda_max == 0.0);
}

TEST_CASE("spectral_extremes_sym errors") {
  CHECK(code_of([] { (void)spectral_extremes_sym(Matrix{{1, 2}, {3, 4}}); }) ==
        ErrorCode::NotSymmetric);
  CHECK(code_of([] { (void)spectral_extremes_sym(Matrix(2, 3)); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("spectral_extremes_sym agrees with Jacobi sweeps") {
  oracle::Gen gen(11);
  SUBCASE("Gram matrices of U(0,1) data, 50 rows") {
    for (std::size_t n : {1, 2, 5, 10, 20, 30, 40, 50}) {
      const Matrix h = gram(gen.uniform_matrix(50, n));
      const auto ref = oracle::jacobi_eigenvalues(h);
      const auto e = spectral_extremes_sym(h);
      CHECK(std::abs(e.lambda_max - ref.back()) <= 1e-8 * std::abs(ref.back()));
      // lambda_min is resolved to a few ulps of ||H||; compare at that scale
      // and relative to itself when it is not tiny.
      CHECK(std::abs(e.lambda_min - ref.front()) <= 1e-8 * std::abs(ref.front()) + 1e-12 * ref.back());
    }
  }
  SUBCASE("indefinite symmetric matrices") {
    for (std::size_t n = 1; n <= 50; n += 7) {
      const Matrix s = gen.symmetric(n);
      const auto ref = oracle::jacobi_eigenvalues(s);
      const auto e = spectral_extremes_sym(s);
      const double scale = std::max(std::abs(ref.front()), std::abs(ref.back()));
      CHECK(std::abs(e.lambda_max - ref.back()) <= 1e-8 * scale);
      CHECK(std::abs(e.lambda_min - ref.front()) <= 1e-8 * scale);
    }
  }
  SUBCASE("clustered spectrum") {
    Vector d(30, 1.0);
    d[0] = 1.0 - 1e-9;
    d[29] = 1.0 + 1e-9;
    const auto e = spectral_extremes_sym(Matrix::diagonal(d));
    CHECK(std::abs(e.lambda_min - d[0]) <= 1e-14);
    CHECK(std::abs(e.lambda_max - d[29]) <= 1e-14);
  }
}

TEST_CASE("spectral_norm examples") {
  CHECK(spectral_norm(Matrix{{1, 0}, {0, -3}}) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(spectral_norm(Matrix(3, 2)) == 0.0);
  CHECK(spectral_norm(Matrix{{0, 1}, {0, 0}}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spectral_norm dominates every Rayleigh ratio") {
  oracle::Gen gen(3);
  for (auto [r, c] : {std::pair{5, 3}, std::pair{3, 5}, std::pair{8, 8}, std::pair{50, 10}}) {
    const Matrix m = gen.normal_matrix(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    const double s = spectral_norm(m);
    CHECK(s == doctest::Approx(oracle::jacobi_spectral_norm(m)).epsilon(1e-10));
    for (int i = 0; i < 100; ++i) {
      const Vector v = gen.unit_vector(static_cast<std::size_t>(c));
      CHECK(norm(matvec(m, v)) <= s * (1.0 + 1e-12));
    }
  }
}
