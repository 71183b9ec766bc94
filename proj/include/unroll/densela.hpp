#pragma once

// Small dense linear algebra kernel. Sized for problems with a few dozen
// unknowns: no blocking, no BLAS, row-major storage.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace unroll {

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0);
  Vector(std::initializer_list<double> values);
  explicit Vector(std::vector<double> values);

  static Vector ones(std::size_t n);
  static Vector basis(std::size_t n, std::size_t i);

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  bool all_finite() const noexcept;

  Vector& operator+=(const Vector& other);
  Vector& operator-=(const Vector& other);
  Vector& operator*=(double s);

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> data_;
};

Vector operator+(Vector a, const Vector& b);
Vector operator-(Vector a, const Vector& b);
Vector operator-(Vector a);
Vector operator*(double s, Vector a);
Vector operator*(Vector a, double s);

double dot(const Vector& a, const Vector& b);
double norm(const Vector& v);
/// y += s * x
void axpy(double s, const Vector& x, Vector& y);
Vector concat(const Vector& a, const Vector& b);
/// Copies `count` entries starting at `offset`.
Vector slice(const Vector& v, std::size_t offset, std::size_t count);

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(const Vector& d);
  /// Assembles a matrix whose j-th column is columns[j].
  static Matrix from_columns(const std::vector<Vector>& columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> span() const noexcept { return data_; }

  bool all_finite() const noexcept;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

Matrix transpose(const Matrix& m);
Matrix matmul(const Matrix& a, const Matrix& b);
/// Returns a^T a without forming the transpose.
Matrix gram(const Matrix& a);
double frobenius_norm(const Matrix& m);

/// M v. Throws DimensionMismatch when M.cols() != v.size().
Vector matvec(const Matrix& m, const Vector& v);
/// M^T v. Throws DimensionMismatch when M.rows() != v.size().
Vector matvec_transposed(const Matrix& m, const Vector& v);

/// Solves M x = b by Gaussian elimination with partial pivoting.
/// Throws SingularMatrix when a pivot falls below 1e-12 times the largest
/// initial row norm.
Vector solve_linear(const Matrix& m, const Vector& b);

struct SpectralExtremes {
  double lambda_min;
  double lambda_max;
};

/// Smallest and largest eigenvalue of a symmetric matrix.
///
/// The matrix is reduced to tridiagonal form by Householder reflections and
/// the two extremes are located by bisection on the Sturm sequence count,
/// which resolves them to a few ulps of the matrix norm regardless of the
/// eigenvalue gaps. Throws NotSymmetric when the relative asymmetry exceeds
/// 1e-10, NoConvergence if the bisection bracket cannot be established.
SpectralExtremes spectral_extremes_sym(const Matrix& m);

/// Largest singular value, sqrt(lambda_max(M^T M)).
double spectral_norm(const Matrix& m);

}  // namespace unroll
