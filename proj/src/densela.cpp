#include "unroll/densela.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>
#include <utility>

#include "unroll/errors.hpp"

namespace unroll {

namespace {

void require_finite(std::span<const double> values, const char* where) {
  for (double x : values) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::NonFiniteValue, std::string(where) + " produced a non-finite entry");
    }
  }
}

void require_same_size(const Vector& a, const Vector& b, const char* where) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(where) + ": sizes " +
                                                  std::to_string(a.size()) + " and " +
                                                  std::to_string(b.size()));
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* where) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(where) + ": shapes differ");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Vector

Vector::Vector(std::size_t n, double fill) : data_(n, fill) {
  require_finite(std::span<const double>(&fill, 1), "Vector");
}

Vector::Vector(std::initializer_list<double> values) : data_(values) {
  require_finite(data_, "Vector");
}

Vector::Vector(std::vector<double> values) : data_(std::move(values)) {
  require_finite(data_, "Vector");
}

Vector Vector::ones(std::size_t n) { return Vector(n, 1.0); }

Vector Vector::basis(std::size_t n, std::size_t i) {
  if (i >= n) throw Error(ErrorCode::IndexOutOfRange, "basis index out of range");
  Vector e(n);
  e[i] = 1.0;
  return e;
}

bool Vector::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Vector& Vector::operator+=(const Vector& other) {
  require_same_size(*this, other, "Vector +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& other) {
  require_same_size(*this, other, "Vector -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Vector& Vector::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator-(Vector a) { return a *= -1.0; }
Vector operator*(double s, Vector a) { return a *= s; }
Vector operator*(Vector a, double s) { return a *= s; }

double dot(const Vector& a, const Vector& b) {
  require_same_size(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vector& v) {
  // Scaled accumulation so tiny or huge entries do not under/overflow.
  double scale = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) scale = std::max(scale, std::abs(v[i]));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = v[i] / scale;
    s += t * t;
  }
  return scale * std::sqrt(s);
}

void axpy(double s, const Vector& x, Vector& y) {
  require_same_size(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

Vector concat(const Vector& a, const Vector& b) {
  std::vector<double> out(a.values());
  out.insert(out.end(), b.values().begin(), b.values().end());
  return Vector(std::move(out));
}

Vector slice(const Vector& v, std::size_t offset, std::size_t count) {
  if (offset + count > v.size()) throw Error(ErrorCode::IndexOutOfRange, "slice out of range");
  return Vector(std::vector<double>(v.values().begin() + static_cast<std::ptrdiff_t>(offset),
                                    v.values().begin() + static_cast<std::ptrdiff_t>(offset + count)));
}

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  require_finite(std::span<const double>(&fill, 1), "Matrix");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::DimensionMismatch, "Matrix: data size does not match rows*cols");
  }
  require_finite(data_, "Matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorCode::DimensionMismatch, "Matrix: ragged rows");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const Vector& d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::from_columns(const std::vector<Vector>& columns) {
  if (columns.empty()) return {};
  const std::size_t rows = columns.front().size();
  Matrix m(rows, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != rows) {
      throw Error(ErrorCode::DimensionMismatch, "from_columns: ragged columns");
    }
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = columns[j][i];
  }
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "Matrix +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "Matrix -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::DimensionMismatch, "matmul: inner sizes differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix gram(const Matrix& a) {
  Matrix g(a.cols(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double ri = row[i];
      for (std::size_t j = i; j < a.cols(); ++j) g(i, j) += ri * row[j];
    }
  }
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

double frobenius_norm(const Matrix& m) {
  return norm(Vector(std::vector<double>(m.span().begin(), m.span().end())));
}

Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch, "matvec: matrix has " + std::to_string(m.cols()) +
                                                  " columns, vector has " +
                                                  std::to_string(v.size()) + " entries");
  }
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * v[j];
    out[i] = s;
  }
  return Vector(std::move(out));
}

Vector matvec_transposed(const Matrix& m, const Vector& v) {
  if (m.rows() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch, "matvec_transposed: matrix has " +
                                                  std::to_string(m.rows()) + " rows, vector has " +
                                                  std::to_string(v.size()) + " entries");
  }
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    const double vi = v[i];
    if (vi == 0.0) continue;
    for (std::size_t j = 0; j < row.size(); ++j) out[j] += row[j] * vi;
  }
  return Vector(std::move(out));
}

Vector solve_linear(const Matrix& m, const Vector& b) {
  if (!m.square()) throw Error(ErrorCode::DimensionMismatch, "solve_linear: matrix not square");
  if (m.cols() != b.size()) throw Error(ErrorCode::DimensionMismatch, "solve_linear: rhs size");
  const std::size_t n = m.rows();

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double x : m.row(i)) s += x * x;
    scale = std::max(scale, std::sqrt(s));
  }
  const double threshold = 1e-12 * scale;

  Matrix a = m;
  std::vector<double> x(b.values());
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(pivot, k))) pivot = i;
    if (std::abs(a(pivot, k)) <= threshold) {
      throw Error(ErrorCode::SingularMatrix,
                  "solve_linear: pivot below threshold at column " + std::to_string(k));
    }
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(pivot, j));
      std::swap(x[k], x[pivot]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      x[i] -= f * x[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double s = x[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
  }
  require_finite(x, "solve_linear");
  return Vector(std::move(x));
}

// ---------------------------------------------------------------------------
// Symmetric extremes

namespace {

struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples i and i+1
};

// Householder reduction A = Q T Q^T; only T is kept.
Tridiagonal tridiagonalize(Matrix a) {
  const std::size_t n = a.rows();
  std::vector<double> v(n), p(n), q(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double col_norm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) col_norm2 += a(i, k) * a(i, k);
    if (col_norm2 == 0.0) continue;
    const double x0 = a(k + 1, k);
    const double alpha = (x0 >= 0.0 ? -1.0 : 1.0) * std::sqrt(col_norm2);

    std::fill(v.begin(), v.end(), 0.0);
    v[k + 1] = x0 - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = a(i, k);
    double v_norm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) v_norm2 += v[i] * v[i];
    if (v_norm2 == 0.0) continue;
    const double beta = 2.0 / v_norm2;

    // A <- H A H with H = I - beta v v^T, applied as A - v q^T - q v^T.
    double vp = 0.0;
    for (std::size_t i = k; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
      p[i] = beta * s;
      vp += v[i] * p[i];
    }
    const double half = 0.5 * beta * vp;
    for (std::size_t i = k; i < n; ++i) q[i] = p[i] - half * v[i];
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j) a(i, j) -= v[i] * q[j] + q[i] * v[j];
  }

  Tridiagonal t;
  t.diag.resize(n);
  t.off.resize(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) t.diag[i] = a(i, i);
  for (std::size_t i = 0; i + 1 < n; ++i) t.off[i] = a(i + 1, i);
  return t;
}

// Number of eigenvalues strictly below x (Sturm sequence / LDL^T inertia).
std::size_t count_below(const Tridiagonal& t, double x, double pivmin) {
  std::size_t count = 0;
  double d = t.diag[0] - x;
  if (std::abs(d) < pivmin) d = -pivmin;
  if (d < 0.0) ++count;
  for (std::size_t i = 1; i < t.diag.size(); ++i) {
    d = t.diag[i] - x - t.off[i - 1] * t.off[i - 1] / d;
    if (std::abs(d) < pivmin) d = -pivmin;
    if (d < 0.0) ++count;
  }
  return count;
}

// Smallest x with count_below(x) >= target, i.e. the target-th eigenvalue.
double bisect(const Tridiagonal& t, double lo, double hi, std::size_t target, double pivmin) {
  for (int it = 0; it < 4000; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double width = hi - lo;
    if (width <= 2.0 * DBL_EPSILON * std::max(std::abs(lo), std::abs(hi)) + pivmin ||
        mid <= lo || mid >= hi) {
      return mid;
    }
    if (count_below(t, mid, pivmin) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  throw Error(ErrorCode::NoConvergence, "spectral_extremes_sym: bisection did not close");
}

}  // namespace

SpectralExtremes spectral_extremes_sym(const Matrix& m) {
  if (!m.square() || m.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "spectral_extremes_sym: matrix must be square");
  }
  const std::size_t n = m.rows();
  double max_abs = 0.0;
  double max_asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      max_abs = std::max(max_abs, std::abs(m(i, j)));
      max_asym = std::max(max_asym, std::abs(m(i, j) - m(j, i)));
    }
  if (max_asym > 1e-10 * max_abs) {
    throw Error(ErrorCode::NotSymmetric, "spectral_extremes_sym: relative asymmetry too large");
  }
  if (n == 1) return {m(0, 0), m(0, 0)};

  Matrix sym = m;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) sym(i, j) = sym(j, i) = 0.5 * (m(i, j) + m(j, i));

  const Tridiagonal t = tridiagonalize(std::move(sym));

  double lo = t.diag[0];
  double hi = t.diag[0];
  double max_off2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? std::abs(t.off[i - 1]) : 0.0;
    const double right = i + 1 < n ? std::abs(t.off[i]) : 0.0;
    lo = std::min(lo, t.diag[i] - left - right);
    hi = std::max(hi, t.diag[i] + left + right);
    if (i + 1 < n) max_off2 = std::max(max_off2, t.off[i] * t.off[i]);
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::NoConvergence, "spectral_extremes_sym: non-finite Gershgorin bracket");
  }
  if (max_off2 == 0.0) {
    const auto [dmin, dmax] = std::minmax_element(t.diag.begin(), t.diag.end());
    return {*dmin, *dmax};
  }
  const double pad = 2.0 * DBL_EPSILON * std::max({std::abs(lo), std::abs(hi), 1.0});
  lo -= pad;
  hi += pad;
  const double pivmin = DBL_MIN * std::max(1.0, max_off2);

  return {bisect(t, lo, hi, 1, pivmin), bisect(t, lo, hi, n, pivmin)};
}

double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  // Use the smaller Gram matrix; both share the nonzero spectrum.
  const Matrix g = m.cols() <= m.rows() ? gram(m) : gram(transpose(m));
  const double top = spectral_extremes_sym(g).lambda_max;
  return std::sqrt(std::max(top, 0.0));
}

}  // namespace unroll
