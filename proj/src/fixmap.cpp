#include "unroll/fixmap.hpp"

#include <string>
#include <utility>

#include "unroll/errors.hpp"

namespace unroll {

namespace {

void require_size(const Vector& v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": expected " +
                                                  std::to_string(n) + " entries, got " +
                                                  std::to_string(v.size()));
  }
}

}  // namespace

void FixedPointProblem::check_x(const Vector& x) const { require_size(x, dim_x(), "state"); }
void FixedPointProblem::check_u(const Vector& u) const { require_size(u, dim_u(), "parameter"); }

Matrix jacobian_x(const FixedPointProblem& problem, const Vector& x, const Vector& u) {
  const std::size_t n = problem.dim_x();
  std::vector<Vector> cols;
  cols.reserve(n);
  for (std::size_t j = 0; j < n; ++j) cols.push_back(problem.jvp_x(x, u, Vector::basis(n, j)));
  return Matrix::from_columns(cols);
}

Matrix jacobian_u(const FixedPointProblem& problem, const Vector& x, const Vector& u) {
  const std::size_t n = problem.dim_u();
  std::vector<Vector> cols;
  cols.reserve(n);
  for (std::size_t j = 0; j < n; ++j) cols.push_back(problem.jvp_u(x, u, Vector::basis(n, j)));
  return Matrix::from_columns(cols);
}

Vector implicit_jvp(const FixedPointProblem& problem, const Vector& x_star, const Vector& u,
                    const Vector& p) {
  const Matrix lhs = Matrix::identity(problem.dim_x()) - jacobian_x(problem, x_star, u);
  return solve_linear(lhs, problem.jvp_u(x_star, u, p));
}

Vector implicit_vjp(const FixedPointProblem& problem, const Vector& x_star, const Vector& u,
                    const Vector& w) {
  const Matrix lhs = Matrix::identity(problem.dim_x()) - jacobian_x(problem, x_star, u);
  const Vector z = solve_linear(transpose(lhs), w);
  return problem.vjp_u(x_star, u, z);
}

// ---------------------------------------------------------------------------
// RidgeObjective

RidgeObjective::RidgeObjective(Matrix a, Vector b)
    : a_(std::move(a)), gram_(gram(a_)), b_(std::move(b)) {
  require_size(b_, a_.rows(), "RidgeObjective rhs");
}

double RidgeObjective::value(const Vector& x, const Vector& u) const {
  const Vector r = matvec(a_, x) - b_;
  return 0.5 * dot(r, r) + 0.5 * u[0] * dot(x, x);
}

Vector RidgeObjective::grad_x(const Vector& x, const Vector& u) const {
  require_size(u, 1, "ridge parameter");
  Vector g = matvec(gram_, x) - matvec_transposed(a_, b_);
  axpy(u[0], x, g);
  return g;
}

Vector RidgeObjective::hess_xx(const Vector& /*x*/, const Vector& u, const Vector& v) const {
  require_size(u, 1, "ridge parameter");
  Vector h = matvec(gram_, v);
  axpy(u[0], v, h);
  return h;
}

Vector RidgeObjective::hess_xu(const Vector& x, const Vector& /*u*/, const Vector& p) const {
  require_size(p, 1, "ridge direction");
  return p[0] * x;
}

Vector RidgeObjective::hess_xu_t(const Vector& x, const Vector& /*u*/, const Vector& w) const {
  return Vector{dot(w, x)};
}

// ---------------------------------------------------------------------------
// DataLeastSquaresObjective

DataLeastSquaresObjective::DataLeastSquaresObjective(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::InvalidArgument, "DataLeastSquaresObjective: empty shape");
  }
}

Vector pack_data_parameter(const Matrix& a, const Vector& b) {
  require_size(b, a.rows(), "pack_data_parameter rhs");
  std::vector<double> u(a.span().begin(), a.span().end());
  u.insert(u.end(), b.values().begin(), b.values().end());
  return Vector(std::move(u));
}

std::pair<Matrix, Vector> unpack_data_parameter(const Vector& u, std::size_t rows,
                                                std::size_t cols) {
  require_size(u, rows * cols + rows, "data parameter");
  const auto& v = u.values();
  const auto split = v.begin() + static_cast<std::ptrdiff_t>(rows * cols);
  return {Matrix(rows, cols, std::vector<double>(v.begin(), split)),
          Vector(std::vector<double>(split, v.end()))};
}

double DataLeastSquaresObjective::value(const Vector& x, const Vector& u) const {
  const auto [a, b] = unpack_data_parameter(u, rows_, cols_);
  const Vector r = matvec(a, x) - b;
  return 0.5 * dot(r, r);
}

Vector DataLeastSquaresObjective::grad_x(const Vector& x, const Vector& u) const {
  const auto [a, b] = unpack_data_parameter(u, rows_, cols_);
  return matvec_transposed(a, matvec(a, x) - b);
}

Vector DataLeastSquaresObjective::hess_xx(const Vector& /*x*/, const Vector& u,
                                          const Vector& v) const {
  const auto [a, b] = unpack_data_parameter(u, rows_, cols_);
  return matvec_transposed(a, matvec(a, v));
}

// d/dt grad at (A + t dA, b + t db):  dA^T (A x - b) + A^T (dA x) - A^T db.
Vector DataLeastSquaresObjective::hess_xu(const Vector& x, const Vector& u,
                                          const Vector& p) const {
  const auto [a, b] = unpack_data_parameter(u, rows_, cols_);
  const auto [da, db] = unpack_data_parameter(p, rows_, cols_);
  const Vector r = matvec(a, x) - b;
  return matvec_transposed(da, r) + matvec_transposed(a, matvec(da, x) - db);
}

// Adjoint of hess_xu: the dA block is r w^T + (A w) x^T, the db block is -A w.
Vector DataLeastSquaresObjective::hess_xu_t(const Vector& x, const Vector& u,
                                            const Vector& w) const {
  const auto [a, b] = unpack_data_parameter(u, rows_, cols_);
  const Vector r = matvec(a, x) - b;
  const Vector aw = matvec(a, w);
  std::vector<double> out(rows_ * cols_ + rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) out[i * cols_ + j] = r[i] * w[j] + aw[i] * x[j];
    out[rows_ * cols_ + i] = -aw[i];
  }
  return Vector(std::move(out));
}

// ---------------------------------------------------------------------------
// ShiftedQuadratic

ShiftedQuadratic::ShiftedQuadratic(std::size_t n) : n_(n) {}

double ShiftedQuadratic::value(const Vector& x, const Vector& u) const {
  const Vector d = x - u;
  return 0.5 * dot(d, d);
}

Vector ShiftedQuadratic::grad_x(const Vector& x, const Vector& u) const { return x - u; }

Vector ShiftedQuadratic::hess_xx(const Vector&, const Vector&, const Vector& v) const { return v; }

Vector ShiftedQuadratic::hess_xu(const Vector&, const Vector&, const Vector& p) const { return -p; }

Vector ShiftedQuadratic::hess_xu_t(const Vector&, const Vector&, const Vector& w) const {
  return -w;
}

// ---------------------------------------------------------------------------
// GradientDescentMap

GradientDescentMap::GradientDescentMap(std::shared_ptr<const SmoothObjective> objective,
                                       double alpha)
    : objective_(std::move(objective)), alpha_(alpha) {
  if (!objective_) throw Error(ErrorCode::InvalidArgument, "GradientDescentMap: null objective");
  if (!(alpha_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "GradientDescentMap: alpha <= 0");
}

Vector GradientDescentMap::eval(const Vector& x, const Vector& u) const {
  check_x(x);
  check_u(u);
  Vector out = x;
  axpy(-alpha_, objective_->grad_x(x, u), out);
  return out;
}

Vector GradientDescentMap::jvp_x(const Vector& x, const Vector& u, const Vector& v) const {
  check_x(x);
  check_u(u);
  check_x(v);
  Vector out = v;
  axpy(-alpha_, objective_->hess_xx(x, u, v), out);
  return out;
}

Vector GradientDescentMap::vjp_x(const Vector& x, const Vector& u, const Vector& w) const {
  // I - alpha H is symmetric.
  return jvp_x(x, u, w);
}

Vector GradientDescentMap::jvp_u(const Vector& x, const Vector& u, const Vector& p) const {
  check_x(x);
  check_u(u);
  check_u(p);
  return -alpha_ * objective_->hess_xu(x, u, p);
}

Vector GradientDescentMap::vjp_u(const Vector& x, const Vector& u, const Vector& w) const {
  check_x(x);
  check_u(u);
  check_x(w);
  return -alpha_ * objective_->hess_xu_t(x, u, w);
}

std::shared_ptr<const GradientDescentMap> gd_map(std::shared_ptr<const SmoothObjective> objective,
                                                 double alpha) {
  return std::make_shared<const GradientDescentMap>(std::move(objective), alpha);
}

// ---------------------------------------------------------------------------
// HeavyBallMap

HeavyBallMap::HeavyBallMap(std::shared_ptr<const GradientDescentMap> inner, double beta)
    : inner_(std::move(inner)), beta_(beta) {
  if (!inner_) throw Error(ErrorCode::InvalidArgument, "HeavyBallMap: null inner map");
  if (!(beta_ >= 0.0 && beta_ < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "HeavyBallMap: beta must lie in [0, 1)");
  }
}

Vector HeavyBallMap::eval(const Vector& z, const Vector& u) const {
  check_x(z);
  const std::size_t n = inner_->dim_x();
  const Vector x1 = slice(z, 0, n);
  const Vector x2 = slice(z, n, n);
  Vector head = inner_->eval(x1, u);
  axpy(beta_, x1 - x2, head);
  return concat(head, x1);
}

// dT/dz = [[J + beta I, -beta I], [I, 0]]
Vector HeavyBallMap::jvp_x(const Vector& z, const Vector& u, const Vector& v) const {
  check_x(z);
  check_x(v);
  const std::size_t n = inner_->dim_x();
  const Vector x1 = slice(z, 0, n);
  const Vector v1 = slice(v, 0, n);
  const Vector v2 = slice(v, n, n);
  Vector head = inner_->jvp_x(x1, u, v1);
  axpy(beta_, v1 - v2, head);
  return concat(head, v1);
}

Vector HeavyBallMap::vjp_x(const Vector& z, const Vector& u, const Vector& w) const {
  check_x(z);
  check_x(w);
  const std::size_t n = inner_->dim_x();
  const Vector x1 = slice(z, 0, n);
  const Vector w1 = slice(w, 0, n);
  const Vector w2 = slice(w, n, n);
  Vector head = inner_->vjp_x(x1, u, w1);
  axpy(beta_, w1, head);
  head += w2;
  return concat(head, -beta_ * w1);
}

Vector HeavyBallMap::jvp_u(const Vector& z, const Vector& u, const Vector& p) const {
  check_x(z);
  const std::size_t n = inner_->dim_x();
  return concat(inner_->jvp_u(slice(z, 0, n), u, p), Vector(n));
}

Vector HeavyBallMap::vjp_u(const Vector& z, const Vector& u, const Vector& w) const {
  check_x(z);
  check_x(w);
  const std::size_t n = inner_->dim_x();
  return inner_->vjp_u(slice(z, 0, n), u, slice(w, 0, n));
}

std::shared_ptr<const HeavyBallMap> heavy_ball_map(std::shared_ptr<const SmoothObjective> objective,
                                                   double alpha, double beta) {
  return std::make_shared<const HeavyBallMap>(gd_map(std::move(objective), alpha), beta);
}

// ---------------------------------------------------------------------------
// AffineMap

AffineMap::AffineMap(Matrix jx, Matrix ju, Vector c)
    : jx_(std::move(jx)), ju_(std::move(ju)), c_(std::move(c)) {
  if (!jx_.square() || ju_.rows() != jx_.rows() || c_.size() != jx_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "AffineMap: inconsistent shapes");
  }
}

AffineMap::AffineMap(Matrix jx, Matrix ju) : AffineMap(jx, ju, Vector(jx.rows())) {}

Vector AffineMap::eval(const Vector& x, const Vector& u) const {
  return matvec(jx_, x) + matvec(ju_, u) + c_;
}

Vector AffineMap::jvp_x(const Vector&, const Vector&, const Vector& v) const {
  return matvec(jx_, v);
}

Vector AffineMap::vjp_x(const Vector&, const Vector&, const Vector& w) const {
  return matvec_transposed(jx_, w);
}

Vector AffineMap::jvp_u(const Vector&, const Vector&, const Vector& p) const {
  return matvec(ju_, p);
}

Vector AffineMap::vjp_u(const Vector&, const Vector&, const Vector& w) const {
  return matvec_transposed(ju_, w);
}

std::optional<Vector> AffineMap::solution(const Vector& u) const {
  return solve_linear(Matrix::identity(dim_x()) - jx_, matvec(ju_, u) + c_);
}

// ---------------------------------------------------------------------------
// RidgeLS

namespace {

std::shared_ptr<const SmoothObjective> make_objective(const RidgeLS& p) {
  if (p.mode == RidgeMode::ScalarRidge) return std::make_shared<RidgeObjective>(p.a, p.b);
  return std::make_shared<DataLeastSquaresObjective>(p.a.rows(), p.a.cols());
}

void check_ridge_parameter(const RidgeLS& p, const Vector& u) {
  if (p.mode == RidgeMode::ScalarRidge) {
    require_size(u, 1, "ridge parameter");
    if (u[0] < 0.0) throw Error(ErrorCode::InvalidArgument, "ridge weight must be non-negative");
  } else {
    require_size(u, p.a.rows() * p.a.cols() + p.a.rows(), "data parameter");
  }
}

}  // namespace

Vector RidgeLS::parameter(double ridge) const {
  if (mode == RidgeMode::Data) return pack_data_parameter(a, b);
  if (ridge < 0.0) throw Error(ErrorCode::InvalidArgument, "ridge weight must be non-negative");
  return Vector{ridge};
}

RidgeMap::RidgeMap(RidgeLS problem)
    : problem_(std::move(problem)), gd_(make_objective(problem_), problem_.alpha) {
  require_size(problem_.b, problem_.a.rows(), "RidgeLS rhs");
}

std::optional<Vector> RidgeMap::solution(const Vector& u) const {
  return ridge_solution_oracle(problem_, u);
}

std::shared_ptr<const RidgeMap> gd_map(const RidgeLS& problem) {
  return std::make_shared<const RidgeMap>(problem);
}

Matrix ridge_hessian(const RidgeLS& p, const Vector& u) {
  check_ridge_parameter(p, u);
  if (p.mode == RidgeMode::ScalarRidge) {
    return gram(p.a) + u[0] * Matrix::identity(p.a.cols());
  }
  return gram(unpack_data_parameter(u, p.a.rows(), p.a.cols()).first);
}

Vector ridge_solution_oracle(const RidgeLS& p, const Vector& u) {
  check_ridge_parameter(p, u);
  if (p.mode == RidgeMode::ScalarRidge) {
    return solve_linear(ridge_hessian(p, u), matvec_transposed(p.a, p.b));
  }
  const auto [a, b] = unpack_data_parameter(u, p.a.rows(), p.a.cols());
  return solve_linear(gram(a), matvec_transposed(a, b));
}

Vector ridge_solution_jacobian_oracle(const RidgeLS& p, const Vector& u, const Vector& direction) {
  const RidgeMap map(p);
  return implicit_jvp(map, ridge_solution_oracle(p, u), u, direction);
}

Vector ridge_solution_vjp_oracle(const RidgeLS& p, const Vector& u, const Vector& seed) {
  const RidgeMap map(p);
  return implicit_vjp(map, ridge_solution_oracle(p, u), u, seed);
}

}  // namespace unroll
