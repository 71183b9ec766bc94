#pragma once

#include <cstddef>
#include <memory>
#include <optional>

#include "unroll/densela.hpp"

namespace unroll {

/// A parameterized map T(x, u) whose fixed point x*(u) = T(x*(u), u) is the
/// object being differentiated. Jacobians are exposed only through
/// matrix-free products:
///
///   jvp_x(x, u, v) = dT/dx(x, u) v        vjp_x(x, u, w) = w^T dT/dx(x, u)
///   jvp_u(x, u, p) = dT/du(x, u) p        vjp_u(x, u, w) = w^T dT/du(x, u)
///
/// Implementations are immutable after construction.
class FixedPointProblem {
 public:
  virtual ~FixedPointProblem() = default;

  virtual std::size_t dim_x() const = 0;
  virtual std::size_t dim_u() const = 0;

  virtual Vector eval(const Vector& x, const Vector& u) const = 0;
  virtual Vector jvp_x(const Vector& x, const Vector& u, const Vector& v) const = 0;
  virtual Vector vjp_x(const Vector& x, const Vector& u, const Vector& w) const = 0;
  virtual Vector jvp_u(const Vector& x, const Vector& u, const Vector& p) const = 0;
  virtual Vector vjp_u(const Vector& x, const Vector& u, const Vector& w) const = 0;

  /// Exact fixed point, when the problem knows it in closed form.
  virtual std::optional<Vector> solution(const Vector& /*u*/) const { return std::nullopt; }

 protected:
  void check_x(const Vector& x) const;
  void check_u(const Vector& u) const;
};

/// Dense dT/dx(x, u), assembled from dim_x basis products. Test/oracle use.
Matrix jacobian_x(const FixedPointProblem& problem, const Vector& x, const Vector& u);
/// Dense dT/du(x, u), assembled from dim_u basis products.
Matrix jacobian_u(const FixedPointProblem& problem, const Vector& x, const Vector& u);

/// Dx*(u) p = (I - dT/dx)^{-1} dT/du p evaluated at the supplied fixed point.
/// Throws SingularMatrix when I - dT/dx is numerically singular.
Vector implicit_jvp(const FixedPointProblem& problem, const Vector& x_star, const Vector& u,
                    const Vector& p);
/// w^T Dx*(u) = ((I - dT/dx)^{-T} w)^T dT/du at the supplied fixed point.
Vector implicit_vjp(const FixedPointProblem& problem, const Vector& x_star, const Vector& u,
                    const Vector& w);

// ---------------------------------------------------------------------------
// Smooth objectives and the gradient-descent map

/// f(x, u) with the second-order products needed to differentiate x - a grad f.
class SmoothObjective {
 public:
  virtual ~SmoothObjective() = default;

  virtual std::size_t dim_x() const = 0;
  virtual std::size_t dim_u() const = 0;

  virtual double value(const Vector& x, const Vector& u) const = 0;
  virtual Vector grad_x(const Vector& x, const Vector& u) const = 0;
  /// d(grad_x f)/dx v. The Hessian is symmetric, so this also serves as the
  /// transposed product.
  virtual Vector hess_xx(const Vector& x, const Vector& u, const Vector& v) const = 0;
  /// d(grad_x f)/du p, a dim_x vector.
  virtual Vector hess_xu(const Vector& x, const Vector& u, const Vector& p) const = 0;
  /// w^T d(grad_x f)/du, a dim_u vector.
  virtual Vector hess_xu_t(const Vector& x, const Vector& u, const Vector& w) const = 0;
};

/// f(x, u) = ||A x - b||^2 / 2 + u ||x||^2 / 2 with a scalar ridge weight u = [u].
class RidgeObjective final : public SmoothObjective {
 public:
  RidgeObjective(Matrix a, Vector b);

  std::size_t dim_x() const override { return a_.cols(); }
  std::size_t dim_u() const override { return 1; }

  double value(const Vector& x, const Vector& u) const override;
  Vector grad_x(const Vector& x, const Vector& u) const override;
  Vector hess_xx(const Vector& x, const Vector& u, const Vector& v) const override;
  Vector hess_xu(const Vector& x, const Vector& u, const Vector& p) const override;
  Vector hess_xu_t(const Vector& x, const Vector& u, const Vector& w) const override;

  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }

 private:
  Matrix a_;
  Matrix gram_;
  Vector b_;
};

/// f(x, u) = ||A x - b||^2 / 2 where the data itself is the parameter:
/// u = vec(A) ++ b with vec(A) row-major, so dim_u = rows*cols + rows.
class DataLeastSquaresObjective final : public SmoothObjective {
 public:
  DataLeastSquaresObjective(std::size_t rows, std::size_t cols);

  std::size_t dim_x() const override { return cols_; }
  std::size_t dim_u() const override { return rows_ * cols_ + rows_; }

  double value(const Vector& x, const Vector& u) const override;
  Vector grad_x(const Vector& x, const Vector& u) const override;
  Vector hess_xx(const Vector& x, const Vector& u, const Vector& v) const override;
  Vector hess_xu(const Vector& x, const Vector& u, const Vector& p) const override;
  Vector hess_xu_t(const Vector& x, const Vector& u, const Vector& w) const override;

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
};

/// f(x, u) = ||x - u||^2 / 2, so the minimizer is x*(u) = u.
class ShiftedQuadratic final : public SmoothObjective {
 public:
  explicit ShiftedQuadratic(std::size_t n);

  std::size_t dim_x() const override { return n_; }
  std::size_t dim_u() const override { return n_; }

  double value(const Vector& x, const Vector& u) const override;
  Vector grad_x(const Vector& x, const Vector& u) const override;
  Vector hess_xx(const Vector& x, const Vector& u, const Vector& v) const override;
  Vector hess_xu(const Vector& x, const Vector& u, const Vector& p) const override;
  Vector hess_xu_t(const Vector& x, const Vector& u, const Vector& w) const override;

 private:
  std::size_t n_;
};

/// Packs (A, b) into the flat parameter used by DataLeastSquaresObjective.
Vector pack_data_parameter(const Matrix& a, const Vector& b);
/// Inverse of pack_data_parameter.
std::pair<Matrix, Vector> unpack_data_parameter(const Vector& u, std::size_t rows,
                                                std::size_t cols);

/// T(x, u) = x - alpha grad_x f(x, u).
class GradientDescentMap : public FixedPointProblem {
 public:
  GradientDescentMap(std::shared_ptr<const SmoothObjective> objective, double alpha);

  std::size_t dim_x() const override { return objective_->dim_x(); }
  std::size_t dim_u() const override { return objective_->dim_u(); }

  Vector eval(const Vector& x, const Vector& u) const override;
  Vector jvp_x(const Vector& x, const Vector& u, const Vector& v) const override;
  Vector vjp_x(const Vector& x, const Vector& u, const Vector& w) const override;
  Vector jvp_u(const Vector& x, const Vector& u, const Vector& p) const override;
  Vector vjp_u(const Vector& x, const Vector& u, const Vector& w) const override;

  double alpha() const { return alpha_; }
  const SmoothObjective& objective() const { return *objective_; }

 private:
  std::shared_ptr<const SmoothObjective> objective_;
  double alpha_;
};

std::shared_ptr<const GradientDescentMap> gd_map(std::shared_ptr<const SmoothObjective> objective,
                                                 double alpha);

/// Heavy-ball update on the stacked state z = (x1, x2):
///   T(z, u) = (x1 - alpha grad f(x1, u) + beta (x1 - x2), x1).
/// Generally not a contraction in the spectral norm even when its spectral
/// radius is below one.
class HeavyBallMap final : public FixedPointProblem {
 public:
  HeavyBallMap(std::shared_ptr<const GradientDescentMap> inner, double beta);

  std::size_t dim_x() const override { return 2 * inner_->dim_x(); }
  std::size_t dim_u() const override { return inner_->dim_u(); }

  Vector eval(const Vector& z, const Vector& u) const override;
  Vector jvp_x(const Vector& z, const Vector& u, const Vector& v) const override;
  Vector vjp_x(const Vector& z, const Vector& u, const Vector& w) const override;
  Vector jvp_u(const Vector& z, const Vector& u, const Vector& p) const override;
  Vector vjp_u(const Vector& z, const Vector& u, const Vector& w) const override;

  double beta() const { return beta_; }

 private:
  std::shared_ptr<const GradientDescentMap> inner_;
  double beta_;
};

std::shared_ptr<const HeavyBallMap> heavy_ball_map(std::shared_ptr<const SmoothObjective> objective,
                                                   double alpha, double beta);

/// T(x, u) = Jx x + Ju u + c. Its fixed point is (I - Jx)^{-1} (Ju u + c).
class AffineMap final : public FixedPointProblem {
 public:
  AffineMap(Matrix jx, Matrix ju, Vector c);
  AffineMap(Matrix jx, Matrix ju);

  std::size_t dim_x() const override { return jx_.rows(); }
  std::size_t dim_u() const override { return ju_.cols(); }

  Vector eval(const Vector& x, const Vector& u) const override;
  Vector jvp_x(const Vector& x, const Vector& u, const Vector& v) const override;
  Vector vjp_x(const Vector& x, const Vector& u, const Vector& w) const override;
  Vector jvp_u(const Vector& x, const Vector& u, const Vector& p) const override;
  Vector vjp_u(const Vector& x, const Vector& u, const Vector& w) const override;
  std::optional<Vector> solution(const Vector& u) const override;

 private:
  Matrix jx_;
  Matrix ju_;
  Vector c_;
};

// ---------------------------------------------------------------------------
// Least-squares instances

enum class RidgeMode {
  ScalarRidge,  ///< u = [u], f = ||Ax - b||^2/2 + u ||x||^2/2
  Data,         ///< u = vec(A) ++ b, f = ||Ax - b||^2/2
};

/// A least-squares problem solved by gradient descent with step alpha.
struct RidgeLS {
  Matrix a;
  Vector b;
  double alpha = 0.0;
  RidgeMode mode = RidgeMode::ScalarRidge;

  std::size_t dim_x() const { return a.cols(); }
  /// Parameter vector for this instance: [ridge] in scalar mode (ridge must be
  /// non-negative), vec(A) ++ b in data mode (ridge ignored).
  Vector parameter(double ridge = 0.0) const;
};

/// The gradient-descent map of a RidgeLS, with the closed-form fixed point.
class RidgeMap final : public FixedPointProblem {
 public:
  explicit RidgeMap(RidgeLS problem);

  std::size_t dim_x() const override { return gd_.dim_x(); }
  std::size_t dim_u() const override { return gd_.dim_u(); }

  Vector eval(const Vector& x, const Vector& u) const override { return gd_.eval(x, u); }
  Vector jvp_x(const Vector& x, const Vector& u, const Vector& v) const override {
    return gd_.jvp_x(x, u, v);
  }
  Vector vjp_x(const Vector& x, const Vector& u, const Vector& w) const override {
    return gd_.vjp_x(x, u, w);
  }
  Vector jvp_u(const Vector& x, const Vector& u, const Vector& p) const override {
    return gd_.jvp_u(x, u, p);
  }
  Vector vjp_u(const Vector& x, const Vector& u, const Vector& w) const override {
    return gd_.vjp_u(x, u, w);
  }
  std::optional<Vector> solution(const Vector& u) const override;

  const RidgeLS& problem() const { return problem_; }

 private:
  RidgeLS problem_;
  GradientDescentMap gd_;
};

std::shared_ptr<const RidgeMap> gd_map(const RidgeLS& problem);

/// x*(u) from the normal equations: (A^T A + u I) x = A^T b in scalar mode,
/// (A^T A) x = A^T b with (A, b) unpacked from u in data mode.
Vector ridge_solution_oracle(const RidgeLS& problem, const Vector& u);
/// Dx*(u) p by one linear solve with I - dT/dx at x*(u).
Vector ridge_solution_jacobian_oracle(const RidgeLS& problem, const Vector& u,
                                      const Vector& direction);
/// w^T Dx*(u), the reverse-mode counterpart.
Vector ridge_solution_vjp_oracle(const RidgeLS& problem, const Vector& u, const Vector& seed);

/// Hessian of f in x: A^T A (+ u I in scalar mode).
Matrix ridge_hessian(const RidgeLS& problem, const Vector& u);

}  // namespace unroll
