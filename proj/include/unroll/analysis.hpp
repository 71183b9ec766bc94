#pragma once

#include <cstddef>
#include <vector>

#include "unroll/densela.hpp"
#include "unroll/fixmap.hpp"
#include "unroll/solver.hpp"

namespace unroll {

enum class ConstantsSource { Analytic, TrajectoryEstimate };

/// Constants of the non-asymptotic derivative error bound.
///
/// rho    contraction modulus of T(., u), in [0, 1)
/// kappa  bound on ||dT/du||
/// M_x    Lipschitz constant of x -> dT/dx(x, u)
/// M_u    Lipschitz constant of x -> dT/du(x, u)
/// gamma  per-iteration injection M_x kappa / (1 - rho) + M_u
/// eps0   ||x^0 - x*||
/// fwd0   ||xdot^0 - Dx*|| (per probe when working with products)
struct BoundConstants {
  double rho = 0.0;
  double kappa = 0.0;
  double M_x = 0.0;
  double M_u = 0.0;
  double gamma = 0.0;
  double eps0 = 0.0;
  double fwd0 = 0.0;
  ConstantsSource source = ConstantsSource::Analytic;

  /// gamma assembled as M_x kappa / (1 - rho) + M_u.
  static BoundConstants from_components(double rho, double kappa, double M_x, double M_u,
                                        double eps0, double fwd0, ConstantsSource source);
  /// gamma supplied directly (e.g. with ||Dx*|| in place of kappa / (1 - rho)).
  static BoundConstants with_gamma(double rho, double kappa, double M_x, double M_u, double gamma,
                                   double eps0, double fwd0, ConstantsSource source);
};

enum class GammaVariant {
  KappaRatio,             ///< M_x kappa / (1 - rho) + M_u
  ExactSolutionJacobian,  ///< M_x ||Dx* p|| + M_u
};

/// Constants for gradient descent on a RidgeLS, measured along `probe`.
///
/// rho is the spectral norm of the constant Jacobian I - alpha H, obtained
/// from the extreme eigenvalues of H. dT/dx does not depend on x, so M_x = 0.
/// M_u is alpha |p| in scalar mode and alpha ||dA^T A + A^T dA|| in data mode.
/// kappa has no global bound (dT/du grows with x) and is the largest
/// ||dT/du(x) p|| over x* and the trajectory iterates. eps0 uses the
/// trajectory's x^0 (zeros without a trajectory); fwd0 assumes xdot^0 = 0.
/// Throws NotAContraction when rho >= 1.
BoundConstants constants_for_ridge(const RidgeLS& problem, const Vector& u, const Vector& probe,
                                   const Trajectory* trajectory = nullptr,
                                   GammaVariant variant = GammaVariant::ExactSolutionJacobian);

/// Trajectory estimates for an arbitrary map: rho is the largest spectral norm
/// of dT/dx over the tape and x*, the Lipschitz constants are the largest
/// difference quotients against x*. Throws NotAContraction when rho >= 1,
/// which is how momentum maps get refused.
BoundConstants estimate_constants(const FixedPointProblem& problem, const Trajectory& trajectory,
                                  const Vector& x_star, const Vector& probe,
                                  const Vector& oracle_jvp, const Vector& x0_dot);

/// rho^k fwd0 + k rho^(k-1) gamma eps0 for k = 0..K.
std::vector<double> forward_bound_series(const BoundConstants& c, std::size_t K);

/// rho^k fwd0 + k rho^(k+T'-1) gamma eps0 for k = 0..K.
std::vector<double> late_start_bound_series(const BoundConstants& c, std::size_t K,
                                            std::size_t late_start);

/// ||(dT/dx(x^k) - dT/dx(x*)) Dx* p + (dT/du(x^k) - dT/du(x*)) p|| for every
/// taped iterate, the quantity bounded by gamma * eps_k.
std::vector<double> gamma_residual_check(const FixedPointProblem& problem,
                                         const Trajectory& trajectory, const Vector& x_star,
                                         const Vector& probe, const Vector& oracle_jvp);

}  // namespace unroll
