#include "unroll/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "unroll/errors.hpp"

namespace unroll {

namespace {

void validate(const BoundConstants& c) {
  if (!(c.rho >= 0.0 && c.rho < 1.0)) {
    throw Error(ErrorCode::NotAContraction, "rho = " + std::to_string(c.rho) + " is not in [0, 1)");
  }
  for (double v : {c.kappa, c.M_x, c.M_u, c.gamma, c.eps0, c.fwd0}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, "bound constants must be finite and non-negative");
    }
  }
}

// k rho^(k - 1 + shift), with the k = 0 term defined as zero.
double curse_term(std::size_t k, double rho, std::size_t shift) {
  if (k == 0) return 0.0;
  return static_cast<double>(k) * std::pow(rho, static_cast<double>(k - 1 + shift));
}

}  // namespace

BoundConstants BoundConstants::from_components(double rho, double kappa, double M_x, double M_u,
                                               double eps0, double fwd0, ConstantsSource source) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw Error(ErrorCode::NotAContraction, "rho = " + std::to_string(rho) + " is not in [0, 1)");
  }
  BoundConstants c{rho, kappa, M_x, M_u, M_x * kappa / (1.0 - rho) + M_u, eps0, fwd0, source};
  validate(c);
  return c;
}

BoundConstants BoundConstants::with_gamma(double rho, double kappa, double M_x, double M_u,
                                          double gamma, double eps0, double fwd0,
                                          ConstantsSource source) {
  BoundConstants c{rho, kappa, M_x, M_u, gamma, eps0, fwd0, source};
  validate(c);
  return c;
}

BoundConstants constants_for_ridge(const RidgeLS& problem, const Vector& u, const Vector& probe,
                                   const Trajectory* trajectory, GammaVariant variant) {
  const RidgeMap map(problem);
  if (probe.size() != map.dim_u()) {
    throw Error(ErrorCode::DimensionMismatch, "constants_for_ridge: probe size");
  }
  const double alpha = problem.alpha;
  const SpectralExtremes h = spectral_extremes_sym(ridge_hessian(problem, u));
  const double rho = std::max(std::abs(1.0 - alpha * h.lambda_min), std::abs(1.0 - alpha * h.lambda_max));
  if (!(rho < 1.0)) {
    throw Error(ErrorCode::NotAContraction,
                "gradient step is not a contraction (rho = " + std::to_string(rho) + ")");
  }

  double m_u = 0.0;
  ConstantsSource source = ConstantsSource::Analytic;
  if (problem.mode == RidgeMode::ScalarRidge) {
    m_u = alpha * std::abs(probe[0]);
  } else {
    const std::size_t rows = problem.a.rows();
    const std::size_t cols = problem.a.cols();
    const Matrix a = unpack_data_parameter(u, rows, cols).first;
    const Matrix da = unpack_data_parameter(probe, rows, cols).first;
    const Matrix sym = matmul(transpose(da), a) + matmul(transpose(a), da);
    m_u = alpha * spectral_norm(sym);
    source = ConstantsSource::TrajectoryEstimate;
  }

  const Vector x_star = ridge_solution_oracle(problem, u);
  double kappa = norm(map.jvp_u(x_star, u, probe));
  if (trajectory != nullptr) {
    for (const Vector& x : trajectory->iterates) kappa = std::max(kappa, norm(map.jvp_u(x, u, probe)));
  }

  const Vector x0 = trajectory != nullptr ? trajectory->initial() : Vector(problem.dim_x());
  const Vector dx_star = implicit_jvp(map, x_star, u, probe);
  const double eps0 = norm(x0 - x_star);
  const double fwd0 = norm(dx_star);
  constexpr double m_x = 0.0;

  if (variant == GammaVariant::KappaRatio) {
    return BoundConstants::from_components(rho, kappa, m_x, m_u, eps0, fwd0, source);
  }
  return BoundConstants::with_gamma(rho, kappa, m_x, m_u, m_x * norm(dx_star) + m_u, eps0, fwd0,
                                    source);
}

BoundConstants estimate_constants(const FixedPointProblem& problem, const Trajectory& trajectory,
                                  const Vector& x_star, const Vector& probe,
                                  const Vector& oracle_jvp, const Vector& x0_dot) {
  if (!trajectory.has_tape) throw Error(ErrorCode::NoTape, "estimate_constants needs a tape");
  const Vector& u = trajectory.u;
  const Matrix j_star = jacobian_x(problem, x_star, u);
  const Vector ju_star = problem.jvp_u(x_star, u, probe);

  double rho = spectral_norm(j_star);
  double m_x = 0.0;
  double m_u = 0.0;
  double kappa = norm(ju_star);
  for (const Vector& x : trajectory.iterates) {
    const Matrix j = jacobian_x(problem, x, u);
    const Vector ju = problem.jvp_u(x, u, probe);
    rho = std::max(rho, spectral_norm(j));
    kappa = std::max(kappa, norm(ju));
    const double dist = norm(x - x_star);
    if (dist > 1e-12 * (1.0 + norm(x_star))) {
      m_x = std::max(m_x, spectral_norm(j - j_star) / dist);
      m_u = std::max(m_u, norm(ju - ju_star) / dist);
    }
  }
  if (!(rho < 1.0)) {
    throw Error(ErrorCode::NotAContraction,
                "||dT/dx|| reaches " + std::to_string(rho) + " along the trajectory");
  }
  return BoundConstants::from_components(rho, kappa, m_x, m_u, norm(trajectory.initial() - x_star),
                                         norm(x0_dot - oracle_jvp),
                                         ConstantsSource::TrajectoryEstimate);
}

std::vector<double> forward_bound_series(const BoundConstants& c, std::size_t K) {
  return late_start_bound_series(c, K, 0);
}

std::vector<double> late_start_bound_series(const BoundConstants& c, std::size_t K,
                                            std::size_t late_start) {
  std::vector<double> out;
  out.reserve(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    out.push_back(std::pow(c.rho, static_cast<double>(k)) * c.fwd0 +
                  curse_term(k, c.rho, late_start) * c.gamma * c.eps0);
  }
  return out;
}

std::vector<double> gamma_residual_check(const FixedPointProblem& problem,
                                         const Trajectory& trajectory, const Vector& x_star,
                                         const Vector& probe, const Vector& oracle_jvp) {
  if (!trajectory.has_tape) throw Error(ErrorCode::NoTape, "gamma_residual_check needs a tape");
  const Vector& u = trajectory.u;
  const Vector at_star = problem.jvp_x(x_star, u, oracle_jvp) + problem.jvp_u(x_star, u, probe);
  std::vector<double> out;
  out.reserve(trajectory.iterates.size());
  for (const Vector& x : trajectory.iterates) {
    const Vector at_k = problem.jvp_x(x, u, oracle_jvp) + problem.jvp_u(x, u, probe);
    out.push_back(norm(at_k - at_star));
  }
  return out;
}

}  // namespace unroll
