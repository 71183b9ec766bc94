#pragma once

#include <cstddef>

namespace unroll {

/// Default cost ratio of one derivative step to one map evaluation.
inline constexpr double kForwardModeOmega = 2.5;
inline constexpr double kReverseModeOmega = 3.0;

/// Fixed-budget split between plain iterations and derivative iterations.
///
/// Without truncation both the algorithm and the derivative run K steps, at
/// cost K + omega K. Dropping T derivative steps frees omega T evaluations,
/// so the algorithm runs K' = K + floor(omega T) steps of which the first
/// T' = K' - (K - T) run idle. Flooring keeps the cost at or below budget.
struct BudgetPlan {
  std::size_t K = 0;
  std::size_t T = 0;
  double omega = 1.0;
  std::size_t K_prime = 0;
  std::size_t T_prime = 0;
  std::size_t derivative_iters = 0;

  double total_cost() const;
  double budget() const;
};

/// Throws InvalidRange unless 0 <= T <= K and omega >= 1.
BudgetPlan make_plan(std::size_t K, std::size_t T, double omega);

/// Bound at the final derivative step as a function of the truncation index:
///   h(T) = A e^{delta T} + B (K - T) e^{-omega delta T}
/// with A = rho^K fwd0, B = rho^{K-1} gamma eps0, delta = -ln rho.
struct TruncationObjective {
  double A = 0.0;
  double B = 0.0;
  double delta = 0.0;
  double omega = 1.0;
  std::size_t K = 0;
  double rho = 0.0;
  bool rho_clamped = false;  ///< rho was moved into [1e-15, 1 - 1e-15]
};

TruncationObjective make_objective(double rho, std::size_t K, double omega, double fwd0,
                                   double gamma, double eps0);

/// h(T) on [0, K]; throws InvalidRange outside.
double objective_h(const TruncationObjective& obj, double T);

struct ObjectiveDerivatives {
  double h1;
  double h2;
};

/// Closed-form h'(T) and h''(T).
ObjectiveDerivatives objective_h_derivatives(const TruncationObjective& obj, double T);

struct DiscreteOptimum {
  std::size_t T_star;
  double h_star;
};

/// Exhaustive minimum of h over T = 0..K, ties to the smaller T.
DiscreteOptimum optimal_T_discrete(const TruncationObjective& obj);

/// Minimizer of h on [0, K] by bisection on the increasing h'. Returns an
/// endpoint when h' keeps one sign. Throws DegenerateObjective if A = B = 0.
double optimal_T_relaxed(const TruncationObjective& obj, double tol = 1e-9);

}  // namespace unroll
