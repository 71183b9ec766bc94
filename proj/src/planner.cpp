#include "unroll/planner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "unroll/errors.hpp"

namespace unroll {

namespace {

constexpr double kRhoFloor = 1e-15;
constexpr double kRhoCeil = 1.0 - 1e-15;

void check_T(const TruncationObjective& obj, double T) {
  if (!(T >= 0.0 && T <= static_cast<double>(obj.K))) {
    throw Error(ErrorCode::InvalidRange,
                "T = " + std::to_string(T) + " outside [0, " + std::to_string(obj.K) + "]");
  }
}

// A e^{delta T} and B e^{-omega delta T}, evaluated through logs so that
// large K with small rho neither overflows nor produces 0 * inf.
double grow(const TruncationObjective& o, double T) {
  return o.A == 0.0 ? 0.0 : std::exp(std::log(o.A) + o.delta * T);
}

double decay(const TruncationObjective& o, double T) {
  return o.B == 0.0 ? 0.0 : std::exp(std::log(o.B) - o.omega * o.delta * T);
}

}  // namespace

double BudgetPlan::total_cost() const {
  return static_cast<double>(K_prime) + omega * static_cast<double>(derivative_iters);
}

double BudgetPlan::budget() const { return static_cast<double>(K) * (1.0 + omega); }

BudgetPlan make_plan(std::size_t K, std::size_t T, double omega) {
  if (T > K) {
    throw Error(ErrorCode::InvalidRange,
                "truncation T = " + std::to_string(T) + " exceeds K = " + std::to_string(K));
  }
  if (!(omega >= 1.0) || !std::isfinite(omega)) {
    throw Error(ErrorCode::InvalidRange, "omega must be finite and >= 1");
  }
  const auto extra = static_cast<std::size_t>(std::floor(omega * static_cast<double>(T)));
  BudgetPlan plan;
  plan.K = K;
  plan.T = T;
  plan.omega = omega;
  plan.K_prime = K + extra;
  plan.T_prime = T + extra;
  plan.derivative_iters = K - T;
  return plan;
}

TruncationObjective make_objective(double rho, std::size_t K, double omega, double fwd0,
                                   double gamma, double eps0) {
  if (!(omega >= 1.0)) throw Error(ErrorCode::InvalidRange, "omega must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw Error(ErrorCode::NotAContraction, "rho must lie in [0, 1)");
  }
  if (fwd0 < 0.0 || gamma < 0.0 || eps0 < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "fwd0, gamma and eps0 must be non-negative");
  }
  TruncationObjective obj;
  obj.rho = std::clamp(rho, kRhoFloor, kRhoCeil);
  obj.rho_clamped = obj.rho != rho;
  obj.delta = -std::log(obj.rho);
  obj.omega = omega;
  obj.K = K;
  const double log_rho = std::log(obj.rho);
  const double k = static_cast<double>(K);
  obj.A = fwd0 == 0.0 ? 0.0 : fwd0 * std::exp(k * log_rho);
  obj.B = (gamma == 0.0 || eps0 == 0.0) ? 0.0 : gamma * eps0 * std::exp((k - 1.0) * log_rho);
  return obj;
}

double objective_h(const TruncationObjective& obj, double T) {
  check_T(obj, T);
  return grow(obj, T) + decay(obj, T) * (static_cast<double>(obj.K) - T);
}

ObjectiveDerivatives objective_h_derivatives(const TruncationObjective& obj, double T) {
  check_T(obj, T);
  const double d = obj.delta;
  const double wd = obj.omega * d;
  const double rest = static_cast<double>(obj.K) - T;
  const double g = grow(obj, T);
  const double e = decay(obj, T);
  return {g * d + e * (-1.0 - wd * rest), g * d * d + e * wd * (2.0 + wd * rest)};
}

DiscreteOptimum optimal_T_discrete(const TruncationObjective& obj) {
  DiscreteOptimum best{0, objective_h(obj, 0.0)};
  for (std::size_t T = 1; T <= obj.K; ++T) {
    const double h = objective_h(obj, static_cast<double>(T));
    if (h < best.h_star) best = {T, h};
  }
  return best;
}

double optimal_T_relaxed(const TruncationObjective& obj, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (obj.A == 0.0 && obj.B == 0.0) {
    throw Error(ErrorCode::DegenerateObjective, "h vanishes identically; every T is optimal");
  }
  double lo = 0.0;
  double hi = static_cast<double>(obj.K);
  if (objective_h_derivatives(obj, lo).h1 >= 0.0) return lo;
  if (objective_h_derivatives(obj, hi).h1 <= 0.0) return hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (objective_h_derivatives(obj, mid).h1 > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace unroll
