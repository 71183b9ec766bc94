#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "support.hpp"
#include "unroll/analysis.hpp"
#include "unroll/errors.hpp"
#include "unroll/planner.hpp"

using namespace unroll;
using testing::code_of;

namespace {

// The bound at k = K - T written directly in rho.
double direct_bound(double rho, double K, double T, double omega, double fwd0, double gamma,
                    double eps0) {
  return std::pow(rho, K - T) * fwd0 + (K - T) * std::pow(rho, K + omega * T - 1.0) * gamma * eps0;
}

struct RandomObjective {
  TruncationObjective obj;
  double rho, omega, fwd0, gamma, eps0;
  std::size_t K;
};

RandomObjective random_objective(oracle::Gen& gen) {
  RandomObjective r{};
  r.rho = gen.uniform(0.5, 0.999);
  r.K = 10 + static_cast<std::size_t>(gen.uniform(0.0, 500.0));
  r.omega = gen.uniform(1.0, 4.0);
  r.fwd0 = gen.uniform(0.0, 3.0);
  r.gamma = gen.uniform(0.0, 3.0);
  r.eps0 = gen.uniform(0.0, 3.0);
  r.obj = make_objective(r.rho, r.K, r.omega, r.fwd0, r.gamma, r.eps0);
  return r;
}

}  // namespace

TEST_CASE("budget plan examples") {
  const BudgetPlan p = make_plan(500, 100, 3.0);
  CHECK(p.K_prime == 800);
  CHECK(p.T_prime == 400);
  CHECK(p.derivative_iters == 400);

  const BudgetPlan id = make_plan(40, 0, 2.5);
  CHECK(id.K_prime == 40);
  CHECK(id.T_prime == 0);
  CHECK(id.derivative_iters == 40);

  const BudgetPlan full = make_plan(10, 10, 2.0);
  CHECK(full.derivative_iters == 0);
  CHECK(full.T_prime == 30);
  CHECK(full.K_prime == 30);

  const BudgetPlan fractional = make_plan(10, 3, 2.5);  // omega T = 7.5
  CHECK(fractional.K_prime == 17);
  CHECK(fractional.T_prime == 10);

  CHECK(code_of([] { (void)make_plan(10, 11, 3.0); }) == ErrorCode::InvalidRange);
  CHECK(code_of([] { (void)make_plan(10, 5, 0.5); }) == ErrorCode::InvalidRange);
  CHECK(kForwardModeOmega == 2.5);
  CHECK(kReverseModeOmega == 3.0);
}

TEST_CASE("budget conservation") {
  for (std::size_t K : {1, 7, 100, 999}) {
    for (double omega : {1.0, 2.0, 2.5, 3.0, 3.7}) {
      for (std::size_t T = 0; T <= K; T += std::max<std::size_t>(1, K / 13)) {
        const BudgetPlan p = make_plan(K, T, omega);
        CHECK(p.K_prime == K + static_cast<std::size_t>(std::floor(omega * static_cast<double>(T))));
        CHECK(p.T_prime == p.K_prime - (K - T));
        CHECK(p.total_cost() <= p.budget() + 1e-9);
        CHECK(p.budget() - p.total_cost() < omega);
      }
    }
  }
}

TEST_CASE("objective matches the direct bound expression") {
  const double rho = 0.9;
  const std::size_t K = 100;
  const double omega = 3.0;
  const auto obj = make_objective(rho, K, omega, 1.0, 1.0, 1.0);
  for (std::size_t T = 0; T <= K; ++T) {
    const double t = static_cast<double>(T);
    const double want = direct_bound(rho, 100.0, t, omega, 1.0, 1.0, 1.0);
    CHECK(std::abs(objective_h(obj, t) - want) <= 1e-12 * want);
  }
  CHECK(code_of([&] { (void)objective_h(obj, -0.5); }) == ErrorCode::InvalidRange);
  CHECK(code_of([&] { (void)objective_h(obj, 100.5); }) == ErrorCode::InvalidRange);
}

TEST_CASE("objective equals the late-start bound at the planned indices") {
  // With integer omega T, h(T) is the late-start bound after K - T steps
  // started at T' = T + omega T.
  const double rho = 0.93;
  const std::size_t K = 80;
  const auto obj = make_objective(rho, K, 3.0, 0.8, 1.7, 2.1);
  const auto c = BoundConstants::with_gamma(rho, 0.0, 0.0, 1.7, 1.7, 2.1, 0.8,
                                            ConstantsSource::Analytic);
  for (std::size_t T = 0; T <= K; ++T) {
    const BudgetPlan plan = make_plan(K, T, 3.0);
    const double bound = late_start_bound_series(c, plan.derivative_iters, plan.T_prime).back();
    const double h = objective_h(obj, static_cast<double>(T));
    CHECK(std::abs(h - bound) <= 1e-12 * std::max(h, 1e-300));
  }
}

TEST_CASE("objective edge cases") {
  const auto no_curse = make_objective(0.9, 50, 3.0, 1.0, 0.0, 1.0);
  CHECK(no_curse.B == 0.0);
  CHECK(optimal_T_discrete(no_curse).T_star == 0);
  CHECK(optimal_T_relaxed(no_curse) == 0.0);
  for (double t : {0.0, 10.0, 50.0}) {
    CHECK(objective_h(no_curse, t) == doctest::Approx(no_curse.A * std::exp(no_curse.delta * t)));
  }

  const auto only_curse = make_objective(0.9, 50, 3.0, 0.0, 1.0, 1.0);
  CHECK(only_curse.A == 0.0);
  CHECK(optimal_T_discrete(only_curse).T_star == 50);
  CHECK(optimal_T_discrete(only_curse).h_star == 0.0);
  CHECK(optimal_T_relaxed(only_curse) == 50.0);

  const auto zero = make_objective(0.9, 50, 3.0, 0.0, 0.0, 1.0);
  const auto d = objective_h_derivatives(zero, 10.0);
  CHECK(d.h1 == 0.0);
  CHECK(d.h2 == 0.0);
  CHECK(code_of([&] { (void)optimal_T_relaxed(zero); }) == ErrorCode::DegenerateObjective);
  CHECK(code_of([&] { (void)objective_h_derivatives(zero, 51.0); }) == ErrorCode::InvalidRange);

  const auto clamped = make_objective(0.0, 20, 3.0, 1.0, 1.0, 1.0);
  CHECK(clamped.rho_clamped);
  CHECK(std::isfinite(objective_h(clamped, 5.0)));
  CHECK_FALSE(make_objective(0.5, 20, 3.0, 1.0, 1.0, 1.0).rho_clamped);
  CHECK(code_of([] { (void)make_objective(1.0, 20, 3.0, 1.0, 1.0, 1.0); }) ==
        ErrorCode::NotAContraction);
  CHECK(code_of([] { (void)make_objective(0.5, 20, 0.9, 1.0, 1.0, 1.0); }) ==
        ErrorCode::InvalidRange);
}

TEST_CASE("closed-form derivatives match finite differences") {
  oracle::Gen gen(301);
  for (int i = 0; i < 100; ++i) {
    const auto r = random_objective(gen);
    const double K = static_cast<double>(r.K);
    for (double frac : {0.1, 0.37, 0.5, 0.83}) {
      const double t = frac * K;
      const auto d = objective_h_derivatives(r.obj, t);
      const double fd = oracle::central_difference_scalar(
          [&](double s) { return objective_h(r.obj, s); }, t);
      const double scale = std::max(std::abs(d.h1), 1e-6 * objective_h(r.obj, t));
      CHECK(std::abs(d.h1 - fd) <= 1e-6 * scale + 1e-12);
    }
  }
}

TEST_CASE("objective is convex on the whole range") {
  oracle::Gen gen(303);
  for (int i = 0; i < 100; ++i) {
    const auto r = random_objective(gen);
    const bool strict = r.obj.A > 0.0 || r.obj.B > 0.0;
    for (int j = 0; j < 1000; ++j) {
      const double t = static_cast<double>(r.K) * j / 999.0;
      const double h2 = objective_h_derivatives(r.obj, t).h2;
      CHECK(h2 >= 0.0);
      if (strict) CHECK(h2 > 0.0);
    }
  }
}

TEST_CASE("discrete and relaxed optima agree") {
  oracle::Gen gen(307);
  int interior = 0;
  for (int i = 0; i < 100; ++i) {
    const auto r = random_objective(gen);
    if (!(r.obj.A > 0.0 || r.obj.B > 0.0)) continue;
    const auto disc = optimal_T_discrete(r.obj);
    double brute = objective_h(r.obj, 0.0);
    std::size_t brute_t = 0;
    for (std::size_t t = 1; t <= r.K; ++t) {
      const double h = objective_h(r.obj, static_cast<double>(t));
      if (h < brute) {
        brute = h;
        brute_t = t;
      }
    }
    CHECK(disc.T_star == brute_t);
    CHECK(disc.h_star == brute);

    const double t_hat = optimal_T_relaxed(r.obj);
    const double lo = std::floor(t_hat);
    const double hi = std::min(std::ceil(t_hat), static_cast<double>(r.K));
    CHECK((static_cast<double>(disc.T_star) == lo || static_cast<double>(disc.T_star) == hi));
    CHECK(disc.h_star <= std::min(objective_h(r.obj, lo), objective_h(r.obj, hi)));
    CHECK(objective_h(r.obj, t_hat) <= disc.h_star * (1.0 + 1e-12));
    if (t_hat > 0.0 && t_hat < static_cast<double>(r.K)) ++interior;
  }
  CHECK(interior > 10);
}
