#include <doctest.h>

#include <cmath>
#include <memory>

#include "oracles.hpp"
#include "support.hpp"
#include "unroll/bilevel.hpp"
#include "unroll/errors.hpp"
#include "unroll/fixmap.hpp"
#include "unroll/solver.hpp"

using namespace unroll;
using testing::code_of;

namespace {

OuterLoss half_square() {
  return {[](const Vector& x) { return 0.5 * dot(x, x); }, [](const Vector& x) { return x; }};
}

struct RidgeTuning {
  RidgeLS train;
  Matrix a_val;
  Vector b_val;

  OuterLoss loss() const {
    return {[this](const Vector& x) {
              const Vector r = matvec(a_val, x) - b_val;
              return 0.5 * dot(r, r);
            },
            [this](const Vector& x) { return matvec_transposed(a_val, matvec(a_val, x) - b_val); }};
  }
};

RidgeTuning ridge_tuning(std::uint64_t seed, std::size_t n, double u0) {
  oracle::Gen gen(seed);
  RidgeTuning t{{gen.uniform_matrix(50, n), gen.normal_vector(50), 1.0, RidgeMode::ScalarRidge},
                gen.uniform_matrix(50, n),
                gen.normal_vector(50)};
  const auto ext = oracle::jacobi_eigenvalues(gram(t.train.a));
  t.train.alpha = 2.0 / (ext.back() + ext.front() + 2.0 * u0);
  return t;
}

BilevelConfig config(std::size_t n, double u0, std::size_t rounds, double eps, double tau,
                     bool warm) {
  BilevelConfig cfg;
  cfg.rounds = rounds;
  cfg.eps = eps;
  cfg.step_size = [tau](std::size_t) { return tau; };
  cfg.x0 = Vector(n);
  cfg.u0 = Vector{u0};
  cfg.warm_start = warm;
  return cfg;
}

}  // namespace

TEST_CASE("scalar bilevel example") {
  const AffineMap map(Matrix{{0.5}}, Matrix{{1.0}});
  BilevelConfig cfg = config(1, 1.0, 1, 1e-10, 0.1, true);
  const BilevelTrace trace = run_bilevel(map, half_square(), cfg);
  REQUIRE(trace.rounds.size() == 1);
  const BilevelRound& r = trace.rounds[0];
  CHECK(std::abs(r.hypergradient[0] - 4.0) <= 1e-3);
  CHECK(r.u == Vector{1.0});
  CHECK(r.outer_loss == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(trace.u_final[0] == doctest::Approx(1.0 - 0.1 * r.hypergradient[0]));
  CHECK(r.step_size == 0.1);
  CHECK_FALSE(r.inner_cap_reached);
  CHECK(trace.total_inner_iters() == r.inner_iters);
}

TEST_CASE("trace has one entry per round") {
  const AffineMap map(Matrix{{0.5}}, Matrix{{1.0}});
  for (std::size_t rounds : {1, 2, 7}) {
    const auto trace = run_bilevel(map, half_square(), config(1, 1.0, rounds, 1e-8, 0.05, true));
    CHECK(trace.rounds.size() == rounds);
  }
}

TEST_CASE("bilevel argument checks") {
  const AffineMap map(Matrix{{0.5}}, Matrix{{1.0}});
  CHECK(code_of([&] { (void)run_bilevel(map, half_square(), config(1, 1.0, 0, 1e-8, 0.1, true)); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([&] { (void)run_bilevel(map, half_square(), config(1, 1.0, 2, 0.0, 0.1, true)); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([&] { (void)run_bilevel(map, half_square(), config(1, 1.0, 2, 1e-8, -0.1, true)); }) ==
        ErrorCode::InvalidArgument);
  BilevelConfig capless = config(1, 1.0, 2, 1e-8, 0.1, true);
  capless.inner_cap = 0;
  CHECK(code_of([&] { (void)run_bilevel(map, half_square(), capless); }) ==
        ErrorCode::InvalidArgument);
  const AffineMap blowup(Matrix{{1e200}}, Matrix{{1.0}});
  CHECK(code_of([&] {
          (void)run_bilevel(blowup, half_square(), config(1, 1.0, 1, 1e-8, 0.1, true));
        }) == ErrorCode::NonFiniteIterate);
}

TEST_CASE("inner cap hits are recorded, not fatal") {
  const AffineMap map(Matrix{{0.99}}, Matrix{{1.0}});
  BilevelConfig cfg = config(1, 1.0, 3, 1e-12, 0.0, false);
  cfg.inner_cap = 20;
  const auto trace = run_bilevel(map, half_square(), cfg);
  for (const auto& r : trace.rounds) {
    CHECK(r.inner_cap_reached);
    CHECK(r.inner_iters == 20);
  }
}

TEST_CASE("ridge hypergradient matches the implicit oracle and finite differences") {
  const RidgeTuning t = ridge_tuning(401, 10, 1.0);
  const auto map = gd_map(t.train);
  const OuterLoss loss = t.loss();
  const double u = 1.0;
  const auto trace = run_bilevel(*map, loss, config(10, u, 1, 1e-12, 0.0, true));
  const double d = trace.rounds[0].hypergradient[0];

  const Vector x_star = ridge_solution_oracle(t.train, Vector{u});
  const Vector implicit = ridge_solution_vjp_oracle(t.train, Vector{u}, loss.gradient(x_star));
  CHECK(std::abs(d - implicit[0]) <= 1e-4 * std::abs(implicit[0]));

  const double fd = oracle::central_difference_scalar(
      [&](double s) { return loss.value(ridge_solution_oracle(t.train, Vector{s})); }, u);
  CHECK(std::abs(d - fd) <= 1e-4 * std::abs(fd));
}

TEST_CASE("warm starts use fewer inner iterations") {
  const RidgeTuning t = ridge_tuning(409, 10, 1.0);
  const auto map = gd_map(t.train);
  const auto warm = run_bilevel(*map, t.loss(), config(10, 1.0, 20, 1e-8, 1e-3, true));
  const auto cold = run_bilevel(*map, t.loss(), config(10, 1.0, 20, 1e-8, 1e-3, false));
  const WarmStartReport rep = warm_start_truncation_report(warm, cold);
  CHECK(rep.rounds.size() == 20);
  CHECK(rep.total_warm == warm.total_inner_iters());
  CHECK(rep.total_cold == cold.total_inner_iters());
  CHECK(rep.total_warm < rep.total_cold);
  CHECK(rep.median_iter_ratio < 1.0);
  CHECK(rep.warm_proxy_never_larger);
  CHECK(rep.warm_iters_never_larger);
  for (std::size_t r = 1; r < 20; ++r) {
    CHECK(rep.rounds[r].proxy_warm <= rep.rounds[r].proxy_cold);
    CHECK(rep.rounds[r].iter_ratio ==
          doctest::Approx(static_cast<double>(rep.rounds[r].iters_warm) /
                          static_cast<double>(rep.rounds[r].iters_cold)));
  }
  // Round 0 is identical in both runs.
  CHECK(rep.rounds[0].iters_warm == rep.rounds[0].iters_cold);
  CHECK(warm.rounds[0].hypergradient == cold.rounds[0].hypergradient);
}

TEST_CASE("a frozen outer variable makes warm restarts immediate") {
  const RidgeTuning t = ridge_tuning(419, 5, 0.5);
  const auto map = gd_map(t.train);
  const auto warm = run_bilevel(*map, t.loss(), config(5, 0.5, 4, 1e-9, 0.0, true));
  const auto cold = run_bilevel(*map, t.loss(), config(5, 0.5, 4, 1e-9, 0.0, false));
  for (std::size_t r = 1; r < 4; ++r) {
    CHECK(warm.rounds[r].inner_iters == 1);
    CHECK(cold.rounds[r].inner_iters == cold.rounds[0].inner_iters);
    CHECK(cold.rounds[r].u == Vector{0.5});
  }
  const WarmStartReport rep = warm_start_truncation_report(warm, cold);
  CHECK(rep.warm_iters_never_larger);
  CHECK(rep.median_iter_ratio < 1.0);
}

TEST_CASE("single-round report is trivial") {
  const RidgeTuning t = ridge_tuning(421, 5, 0.5);
  const auto map = gd_map(t.train);
  const auto warm = run_bilevel(*map, t.loss(), config(5, 0.5, 1, 1e-9, 1e-3, true));
  const auto cold = run_bilevel(*map, t.loss(), config(5, 0.5, 1, 1e-9, 1e-3, false));
  const WarmStartReport rep = warm_start_truncation_report(warm, cold);
  CHECK(rep.rounds.size() == 1);
  CHECK(rep.median_iter_ratio == 1.0);
  CHECK(rep.warm_proxy_never_larger);
  CHECK(rep.warm_iters_never_larger);
}

TEST_CASE("mismatched traces are rejected") {
  const RidgeTuning t = ridge_tuning(431, 5, 0.5);
  const auto map = gd_map(t.train);
  const auto warm = run_bilevel(*map, t.loss(), config(5, 0.5, 3, 1e-9, 1e-3, true));
  const auto cold = run_bilevel(*map, t.loss(), config(5, 0.5, 3, 1e-9, 1e-3, false));
  const auto cold_eps = run_bilevel(*map, t.loss(), config(5, 0.5, 3, 1e-7, 1e-3, false));
  const auto cold_short = run_bilevel(*map, t.loss(), config(5, 0.5, 2, 1e-9, 1e-3, false));
  const auto cold_u = run_bilevel(*map, t.loss(), config(5, 0.6, 3, 1e-9, 1e-3, false));
  CHECK(code_of([&] { (void)warm_start_truncation_report(warm, cold_eps); }) ==
        ErrorCode::MismatchedConfig);
  CHECK(code_of([&] { (void)warm_start_truncation_report(warm, cold_short); }) ==
        ErrorCode::MismatchedConfig);
  CHECK(code_of([&] { (void)warm_start_truncation_report(warm, cold_u); }) ==
        ErrorCode::MismatchedConfig);
  CHECK(code_of([&] { (void)warm_start_truncation_report(warm, warm); }) ==
        ErrorCode::MismatchedConfig);
  CHECK(code_of([&] { (void)warm_start_truncation_report(cold, warm); }) ==
        ErrorCode::MismatchedConfig);
}

TEST_CASE("bilevel runs are deterministic") {
  const RidgeTuning t = ridge_tuning(433, 6, 0.8);
  const auto map = gd_map(t.train);
  const auto a = run_bilevel(*map, t.loss(), config(6, 0.8, 5, 1e-9, 1e-3, true));
  const auto b = run_bilevel(*map, t.loss(), config(6, 0.8, 5, 1e-9, 1e-3, true));
  REQUIRE(a.rounds.size() == b.rounds.size());
  for (std::size_t r = 0; r < a.rounds.size(); ++r) {
    CHECK(a.rounds[r].u == b.rounds[r].u);
    CHECK(a.rounds[r].inner_iters == b.rounds[r].inner_iters);
    CHECK(a.rounds[r].hypergradient == b.rounds[r].hypergradient);
    CHECK(a.rounds[r].outer_loss == b.rounds[r].outer_loss);
    CHECK(a.rounds[r].initial_error_proxy == b.rounds[r].initial_error_proxy);
  }
  CHECK(a.u_final == b.u_final);
}
