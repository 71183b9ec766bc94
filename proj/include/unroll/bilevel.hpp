#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "unroll/densela.hpp"
#include "unroll/fixmap.hpp"

namespace unroll {

/// Outer objective l(x) evaluated at the inner solution.
struct OuterLoss {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

struct BilevelConfig {
  std::size_t rounds = 1;
  double eps = 1e-8;
  /// Outer step size for round r. Zero is allowed and freezes u.
  std::function<double(std::size_t)> step_size = [](std::size_t) { return 1e-3; };
  Vector x0;
  Vector u0;
  bool warm_start = true;
  std::size_t inner_cap = 10000;
};

struct BilevelRound {
  Vector u;                    ///< u^r
  std::size_t inner_iters = 0;  ///< K_r
  double outer_loss = 0.0;     ///< l(x^{K_r}(u^r))
  Vector hypergradient;        ///< d^r
  double initial_error_proxy = 0.0;  ///< ||x^0(u^r) - x^{K_r}(u^r)||
  double step_size = 0.0;
  bool inner_cap_reached = false;
};

struct BilevelTrace {
  std::vector<BilevelRound> rounds;
  Vector u_final;
  bool warm_start = true;
  // Settings needed to check that two traces are comparable.
  double eps = 0.0;
  std::size_t inner_cap = 0;
  Vector x0;
  Vector u0;

  std::size_t total_inner_iters() const;
};

/// Gradient-based outer loop with reverse-mode hypergradients.
///
/// Each round solves the inner problem until ||x^k - x^{k-1}|| <= eps (or
/// inner_cap steps), seeds a reverse sweep with grad l(x^{K_r}), takes
/// u <- u - tau_r d and, when warm starting, begins the next inner solve at
/// x^{K_r}. Throws NonFiniteIterate if the inner loop diverges.
BilevelTrace run_bilevel(const FixedPointProblem& problem, const OuterLoss& loss,
                         const BilevelConfig& cfg);

struct RoundComparison {
  std::size_t round = 0;
  std::size_t iters_warm = 0;
  std::size_t iters_cold = 0;
  double proxy_warm = 0.0;
  double proxy_cold = 0.0;
  double iter_ratio = 0.0;   ///< warm / cold
  double proxy_ratio = 0.0;  ///< warm / cold
};

struct WarmStartReport {
  std::vector<RoundComparison> rounds;
  std::size_t total_warm = 0;
  std::size_t total_cold = 0;
  /// Lower median of iter_ratio over rounds r >= 1 (1 when there are none).
  double median_iter_ratio = 1.0;
  /// proxy_warm <= proxy_cold on every round r >= 1 (vacuous for one round).
  bool warm_proxy_never_larger = true;
  bool warm_iters_never_larger = true;
};

/// Pairs a warm-started and a cold-started trace of the same experiment.
/// Throws MismatchedConfig when the two runs do not share settings.
WarmStartReport warm_start_truncation_report(const BilevelTrace& warm, const BilevelTrace& cold);

}  // namespace unroll
