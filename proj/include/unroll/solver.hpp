#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "unroll/densela.hpp"
#include "unroll/fixmap.hpp"

namespace unroll {

enum class StopReason { IterationCap, SuccessiveTolerance };

/// Stop after max_iters updates, or once ||x^k - x^{k-1}|| <= successive_tol
/// (checked after each update), whichever fires first. At least one must be set.
struct StopRule {
  std::optional<std::size_t> max_iters;
  std::optional<double> successive_tol;

  static StopRule iterations(std::size_t k) { return {k, std::nullopt}; }
};

/// Iterates x^0..x^K of one fixed-point run. Without a tape only x^0 and the
/// final iterate are kept.
struct Trajectory {
  std::vector<Vector> iterates;
  Vector u;
  std::size_t k_final = 0;
  StopReason stop_reason = StopReason::IterationCap;
  bool has_tape = false;

  const Vector& initial() const { return iterates.front(); }
  const Vector& final_iterate() const { return iterates.back(); }
  /// x^k; throws NoTape for interior k of an untaped run, IndexOutOfRange past K.
  const Vector& at(std::size_t k) const;
};

/// Runs x^{k+1} = T(x^k, u). Throws NonFiniteIterate as soon as an iterate
/// stops being finite.
Trajectory run_fpi(const FixedPointProblem& problem, const Vector& u, const Vector& x0,
                   const StopRule& rule, bool record_tape = true);

/// ||x^k - x*|| for k = 0..K. Requires a tape.
std::vector<double> iterate_errors(const Trajectory& trajectory, const Vector& x_star);

}  // namespace unroll
