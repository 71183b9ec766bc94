#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "unroll/densela.hpp"
#include "unroll/fixmap.hpp"
#include "unroll/solver.hpp"

namespace unroll {

/// Forward-mode carriers xdot_k (Jacobian-vector products along `direction`)
/// of a possibly late-started recursion. values[k] is the carrier after k
/// derivative steps, which read tape entries x^{k + late_start}.
struct ForwardCarrier {
  std::vector<Vector> values;
  Vector direction;
  std::size_t late_start = 0;

  const Vector& output() const { return values.back(); }
  std::size_t steps() const { return values.size() - 1; }
};

/// Reverse sweep from k = K down to k = stop_index. Entries are stored in
/// ascending k: xbar[i] and ubar[i] belong to k = stop_index + i, so
/// xbar.back() is the seed and ubar.back() is zero.
struct ReverseSweep {
  std::vector<Vector> xbar;
  std::vector<Vector> ubar;
  Vector seed;
  std::size_t stop_index = 0;
  std::size_t final_index = 0;

  const Vector& ubar_at(std::size_t k) const;
  const Vector& xbar_at(std::size_t k) const;
  /// ubar at the stop index: w^T D_u x^K restricted to the unrolled window.
  const Vector& output() const { return ubar.front(); }
};

/// Runs xdot_{k+1} = dT/dx(x^{k+T'}) xdot_k + dT/du(x^{k+T'}) p for
/// k = 0 .. K - T' - 1 starting from xdot_0 = x0_dot.
ForwardCarrier forward_unroll(const FixedPointProblem& problem, const Trajectory& trajectory,
                              const Vector& direction, const Vector& x0_dot,
                              std::size_t late_start = 0);

/// Runs xbar_k = xbar_{k+1} dT/dx(x^k), ubar_k = ubar_{k+1} + xbar_{k+1} dT/du(x^k)
/// for k = K-1 .. stop_index from xbar_K = seed, ubar_K = 0.
ReverseSweep reverse_unroll(const FixedPointProblem& problem, const Trajectory& trajectory,
                            const Vector& seed, std::size_t stop_index = 0);

/// ||xdot_k - Dx* p|| for each stored carrier.
std::vector<double> forward_error_series(const ForwardCarrier& carrier, const Vector& oracle_jvp);

/// ||ubar_k - w^T Dx*|| in ascending k = stop_index .. K.
std::vector<double> reverse_error_series(const ReverseSweep& sweep, const Vector& oracle_vjp);

struct CurseIndices {
  std::size_t k_dot;  ///< position of the largest forward error
  std::size_t k_bar;  ///< position of the smallest reverse error
};

/// First position of the maximum of `forward` and of the minimum of
/// `reverse`; ties go to the smallest index. Throws EmptySeries.
CurseIndices curse_indices(std::span<const double> forward, std::span<const double> reverse);

std::size_t argmax_first(std::span<const double> series);
std::size_t argmin_first(std::span<const double> series);

}  // namespace unroll
