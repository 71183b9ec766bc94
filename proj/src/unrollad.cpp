#include "unroll/unrollad.hpp"

#include <string>
#include <utility>

#include "unroll/errors.hpp"

namespace unroll {

namespace {

void require_tape(const Trajectory& trajectory, const char* where) {
  if (!trajectory.has_tape) throw Error(ErrorCode::NoTape, std::string(where) + " needs a tape");
}

void require_window(const Trajectory& trajectory, std::size_t index, const char* where) {
  if (index > trajectory.k_final) {
    throw Error(ErrorCode::IndexOutOfRange, std::string(where) + ": truncation index " +
                                                std::to_string(index) + " exceeds K = " +
                                                std::to_string(trajectory.k_final));
  }
}

}  // namespace

const Vector& ReverseSweep::ubar_at(std::size_t k) const {
  if (k < stop_index || k > final_index) {
    throw Error(ErrorCode::IndexOutOfRange, "ubar_at outside the sweep");
  }
  return ubar[k - stop_index];
}

const Vector& ReverseSweep::xbar_at(std::size_t k) const {
  if (k < stop_index || k > final_index) {
    throw Error(ErrorCode::IndexOutOfRange, "xbar_at outside the sweep");
  }
  return xbar[k - stop_index];
}

ForwardCarrier forward_unroll(const FixedPointProblem& problem, const Trajectory& trajectory,
                              const Vector& direction, const Vector& x0_dot,
                              std::size_t late_start) {
  require_tape(trajectory, "forward_unroll");
  require_window(trajectory, late_start, "forward_unroll");
  if (x0_dot.size() != problem.dim_x() || direction.size() != problem.dim_u()) {
    throw Error(ErrorCode::DimensionMismatch, "forward_unroll: carrier or direction size");
  }

  const std::size_t steps = trajectory.k_final - late_start;
  ForwardCarrier carrier;
  carrier.direction = direction;
  carrier.late_start = late_start;
  carrier.values.reserve(steps + 1);
  carrier.values.push_back(x0_dot);
  for (std::size_t k = 0; k < steps; ++k) {
    const Vector& x = trajectory.iterates[k + late_start];
    Vector next = problem.jvp_x(x, trajectory.u, carrier.values.back());
    next += problem.jvp_u(x, trajectory.u, direction);
    carrier.values.push_back(std::move(next));
  }
  return carrier;
}

ReverseSweep reverse_unroll(const FixedPointProblem& problem, const Trajectory& trajectory,
                            const Vector& seed, std::size_t stop_index) {
  require_tape(trajectory, "reverse_unroll");
  require_window(trajectory, stop_index, "reverse_unroll");
  if (seed.size() != problem.dim_x()) {
    throw Error(ErrorCode::DimensionMismatch, "reverse_unroll: seed size");
  }

  const std::size_t big_k = trajectory.k_final;
  const std::size_t count = big_k - stop_index + 1;
  ReverseSweep sweep;
  sweep.seed = seed;
  sweep.stop_index = stop_index;
  sweep.final_index = big_k;
  sweep.xbar.resize(count);
  sweep.ubar.resize(count);
  sweep.xbar[count - 1] = seed;
  sweep.ubar[count - 1] = Vector(problem.dim_u());
  for (std::size_t k = big_k; k-- > stop_index;) {
    const std::size_t i = k - stop_index;
    const Vector& x = trajectory.iterates[k];
    const Vector& xbar_next = sweep.xbar[i + 1];
    sweep.ubar[i] = sweep.ubar[i + 1] + problem.vjp_u(x, trajectory.u, xbar_next);
    sweep.xbar[i] = problem.vjp_x(x, trajectory.u, xbar_next);
  }
  return sweep;
}

std::vector<double> forward_error_series(const ForwardCarrier& carrier, const Vector& oracle_jvp) {
  std::vector<double> out;
  out.reserve(carrier.values.size());
  for (const Vector& v : carrier.values) {
    if (v.size() != oracle_jvp.size()) {
      throw Error(ErrorCode::DimensionMismatch, "forward_error_series: oracle size");
    }
    out.push_back(norm(v - oracle_jvp));
  }
  return out;
}

std::vector<double> reverse_error_series(const ReverseSweep& sweep, const Vector& oracle_vjp) {
  std::vector<double> out;
  out.reserve(sweep.ubar.size());
  for (const Vector& v : sweep.ubar) {
    if (v.size() != oracle_vjp.size()) {
      throw Error(ErrorCode::DimensionMismatch, "reverse_error_series: oracle size");
    }
    out.push_back(norm(v - oracle_vjp));
  }
  return out;
}

std::size_t argmax_first(std::span<const double> series) {
  if (series.empty()) throw Error(ErrorCode::EmptySeries, "argmax of an empty series");
  std::size_t best = 0;
  for (std::size_t i = 1; i < series.size(); ++i)
    if (series[i] > series[best]) best = i;
  return best;
}

std::size_t argmin_first(std::span<const double> series) {
  if (series.empty()) throw Error(ErrorCode::EmptySeries, "argmin of an empty series");
  std::size_t best = 0;
  for (std::size_t i = 1; i < series.size(); ++i)
    if (series[i] < series[best]) best = i;
  return best;
}

CurseIndices curse_indices(std::span<const double> forward, std::span<const double> reverse) {
  return {argmax_first(forward), argmin_first(reverse)};
}

}  // namespace unroll
