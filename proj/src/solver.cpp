#include "unroll/solver.hpp"

#include <string>
#include <utility>

#include "unroll/errors.hpp"

namespace unroll {

const Vector& Trajectory::at(std::size_t k) const {
  if (k > k_final) {
    throw Error(ErrorCode::IndexOutOfRange,
                "iterate " + std::to_string(k) + " beyond k_final " + std::to_string(k_final));
  }
  if (has_tape) return iterates[k];
  if (k == 0) return iterates.front();
  if (k == k_final) return iterates.back();
  throw Error(ErrorCode::NoTape, "interior iterate requested from an untaped run");
}

Trajectory run_fpi(const FixedPointProblem& problem, const Vector& u, const Vector& x0,
                   const StopRule& rule, bool record_tape) {
  if (!rule.max_iters && !rule.successive_tol) {
    throw Error(ErrorCode::InvalidArgument, "StopRule needs max_iters or successive_tol");
  }
  if (rule.successive_tol && !(*rule.successive_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "successive_tol must be positive");
  }
  if (x0.size() != problem.dim_x()) {
    throw Error(ErrorCode::DimensionMismatch, "run_fpi: x0 has wrong size");
  }

  Trajectory traj;
  traj.u = u;
  traj.has_tape = record_tape;
  traj.iterates.push_back(x0);

  Vector current = x0;
  std::size_t k = 0;
  traj.stop_reason = StopReason::IterationCap;
  while (!rule.max_iters || k < *rule.max_iters) {
    Vector next;
    bool overflow = false;
    try {
      next = problem.eval(current, u);
    } catch (const Error& e) {
      // Overflow inside the map surfaces from the vector kernel first.
      if (e.code() != ErrorCode::NonFiniteValue) throw;
      overflow = true;
    }
    if (overflow || !next.all_finite()) {
      throw Error(ErrorCode::NonFiniteIterate,
                  "iterate " + std::to_string(k + 1) + " is not finite");
    }
    ++k;
    const bool converged = rule.successive_tol && norm(next - current) <= *rule.successive_tol;
    if (record_tape) traj.iterates.push_back(next);
    current = std::move(next);
    if (converged) {
      traj.stop_reason = StopReason::SuccessiveTolerance;
      break;
    }
  }
  traj.k_final = k;
  if (!record_tape && k > 0) traj.iterates.push_back(std::move(current));
  return traj;
}

std::vector<double> iterate_errors(const Trajectory& trajectory, const Vector& x_star) {
  if (!trajectory.has_tape) throw Error(ErrorCode::NoTape, "iterate_errors needs a tape");
  std::vector<double> errors;
  errors.reserve(trajectory.iterates.size());
  for (const Vector& x : trajectory.iterates) errors.push_back(norm(x - x_star));
  return errors;
}

}  // namespace unroll
