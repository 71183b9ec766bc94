#include "unroll/bilevel.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "unroll/errors.hpp"
#include "unroll/solver.hpp"
#include "unroll/unrollad.hpp"

namespace unroll {

std::size_t BilevelTrace::total_inner_iters() const {
  std::size_t total = 0;
  for (const auto& r : rounds) total += r.inner_iters;
  return total;
}

BilevelTrace run_bilevel(const FixedPointProblem& problem, const OuterLoss& loss,
                         const BilevelConfig& cfg) {
  if (cfg.rounds < 1) throw Error(ErrorCode::InvalidArgument, "rounds must be >= 1");
  if (!(cfg.eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  if (cfg.inner_cap < 1) throw Error(ErrorCode::InvalidArgument, "inner_cap must be >= 1");
  if (!loss.value || !loss.gradient || !cfg.step_size) {
    throw Error(ErrorCode::InvalidArgument, "outer loss and step size must be provided");
  }

  BilevelTrace trace;
  trace.warm_start = cfg.warm_start;
  trace.eps = cfg.eps;
  trace.inner_cap = cfg.inner_cap;
  trace.x0 = cfg.x0;
  trace.u0 = cfg.u0;
  trace.rounds.reserve(cfg.rounds);

  const StopRule rule{cfg.inner_cap, cfg.eps};
  Vector u = cfg.u0;
  Vector x_start = cfg.x0;
  for (std::size_t r = 0; r < cfg.rounds; ++r) {
    const double tau = cfg.step_size(r);
    if (!(tau >= 0.0)) throw Error(ErrorCode::InvalidArgument, "step sizes must be >= 0");

    const Trajectory traj = run_fpi(problem, u, x_start, rule, /*record_tape=*/true);
    const Vector& x_final = traj.final_iterate();
    const ReverseSweep sweep = reverse_unroll(problem, traj, loss.gradient(x_final), 0);

    BilevelRound round;
    round.u = u;
    round.inner_iters = traj.k_final;
    round.outer_loss = loss.value(x_final);
    round.hypergradient = sweep.output();
    round.initial_error_proxy = norm(traj.initial() - x_final);
    round.step_size = tau;
    round.inner_cap_reached = traj.stop_reason == StopReason::IterationCap;

    axpy(-tau, round.hypergradient, u);
    x_start = cfg.warm_start ? x_final : cfg.x0;
    trace.rounds.push_back(std::move(round));
  }
  trace.u_final = u;
  return trace;
}

namespace {

double safe_ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

WarmStartReport warm_start_truncation_report(const BilevelTrace& warm, const BilevelTrace& cold) {
  bool same = warm.rounds.size() == cold.rounds.size() && warm.eps == cold.eps &&
              warm.inner_cap == cold.inner_cap && warm.x0 == cold.x0 && warm.u0 == cold.u0;
  for (std::size_t r = 0; same && r < warm.rounds.size(); ++r) {
    same = warm.rounds[r].step_size == cold.rounds[r].step_size;
  }
  if (!same) throw Error(ErrorCode::MismatchedConfig, "traces come from different settings");
  if (!warm.warm_start || cold.warm_start) {
    throw Error(ErrorCode::MismatchedConfig, "expected one warm-started and one cold-started trace");
  }

  WarmStartReport report;
  std::vector<double> ratios;
  for (std::size_t r = 0; r < warm.rounds.size(); ++r) {
    const BilevelRound& w = warm.rounds[r];
    const BilevelRound& c = cold.rounds[r];
    RoundComparison cmp{r,
                        w.inner_iters,
                        c.inner_iters,
                        w.initial_error_proxy,
                        c.initial_error_proxy,
                        safe_ratio(static_cast<double>(w.inner_iters),
                                   static_cast<double>(c.inner_iters)),
                        safe_ratio(w.initial_error_proxy, c.initial_error_proxy)};
    report.total_warm += w.inner_iters;
    report.total_cold += c.inner_iters;
    if (r >= 1) {
      ratios.push_back(cmp.iter_ratio);
      report.warm_proxy_never_larger &= cmp.proxy_warm <= cmp.proxy_cold;
      report.warm_iters_never_larger &= cmp.iters_warm <= cmp.iters_cold;
    }
    report.rounds.push_back(cmp);
  }
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    report.median_iter_ratio = ratios[(ratios.size() - 1) / 2];
  }
  return report;
}

}  // namespace unroll
