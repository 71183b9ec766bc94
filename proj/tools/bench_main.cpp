// bench: experiment driver for unrolled fixed-point differentiation.
//
//   bench run      grid sweep over (dim, step size, truncation fraction) -> CSV
//   bench plan     optimal truncation index and bound curve for given constants
//   bench bilevel  ridge hyperparameter tuning with warm or cold inner solves

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "unroll/bench.hpp"
#include "unroll/bilevel.hpp"
#include "unroll/errors.hpp"
#include "unroll/planner.hpp"

namespace {

using namespace unroll;
using namespace unroll::bench;

struct RunOptions {
  ExperimentConfig cfg;
  std::vector<std::string> alpha{"optimal", "suboptimal"};
  std::string mode = "data";
  std::string probes = "ones";
  std::string out;
  std::string rates;
  std::string medians;
};

struct PlanOptions {
  double rho = 0.5;
  std::size_t K = 100;
  double omega = kReverseModeOmega;
  double fwd0 = 1.0;
  double gamma = 1.0;
  double eps0 = 1.0;
};

struct BilevelOptions {
  bool warm = false;
  bool cold = false;
  std::size_t rounds = 20;
  double eps = 1e-8;
  double tau = 1e-3;
  std::uint64_t seed = 42;
  std::size_t dim = 10;
  std::size_t rows = 50;
  double u0 = 1.0;
  std::size_t inner_cap = 10000;
  std::string out;
};

void run_command(const RunOptions& opt) {
  ExperimentConfig cfg = opt.cfg;
  cfg.alpha_kinds.clear();
  for (const auto& a : opt.alpha) cfg.alpha_kinds.push_back(parse_alpha_kind(a));
  if (opt.mode == "data") {
    cfg.mode = RidgeMode::Data;
  } else if (opt.mode == "scalar") {
    cfg.mode = RidgeMode::ScalarRidge;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown mode '" + opt.mode + "'");
  }
  if (opt.probes == "ones") {
    cfg.probes = ProbeKind::Ones;
  } else if (opt.probes == "random") {
    cfg.probes = ProbeKind::Random;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown probe kind '" + opt.probes + "'");
  }

  const GridResult result = run_grid(cfg);
  if (opt.out.empty()) {
    write_csv(result.records, std::cout);
  } else {
    emit_csv(result.records, opt.out);
  }
  if (!opt.rates.empty()) emit_rates(result.rates, opt.rates);
  if (!opt.medians.empty()) emit_csv(aggregate_median(result.records), opt.medians);
}

void plan_command(const PlanOptions& opt) {
  const TruncationObjective obj =
      make_objective(opt.rho, opt.K, opt.omega, opt.fwd0, opt.gamma, opt.eps0);
  const DiscreteOptimum discrete = optimal_T_discrete(obj);
  const double relaxed = optimal_T_relaxed(obj);
  const BudgetPlan plan = make_plan(opt.K, discrete.T_star, opt.omega);

  std::cout << "T_star_discrete=" << discrete.T_star << '\n'
            << "h_discrete=" << format_double(discrete.h_star) << '\n'
            << "T_star_relaxed=" << format_double(relaxed) << '\n'
            << "h_relaxed=" << format_double(objective_h(obj, relaxed)) << '\n'
            << "K_prime=" << plan.K_prime << '\n'
            << "T_prime=" << plan.T_prime << '\n';
  if (obj.rho_clamped) std::cout << "rho_clamped=1\n";
  std::cout << "T,h\n";
  for (std::size_t t = 0; t <= opt.K; ++t) {
    std::cout << t << ',' << format_double(objective_h(obj, static_cast<double>(t))) << '\n';
  }
}

void bilevel_command(const BilevelOptions& opt) {
  if (opt.warm == opt.cold) {
    throw Error(ErrorCode::InvalidArgument, "pass exactly one of --warm or --cold");
  }
  const HyperparameterExperiment exp =
      make_hyperparameter_experiment(opt.rows, opt.dim, opt.seed, opt.u0);
  const RidgeMap map(exp.train);

  BilevelConfig cfg;
  cfg.rounds = opt.rounds;
  cfg.eps = opt.eps;
  const double tau = opt.tau;
  cfg.step_size = [tau](std::size_t) { return tau; };
  cfg.x0 = Vector(map.dim_x());
  cfg.u0 = Vector{opt.u0};
  cfg.warm_start = opt.warm;
  cfg.inner_cap = opt.inner_cap;

  const BilevelTrace trace = run_bilevel(map, exp.validation_loss(), cfg);
  if (opt.out.empty()) {
    write_bilevel_trace(trace, std::cout);
    return;
  }
  std::ofstream file(opt.out, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::IoError, "cannot open " + opt.out + " for writing");
  write_bilevel_trace(trace, file);
  if (!file) throw Error(ErrorCode::IoError, "failed writing " + opt.out);
  std::cout << "total_inner_iters=" << trace.total_inner_iters() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unrolled fixed-point differentiation experiments"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Grid sweep over dims, step sizes and truncation");
  run_cmd->add_option("--dims", run.cfg.dims, "Problem dimensions")->delimiter(',');
  run_cmd->add_option("--alpha", run.alpha, "optimal and/or suboptimal")->delimiter(',');
  run_cmd->add_option("--fractions", run.cfg.truncation_fractions, "Truncation fractions of K")
      ->delimiter(',');
  run_cmd->add_option("--omega", run.cfg.omega, "Derivative step cost ratio");
  run_cmd->add_option("--reps", run.cfg.repetitions, "Repetitions per dimension");
  run_cmd->add_option("--seed", run.cfg.seed, "Master seed");
  run_cmd->add_option("--tol", run.cfg.target_tol, "Target tolerance for K");
  run_cmd->add_option("--kcap", run.cfg.K_cap, "Upper bound on K");
  run_cmd->add_option("--rows", run.cfg.M_rows, "Rows of A");
  run_cmd->add_option("--mode", run.mode, "data or scalar");
  run_cmd->add_option("--ridge", run.cfg.ridge, "Ridge weight in scalar mode");
  run_cmd->add_option("--probes", run.probes, "ones or random");
  run_cmd->add_option("--out", run.out, "Record CSV (stdout when omitted)");
  run_cmd->add_option("--rates", run.rates, "Rates sidecar CSV");
  run_cmd->add_option("--medians", run.medians, "Median-aggregated CSV");

  PlanOptions plan;
  auto* plan_cmd = app.add_subcommand("plan", "Optimal truncation for given bound constants");
  plan_cmd->add_option("--rho", plan.rho, "Contraction modulus")->required();
  plan_cmd->add_option("--K", plan.K, "Untruncated iteration count")->required();
  plan_cmd->add_option("--omega", plan.omega, "Derivative step cost ratio");
  plan_cmd->add_option("--fwd0", plan.fwd0, "Initial derivative error");
  plan_cmd->add_option("--gamma", plan.gamma, "Curse constant");
  plan_cmd->add_option("--eps0", plan.eps0, "Initial iterate error");

  BilevelOptions bilevel;
  auto* bilevel_cmd = app.add_subcommand("bilevel", "Ridge hyperparameter tuning");
  bilevel_cmd->add_flag("--warm", bilevel.warm, "Warm-start inner solves");
  bilevel_cmd->add_flag("--cold", bilevel.cold, "Cold-start inner solves");
  bilevel_cmd->add_option("--rounds", bilevel.rounds, "Outer rounds");
  bilevel_cmd->add_option("--eps", bilevel.eps, "Inner successive-difference tolerance");
  bilevel_cmd->add_option("--tau", bilevel.tau, "Outer step size");
  bilevel_cmd->add_option("--seed", bilevel.seed, "Data seed");
  bilevel_cmd->add_option("--dim", bilevel.dim, "Unknowns");
  bilevel_cmd->add_option("--rows", bilevel.rows, "Rows of A");
  bilevel_cmd->add_option("--u0", bilevel.u0, "Initial ridge weight");
  bilevel_cmd->add_option("--inner-cap", bilevel.inner_cap, "Inner iteration cap");
  bilevel_cmd->add_option("--out", bilevel.out, "Trace CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) run_command(run);
    if (*plan_cmd) plan_command(plan);
    if (*bilevel_cmd) bilevel_command(bilevel);
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
