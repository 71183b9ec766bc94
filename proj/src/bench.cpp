#include "unroll/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

#include "unroll/errors.hpp"
#include "unroll/solver.hpp"
#include "unroll/unrollad.hpp"

namespace unroll::bench {

std::string_view to_string(AlphaKind kind) {
  return kind == AlphaKind::Optimal ? "optimal" : "suboptimal";
}

AlphaKind parse_alpha_kind(std::string_view text) {
  if (text == "optimal") return AlphaKind::Optimal;
  if (text == "suboptimal") return AlphaKind::Suboptimal;
  throw Error(ErrorCode::InvalidArgument, "unknown step size kind '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (dims.empty()) fail("at least one dimension is required");
  for (std::size_t n : dims) {
    if (n < 1 || n > M_rows) fail("dimensions must satisfy 1 <= N <= M_rows");
  }
  if (alpha_kinds.empty()) fail("at least one step size kind is required");
  if (truncation_fractions.empty()) fail("at least one truncation fraction is required");
  for (double f : truncation_fractions) {
    if (!(f >= 0.0 && f < 1.0)) fail("truncation fractions must lie in [0, 1)");
  }
  if (!(omega >= 1.0)) fail("omega must be >= 1");
  if (repetitions < 1) fail("repetitions must be >= 1");
  if (!(target_tol > 0.0 && target_tol < 1.0)) fail("target_tol must lie in (0, 1)");
  if (K_cap < 1) fail("K_cap must be >= 1");
  if (ridge < 0.0) fail("ridge weight must be non-negative");
}

// ---------------------------------------------------------------------------
// Randomness

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t dim, std::uint64_t repetition) {
  return splitmix64(splitmix64(splitmix64(seed) ^ dim) ^ repetition);
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RidgeLS generate_instance(std::size_t M_rows, std::size_t N, std::uint64_t seed) {
  if (N < 1 || M_rows < N) throw Error(ErrorCode::InvalidArgument, "need M_rows >= N >= 1");
  Rng rng(seed);
  std::vector<double> a(M_rows * N);
  for (double& x : a) x = rng.uniform();
  std::vector<double> b(M_rows);
  for (double& x : b) x = rng.normal();

  RidgeLS problem{Matrix(M_rows, N, std::move(a)), Vector(std::move(b)), 1.0, RidgeMode::Data};
  const SpectralExtremes h = spectral_extremes_sym(gram(problem.a));
  problem.alpha = step_size(AlphaKind::Optimal, h.lambda_max, h.lambda_min);
  return problem;
}

// ---------------------------------------------------------------------------
// Step sizes

double step_size(AlphaKind kind, double L, double m) {
  if (!(L > 0.0)) throw Error(ErrorCode::InvalidArgument, "largest eigenvalue must be positive");
  return kind == AlphaKind::Optimal ? 2.0 / (L + m) : 1.0 / (3.0 * L);
}

double optimal_rate(double L, double m) { return (L - m) / (L + m); }

std::size_t iteration_count(double rho_star, double tol, std::size_t cap) {
  if (!(rho_star < 1.0)) return cap;
  if (!(rho_star > 0.0)) return 1;
  const double k = std::ceil(std::log(tol) / std::log(rho_star));
  if (!(k < static_cast<double>(cap))) return cap;
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

// ---------------------------------------------------------------------------
// One truncated run

Probes make_probes(const RidgeLS& problem, ProbeKind kind, std::uint64_t seed) {
  const std::size_t du = problem.mode == RidgeMode::Data
                             ? problem.a.rows() * problem.a.cols() + problem.a.rows()
                             : 1;
  const std::size_t dx = problem.dim_x();
  Probes probes{Vector::ones(du), Vector::ones(dx)};
  if (kind == ProbeKind::Random) {
    Rng rng(splitmix64(seed ^ 0x70726F6265ULL));
    for (std::size_t i = 0; i < du; ++i) probes.forward[i] = rng.normal();
    for (std::size_t i = 0; i < dx; ++i) probes.reverse[i] = rng.normal();
  }
  probes.forward *= 1.0 / norm(probes.forward);
  probes.reverse *= 1.0 / norm(probes.reverse);
  return probes;
}

TruncationRun run_truncation(const RidgeLS& problem, const Vector& u, std::size_t K,
                             double fraction, double omega, const Probes& probes) {
  const auto T = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(K)));
  TruncationRun run;
  run.plan = make_plan(K, T, omega);

  const RidgeMap map(problem);
  const Trajectory traj =
      run_fpi(map, u, Vector(problem.dim_x()), StopRule::iterations(run.plan.K_prime), true);
  const Vector x_star = ridge_solution_oracle(problem, u);
  const Vector dx_p = implicit_jvp(map, x_star, u, probes.forward);
  const Vector w_dx = implicit_vjp(map, x_star, u, probes.reverse);

  const ForwardCarrier fwd =
      forward_unroll(map, traj, probes.forward, Vector(problem.dim_x()), run.plan.T_prime);
  const ReverseSweep rev = reverse_unroll(map, traj, probes.reverse, run.plan.T_prime);

  run.iterate_errors = iterate_errors(traj, x_star);
  run.forward_errors = forward_error_series(fwd, dx_p);
  run.reverse_errors = reverse_error_series(rev, w_dx);
  run.forward_bilinear = dot(probes.reverse, fwd.output());
  run.reverse_bilinear = dot(rev.output(), probes.forward);

  const BoundConstants c = constants_for_ridge(problem, u, probes.forward, &traj);
  run.rho = c.rho;
  run.bound = late_start_bound_series(c, run.plan.derivative_iters, run.plan.T_prime);
  return run;
}

// ---------------------------------------------------------------------------
// Grid

namespace {

std::string experiment_id(std::size_t dim, AlphaKind kind, std::size_t rep) {
  std::ostringstream os;
  os << "d" << dim << "_" << to_string(kind) << "_r" << rep;
  return os.str();
}

}  // namespace

GridResult run_grid(const ExperimentConfig& cfg) {
  cfg.validate();
  GridResult result;
  std::map<std::pair<std::size_t, int>, std::vector<double>> rates;

  for (std::size_t dim : cfg.dims) {
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
      const std::uint64_t seed = substream_seed(cfg.seed, dim, rep);
      RidgeLS problem = generate_instance(cfg.M_rows, dim, seed);
      problem.mode = cfg.mode;
      const Vector u = problem.parameter(cfg.ridge);
      const SpectralExtremes h = spectral_extremes_sym(ridge_hessian(problem, u));
      const std::size_t K = iteration_count(optimal_rate(h.lambda_max, h.lambda_min),
                                            cfg.target_tol, cfg.K_cap);
      const Probes probes = make_probes(problem, cfg.probes, seed);

      for (AlphaKind kind : cfg.alpha_kinds) {
        problem.alpha = step_size(kind, h.lambda_max, h.lambda_min);
        for (double fraction : cfg.truncation_fractions) {
          TruncationRun run;
          try {
            run = run_truncation(problem, u, K, fraction, cfg.omega, probes);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::NonFiniteIterate) throw;
            throw Error(ErrorCode::NonFiniteIterate,
                        std::string(e.what()) + " (dim " + std::to_string(dim) + ", repetition " +
                            std::to_string(rep) + ", instance seed " + std::to_string(seed) + ")");
          }
          if (fraction == cfg.truncation_fractions.front()) {
            rates[{dim, static_cast<int>(kind)}].push_back(run.rho);
          }
          const BudgetPlan& plan = run.plan;
          const std::string id = experiment_id(dim, kind, rep);
          for (std::size_t j = 0; j <= plan.derivative_iters; ++j) {
            const std::size_t k = plan.T_prime + j;
            result.records.push_back({id, dim, kind, fraction, plan.T, plan.K, plan.K_prime, k,
                                      run.iterate_errors[k], run.forward_errors[j],
                                      run.reverse_errors[j], run.bound[j], rep});
          }
        }
      }
    }
  }

  auto key = [&](const ExperimentRecord& r) {
    const auto dim_pos = std::find(cfg.dims.begin(), cfg.dims.end(), r.dim) - cfg.dims.begin();
    const auto kind_pos =
        std::find(cfg.alpha_kinds.begin(), cfg.alpha_kinds.end(), r.alpha_kind) -
        cfg.alpha_kinds.begin();
    const auto frac_pos = std::find(cfg.truncation_fractions.begin(),
                                    cfg.truncation_fractions.end(), r.T_fraction) -
                          cfg.truncation_fractions.begin();
    return std::make_tuple(dim_pos, kind_pos, frac_pos, r.repetition, r.k);
  };
  std::stable_sort(result.records.begin(), result.records.end(),
                   [&](const auto& a, const auto& b) { return key(a) < key(b); });

  for (std::size_t dim : cfg.dims) {
    for (AlphaKind kind : cfg.alpha_kinds) {
      result.rates.push_back({dim, kind, lower_median(rates[{dim, static_cast<int>(kind)}])});
    }
  }
  return result;
}

double lower_median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyGroup, "median of an empty group");
  const std::size_t mid = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  return values[mid];
}

std::vector<ExperimentRecord> aggregate_median(std::span<const ExperimentRecord> records) {
  using Key = std::tuple<std::size_t, int, double, std::size_t>;
  std::map<Key, std::vector<const ExperimentRecord*>> groups;
  std::vector<Key> order;
  for (const auto& r : records) {
    const Key key{r.dim, static_cast<int>(r.alpha_kind), r.T_fraction, r.k};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }

  std::vector<ExperimentRecord> out;
  out.reserve(groups.size());
  for (const Key& key : order) {
    const auto& members = groups.at(key);
    auto column = [&](auto field) {
      std::vector<double> v;
      v.reserve(members.size());
      for (const auto* r : members) v.push_back(static_cast<double>(field(*r)));
      return lower_median(std::move(v));
    };
    const ExperimentRecord& first = *members.front();
    ExperimentRecord m;
    m.experiment_id = "median";
    m.dim = first.dim;
    m.alpha_kind = first.alpha_kind;
    m.T_fraction = first.T_fraction;
    m.k = first.k;
    m.T = static_cast<std::size_t>(column([](const auto& r) { return r.T; }));
    m.K = static_cast<std::size_t>(column([](const auto& r) { return r.K; }));
    m.K_prime = static_cast<std::size_t>(column([](const auto& r) { return r.K_prime; }));
    m.iterate_error = column([](const auto& r) { return r.iterate_error; });
    m.forward_error = column([](const auto& r) { return r.forward_error; });
    m.reverse_error = column([](const auto& r) { return r.reverse_error; });
    m.bound_value = column([](const auto& r) { return r.bound_value; });
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_csv(std::span<const ExperimentRecord> records, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.experiment_id << ',' << r.dim << ',' << to_string(r.alpha_kind) << ','
        << format_double(r.T_fraction) << ',' << r.T << ',' << r.K << ',' << r.K_prime << ','
        << r.k << ',' << format_double(r.iterate_error) << ',' << format_double(r.forward_error)
        << ',' << format_double(r.reverse_error) << ',' << format_double(r.bound_value) << '\n';
  }
}

void write_rates(std::span<const RateRecord> rates, std::ostream& out) {
  out << kRatesHeader << '\n';
  for (const auto& r : rates) {
    out << r.dim << ',' << to_string(r.alpha_kind) << ',' << format_double(r.rho) << '\n';
  }
}

namespace {

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  writer(file);
  file.flush();
  if (!file) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace

void emit_csv(std::span<const ExperimentRecord> records, const std::filesystem::path& path) {
  write_file(path, [&](std::ostream& os) { write_csv(records, os); });
}

void emit_rates(std::span<const RateRecord> rates, const std::filesystem::path& path) {
  write_file(path, [&](std::ostream& os) { write_rates(rates, os); });
}

// ---------------------------------------------------------------------------
// Ridge hyperparameter tuning

OuterLoss HyperparameterExperiment::validation_loss() const {
  const Matrix a = a_val;
  const Vector b = b_val;
  return {[a, b](const Vector& x) {
            const Vector r = matvec(a, x) - b;
            return 0.5 * dot(r, r);
          },
          [a, b](const Vector& x) { return matvec_transposed(a, matvec(a, x) - b); }};
}

HyperparameterExperiment make_hyperparameter_experiment(std::size_t M_rows, std::size_t N,
                                                        std::uint64_t seed, double u0) {
  if (u0 < 0.0) throw Error(ErrorCode::InvalidArgument, "initial ridge weight must be >= 0");
  RidgeLS train = generate_instance(M_rows, N, substream_seed(seed, N, 0));
  const RidgeLS val = generate_instance(M_rows, N, substream_seed(seed, N, 1));
  train.mode = RidgeMode::ScalarRidge;
  const SpectralExtremes h = spectral_extremes_sym(gram(train.a));
  train.alpha = 2.0 / (h.lambda_max + h.lambda_min + 2.0 * u0);
  return {std::move(train), val.a, val.b};
}

void write_bilevel_trace(const BilevelTrace& trace, std::ostream& out) {
  auto join = [](const Vector& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0) s += ';';
      s += format_double(v[i]);
    }
    return s;
  };
  out << "round,u,inner_iters,outer_loss,hypergradient,initial_error_proxy,inner_cap_reached\n";
  for (std::size_t r = 0; r < trace.rounds.size(); ++r) {
    const BilevelRound& b = trace.rounds[r];
    out << r << ',' << join(b.u) << ',' << b.inner_iters << ',' << format_double(b.outer_loss)
        << ',' << join(b.hypergradient) << ',' << format_double(b.initial_error_proxy) << ','
        << (b.inner_cap_reached ? 1 : 0) << '\n';
  }
}

}  // namespace unroll::bench
