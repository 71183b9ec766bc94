#pragma once

// Desk-scale reproduction of the truncation experiments on random
// least-squares instances: instance generation, per-instance truncation
// runs, grid sweeps, median aggregation and CSV output.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unroll/analysis.hpp"
#include "unroll/bilevel.hpp"
#include "unroll/fixmap.hpp"
#include "unroll/planner.hpp"

namespace unroll::bench {

enum class AlphaKind {
  Optimal,     ///< 2 / (L + m)
  Suboptimal,  ///< 1 / (3 L)
};

std::string_view to_string(AlphaKind kind);
AlphaKind parse_alpha_kind(std::string_view text);

enum class ProbeKind {
  Ones,    ///< normalized all-ones probes
  Random,  ///< normalized Gaussian probes from the instance stream
};

struct ExperimentConfig {
  std::size_t M_rows = 50;
  std::vector<std::size_t> dims{2, 5, 10, 20, 30, 40};
  std::vector<AlphaKind> alpha_kinds{AlphaKind::Optimal, AlphaKind::Suboptimal};
  std::vector<double> truncation_fractions{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  double omega = kReverseModeOmega;
  std::size_t repetitions = 20;
  double target_tol = 1e-3;
  std::size_t K_cap = 1000;
  std::uint64_t seed = 42;
  /// Data mode differentiates with respect to (A, b); scalar mode with
  /// respect to the ridge weight `ridge`.
  RidgeMode mode = RidgeMode::Data;
  double ridge = 0.0;
  ProbeKind probes = ProbeKind::Ones;

  /// Throws InvalidArgument on out-of-range settings.
  void validate() const;
};

/// One row of the output: the errors at global iteration k of one run.
struct ExperimentRecord {
  std::string experiment_id;
  std::size_t dim = 0;
  AlphaKind alpha_kind = AlphaKind::Optimal;
  double T_fraction = 0.0;
  std::size_t T = 0;
  std::size_t K = 0;
  std::size_t K_prime = 0;
  std::size_t k = 0;
  double iterate_error = 0.0;
  double forward_error = 0.0;
  double reverse_error = 0.0;
  double bound_value = 0.0;
  std::size_t repetition = 0;  // ordering key, not written
};

struct RateRecord {
  std::size_t dim = 0;
  AlphaKind alpha_kind = AlphaKind::Optimal;
  double rho = 0.0;
};

struct GridResult {
  std::vector<ExperimentRecord> records;
  std::vector<RateRecord> rates;
};

// ---------------------------------------------------------------------------
// Randomness

/// Seed of the (dim, repetition) substream. SplitMix64 finalizer over the
/// three inputs, so results do not depend on the order instances are run in.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t dim, std::uint64_t repetition);

/// mt19937_64 with explicit uniform and Box-Muller normal draws, so the
/// stream is identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  double uniform();  ///< [0, 1)
  double normal();   ///< N(0, 1)

 private:
  std::mt19937_64 engine_;
};

/// A with U(0, 1) entries and b with N(0, 1) entries, drawn in that order.
/// Returned in data mode with the optimal step 2 / (L + m).
RidgeLS generate_instance(std::size_t M_rows, std::size_t N, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Step sizes and iteration counts

double step_size(AlphaKind kind, double L, double m);
/// (L - m) / (L + m), the rate of gradient descent with the optimal step.
double optimal_rate(double L, double m);
/// min(ceil(ln(tol) / ln(rho_star)), cap), at least 1.
std::size_t iteration_count(double rho_star, double tol, std::size_t cap);

// ---------------------------------------------------------------------------
// One truncated run

struct Probes {
  Vector forward;  ///< direction p in parameter space
  Vector reverse;  ///< seed w in state space
};

Probes make_probes(const RidgeLS& problem, ProbeKind kind, std::uint64_t seed);

/// Series of one budgeted truncation experiment. forward/bound are indexed by
/// derivative step j = 0..K-T (global k = T' + j); reverse by k = T'..K'.
struct TruncationRun {
  BudgetPlan plan;
  double rho = 0.0;
  std::vector<double> iterate_errors;
  std::vector<double> forward_errors;
  std::vector<double> reverse_errors;
  std::vector<double> bound;
  double forward_bilinear = 0.0;  ///< <w, xdot at the last step>
  double reverse_bilinear = 0.0;  ///< <ubar at T', p>
};

/// Runs K' = K + floor(omega T) steps from x^0 = 0 with T = floor(fraction K)
/// and differentiates the last K - T of them in both modes.
TruncationRun run_truncation(const RidgeLS& problem, const Vector& u, std::size_t K,
                             double fraction, double omega, const Probes& probes);

// ---------------------------------------------------------------------------
// Grid

/// Every (dim, repetition, alpha kind, fraction) run, rows in canonical order
/// (dim, alpha kind, fraction, repetition, k). NonFiniteIterate is rethrown
/// with the instance seed attached.
GridResult run_grid(const ExperimentConfig& cfg);

/// Lower median of a non-empty sample. Throws EmptyGroup.
double lower_median(std::vector<double> values);

/// Per (dim, alpha kind, fraction, k) lower medians of every numeric column.
std::vector<ExperimentRecord> aggregate_median(std::span<const ExperimentRecord> records);

inline constexpr std::string_view kCsvHeader =
    "experiment_id,dim,alpha_kind,T_fraction,T,K,K_prime,k,iterate_error,forward_error,"
    "reverse_error,bound_value";
inline constexpr std::string_view kRatesHeader = "dim,alpha_kind,rho";

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

void write_csv(std::span<const ExperimentRecord> records, std::ostream& out);
void write_rates(std::span<const RateRecord> rates, std::ostream& out);
/// Throws IoError when the file cannot be written.
void emit_csv(std::span<const ExperimentRecord> records, const std::filesystem::path& path);
void emit_rates(std::span<const RateRecord> rates, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Ridge hyperparameter tuning

/// Tune the ridge weight of a training problem against a held-out
/// validation least-squares loss.
struct HyperparameterExperiment {
  RidgeLS train;  ///< scalar-ridge mode
  Matrix a_val;
  Vector b_val;

  OuterLoss validation_loss() const;
};

/// Training and validation data from two substreams of `seed`. The inner step
/// is 2 / (L + m + 2 u0), optimal at the initial ridge weight u0.
HyperparameterExperiment make_hyperparameter_experiment(std::size_t M_rows, std::size_t N,
                                                        std::uint64_t seed, double u0);

void write_bilevel_trace(const BilevelTrace& trace, std::ostream& out);

}  // namespace unroll::bench
