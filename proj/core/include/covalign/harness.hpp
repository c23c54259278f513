// covalign/harness.hpp
//
// Experiment orchestration: single trials, Cartesian parameter sweeps with a
// resumable CSV log, and the sample-size threshold search behind the
// n ~ d^{3/2} scaling check.
//
// Seeds: replicate r of grid cell c draws its instance from
// mix_seed(base_seed, c, r). Nothing else about a trial depends on when or on
// which worker it runs, so sweep output is independent of the job count.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "covalign/gw_solver.hpp"
#include "covalign/instances.hpp"
#include "covalign/model.hpp"
#include "covalign/qmle_solver.hpp"
#include "covalign/spectral.hpp"

namespace covalign {

/// Estimator names accepted by run_trial.
inline constexpr const char* kEstimatorNames[] = {"gw", "qmle-local", "qmle-exhaustive", "gw-exhaustive",
                                                  "spectral"};

struct EstimatorConfig {
  std::string name = "gw";
  GwOptions gw;
  SearchOptions search;
  SpectralVariant spectral = SpectralVariant::two_sided;
};

bool is_known_estimator(std::string_view name);

struct TrialRecord {
  std::string estimator;
  std::size_t d = 0;
  SampleSize m = SampleSize::exact();
  SampleSize n = SampleSize::exact();
  std::uint64_t seed = 0;
  double epsilon = 0.0;  // 0 for estimators without an entropic penalty
  double frob_loss_sq = 0.0;
  double nf_loss_sq = 0.0;  // NaN when Σ^{π*} is singular
  double trace_loss = 0.0;  // NaN when Σ is singular
  int hamming = 0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = true;
  double runtime_ms = 0.0;
  int thread_count = 1;
  std::string status = "ok";

  // Not part of the CSV row.
  Permutation estimate;
  double relative_loss = 0.0;  // frob_loss_sq / ‖Σ‖_F²
  double max_marginal_deviation = 0.0;
  std::string error;

  bool ok() const { return status == "ok"; }
};

/// Runs one estimator on one instance and scores it against (Σ, π*).
/// Estimator failures come back as a record with status set to the error
/// kind; they are never thrown.
TrialRecord run_trial(const AlignmentInstance& instance, const EstimatorConfig& estimator);

/// Same as run_trial but for a bare covariance pair without ground truth;
/// used by the CLI. Losses are left at zero.
TrialRecord run_estimator(const SymMatrix& sigma_x, const SymMatrix& sigma_y, const EstimatorConfig& estimator);

/// Fills the loss fields of a successful record against (Σ, π*). Failed
/// records get NaN losses and hamming −1.
void score_record(TrialRecord& record, const SymMatrix& sigma, const Permutation& truth);

// ---------------------------------------------------------------------------
// Results CSV

inline constexpr const char* kResultsHeader =
    "estimator,d,m,n,seed,epsilon,frob_loss_sq,nf_loss_sq,trace_loss,hamming,objective,iterations,"
    "converged,runtime_ms,status";

std::string to_csv_row(const TrialRecord& record);
/// Inverse of to_csv_row; throws FileFormat on malformed rows.
TrialRecord parse_csv_row(std::string_view line);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepGrid {
  std::vector<InstanceKind> kinds{InstanceKind::wishart};
  std::vector<std::size_t> dims;
  std::vector<SampleSize> ns;
  /// Empty together with m_equals_n = true ties m to n.
  std::vector<SampleSize> ms;
  bool m_equals_n = true;
  std::vector<double> gammas{0.5};  // robinson only
  Normalization normalize = Normalization::none;
  double c1 = 3.0;
  double c5 = 0.5;
};

struct SweepConfig {
  SweepGrid grid;
  std::vector<EstimatorConfig> estimators;
  int replicates = 1;
  std::uint64_t base_seed = 0;
  std::filesystem::path output;
  int jobs = 1;
  /// Receives "cell i/N replicate r/R" lines; null for silence.
  std::ostream* progress = nullptr;

  void validate() const;
};

/// Parses the JSON sweep document. Errors (InvalidArgument) name the
/// offending JSON pointer.
SweepConfig parse_sweep_config(std::string_view json_text);

struct SweepCell {
  std::size_t index = 0;
  InstanceSpec spec;  // seed filled per replicate
};

std::vector<SweepCell> expand_grid(const SweepConfig& config);

struct CellAggregate {
  std::size_t cell = 0;
  std::string estimator;
  std::size_t d = 0;
  SampleSize m = SampleSize::exact();
  SampleSize n = SampleSize::exact();
  int count = 0;
  int failures = 0;
  double mean = 0.0;
  double median = 0.0;
  double stderr_mean = 0.0;
  double mean_relative = 0.0;
};

struct SweepResult {
  std::vector<TrialRecord> records;  // sorted by (cell, replicate, estimator order)
  std::vector<CellAggregate> aggregates;
  int resumed = 0;  // records found in the output file before running
};

/// Mean, median and standard error of frob_loss_sq over successful records.
CellAggregate aggregate(std::span<const TrialRecord> records);

/// Runs the grid, appending each record to config.output as it completes.
/// Rows already present in the file (same estimator, d, m, n, seed) are not
/// rerun; a trailing partial line is discarded.
SweepResult run_sweep(const SweepConfig& config);

void write_summary_csv(std::ostream& out, std::span<const CellAggregate> aggregates);

// ---------------------------------------------------------------------------
// Threshold search

struct ThresholdConfig {
  InstanceKind kind = InstanceKind::wishart;
  Normalization normalize = Normalization::none;
  double gamma = 0.5;
  EstimatorConfig estimator;
  std::int64_t n_min = 10;
  std::int64_t n_cap = 1'000'000;
  /// Bisection stops when hi − lo ≤ max(1, rel_resolution·lo).
  double rel_resolution = 0.05;
  std::uint64_t base_seed = 0;
  int jobs = 1;
};

struct ThresholdResult {
  std::int64_t n_star = 0;
  std::map<std::int64_t, double> probes;  // n → mean relative loss
  double max_marginal_deviation = 0.0;
};

/// Mean of frob_loss_sq/‖Σ‖_F² over reps replicates at m = n (failed trials
/// count as +∞).
double mean_relative_loss(std::size_t d, std::int64_t n, int reps, const ThresholdConfig& config,
                          double* max_marginal_deviation = nullptr);

/// Smallest n (doubling from n_min, then bisection) whose mean relative loss
/// is at most tau. Throws BudgetExceeded when n_cap does not suffice.
ThresholdResult threshold_search(std::size_t d, const std::string& estimator, double tau, int reps,
                                 const ThresholdConfig& config);

/// Runs fn(i) for i in [0, count) on `jobs` worker threads.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace covalign
