#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cohere/bounds.hpp"
#include "cohere/problems.hpp"
#include "cohere/trace.hpp"

// Multi-seed experiment runner: executes configured runs (optionally in
// parallel across seeds), keeps per-step statistics at a record stride,
// enforces the per-step inequality checks inline, and emits deterministic
// CSV/summary/plot artifacts.

namespace cohere {

struct ExperimentConfig {
  std::string problem = "pseudo_huber";
  int dim = 5;
  double r = 5.0;  // ||x* - x0||; x* = (r/sqrt(dim)) * ones, x0 = 0
  ScheduleKind schedule = ScheduleKind::power;
  double alpha = 0.75;
  double sigma = 0.0;
  std::int64_t T = 10000;
  std::vector<std::uint64_t> seeds{1};
  // 0 records at powers of two plus the final round; k > 0 records every
  // k-th round plus the final one.
  std::int64_t record_stride = 0;
  bool checks_enabled = true;
  QUpdateRule q_update = QUpdateRule::reconciled;
  std::string algo = "ftrl";  // "ftrl" | "sgd"
  std::string id;             // derived from the fields when empty
};

// Throws std::invalid_argument on any out-of-contract field.
void validate(const ExperimentConfig& c);
// Deterministic identifier tying RNG streams and CSV rows to the dynamics-
// relevant fields (seeds, stride and checks do not alter trajectories).
std::string experiment_id(const ExperimentConfig& c);
Problem config_problem(const ExperimentConfig& c);
Schedule config_schedule(const ExperimentConfig& c);  // G = grad_sup + sigma

struct CsvRow {
  std::int64_t t = 0;
  double eta = 0.0;
  double f_gap_last = 0.0;   // F(x_t) - F*
  double f_gap_avg = 0.0;    // F(running average) - F*
  double dist_to_opt = 0.0;  // ||x_t - x*||
  double S2 = 0.0;
  double Q = 0.0;
  double theta_norm = 0.0;
  std::int64_t check_violations = 0;  // cumulative count so far
};

struct SeedSummary {
  std::string id;
  std::uint64_t seed = 0;
  double f_gap_last = 0.0;
  double f_gap_avg = 0.0;
  double dist_to_opt = 0.0;
  double S2_T = 0.0;
  double Q_T = 0.0;
  std::int64_t check_violations = 0;
};

struct RunOutput {
  // Recorded rounds only; checker-grade (verify_consistency-clean) exactly
  // when the stride covers every t.
  TraceWindow window;
  std::vector<CsvRow> rows;
  SeedSummary summary;
};

// Raised when an enabled inline check fails hard (key inequality above
// tolerance); what() carries the diagnostic payload.
struct RunAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunOutput run_one(const ExperimentConfig& c, std::uint64_t seed);

struct RunSummary {
  std::string id;
  std::vector<SeedSummary> per_seed;
  double mean_gap_last = 0.0, median_gap_last = 0.0, stderr_gap_last = 0.0;
  double mean_gap_avg = 0.0, median_gap_avg = 0.0, stderr_gap_avg = 0.0;
  double mean_dist = 0.0, median_dist = 0.0, stderr_dist = 0.0;
  double max_S2 = 0.0, max_Q = 0.0;
  std::int64_t check_violations = 0;
  double bound2 = 0.0, bound3 = 0.0;
};

// Means/medians/standard errors over seeds; violation counters summed;
// theorem bound columns evaluated for the config. Throws
// std::invalid_argument when empty or when summaries mix experiment ids.
RunSummary aggregate(const std::vector<SeedSummary>& per_seed, const ExperimentConfig& c);

// Least-squares slope of log(gap) against log(T) over (T, mean gap) points;
// needs >= 3 horizons, excludes nonpositive gaps with a warning on stderr.
double rate_slope(const std::vector<std::pair<double, double>>& gaps);

// Deterministic artifact writers. CSV columns (header exact):
// experiment_id,seed,t,eta,f_gap_last,f_gap_avg,dist_to_opt,S2,Q,theta_norm,check_violations
void write_csv(std::ostream& out, const std::vector<RunOutput>& runs);
void write_summary(std::ostream& out, const RunSummary& s, const ExperimentConfig& c);

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (t, gap), log-log axes
};
// Self-contained SVG line plot; nonpositive coordinates are skipped.
void write_svg_plot(std::ostream& out, const std::string& title,
                    const std::vector<PlotSeries>& series);

struct ExperimentResult {
  std::vector<RunOutput> runs;  // in seed-list order regardless of jobs
  RunSummary summary;
};

// Runs every seed (jobs-way parallel, jobs <= 0 means hardware concurrency)
// and aggregates. Deterministic output ordering by construction.
ExperimentResult run_experiment(const ExperimentConfig& c, int jobs = 1);

}  // namespace cohere
