#pragma once

#include "config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dfol {

// Per-epoch metrics of one trace in flat form. Missing oracle values are NaN.
struct TrialSeries
{
  std::vector<std::int64_t> epoch;
  std::vector<std::int64_t> samples;
  std::vector<double>       risk;
  std::vector<double>       grad_norm_sq;
  std::vector<double>       run_avg_grad_norm_sq; // mean of grad_norm_sq over epochs 0..k

  static TrialSeries from_trace(RunTrace const &trace);

  // Rows every `stride` epochs plus the last one. Running averages keep full resolution.
  TrialSeries thinned(std::int64_t stride) const;
};

struct MeanStd
{
  double mean;
  double std; // sample standard deviation (n - 1); 0 for a single trial
};

struct AggregatePoint
{
  std::int64_t           epoch;
  double                 samples; // mean across trials
  std::optional<MeanStd> risk;
  std::optional<MeanStd> grad_norm_sq;
  std::optional<MeanStd> run_avg_grad_norm_sq;
  std::int64_t           trials;
};

struct AggregateCurve
{
  std::vector<AggregatePoint> points;
};

AggregateCurve aggregate(std::span<RunTrace const> traces);
AggregateCurve aggregate(std::span<TrialSeries const> series);

std::string format_real(double v); // 17 significant digits

// CSV text with the trial trace schema; rows every `stride` epochs plus the last.
std::string trace_csv(RunTrace const &trace, std::int64_t trial, bool record_theta, std::int64_t stride = 1);
std::string aggregate_csv(AggregateCurve const &curve);

std::string sha256_hex(std::string_view bytes);

struct AlgorithmResult
{
  std::string                   label;
  Algorithm                     algorithm;
  std::int64_t                  epochs;
  std::int64_t                  planned_samples;
  std::vector<std::int64_t>     diverged_trials;
  AggregateCurve                curve;        // surviving trials, on the CSV row grid
  std::vector<VectorXd>         final_theta;  // theta_T per surviving trial
  std::vector<VectorXd>         output_theta; // uniformly drawn iterate per surviving trial
  std::vector<std::filesystem::path> files;
};

struct ExperimentResult
{
  std::vector<AlgorithmResult> algorithms;
  std::filesystem::path        manifest;
  std::int64_t                 trials = 0;

  bool all_diverged() const;
  AlgorithmResult const &find(std::string const &label) const;
};

struct RunOptions
{
  std::optional<std::filesystem::path> output_dir;
  std::optional<int>                   workers;
};

// Runs every algorithm for every trial (seed base_seed + trial), writes per-trial and aggregate
// CSVs plus manifest.json. Throws IoError when the output cannot be written.
ExperimentResult run_experiment(ExperimentConfig const &cfg, RunOptions const &opts = {});

struct DiagResult
{
  DiagSpec     spec;
  MomentReport report;
};

// Evaluates cfg.diagnostics, entry i seeded with base_seed + i.
std::vector<DiagResult> run_diagnostics(ExperimentConfig const &cfg);
std::string             diag_csv(std::span<DiagResult const> results);

} // namespace dfol
