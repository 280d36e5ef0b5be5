#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "coast/engine.hpp"

namespace coast {

struct BenchConfig {
  std::string domain = "blocks";
  int sweep_lo = 0;
  int sweep_hi = 0;
  std::size_t trials = 5;
  /// "coast" and/or "incremental".
  std::vector<std::string> algorithms{"coast"};
  /// Overrides the domain's own constraint mode / cache probability.
  std::optional<ConstraintMode> mode;
  std::optional<double> cache_probability;
  double timeout_s = 60.0;
  /// Trial k runs instance seed `seed + k` for every algorithm.
  std::uint64_t seed = 0;
  SampleBudget budget;
  std::size_t jobs = 1;
  /// One JSON-lines event log per COAST trial.
  std::optional<std::filesystem::path> log_dir;
};

/// Fails with std::invalid_argument on an unusable config.
void check_config(const BenchConfig& cfg);

/// 16 hex digits identifying every field that affects results.
std::string config_hash(const BenchConfig& cfg);

struct TrialRow {
  std::string config_hash;
  std::string domain;
  int parameter = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string algorithm;
  std::string mode;
  double cache_probability = 0;
  double timeout = 0;
  /// solved, timeout, unsolvable or exhausted.
  std::string status;
  bool solved = false;
  bool valid = false;
  bool feasible = true;
  std::size_t iterations = 0;
  std::size_t plan_length = 0;
  std::size_t sampler_calls = 0;
  std::size_t sample_attempts = 0;
  std::size_t cache_hits = 0;
  std::size_t max_ground_actions = 0;
  double task_time = 0;
  double stream_plan_time = 0;
  double sample_time = 0;
  double total_time = 0;
};

/// Trial CSV columns, in order. The last four are timings.
const std::vector<std::string>& csv_columns();
void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const TrialRow& row);
std::vector<TrialRow> read_csv(std::istream& in);

TrialRow run_trial(const BenchConfig& cfg, const std::string& algorithm, int parameter, std::size_t trial);

/// Rows in (parameter, algorithm, trial) order. With `csv` set, the header
/// and every finished row are written and flushed as soon as all rows
/// before it are done.
std::vector<TrialRow> run_benchmark(const BenchConfig& cfg, std::ostream* csv = nullptr);

/// Linear interpolation between order statistics.
double quantile(std::vector<double> xs, double q);

/// Trials that did not solve count as taking the full timeout; solved
/// trials are capped at it.
double clamped(double value, const TrialRow& row);

struct SummaryRow {
  std::string domain;
  std::string algorithm;
  int parameter = 0;
  std::size_t trials = 0;
  std::size_t solved = 0;
  double task_time_median = 0;
  double task_time_q1 = 0;
  double task_time_q3 = 0;
  double total_time_median = 0;
  double total_time_q1 = 0;
  double total_time_q3 = 0;
  double sampler_calls_median = 0;
};

std::vector<SummaryRow> summarize(const std::vector<TrialRow>& rows);
void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace coast
