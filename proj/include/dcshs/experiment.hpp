#pragma once
// Benchmark orchestration: repeated stratified cross-validation of each
// configured method over each dataset, plus the report files the
// command-line tool emits.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcshs/config.hpp"
#include "dcshs/dataset.hpp"
#include "dcshs/eval.hpp"

namespace dcshs {

struct RunRecord {
  std::string dataset;
  std::string method;
  int round = 0;
  int fold = 0;
  MetricSet metrics;
};

struct ExperimentReport {
  std::vector<RunRecord> records;     // dataset-major, then method, round, fold
  std::vector<std::string> datasets;  // names that completed every run
  std::vector<std::string> failures;  // "name: reason" per isolated dataset
  std::vector<std::string> warnings;  // non-fatal notes (fold clamping, ...)
};

// 64-bit FNV-1a over the dataset name; keys the dataset's seed streams so
// adding or reordering datasets never changes another dataset's results.
std::uint64_t dataset_tag(const std::string& name);

// Runs methods x rounds x folds on every dataset. All randomness of a work
// item derives from (master seed, dataset tag, round, fold), and each item
// writes into a preallocated slot, so any worker count yields the identical
// report. A dataset whose work throws is dropped into `failures` without
// stopping the others.
ExperimentReport run_experiment(const std::vector<LabeledDataset>& datasets,
                                const RunConfig& cfg);

// Per dataset x method means over all completed runs.
struct MethodSummary {
  std::string dataset;
  std::string method;
  int runs = 0;
  double recall = 0.0;
  double f1 = 0.0;
  double gmean = 0.0;
  std::optional<double> auc;  // mean over folds where it was defined
};

std::vector<MethodSummary> summarize_report(const ExperimentReport& report);

// Writes records.csv, summary.csv, holm.csv, and series.csv under out_dir
// (created if missing). Identical inputs produce byte-identical files.
void write_reports(const ExperimentReport& report, const RunConfig& cfg,
                   const std::string& out_dir);

}  // namespace dcshs
