#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dcshs/dataset.hpp"
#include "dcshs/numerics.hpp"

namespace dcshs {

// Binary confusion counts with the minority class as positive.
struct ConfusionCounts {
  int tp = 0;
  int fn = 0;
  int tn = 0;
  int fp = 0;
};

ConfusionCounts confusion(const std::vector<Label>& truth,
                          const std::vector<Label>& predicted);

struct MetricSet {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double gmean = 0.0;
  std::optional<double> auc;  // absent when the truth holds only one class
};

// Rank-based Mann-Whitney estimate; tied scores count one half. Higher
// scores must mean "more minority". Absent for one-class truth vectors.
std::optional<double> auc(const std::vector<Label>& truth,
                          const Vector& scores);

// Threshold metrics from labels plus the ranking metric from scores.
// Precision is zero when nothing is predicted positive; F1 is zero when
// precision and recall are both zero.
MetricSet metrics(const std::vector<Label>& truth,
                  const std::vector<Label>& predicted, const Vector& scores);

// Repeated stratified K-fold assignment. Each round reshuffles every class
// with its own derived stream and deals rows round-robin, so per-fold class
// counts stay within one sample of exact proportionality and the partition
// property holds per round.
struct FoldPlan {
  int folds = 0;    // after any clamping
  int rounds = 0;
  bool clamped = false;  // requested fold count exceeded the smaller class
  // test_rows[round][fold] -> ascending row indices of that test fold
  std::vector<std::vector<std::vector<int>>> test_rows;
};

FoldPlan stratified_cv(const std::vector<Label>& y, int folds, int rounds,
                       std::uint64_t seed);

// Per-dataset competition ranks with ties averaged; rank 1 is the LARGEST
// value. table[dataset][method] -> ranks[dataset][method].
std::vector<std::vector<double>> friedman_ranks(
    const std::vector<std::vector<double>>& table);

// Mean rank per method over datasets.
std::vector<double> mean_ranks(const std::vector<std::vector<double>>& table);

struct HolmRow {
  int method = 0;      // column index into the table
  double z = 0.0;      // positive when the control out-ranks this method
  double raw_p = 0.0;  // two-sided normal tail
  double adjusted_p = 0.0;
};

struct HolmResult {
  std::vector<HolmRow> rows;  // one per non-control method, input order
  bool degenerate = false;    // some dataset ranked every method equal
};

// Mean-rank post-hoc comparison of every method against the control column,
// with Holm's step-down multiplicity adjustment (running maximum of
// (m - j + 1) * p over the ascending raw p's, clamped to one).
HolmResult holm_test(const std::vector<std::vector<double>>& table,
                     int control);

}  // namespace dcshs
