#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcshs/numerics.hpp"

namespace dcshs {

enum class Label : std::uint8_t { majority = 0, minority = 1 };

struct LabeledDataset {
  Matrix x;                  // instances x features
  std::vector<Label> y;      // one label per row
  std::string name;
  std::string majority_name;  // original class value of the majority side
  std::string minority_name;
  bool relabeled = false;    // true when the file's "positive" side was the bigger class
  int dropped_rows = 0;      // rows discarded for missing values at parse time

  int count(Label l) const {
    int c = 0;
    for (Label v : y)
      if (v == l) ++c;
    return c;
  }
};

struct DatasetSummary {
  std::string name;
  int instances = 0;
  int features = 0;
  int majority_count = 0;
  int minority_count = 0;
  double imbalance_ratio = 0.0;
  bool relabeled = false;
  int dropped_rows = 0;
};

DatasetSummary summarize(const LabeledDataset& d);

// Per-feature affine map onto [0, 1], fitted on training rows only. Constant
// features map to zero. Transforming out-of-range values extrapolates
// linearly (no clamping).
struct MinMaxScaler {
  Vector mins;
  Vector ranges;  // max - min, zeros kept as-is for constant features

  static MinMaxScaler fit(const Matrix& x);
  Matrix transform(const Matrix& x) const;
};

}  // namespace dcshs
