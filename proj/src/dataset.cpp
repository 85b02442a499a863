#include "dcshs/dataset.hpp"

#include <stdexcept>

namespace dcshs {

DatasetSummary summarize(const LabeledDataset& d) {
  if (d.x.rows() != static_cast<int>(d.y.size()))
    throw std::invalid_argument("summarize: label count mismatch");
  DatasetSummary s;
  s.name = d.name;
  s.instances = static_cast<int>(d.x.rows());
  s.features = static_cast<int>(d.x.cols());
  s.majority_count = d.count(Label::majority);
  s.minority_count = d.count(Label::minority);
  s.imbalance_ratio =
      s.minority_count == 0
          ? 0.0
          : static_cast<double>(s.majority_count) / s.minority_count;
  s.relabeled = d.relabeled;
  s.dropped_rows = d.dropped_rows;
  return s;
}

MinMaxScaler MinMaxScaler::fit(const Matrix& x) {
  if (x.rows() == 0) throw std::invalid_argument("scaler: empty input");
  MinMaxScaler s;
  s.mins = x.colwise().minCoeff().transpose();
  s.ranges = x.colwise().maxCoeff().transpose() - s.mins;
  return s;
}

Matrix MinMaxScaler::transform(const Matrix& x) const {
  if (x.cols() != mins.size())
    throw std::invalid_argument("scaler: feature count mismatch");
  Matrix out(x.rows(), x.cols());
  for (int j = 0; j < x.cols(); ++j) {
    if (ranges(j) <= 0.0) {
      out.col(j).setZero();  // constant feature: pin to the lower edge
    } else {
      out.col(j) = (x.col(j).array() - mins(j)) / ranges(j);
    }
  }
  return out;
}

}  // namespace dcshs
