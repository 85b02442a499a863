#include "dcshs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dcshs/rng.hpp"

namespace dcshs {

ConfusionCounts confusion(const std::vector<Label>& truth,
                          const std::vector<Label>& predicted) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("metrics: label count mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool pos = truth[i] == Label::minority;
    const bool hit = predicted[i] == Label::minority;
    if (pos)
      (hit ? c.tp : c.fn)++;
    else
      (hit ? c.fp : c.tn)++;
  }
  return c;
}

std::optional<double> auc(const std::vector<Label>& truth,
                          const Vector& scores) {
  if (static_cast<Eigen::Index>(truth.size()) != scores.size())
    throw std::invalid_argument("metrics: score count mismatch");
  const std::size_t n = truth.size();
  std::size_t pos = 0;
  for (Label l : truth)
    if (l == Label::minority) ++pos;
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) return std::nullopt;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&scores](int a, int b) {
    return scores(a) < scores(b);
  });

  // Average ranks over tied score runs, then the Mann-Whitney rank-sum.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores(order[j + 1]) == scores(order[i])) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t q = i; q <= j; ++q)
      if (truth[static_cast<std::size_t>(order[q])] == Label::minority)
        rank_sum_pos += avg_rank;
    i = j + 1;
  }
  const double u = rank_sum_pos -
                   0.5 * static_cast<double>(pos) *
                       (static_cast<double>(pos) + 1.0);
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

MetricSet metrics(const std::vector<Label>& truth,
                  const std::vector<Label>& predicted, const Vector& scores) {
  const ConfusionCounts c = confusion(truth, predicted);
  MetricSet m;
  const int actual_pos = c.tp + c.fn;
  const int actual_neg = c.tn + c.fp;
  m.recall = actual_pos > 0 ? static_cast<double>(c.tp) / actual_pos : 0.0;
  m.precision =
      c.tp + c.fp > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  const double tnr =
      actual_neg > 0 ? static_cast<double>(c.tn) / actual_neg : 0.0;
  m.gmean = std::sqrt(m.recall * tnr);
  m.auc = auc(truth, scores);
  return m;
}

FoldPlan stratified_cv(const std::vector<Label>& y, int folds, int rounds,
                       std::uint64_t seed) {
  if (folds < 2)
    throw std::invalid_argument("cross-validation: need at least two folds");
  if (rounds < 1)
    throw std::invalid_argument("cross-validation: need at least one round");
  std::vector<int> class_rows[2];
  for (std::size_t i = 0; i < y.size(); ++i)
    class_rows[static_cast<int>(y[i])].push_back(static_cast<int>(i));
  const std::size_t smaller =
      std::min(class_rows[0].size(), class_rows[1].size());
  if (smaller < 2)
    throw std::invalid_argument(
        "cross-validation: each class needs at least two samples");

  FoldPlan plan;
  plan.folds = folds;
  if (static_cast<std::size_t>(folds) > smaller) {
    plan.folds = static_cast<int>(smaller);
    plan.clamped = true;
  }
  plan.rounds = rounds;
  plan.test_rows.assign(
      static_cast<std::size_t>(rounds),
      std::vector<std::vector<int>>(static_cast<std::size_t>(plan.folds)));

  for (int r = 0; r < rounds; ++r) {
    auto& round_folds = plan.test_rows[static_cast<std::size_t>(r)];
    for (int cls = 0; cls < 2; ++cls) {
      std::vector<int> rows = class_rows[cls];
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r),
                          static_cast<std::uint64_t>(cls)));
      for (std::size_t i = rows.size(); i > 1; --i)
        std::swap(rows[i - 1], rows[rng.index(i)]);
      for (std::size_t q = 0; q < rows.size(); ++q)
        round_folds[q % static_cast<std::size_t>(plan.folds)].push_back(
            rows[q]);
    }
    for (auto& fold : round_folds) std::sort(fold.begin(), fold.end());
  }
  return plan;
}

std::vector<std::vector<double>> friedman_ranks(
    const std::vector<std::vector<double>>& table) {
  std::vector<std::vector<double>> ranks;
  ranks.reserve(table.size());
  for (const auto& row : table) {
    const std::size_t k = row.size();
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&row](int a, int b) {
      return row[static_cast<std::size_t>(a)] >
             row[static_cast<std::size_t>(b)];
    });
    std::vector<double> r(k, 0.0);
    std::size_t i = 0;
    while (i < k) {
      std::size_t j = i;
      while (j + 1 < k &&
             row[static_cast<std::size_t>(order[j + 1])] ==
                 row[static_cast<std::size_t>(order[i])])
        ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t q = i; q <= j; ++q)
        r[static_cast<std::size_t>(order[q])] = avg;
      i = j + 1;
    }
    ranks.push_back(std::move(r));
  }
  return ranks;
}

std::vector<double> mean_ranks(const std::vector<std::vector<double>>& table) {
  if (table.empty()) throw std::invalid_argument("ranking: empty table");
  const auto ranks = friedman_ranks(table);
  const std::size_t k = ranks.front().size();
  std::vector<double> means(k, 0.0);
  for (const auto& row : ranks) {
    if (row.size() != k)
      throw std::invalid_argument("ranking: ragged table");
    for (std::size_t j = 0; j < k; ++j) means[j] += row[j];
  }
  for (double& m : means) m /= static_cast<double>(ranks.size());
  return means;
}

HolmResult holm_test(const std::vector<std::vector<double>>& table,
                     int control) {
  if (table.empty()) throw std::invalid_argument("holm: empty table");
  const std::size_t k = table.front().size();
  if (k < 2) throw std::invalid_argument("holm: need at least two methods");
  if (control < 0 || static_cast<std::size_t>(control) >= k)
    throw std::invalid_argument("holm: control column out of range");

  HolmResult result;
  const auto ranks = friedman_ranks(table);
  for (const auto& row : ranks) {
    bool all_tied = true;
    for (double v : row)
      if (v != row.front()) all_tied = false;
    if (all_tied) result.degenerate = true;
  }
  const auto means = mean_ranks(table);
  const double n_datasets = static_cast<double>(table.size());
  const double se = std::sqrt(static_cast<double>(k) *
                              (static_cast<double>(k) + 1.0) /
                              (6.0 * n_datasets));

  for (std::size_t j = 0; j < k; ++j) {
    if (j == static_cast<std::size_t>(control)) continue;
    HolmRow row;
    row.method = static_cast<int>(j);
    // Rank 1 is best, so the control wins when its mean rank is smaller.
    row.z = (means[j] - means[static_cast<std::size_t>(control)]) / se;
    row.raw_p = std::erfc(std::abs(row.z) / std::sqrt(2.0));
    result.rows.push_back(row);
  }

  // Step-down adjustment over the ascending raw p-values.
  std::vector<int> order(result.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&result](int a, int b) {
    return result.rows[static_cast<std::size_t>(a)].raw_p <
           result.rows[static_cast<std::size_t>(b)].raw_p;
  });
  const std::size_t m = result.rows.size();
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    auto& row = result.rows[static_cast<std::size_t>(order[i])];
    const double scaled = static_cast<double>(m - i) * row.raw_p;
    running = std::max(running, scaled);
    row.adjusted_p = std::min(1.0, running);
  }
  return result;
}

}  // namespace dcshs
