#include "dcshs/shs.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "dcshs/rng.hpp"

namespace dcshs {

namespace {

void validate_subset(const Matrix& x, const std::vector<Label>& y) {
  if (x.rows() != static_cast<int>(y.size()))
    throw std::invalid_argument("overlap labeling: label count mismatch");
  int counts[2] = {0, 0};
  for (const auto l : y) ++counts[static_cast<int>(l)];
  if (counts[0] == 0 || counts[1] == 0)
    throw std::invalid_argument("subset lacks both classes");
}

std::vector<std::vector<int>> all_neighbor_lists(const Matrix& x, int k) {
  std::vector<std::vector<int>> nn(x.rows());
  for (int i = 0; i < x.rows(); ++i) nn[i] = knn_of_row(x, i, k);
  return nn;
}

// Strict plurality class over the first k listed rows; -1 on a tie.
int plurality_class(const std::vector<Label>& y, const std::vector<int>& rows,
                    int k) {
  int counts[2] = {0, 0};
  for (int t = 0; t < k; ++t) ++counts[static_cast<int>(y[rows[t]])];
  if (counts[0] == counts[1]) return -1;
  return counts[0] > counts[1] ? 0 : 1;
}

void refresh_majority_flag(const std::vector<Label>& y, OverlapLabeling& ol) {
  ol.all_majority_overlap = true;
  for (size_t i = 0; i < y.size(); ++i)
    if (y[i] == Label::majority && !ol.overlap[i]) {
      ol.all_majority_overlap = false;
      return;
    }
}

OverlapLabeling seed_overlap(const Matrix& x, const std::vector<Label>& y,
                             int k1,
                             const std::vector<std::vector<int>>& nn) {
  const int n = static_cast<int>(x.rows());
  OverlapLabeling ol;
  ol.overlap.assign(n, 0);
  // Noise: the neighborhood plurality class disagrees with the own label.
  // Ties count as agreement.
  for (int i = 0; i < n; ++i) {
    const int p = plurality_class(y, nn[i], k1);
    if (p >= 0 && p != static_cast<int>(y[i])) ol.overlap[i] = 1;
  }
  // Local boundary: both endpoints of any cross-class nearest-neighbor
  // relation, whether mutual or one-sided.
  for (int i = 0; i < n; ++i) {
    const int j = nn[i][0];
    if (y[j] != y[i]) {
      ol.overlap[i] = 1;
      ol.overlap[j] = 1;
    }
  }
  refresh_majority_flag(y, ol);
  return ol;
}

}  // namespace

OverlapLabeling initial_overlap(const Matrix& x, const std::vector<Label>& y,
                                int r1) {
  validate_subset(x, y);
  if (r1 < 1) throw std::invalid_argument("neighbor count must be positive");
  const int n = static_cast<int>(x.rows());
  const int k1 = std::min(r1, n - 1);
  return seed_overlap(x, y, k1, all_neighbor_lists(x, k1));
}

OverlapLabeling lords(const Matrix& x, const std::vector<Label>& y, int r1,
                      int r2) {
  validate_subset(x, y);
  if (r1 < 1 || r2 < 1)
    throw std::invalid_argument("neighbor count must be positive");
  const int n = static_cast<int>(x.rows());
  const int k1 = std::min(r1, n - 1);
  const int k2 = std::min(r2, n - 1);
  const auto nn = all_neighbor_lists(x, std::max(k1, k2));
  OverlapLabeling ol = seed_overlap(x, y, k1, nn);

  // Grow the region: rows are scanned in ascending order, promotions take
  // effect immediately, and sweeps repeat until one admits nobody.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      if (ol.overlap[i]) continue;
      const auto& nb = nn[i];
      int over = 0;
      for (int t = 0; t < k2; ++t)
        if (ol.overlap[nb[t]]) ++over;
      if (2 * over <= k2) continue;  // strict plurality of overlap required
      RowVector mu = RowVector::Zero(x.cols());
      for (int t = 0; t < k2; ++t)
        if (ol.overlap[nb[t]]) mu += x.row(nb[t]);
      mu /= over;
      const double d1 = (x.row(i) - mu).squaredNorm();
      double d2 = 0.0;
      for (int t = 0; t < k2; ++t)
        if (ol.overlap[nb[t]]) d2 += (x.row(nb[t]) - mu).squaredNorm();
      d2 /= over;
      if (d1 <= d2 || over == k2) {
        ol.overlap[i] = 1;
        changed = true;
      }
    }
  }
  refresh_majority_flag(y, ol);
  return ol;
}

UndersampleResult undersample(const std::vector<Label>& y,
                              const OverlapLabeling& ol) {
  if (y.size() != ol.overlap.size())
    throw std::invalid_argument("undersample: labeling size mismatch");
  const int n = static_cast<int>(y.size());
  bool all_flagged = true;
  for (int i = 0; i < n; ++i)
    if (y[i] == Label::majority && !ol.overlap[i]) {
      all_flagged = false;
      break;
    }
  UndersampleResult r;
  r.retained_all = all_flagged;
  r.kept_rows.reserve(n);
  for (int i = 0; i < n; ++i) {
    const bool drop =
        !all_flagged && y[i] == Label::majority && ol.overlap[i];
    if (drop)
      ++r.removed;
    else
      r.kept_rows.push_back(i);
  }
  return r;
}

RowVector interpolate(const RowVector& a, const RowVector& b, double alpha) {
  return a + alpha * (b - a);
}

namespace {

// Indices of the k nearest rows (by squared distance, ties by ascending row)
// to `q` among the first `filled` rows of `x`. The caller provides the
// scratch and output buffers; this sits on the oversampling hot path, where
// per-call allocation would dominate.
void nearest_rows(const Matrix& x, int filled, const RowVector& q, int k,
                  std::vector<std::pair<double, int>>& scratch,
                  std::vector<int>& out) {
  scratch.clear();
  for (int i = 0; i < filled; ++i)
    scratch.emplace_back((x.row(i) - q).squaredNorm(), i);
  std::partial_sort(scratch.begin(), scratch.begin() + k, scratch.end());
  out.resize(k);
  for (int i = 0; i < k; ++i) out[i] = scratch[i].second;
}

}  // namespace

BalancedSubset ifo(const Matrix& x, const std::vector<Label>& y, int r3,
                   std::uint64_t seed) {
  validate_subset(x, y);
  if (r3 < 1) throw std::invalid_argument("neighbor count must be positive");
  const int n = static_cast<int>(x.rows());
  int counts[2] = {0, 0};
  for (const auto l : y) ++counts[static_cast<int>(l)];

  BalancedSubset out;
  if (counts[0] == counts[1]) {  // already balanced: nothing to synthesize
    out.x = x;
    out.y = y;
    out.synthetic_mask.assign(n, 0);
    return out;
  }
  // Re-identify: the currently-smaller class plays the minority role.
  const Label minority =
      counts[1] < counts[0] ? Label::minority : Label::majority;
  const int deficit = std::abs(counts[0] - counts[1]);

  out.minority = minority;
  out.x.resize(n + deficit, x.cols());
  out.x.topRows(n) = x;
  out.y = y;
  out.y.reserve(n + deficit);
  out.synthetic_mask.assign(n, 0);

  std::vector<int> minority_rows;
  for (int i = 0; i < n; ++i)
    if (y[i] == minority) minority_rows.push_back(i);

  Rng rng(seed);
  const long stall_limit = 50L * deficit;
  long consecutive_rejections = 0;
  bool forced_mode = false;
  int produced = 0;
  size_t rr = 0;  // round-robin cursor over the growing minority list

  std::vector<std::pair<double, int>> pool;
  std::vector<std::pair<double, int>> nn_scratch;
  std::vector<int> nb;
  RowVector cand;
  while (produced < deficit) {
    const int cur_min = static_cast<int>(minority_rows.size());
    const int filled = n + produced;
    SyntheticKind kind;
    int pa, pb;
    bool accept;

    if (cur_min == 1) {
      // A lone minority sample admits no interpolation partner: duplicate it
      // with small per-feature jitter. Such duplicates sit at an already
      // accepted location, so the neighborhood filter is not applied.
      pa = pb = minority_rows[0];
      cand = out.x.row(pa);
      for (int j = 0; j < cand.size(); ++j) cand(j) += 1e-3 * rng.gaussian();
      kind = SyntheticKind::jittered;
      accept = true;
    } else {
      const int seed_row = minority_rows[rr % minority_rows.size()];
      ++rr;  // advance once per attempt, accepted or not
      const int k_pool = std::min(r3, cur_min - 1);
      pool.clear();
      for (const int row : minority_rows) {
        if (row == seed_row) continue;
        pool.emplace_back((out.x.row(row) - out.x.row(seed_row)).squaredNorm(),
                          row);
      }
      std::partial_sort(pool.begin(), pool.begin() + k_pool, pool.end());
      const int partner = pool[rng.index(k_pool)].second;
      const double alpha = rng.uniform();
      cand = interpolate(out.x.row(seed_row), out.x.row(partner), alpha);
      pa = seed_row;
      pb = partner;
      if (forced_mode) {
        kind = SyntheticKind::forced;
        accept = true;
      } else {
        kind = SyntheticKind::interpolated;
        const int ka = std::min(r3, filled);
        nearest_rows(out.x, filled, cand, ka, nn_scratch, nb);
        int mins = 0;
        for (const int row : nb)
          if (out.y[row] == minority) ++mins;
        accept = 2 * mins > ka;  // strict plurality of minority required
      }
    }

    if (accept) {
      const int row = n + produced;
      out.x.row(row) = cand;
      out.y.push_back(minority);
      out.synthetic_mask.push_back(1);
      out.parent_a.push_back(pa);
      out.parent_b.push_back(pb);
      out.kinds.push_back(kind);
      minority_rows.push_back(row);
      ++produced;
      consecutive_rejections = 0;
    } else if (++consecutive_rejections >= stall_limit && !forced_mode) {
      forced_mode = true;  // filter unsatisfiable: admit candidates as-is
      out.fallback = true;
    }
  }
  return out;
}

}  // namespace dcshs
