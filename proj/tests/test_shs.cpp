#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dcshs/rng.hpp"
#include "dcshs/shs.hpp"
#include "oracles.hpp"

using dcshs::BalancedSubset;
using dcshs::ifo;
using dcshs::initial_overlap;
using dcshs::Label;
using dcshs::lords;
using dcshs::Matrix;
using dcshs::OverlapLabeling;
using dcshs::SyntheticKind;
using dcshs::undersample;

namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<int>(v.size()), 1);
  int i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

std::vector<Label> labels(std::initializer_list<int> v) {
  std::vector<Label> y;
  for (int x : v) y.push_back(x == 0 ? Label::majority : Label::minority);
  return y;
}

std::vector<char> flags(const OverlapLabeling& ol) { return ol.overlap; }

// Distance from point p to the segment [a, b].
double segment_distance(const dcshs::RowVector& p, const dcshs::RowVector& a,
                        const dcshs::RowVector& b) {
  const dcshs::RowVector ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

void check_convexity(const BalancedSubset& bs, double tol) {
  int syn = 0;
  for (int i = 0; i < bs.x.rows(); ++i) {
    if (!bs.synthetic_mask[i]) continue;
    const int k = syn++;
    if (bs.kinds[k] == SyntheticKind::jittered) continue;
    const double d = segment_distance(bs.x.row(i), bs.x.row(bs.parent_a[k]),
                                      bs.x.row(bs.parent_b[k]));
    CHECK(d <= tol);
  }
  CHECK(syn == static_cast<int>(bs.kinds.size()));
}

}  // namespace

TEST_CASE("seed overlap flags a lone minority point surrounded by majority") {
  const Matrix x = column({0.0, 0.2, 0.4, 0.1});
  const auto y = labels({0, 0, 0, 1});
  const auto ol = initial_overlap(x, y, 3);
  // Row 3 is noise (all neighbors majority); rows 0 and 1 join through
  // cross-class nearest-neighbor pairs with row 3. Row 2's nearest neighbor
  // is same-class and its neighborhood plurality agrees with its label.
  CHECK(flags(ol) == std::vector<char>{1, 1, 0, 1});
  CHECK_FALSE(ol.all_majority_overlap);
}

TEST_CASE("seed overlap takes both endpoints of a cross-class nearest pair") {
  const Matrix x = column({0.0, 1.0, 1.2, 5.0});
  const auto y = labels({0, 0, 1, 1});
  const auto ol = initial_overlap(x, y, 2);
  // 1.0 and 1.2 are mutual nearest neighbors across classes; 5.0's nearest
  // neighbor is same-class so it stays out.
  CHECK(flags(ol) == std::vector<char>{0, 1, 1, 0});
}

TEST_CASE("well separated classes produce an empty seed set") {
  Matrix x(6, 2);
  x << 0.0, 0.0, 0.1, 0.0, 0.0, 0.1, 100.0, 100.0, 100.1, 100.0, 100.0, 100.1;
  const auto y = labels({0, 0, 0, 1, 1, 1});
  const auto ol = initial_overlap(x, y, 2);
  CHECK(flags(ol) == std::vector<char>(6, 0));
  // With nothing to grow, the full labeling matches the seed labeling.
  const auto grown = lords(x, y, 2, 2);
  CHECK(flags(grown) == flags(ol));
  CHECK_FALSE(grown.all_majority_overlap);
}

TEST_CASE("seed overlap requires both classes") {
  const Matrix x = column({0.0, 1.0});
  CHECK_THROWS_AS(initial_overlap(x, labels({0, 0}), 1), std::invalid_argument);
  CHECK_THROWS_AS(lords(x, labels({1, 1}), 1, 1), std::invalid_argument);
}

TEST_CASE("growth promotes a distant sample when every neighbor overlaps") {
  // Rows 0 (majority) and 1 (minority) are mutual cross-class nearest
  // neighbors, so both are seeds. Row 2's own nearest neighbor is row 0
  // (same class), so it is not a seed, and it sits farther from the seeds'
  // mean than their spread — yet both of its neighbors overlap, so the
  // full-neighborhood clause promotes it anyway.
  const Matrix x = column({0.0, 0.12, -0.5});
  const auto y = labels({0, 1, 0});
  const auto seed = initial_overlap(x, y, 2);
  CHECK(flags(seed) == std::vector<char>{1, 1, 0});
  const auto ol = lords(x, y, 2, 2);
  CHECK(flags(ol) == std::vector<char>{1, 1, 1});
  CHECK(ol.all_majority_overlap);
}

TEST_CASE("growth respects the mean-distance guard") {
  // Rows 0/1 are seeds near the origin. Rows 2 and 3 sit far away; their
  // neighborhoods have an overlap plurality (2 of 3) but the candidates are
  // much farther from the overlap mean than the overlap spread, and the
  // neighborhood is not fully overlapping, so they stay non-overlapping.
  const Matrix x = column({0.0, 0.1, 5.0, 5.1});
  const auto y = labels({0, 1, 0, 0});
  const auto ol = lords(x, y, 3, 3);
  CHECK(flags(ol) == std::vector<char>{1, 1, 0, 0});
  CHECK_FALSE(ol.all_majority_overlap);
}

TEST_CASE("overlap labeling matches the brute-force reference") {
  dcshs::Rng rng(20240817u);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6 + static_cast<int>(rng.index(10));   // 6..15
    const int dim = 1 + static_cast<int>(rng.index(3));  // 1..3
    Matrix x(n, dim);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < dim; ++j) x(i, j) = rng.uniform();
    std::vector<Label> y(n, Label::majority);
    std::vector<int> yi(n, 0);
    // Guarantee both classes, random elsewhere.
    y[0] = Label::minority;
    yi[0] = 1;
    for (int i = 2; i < n; ++i) {
      const bool minor = rng.uniform() < 0.4;
      y[i] = minor ? Label::minority : Label::majority;
      yi[i] = minor ? 1 : 0;
    }
    const auto ours = lords(x, y, 3, 3);
    const auto ref = oracle::lords_reference(x, yi, 3, 3);
    for (int i = 0; i < n; ++i) {
      CAPTURE(trial);
      CAPTURE(i);
      CHECK(static_cast<bool>(ours.overlap[i]) == ref[i]);
    }
    // Fixpoint: growing again from the final labeling changes nothing.
    int flagged_majority = 0, total_majority = 0;
    for (int i = 0; i < n; ++i)
      if (y[i] == Label::majority) {
        ++total_majority;
        if (ours.overlap[i]) ++flagged_majority;
      }
    CHECK(ours.all_majority_overlap == (flagged_majority == total_majority));
  }
}

TEST_CASE("overlap seeds survive into the grown labeling") {
  dcshs::Rng rng(99u);
  Matrix x(12, 2);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 2; ++j) x(i, j) = rng.uniform();
  const auto y =
      labels({0, 1, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0});
  const auto seed = initial_overlap(x, y, 3);
  const auto grown = lords(x, y, 3, 3);
  for (int i = 0; i < 12; ++i)
    if (seed.overlap[i]) CHECK(grown.overlap[i]);
}

TEST_CASE("undersampling removes flagged majority rows only") {
  // 10 majority rows (3 flagged) + 4 minority rows (1 flagged).
  std::vector<Label> y;
  OverlapLabeling ol;
  for (int i = 0; i < 10; ++i) {
    y.push_back(Label::majority);
    ol.overlap.push_back(i < 3 ? 1 : 0);
  }
  for (int i = 0; i < 4; ++i) {
    y.push_back(Label::minority);
    ol.overlap.push_back(i == 0 ? 1 : 0);
  }
  const auto r = undersample(y, ol);
  CHECK(r.removed == 3);
  CHECK_FALSE(r.retained_all);
  CHECK(r.kept_rows.size() == 11);
  int maj = 0, min = 0;
  for (int row : r.kept_rows)
    (y[row] == Label::majority ? maj : min)++;
  CHECK(maj == 7);
  CHECK(min == 4);  // flagged minority rows are never dropped
  CHECK(std::is_sorted(r.kept_rows.begin(), r.kept_rows.end()));
}

TEST_CASE("undersampling retains everything when all majority rows overlap") {
  std::vector<Label> y(10, Label::majority);
  y.insert(y.end(), 4, Label::minority);
  OverlapLabeling ol;
  ol.overlap.assign(14, 0);
  for (int i = 0; i < 10; ++i) ol.overlap[i] = 1;
  ol.all_majority_overlap = true;
  const auto r = undersample(y, ol);
  CHECK(r.removed == 0);
  CHECK(r.retained_all);
  CHECK(r.kept_rows.size() == 14);
}

TEST_CASE("undersampling with zero overlap is the identity") {
  std::vector<Label> y = labels({0, 0, 1, 0, 1});
  OverlapLabeling ol;
  ol.overlap.assign(5, 0);
  const auto r = undersample(y, ol);
  CHECK(r.removed == 0);
  CHECK(r.kept_rows == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("interpolation endpoints") {
  dcshs::RowVector a(2), b(2);
  a << 1.0, 2.0;
  b << 3.0, -1.0;
  CHECK(dcshs::interpolate(a, b, 0.0) == a);
  CHECK(dcshs::interpolate(a, b, 1.0) == b);
  const auto mid = dcshs::interpolate(a, b, 0.5);
  CHECK(mid(0) == doctest::Approx(2.0));
  CHECK(mid(1) == doctest::Approx(0.5));
}

TEST_CASE("oversampling balances a clean two-cluster subset") {
  // Minority cluster far from the majority cluster: every candidate passes
  // the neighborhood filter, so balance is reached without the stall guard.
  Matrix x(8, 2);
  x << 0.00, 0.0, 0.05, 0.0, 0.10, 0.0,  // minority
      5.00, 0.0, 5.05, 0.0, 5.10, 0.0, 5.15, 0.0, 5.20, 0.0;  // majority
  const auto y = labels({1, 1, 1, 0, 0, 0, 0, 0});
  const auto bs = ifo(x, y, 3, 42u);
  CHECK(bs.x.rows() == 10);
  CHECK_FALSE(bs.fallback);
  CHECK(bs.minority == Label::minority);
  int maj = 0, min = 0;
  for (const auto l : bs.y) (l == Label::majority ? maj : min)++;
  CHECK(maj == 5);
  CHECK(min == 5);
  CHECK(bs.kinds.size() == 2);
  for (const auto k : bs.kinds) CHECK(k == SyntheticKind::interpolated);
  for (int i = 0; i < 8; ++i) CHECK_FALSE(bs.synthetic_mask[i]);
  for (int i = 8; i < 10; ++i) {
    CHECK(bs.synthetic_mask[i]);
    CHECK(bs.y[i] == Label::minority);
    // Synthetic coordinates stay inside the minority cluster's span.
    CHECK(bs.x(i, 0) >= 0.0);
    CHECK(bs.x(i, 0) <= 0.10);
  }
  check_convexity(bs, 1e-9);
  // Original rows are carried through unchanged, in order.
  CHECK(bs.x.topRows(8) == x);
}

TEST_CASE("oversampling re-identifies the smaller class as minority") {
  // The nominal majority class is the smaller one here.
  Matrix x(9, 1);
  x << 0.0, 0.1, 0.2, 5.0, 5.1, 5.2, 5.3, 5.4, 5.5;
  const auto y = labels({0, 0, 0, 1, 1, 1, 1, 1, 1});
  const auto bs = ifo(x, y, 5, 7u);  // r3 clamped to 2 inside the small class
  CHECK(bs.minority == Label::majority);
  int maj = 0, min = 0;
  for (const auto l : bs.y) (l == Label::majority ? maj : min)++;
  CHECK(maj == 6);
  CHECK(min == 6);
  for (size_t k = 0; k < bs.kinds.size(); ++k) {
    const int row = 9 + static_cast<int>(k);
    CHECK(bs.y[row] == Label::majority);
    CHECK(bs.x(row, 0) <= 0.2 + 1e-12);
  }
  check_convexity(bs, 1e-9);
}

TEST_CASE("oversampling an already balanced subset is a no-op") {
  Matrix x(4, 1);
  x << 0.0, 1.0, 2.0, 3.0;
  const auto y = labels({0, 1, 0, 1});
  const auto bs = ifo(x, y, 2, 5u);
  CHECK(bs.x.rows() == 4);
  CHECK(bs.kinds.empty());
  CHECK_FALSE(bs.fallback);
}

TEST_CASE("a lone minority sample is duplicated with small jitter") {
  Matrix x(5, 2);
  x << 0.5, 0.5, 5.0, 5.0, 5.1, 5.0, 5.2, 5.0, 5.3, 5.0;
  const auto y = labels({1, 0, 0, 0, 0});
  const auto bs = ifo(x, y, 3, 11u);
  int maj = 0, min = 0;
  for (const auto l : bs.y) (l == Label::majority ? maj : min)++;
  CHECK(maj == 4);
  CHECK(min == 4);
  REQUIRE(bs.kinds.size() == 3);
  CHECK(bs.kinds[0] == SyntheticKind::jittered);
  const int first_syn = 5;
  CHECK((bs.x.row(first_syn) - x.row(0)).norm() <= 0.05);
}

TEST_CASE("an unsatisfiable filter trips the stall guard") {
  // Both minority points flank a dense majority wall, so every interpolated
  // candidate lands with a majority neighborhood and is rejected until the
  // stall guard admits candidates unconditionally.
  Matrix x(7, 2);
  x << 0.0, 0.0, 1.0, 0.0,                                    // minority
      0.40, 0.0, 0.45, 0.0, 0.50, 0.0, 0.55, 0.0, 0.60, 0.0;  // majority
  const auto y = labels({1, 1, 0, 0, 0, 0, 0});
  const auto bs = ifo(x, y, 3, 123u);
  CHECK(bs.fallback);
  int forced = 0;
  for (const auto k : bs.kinds)
    if (k == SyntheticKind::forced) ++forced;
  CHECK(forced > 0);
  int maj = 0, min = 0;
  for (const auto l : bs.y) (l == Label::majority ? maj : min)++;
  CHECK(maj == min);
  check_convexity(bs, 1e-9);  // forced points are still segment points
}

TEST_CASE("oversampling is deterministic in the seed") {
  dcshs::Rng rng(314u);
  Matrix x(12, 3);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 3; ++j) x(i, j) = rng.uniform();
  const auto y = labels({1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0});
  const auto a = ifo(x, y, 3, 2024u);
  const auto b = ifo(x, y, 3, 2024u);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.kinds == b.kinds);
  const auto c = ifo(x, y, 3, 2025u);
  REQUIRE(c.x.rows() == a.x.rows());
  CHECK(a.x != c.x);
}

TEST_CASE("balance and convexity hold across random subsets") {
  dcshs::Rng rng(777u);
  for (int trial = 0; trial < 30; ++trial) {
    const int n_min = 2 + static_cast<int>(rng.index(5));
    const int n_maj = n_min + 1 + static_cast<int>(rng.index(8));
    const int dim = 1 + static_cast<int>(rng.index(3));
    Matrix x(n_min + n_maj, dim);
    std::vector<Label> y;
    for (int i = 0; i < n_min + n_maj; ++i) {
      y.push_back(i < n_min ? Label::minority : Label::majority);
      for (int j = 0; j < dim; ++j) x(i, j) = rng.uniform();
    }
    const auto bs = ifo(x, y, 3, 1000u + trial);
    int maj = 0, min = 0;
    for (const auto l : bs.y) (l == Label::majority ? maj : min)++;
    CAPTURE(trial);
    CHECK(maj == min);
    check_convexity(bs, 1e-9);
  }
}
