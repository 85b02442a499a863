#pragma once
// Stage-wise hybrid sampling: overlap-region detection drives majority
// undersampling, then filtered interpolation oversampling restores balance.

#include <cstdint>
#include <vector>

#include "dcshs/dataset.hpp"
#include "dcshs/numerics.hpp"

namespace dcshs {

// Per-sample overlap flags: true = overlapping, false = non-overlapping.
struct OverlapLabeling {
  std::vector<char> overlap;
  bool all_majority_overlap = false;
};

// Seed overlap set: noise samples (neighborhood plurality class disagrees
// with the own label; ties conservatively count as agreement) united with
// both endpoints of every cross-class nearest-neighbor relation.
// r1 is clamped to n-1. Throws if a class is missing.
OverlapLabeling initial_overlap(const Matrix& x, const std::vector<Label>& y,
                                int r1);

// Full overlap labeling: the seed set grown by repeated sweeps. An unflagged
// sample is promoted when a strict plurality of its r2 nearest neighbors is
// overlapping and it is no farther from those neighbors' mean than they are
// on average (or when all r2 neighbors are overlapping). Sweeps scan rows in
// ascending order with immediate effect and repeat until a fixpoint.
OverlapLabeling lords(const Matrix& x, const std::vector<Label>& y, int r1,
                      int r2);

struct UndersampleResult {
  std::vector<int> kept_rows;  // ascending original row indices
  int removed = 0;
  bool retained_all = false;  // every majority sample was flagged: skip removal
};

// Drops overlapping majority samples unless the whole majority class is
// flagged, in which case everything is retained. Minority rows always stay.
UndersampleResult undersample(const std::vector<Label>& y,
                              const OverlapLabeling& ol);

enum class SyntheticKind : char {
  interpolated,  // accepted by the neighborhood filter
  forced,        // admitted by the stall guard, filter bypassed
  jittered       // lone minority sample duplicated with small Gaussian noise
};

struct BalancedSubset {
  Matrix x;
  std::vector<Label> y;
  std::vector<char> synthetic_mask;     // per row of x
  int origin_subset = -1;               // id of the originating subset
  Label minority = Label::minority;     // class re-identified as smaller
  // Parallel arrays over synthetic rows, in generation order.
  std::vector<int> parent_a, parent_b;  // endpoint rows within x
  std::vector<SyntheticKind> kinds;
  bool fallback = false;  // the stall guard fired at least once
};

// Oversamples the currently-smaller class by interpolating between a sample
// (round-robin over the growing minority list) and a uniformly chosen one of
// its r3 same-class nearest neighbors, with alpha ~ U(0,1). A candidate is
// kept only when a strict plurality of its r3 nearest neighbors in the full
// current subset is minority; after 50 * initial_deficit consecutive
// rejections candidates are admitted unconditionally. Stops at equal counts.
BalancedSubset ifo(const Matrix& x, const std::vector<Label>& y, int r3,
                   std::uint64_t seed);

// Convex combination a + alpha * (b - a).
RowVector interpolate(const RowVector& a, const RowVector& b, double alpha);

}  // namespace dcshs
