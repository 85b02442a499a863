#include "dcshs/numerics.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "dcshs/rng.hpp"

namespace dcshs {

Matrix center(const Matrix& x) {
  if (x.rows() == 0) throw std::invalid_argument("center: empty input");
  return x.rowwise() - x.colwise().mean();
}

Matrix covariance(const Matrix& centered) {
  if (centered.rows() < 2)
    throw std::invalid_argument("covariance: insufficient samples");
  return centered.transpose() * centered /
         static_cast<double>(centered.rows() - 1);
}

EigenResult sym_eig(const Matrix& c) {
  if (c.rows() != c.cols())
    throw std::invalid_argument("sym_eig: matrix must be square");
  if (!c.allFinite())
    throw std::invalid_argument("sym_eig: non-finite entries");
  const double asym = (c - c.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8)
    throw std::invalid_argument("sym_eig: matrix is not symmetric");
  const Matrix sym = 0.5 * (c + c.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("sym_eig: eigensolver failed to converge");

  const int n = static_cast<int>(c.rows());
  EigenResult out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  // Deterministic orientation: first component of meaningful magnitude > 0.
  for (int j = 0; j < n; ++j) {
    const double big = out.vectors.col(j).cwiseAbs().maxCoeff();
    for (int i = 0; i < n; ++i) {
      if (std::abs(out.vectors(i, j)) > 1e-12 * big) {
        if (out.vectors(i, j) < 0.0) out.vectors.col(j) = -out.vectors.col(j);
        break;
      }
    }
  }
  return out;
}

namespace {

// Assign every row to its nearest centroid, ties toward the lower index.
// Returns true when anything changed. Large centroid counts go through one
// matrix product instead of per-row scans; minCoeff picks the first minimum,
// which preserves the lowest-index tie rule.
bool assign_step(const Matrix& x, const Matrix& centroids,
                 std::vector<int>& assignments) {
  bool changed = false;
  if (centroids.rows() >= 32) {
    const Matrix d = squared_distances(x, centroids);
    for (int i = 0; i < x.rows(); ++i) {
      int best = 0;
      d.row(i).minCoeff(&best);
      if (assignments[i] != best) {
        assignments[i] = best;
        changed = true;
      }
    }
    return changed;
  }
  for (int i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = (x.row(i) - centroids.row(0)).squaredNorm();
    for (int c = 1; c < centroids.rows(); ++c) {
      const double d = (x.row(i) - centroids.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (assignments[i] != best) {
      assignments[i] = best;
      changed = true;
    }
  }
  return changed;
}

// Give every empty cluster the point farthest from its current centroid,
// taken from a cluster that can spare one.
bool repair_empty(const Matrix& x, const Matrix& centroids,
                  std::vector<int>& assignments, int k) {
  std::vector<int> sizes(k, 0);
  for (int a : assignments) sizes[a]++;
  bool repaired = false;
  for (int c = 0; c < k; ++c) {
    if (sizes[c] > 0) continue;
    int donor = -1;
    double worst = -1.0;
    for (int i = 0; i < x.rows(); ++i) {
      if (sizes[assignments[i]] < 2) continue;
      const double d = (x.row(i) - centroids.row(assignments[i])).squaredNorm();
      if (d > worst) {
        worst = d;
        donor = i;
      }
    }
    if (donor < 0) continue;  // unreachable when k <= rows
    sizes[assignments[donor]]--;
    assignments[donor] = c;
    sizes[c]++;
    repaired = true;
  }
  return repaired;
}

Matrix means_of(const Matrix& x, const std::vector<int>& assignments, int k) {
  Matrix centroids = Matrix::Zero(k, x.cols());
  std::vector<int> sizes(k, 0);
  for (int i = 0; i < x.rows(); ++i) {
    centroids.row(assignments[i]) += x.row(i);
    sizes[assignments[i]]++;
  }
  for (int c = 0; c < k; ++c)
    if (sizes[c] > 0) centroids.row(c) /= static_cast<double>(sizes[c]);
  return centroids;
}

}  // namespace

namespace {

constexpr int kLloydBudget = 300;

std::uint64_t hash_assignments(const std::vector<int>& a) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const int v : a) {
    h ^= static_cast<std::uint32_t>(v);
    h *= 1099511628211ULL;
  }
  return h;
}

// Watches the assignment vector at the top of every Lloyd iteration. The
// state entering an iteration is fully described by that vector (centroids
// are always its means by then), so once a state recurs the loop is in a
// limit cycle and the rest of the iteration budget can be collapsed to its
// remainder modulo the cycle length, landing on exactly the state a full
// replay would. On duplicate-heavy data with k near n the assign/repair pair
// falls into such cycles instead of a fixpoint.
class CycleWatch {
 public:
  // Call once per iteration before the loop body; true means the remaining
  // budget has collapsed to zero and the loop should stop here.
  bool should_stop(const std::vector<int>& assignments, int iter) {
    if (replay_left_ < 0) {
      auto& bucket = seen_[hash_assignments(assignments)];
      int prev = -1;
      for (const int idx : bucket)
        if (states_[static_cast<std::size_t>(idx)] == assignments) {
          prev = idx;
          break;
        }
      if (prev >= 0) {
        replay_left_ = (kLloydBudget - prev) % (iter - prev);
      } else if ((states_.size() + 1) * assignments.size() <= kMemoryCap) {
        bucket.push_back(static_cast<int>(states_.size()));
        states_.push_back(assignments);
      }
    }
    if (replay_left_ == 0) return true;
    if (replay_left_ > 0) --replay_left_;
    return false;
  }

 private:
  static constexpr std::size_t kMemoryCap = std::size_t{8} << 20;
  std::unordered_map<std::uint64_t, std::vector<int>> seen_;
  std::vector<std::vector<int>> states_;
  int replay_left_ = -1;
};

// Lloyd loop that recomputes every distance each iteration. Used for small
// centroid counts, where per-row scans are cheap and the arithmetic must stay
// byte-for-byte stable for downstream consumers.
void lloyd_plain(const Matrix& x, Matrix& centroids,
                 std::vector<int>& assignments, int k) {
  assign_step(x, centroids, assignments);
  repair_empty(x, centroids, assignments, k);
  centroids = means_of(x, assignments, k);

  CycleWatch watch;
  for (int iter = 0; iter < kLloydBudget; ++iter) {
    if (watch.should_stop(assignments, iter)) break;
    const bool moved = assign_step(x, centroids, assignments);
    const bool repaired = repair_empty(x, centroids, assignments, k);
    if (!moved && !repaired) break;
    centroids = means_of(x, assignments, k);
  }
}

// Lloyd loop that keeps the full point-to-centroid distance matrix between
// iterations. A column is recomputed only when its centroid's member set
// changed; because every column — initial fill included — goes through one
// fixed per-column kernel, a column's bits are a function of the centroid
// value alone, so reusing a stale column is exact whenever the centroid did
// not move. A row rescans its minimum only when its winning column was
// refreshed or a refreshed column dips to or below its cached minimum (the
// "or equal" keeps lowest-index tie breaks exact). Every quantity is a pure
// function of the assignment vector, so CycleWatch stays sound here too.
void lloyd_cached(const Matrix& x, Matrix& centroids,
                  std::vector<int>& assignments, int k) {
  const int n = static_cast<int>(x.rows());
  const Vector x2 = x.rowwise().squaredNorm();
  Matrix dist(n, k);
  std::vector<int> argmin(n, 0);
  Vector rowmin(n);

  const auto refresh_column = [&](int j) {
    const Vector prod = x * centroids.row(j).transpose();
    dist.col(j) = (x2.array() - 2.0 * prod.array() +
                   centroids.row(j).squaredNorm())
                      .max(0.0)
                      .matrix();
  };
  // Column-order sweep keeping strict improvements, so ties resolve to the
  // lowest centroid index, matching a left-to-right row scan.
  const auto full_rescan = [&]() {
    rowmin.setConstant(std::numeric_limits<double>::infinity());
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < n; ++i)
        if (dist(i, j) < rowmin(i)) {
          rowmin(i) = dist(i, j);
          argmin[i] = j;
        }
  };

  for (int j = 0; j < k; ++j) refresh_column(j);
  full_rescan();
  assignments = argmin;
  repair_empty(x, centroids, assignments, k);
  centroids = means_of(x, assignments, k);

  std::vector<char> touched(static_cast<std::size_t>(k), 1);
  std::vector<char> dirty(static_cast<std::size_t>(n), 0);
  std::vector<int> pre_repair(static_cast<std::size_t>(n));
  CycleWatch watch;
  for (int iter = 0; iter < kLloydBudget; ++iter) {
    if (watch.should_stop(assignments, iter)) break;

    for (int j = 0; j < k; ++j)
      if (touched[static_cast<std::size_t>(j)]) refresh_column(j);
    std::fill(dirty.begin(), dirty.end(), 0);
    for (int i = 0; i < n; ++i)
      if (touched[static_cast<std::size_t>(argmin[i])]) dirty[i] = 1;
    int dirty_count = 0;
    for (int j = 0; j < k; ++j) {
      if (!touched[static_cast<std::size_t>(j)]) continue;
      for (int i = 0; i < n; ++i)
        if (dist(i, j) <= rowmin(i)) dirty[i] = 1;
    }
    for (int i = 0; i < n; ++i) dirty_count += dirty[i];
    if (dirty_count * 8 > n) {
      full_rescan();
    } else if (dirty_count > 0) {
      for (int i = 0; i < n; ++i) {
        if (!dirty[i]) continue;
        int best = 0;
        rowmin(i) = dist.row(i).minCoeff(&best);
        argmin[i] = best;
      }
    }

    bool moved = false;
    std::fill(touched.begin(), touched.end(), 0);
    for (int i = 0; i < n; ++i) {
      if (assignments[i] == argmin[i]) continue;
      touched[static_cast<std::size_t>(assignments[i])] = 1;
      touched[static_cast<std::size_t>(argmin[i])] = 1;
      assignments[i] = argmin[i];
      moved = true;
    }
    pre_repair = assignments;
    const bool repaired = repair_empty(x, centroids, assignments, k);
    if (repaired)
      for (int i = 0; i < n; ++i)
        if (pre_repair[i] != assignments[i]) {
          touched[static_cast<std::size_t>(pre_repair[i])] = 1;
          touched[static_cast<std::size_t>(assignments[i])] = 1;
        }
    if (!moved && !repaired) break;
    centroids = means_of(x, assignments, k);
  }
}

KMeansResult kmeans_single(const Matrix& x, int k, std::uint64_t seed) {
  const int n = static_cast<int>(x.rows());
  Rng rng(seed);
  Matrix centroids(k, x.cols());
  std::vector<char> chosen(n, 0);

  // k-means++ seeding.
  {
    const int first = static_cast<int>(rng.index(n));
    centroids.row(0) = x.row(first);
    chosen[first] = 1;
    Vector d2(n);
    for (int i = 0; i < n; ++i)
      d2(i) = (x.row(i) - centroids.row(0)).squaredNorm();
    for (int t = 1; t < k; ++t) {
      const double total = d2.sum();
      int pick = -1;
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          acc += d2(i);
          if (acc >= target) {
            pick = i;
            break;
          }
        }
        if (pick < 0) pick = n - 1;
      } else {
        // All remaining points coincide with chosen centroids; take the first
        // index still unchosen so duplicates spread across clusters.
        for (int i = 0; i < n; ++i)
          if (!chosen[i]) {
            pick = i;
            break;
          }
        if (pick < 0) pick = 0;
      }
      centroids.row(t) = x.row(pick);
      chosen[pick] = 1;
      for (int i = 0; i < n; ++i)
        d2(i) = std::min(d2(i), (x.row(i) - centroids.row(t)).squaredNorm());
    }
  }

  std::vector<int> assignments(n, 0);
  if (k >= 32 && static_cast<long long>(n) * k <= 16'777'216LL) {
    lloyd_cached(x, centroids, assignments, k);
  } else {
    lloyd_plain(x, centroids, assignments, k);
  }

  KMeansResult out;
  out.assignments = std::move(assignments);
  out.centroids = std::move(centroids);
  out.inertia = 0.0;
  for (int i = 0; i < n; ++i)
    out.inertia += (x.row(i) - out.centroids.row(out.assignments[i])).squaredNorm();
  return out;
}

}  // namespace

KMeansResult kmeans(const Matrix& x, int k, std::uint64_t seed, int restarts) {
  const int n = static_cast<int>(x.rows());
  if (k < 1) throw std::invalid_argument("kmeans: k must be positive");
  if (k > n) throw std::invalid_argument("kmeans: k exceeds sample count");
  if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be positive");

  KMeansResult best;
  for (int r = 0; r < restarts; ++r) {
    KMeansResult run = kmeans_single(x, k, derive_seed(seed, r));
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  const Vector a2 = a.rowwise().squaredNorm();
  const Vector b2 = b.rowwise().squaredNorm();
  Matrix d = -2.0 * (a * b.transpose());
  d.colwise() += a2;
  d.rowwise() += b2.transpose();
  d = d.cwiseMax(0.0);
  return d;
}

namespace {

std::vector<int> knn_from_distances(const std::vector<double>& dist,
                                    int exclude, int k) {
  std::vector<int> idx;
  idx.reserve(dist.size());
  for (int i = 0; i < static_cast<int>(dist.size()); ++i)
    if (i != exclude) idx.push_back(i);
  const int kk = std::min<int>(k, static_cast<int>(idx.size()));
  const auto cmp = [&](int a, int b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + kk, idx.end(), cmp);
  idx.resize(kk);
  return idx;
}

}  // namespace

std::vector<int> knn_of_row(const Matrix& x, int i, int k) {
  if (i < 0 || i >= x.rows())
    throw std::invalid_argument("knn_of_row: row out of range");
  std::vector<double> dist(x.rows());
  for (int j = 0; j < x.rows(); ++j)
    dist[j] = (x.row(j) - x.row(i)).squaredNorm();
  return knn_from_distances(dist, i, k);
}

std::vector<int> knn_of_point(const Matrix& x, const RowVector& q, int k) {
  std::vector<double> dist(x.rows());
  for (int j = 0; j < x.rows(); ++j)
    dist[j] = (x.row(j) - q).squaredNorm();
  return knn_from_distances(dist, -1, k);
}

}  // namespace dcshs
