#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "dcshs/pcc.hpp"
#include "dcshs/rng.hpp"
#include "oracles.hpp"

using dcshs::Label;
using dcshs::Matrix;

namespace {

Matrix col(std::initializer_list<double> v) {
  Matrix m(static_cast<int>(v.size()), 1);
  int i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

// Two Gaussian blobs per class in the first two coordinates plus a pure noise
// third coordinate.
void blobs_with_noise(int per_blob, std::uint64_t seed, Matrix& x,
                      std::vector<Label>& y) {
  dcshs::Rng rng(seed);
  const double centers[4][2] = {{0, 0}, {8, 0}, {0, 8}, {8, 8}};
  const int n = 4 * per_blob;
  x.resize(n, 3);
  y.assign(n, Label::majority);
  int r = 0;
  for (int b = 0; b < 4; ++b) {
    for (int i = 0; i < per_blob; ++i, ++r) {
      x(r, 0) = centers[b][0] + 0.3 * rng.gaussian();
      x(r, 1) = centers[b][1] + 0.3 * rng.gaussian();
      x(r, 2) = 0.05 * rng.gaussian();
      y[r] = (b < 2) ? Label::majority : Label::minority;
    }
  }
}

// Partition signature that ignores cluster numbering.
std::set<std::vector<int>> partition_of(const std::vector<std::vector<int>>& cl) {
  std::set<std::vector<int>> out;
  for (const auto& c : cl) {
    auto v = c;
    std::sort(v.begin(), v.end());
    out.insert(v);
  }
  return out;
}

}  // namespace

TEST_CASE("dispersion index hand example") {
  const std::vector<Matrix> clusters{col({0, 2}), col({10, 12})};
  const auto r = dcshs::dbi(clusters);
  CHECK(std::abs(r.value - 0.02) <= 1e-12);
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("dispersion index of a lone cluster is zero") {
  const auto r = dcshs::dbi({col({1, 2, 3})});
  CHECK(r.value == 0.0);
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("dispersion index flags duplicate centroids") {
  const auto r = dcshs::dbi({col({0, 2}), col({-1, 3})});  // both centered at 1
  CHECK(r.degenerate);
  CHECK(std::isfinite(r.value));
}

TEST_CASE("dispersion index matches the reference evaluation") {
  for (int trial = 0; trial < 20; ++trial) {
    dcshs::Rng rng(dcshs::derive_seed(777, trial));
    const int nc = 2 + static_cast<int>(rng.index(3));
    std::vector<Matrix> clusters;
    for (int c = 0; c < nc; ++c) {
      Matrix m(2 + static_cast<int>(rng.index(5)), 3);
      for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < 3; ++j)
          m(i, j) = 5.0 * c + rng.gaussian();
      clusters.push_back(m);
    }
    const auto r = dcshs::dbi(clusters);
    CHECK(std::abs(r.value - oracle::dbi_reference(clusters)) <= 1e-10);
  }
}

TEST_CASE("projection keeps few dimensions and recovers blob structure") {
  Matrix x;
  std::vector<Label> y;
  blobs_with_noise(12, 42, x, y);

  const auto pc = dcshs::project_cluster_select(x, y, 2, 2, 99);
  CHECK(pc.d_t < 3);
  CHECK(pc.basis.cols() == pc.d_t);
  CHECK(pc.maj_clusters.size() == 2);
  CHECK(pc.min_clusters.size() == 2);

  // The same partition must fall out of clustering the noise-free columns.
  const Matrix clean = x.leftCols(2);
  std::vector<int> maj_rows, min_rows;
  for (int i = 0; i < x.rows(); ++i)
    (y[i] == Label::majority ? maj_rows : min_rows).push_back(i);
  for (int side = 0; side < 2; ++side) {
    const auto& rows = side == 0 ? maj_rows : min_rows;
    Matrix sub(rows.size(), 2);
    for (size_t i = 0; i < rows.size(); ++i) sub.row(i) = clean.row(rows[i]);
    const auto km = dcshs::kmeans(sub, 2, 1234);
    std::vector<std::vector<int>> expect(2);
    for (size_t i = 0; i < rows.size(); ++i)
      expect[km.assignments[i]].push_back(rows[i]);
    const auto& got = side == 0 ? pc.maj_clusters : pc.min_clusters;
    CHECK(partition_of(got) == partition_of(expect));
  }
}

TEST_CASE("projective clustering is deterministic and scale invariant") {
  Matrix x;
  std::vector<Label> y;
  blobs_with_noise(10, 7, x, y);

  const auto a = dcshs::project_cluster_select(x, y, 2, 2, 31);
  const auto b = dcshs::project_cluster_select(x, y, 2, 2, 31);
  CHECK(a.d_t == b.d_t);
  CHECK(a.maj_clusters == b.maj_clusters);
  CHECK(a.min_clusters == b.min_clusters);
  CHECK((a.basis - b.basis).cwiseAbs().maxCoeff() == 0.0);

  const Matrix x2 = 2.0 * x;  // exact scaling in binary floating point
  const auto c = dcshs::project_cluster_select(x2, y, 2, 2, 31);
  CHECK(c.d_t == a.d_t);
  CHECK(c.maj_clusters == a.maj_clusters);
  CHECK(c.min_clusters == a.min_clusters);
}

TEST_CASE("cluster counts above class size are rejected") {
  Matrix x(4, 2);
  x << 0, 0, 1, 1, 2, 2, 9, 9;
  std::vector<Label> y{Label::majority, Label::majority, Label::majority,
                       Label::minority};
  CHECK_THROWS_AS(dcshs::project_cluster_select(x, y, 2, 2, 0),
                  std::invalid_argument);
  CHECK_NOTHROW(dcshs::project_cluster_select(x, y, 3, 1, 0));
}

TEST_CASE("automatic grid prefers genuine multi-cluster scores") {
  Matrix x;
  std::vector<Label> y;
  blobs_with_noise(10, 11, x, y);
  const auto pc =
      dcshs::select_projective_clustering(x, y, dcshs::NcChoice{}, 5);
  CHECK(pc.nc_maj >= 2);
  CHECK(pc.nc_min >= 2);
  const auto again =
      dcshs::select_projective_clustering(x, y, dcshs::NcChoice{}, 5);
  CHECK(pc.nc_maj == again.nc_maj);
  CHECK(pc.nc_min == again.nc_min);
  CHECK(pc.maj_clusters == again.maj_clusters);

  // A fixed request bypasses the grid.
  const auto fixed =
      dcshs::select_projective_clustering(x, y, dcshs::NcChoice{1, 1}, 5);
  CHECK(fixed.nc_maj == 1);
  CHECK(fixed.nc_min == 1);
}

TEST_CASE("cross-complete subsets enumerate every cluster pair once") {
  Matrix x;
  std::vector<Label> y;
  blobs_with_noise(8, 3, x, y);
  for (int ncm = 1; ncm <= 3; ++ncm) {
    for (int ncn = 1; ncn <= 3; ++ncn) {
      const auto pc = dcshs::project_cluster_select(x, y, ncm, ncn, 17);
      const auto subsets = dcshs::build_ccs(pc);
      REQUIRE(static_cast<int>(subsets.size()) == ncm * ncn);
      std::set<std::pair<const std::vector<int>*, const std::vector<int>*>> seen;
      std::set<int> covered;
      for (int i = 0; i < ncm; ++i)
        for (int j = 0; j < ncn; ++j) {
          const auto& s = subsets[i * ncn + j];
          CHECK(s.id == i * ncn + j);
          CHECK(s.maj_rows == pc.maj_clusters[i]);
          CHECK(s.min_rows == pc.min_clusters[j]);
          CHECK_FALSE(s.maj_rows.empty());
          CHECK_FALSE(s.min_rows.empty());
          covered.insert(s.maj_rows.begin(), s.maj_rows.end());
          covered.insert(s.min_rows.begin(), s.min_rows.end());
        }
      CHECK(static_cast<int>(covered.size()) == x.rows());
    }
  }
}
