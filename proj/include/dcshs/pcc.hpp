#pragma once

#include <cstdint>
#include <vector>

#include "dcshs/dataset.hpp"
#include "dcshs/numerics.hpp"

namespace dcshs {

struct DbiResult {
  double value = 0.0;
  bool degenerate = false;  // duplicate centroids collapsed a denominator
};

// Average, over clusters, of the worst pairwise ratio between summed mean
// squared deviations and the squared centroid gap. Zero for a lone cluster.
DbiResult dbi(const std::vector<Matrix>& clusters);

struct ProjectiveClustering {
  int d_t = 0;          // retained projection dimension count
  Matrix basis;         // features x d_t, orthonormal covariance eigenvectors
  int nc_maj = 0;
  int nc_min = 0;
  std::vector<std::vector<int>> maj_clusters;  // absolute row indices, ascending
  std::vector<std::vector<int>> min_clusters;
  double db_score = 0.0;  // combined dispersion at d_t
  bool degenerate = false;
};

// Projects centered data onto leading covariance eigenvectors, clusters each
// class per candidate dimension count, and keeps the dimension with the
// lowest combined dispersion (ties toward fewer dimensions).
ProjectiveClustering project_cluster_select(const Matrix& x,
                                            const std::vector<Label>& y,
                                            int nc_maj, int nc_min,
                                            std::uint64_t seed);

// Cluster-count selection. Zero in either slot requests the automatic grid
// over 1..3 per class: pairs where both classes keep at least two clusters
// are preferred (a lone cluster scores a flat zero and would otherwise always
// win), the combined dispersion decides within a tier, and ties fall toward
// fewer total clusters.
struct NcChoice {
  int nc_maj = 0;
  int nc_min = 0;
};

ProjectiveClustering select_projective_clustering(const Matrix& x,
                                                  const std::vector<Label>& y,
                                                  NcChoice nc,
                                                  std::uint64_t seed);

struct CrossCompleteSubset {
  int id = 0;  // maj_index * nc_min + min_index
  std::vector<int> maj_rows;
  std::vector<int> min_rows;
};

// One subset per (majority cluster, minority cluster) pair, in row-major
// pair order.
std::vector<CrossCompleteSubset> build_ccs(const ProjectiveClustering& pc);

}  // namespace dcshs
