#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace dcshs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

struct EigenResult {
  Vector values;   // eigenvalues, descending
  Matrix vectors;  // column i pairs with values[i]; unit norm, deterministic sign
};

struct KMeansResult {
  std::vector<int> assignments;  // one entry per row, values in [0, k)
  Matrix centroids;              // k x cols
  double inertia;                // sum of squared distances to assigned centroids
};

// Subtract the column mean from every row. Throws on zero rows.
Matrix center(const Matrix& x);

// Sample covariance of already-centered data, (n-1) divisor. Throws when
// fewer than two rows are given.
Matrix covariance(const Matrix& centered);

// Eigendecomposition of a symmetric matrix. Asymmetry up to 1e-8 is
// tolerated and symmetrized away; anything larger throws. Eigenvector signs
// are fixed so the first component of meaningful magnitude is positive.
EigenResult sym_eig(const Matrix& c);

// Lloyd's algorithm from seeded k-means++ initializations, keeping the best
// of `restarts` runs. Deterministic for identical (x, k, seed, restarts).
// Assignment ties break toward the lowest cluster index; empty clusters are
// repaired by reseeding with the farthest point. Callers that only need
// coverage prototypes rather than a near-optimal partition may pass
// restarts = 1 for throughput.
KMeansResult kmeans(const Matrix& x, int k, std::uint64_t seed,
                    int restarts = 10);

// Squared Euclidean distances between all row pairs of a and b (rows_a x rows_b).
Matrix squared_distances(const Matrix& a, const Matrix& b);

// Indices of the k nearest rows of x to row i (self excluded) by squared
// Euclidean distance; ties break toward the lower row index.
std::vector<int> knn_of_row(const Matrix& x, int i, int k);

// Same query for an external point; no row is excluded.
std::vector<int> knn_of_point(const Matrix& x, const RowVector& q, int k);

}  // namespace dcshs
