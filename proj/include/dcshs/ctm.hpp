#pragma once
// Cluster transfer mapping: condense a balanced subset into a compact source
// domain, then learn a kernel projection that aligns source and target
// distributions while preserving local neighborhood structure.

#include <cstdint>
#include <vector>

#include "dcshs/dataset.hpp"
#include "dcshs/numerics.hpp"
#include "dcshs/shs.hpp"

namespace dcshs {

enum class AffinityMode : char { simple, heat };

enum class CtmSolver : char {
  automatic,  // dense below a size threshold, iterative above it
  dense,
  iterative
};

struct CtmConfig {
  double cluster_ratio = 0.5;  // condensation strength, in (0, 1]
  int embed_dim = 0;           // 0 = automatic: min(8, nS + nT - 1)
  double lambda = 0.01;        // projection norm regularizer
  double kernel_gamma = 100.0;
  AffinityMode affinity_mode = AffinityMode::simple;
  double heat_f = 1.0;  // heat affinity bandwidth
  int knn_k = 5;        // affinity graph neighbor count
  CtmSolver solver = CtmSolver::automatic;
};

struct CondensedSource {
  Matrix x;              // per-class cluster centers, majority block first
  std::vector<Label> y;  // centers inherit their class label
};

// Per-class K-means condensation with k = max(1, round(ratio * class count)).
CondensedSource condense(const BalancedSubset& s, double ratio,
                         std::uint64_t seed);

// K[i,j] = exp(-gamma * ||a_i - b_j||^2). Values whose exponent falls below
// -37 (about 8.5e-17) are flushed to exact zero; that keeps the matrix sparse
// in the large-gamma regime and sits far beneath every contracted tolerance.
Matrix gaussian_kernel(const Matrix& a, const Matrix& b, double gamma);

// The (nS+nT)^2 coefficient matrix whose kernel dot product tr(K * M) equals
// the squared empirical maximum mean discrepancy between the two domains.
Matrix mmd_matrix(int n_source, int n_target);

struct AffinityResult {
  Matrix a;          // symmetric: edge when either endpoint is a kNN of the other
  Matrix laplacian;  // degree - a
  Matrix degree;     // diagonal row-sum matrix
};

// Neighborhood affinity and graph Laplacian of one domain. k is clamped to
// rows - 1; a single-row domain yields all-zero matrices.
AffinityResult affinity_laplacian(const Matrix& d, int k, AffinityMode mode,
                                  double f);

struct CtmModel {
  Matrix anchors;  // stacked training rows: source block, then target block
  Matrix w;        // (nS + nT) x m projection
  CtmConfig config;
  int n_source = 0;
  int n_target = 0;
  Vector eigenvalues;  // ascending, one per retained projection column
  // Embedding of the anchor rows themselves, kept from the fit so callers
  // embedding the training rows skip a second kernel evaluation. Transient:
  // not serialized, and empty on a model read back from disk.
  Matrix train_embedding;
  // Fit diagnostics.
  bool regularized = false;    // constraint operator needed a ridge
  bool reduced_dim = false;    // m exceeded the stable rank and was lowered
  bool iterative = false;      // large-problem solver path was taken
  bool converged = true;       // iterative solver met its tolerance
  double constraint_residual = 0.0;
  double max_pair_residual = 0.0;
};

// Learns W by minimizing distribution discrepancy + neighborhood distortion
// + lambda * norm over the kernel span of [D_S; D_T], under a whitening
// constraint on the embedded training rows.
CtmModel ctm_fit(const Matrix& d_s, const Matrix& d_t, const CtmConfig& cfg);

// Embeds rows of x: gaussian_kernel(x, anchors, gamma) * W.
Matrix ctm_transform(const CtmModel& model, const Matrix& x);

}  // namespace dcshs
