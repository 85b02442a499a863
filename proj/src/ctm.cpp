#include "dcshs/ctm.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dcshs/rng.hpp"

namespace dcshs {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Distances whose kernel value would underflow below exp(-37) are skipped.
constexpr double kKernelExponentFloor = 37.0;

// Problems up to this many anchors use the dense eigensolver.
constexpr int kDenseLimit = 1000;

}  // namespace

CondensedSource condense(const BalancedSubset& s, double ratio,
                         std::uint64_t seed) {
  if (!(ratio > 0.0) || ratio > 1.0)
    throw std::invalid_argument("condense: ratio must be in (0, 1]");
  if (s.x.rows() != static_cast<int>(s.y.size()))
    throw std::invalid_argument("condense: label count mismatch");

  CondensedSource out;
  std::vector<Matrix> blocks;
  std::vector<Label> block_labels;
  for (const Label cls : {Label::majority, Label::minority}) {
    std::vector<int> rows;
    for (int i = 0; i < s.x.rows(); ++i)
      if (s.y[i] == cls) rows.push_back(i);
    if (rows.empty())
      throw std::invalid_argument("condense: subset lacks both classes");
    Matrix sub(static_cast<int>(rows.size()), s.x.cols());
    for (size_t i = 0; i < rows.size(); ++i) sub.row(i) = s.x.row(rows[i]);
    const int k = std::max(
        1L, std::lround(ratio * static_cast<double>(rows.size())));
    const auto km =
        kmeans(sub, static_cast<int>(k),
               derive_seed(seed, static_cast<std::uint64_t>(cls)), 1);
    blocks.push_back(km.centroids);
    block_labels.push_back(cls);
  }
  const int total =
      static_cast<int>(blocks[0].rows() + blocks[1].rows());
  out.x.resize(total, s.x.cols());
  out.x.topRows(blocks[0].rows()) = blocks[0];
  out.x.bottomRows(blocks[1].rows()) = blocks[1];
  out.y.assign(blocks[0].rows(), block_labels[0]);
  out.y.insert(out.y.end(), blocks[1].rows(), block_labels[1]);
  return out;
}

Matrix gaussian_kernel(const Matrix& a, const Matrix& b, double gamma) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("gaussian_kernel: dimension mismatch");
  if (!(gamma > 0.0))
    throw std::invalid_argument("gaussian_kernel: gamma must be positive");
  Matrix d = squared_distances(a, b);
  const double cut = kKernelExponentFloor / gamma;
  if (&a == &b) {
    // Exponentiate the upper triangle only and mirror it, which also makes
    // the symmetry exact; the diagonal is exactly one.
    d.diagonal().setZero();
    const Eigen::Index n = d.rows();
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i <= j; ++i) {
        const double v = d(i, j);
        d(i, j) = v > cut ? 0.0 : std::exp(-gamma * v);
      }
    d.triangularView<Eigen::StrictlyLower>() = d.transpose();
    return d;
  }
  d = d.unaryExpr([gamma, cut](double v) {
    return v > cut ? 0.0 : std::exp(-gamma * v);
  });
  return d;
}

Matrix mmd_matrix(int n_source, int n_target) {
  if (n_source < 1 || n_target < 1)
    throw std::invalid_argument("mmd_matrix: empty domain");
  const int n = n_source + n_target;
  Matrix m(n, n);
  const double ss = 1.0 / (static_cast<double>(n_source) * n_source);
  const double tt = 1.0 / (static_cast<double>(n_target) * n_target);
  const double st = -1.0 / (static_cast<double>(n_source) * n_target);
  m.topLeftCorner(n_source, n_source).setConstant(ss);
  m.bottomRightCorner(n_target, n_target).setConstant(tt);
  m.topRightCorner(n_source, n_target).setConstant(st);
  m.bottomLeftCorner(n_target, n_source).setConstant(st);
  return m;
}

namespace {

// Symmetric OR-rule neighbor edges of one domain, each undirected pair once.
std::vector<Triplet> affinity_edges(const Matrix& d, int k, AffinityMode mode,
                                    double f) {
  const int n = static_cast<int>(d.rows());
  std::vector<Triplet> out;
  if (n <= 1) return out;
  const int ke = std::min(k, n - 1);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<size_t>(n) * ke);
  for (int i = 0; i < n; ++i)
    for (const int j : knn_of_row(d, i, ke))
      pairs.emplace_back(std::min(i, j), std::max(i, j));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  out.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    const double w =
        mode == AffinityMode::simple
            ? 1.0
            : std::exp(-(d.row(i) - d.row(j)).squaredNorm() / f);
    out.emplace_back(i, j, w);
  }
  return out;
}

}  // namespace

AffinityResult affinity_laplacian(const Matrix& d, int k, AffinityMode mode,
                                  double f) {
  if (d.rows() == 0) throw std::invalid_argument("affinity: empty input");
  if (k < 1) throw std::invalid_argument("affinity: neighbor count must be positive");
  if (mode == AffinityMode::heat && !(f > 0.0))
    throw std::invalid_argument("affinity: heat bandwidth must be positive");
  const int n = static_cast<int>(d.rows());
  AffinityResult r;
  r.a = Matrix::Zero(n, n);
  for (const auto& e : affinity_edges(d, k, mode, f)) {
    r.a(e.row(), e.col()) = e.value();
    r.a(e.col(), e.row()) = e.value();
  }
  r.degree = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) r.degree(i, i) = r.a.row(i).sum();
  r.laplacian = r.degree - r.a;
  return r;
}

namespace {

struct FitProblem {
  int n = 0, ns = 0, nt = 0, m = 0;
  double lambda = 0.0;
  Vector v;     // signed domain-mean weights
  Vector dhat;  // affinity degree diagonal over both domains
  std::vector<Triplet> l_edges;  // block-diagonal Laplacian as +deg/-edge terms
  bool b_ridge = false;          // constraint operator needed +1e-9 I
};

// Laplacian of both domains, expressed as triplets (diagonal degrees and
// negative symmetric edge weights), plus the degree diagonal.
void build_graph(const Matrix& d_s, const Matrix& d_t, const CtmConfig& cfg,
                 FitProblem& p) {
  p.dhat = Vector::Zero(p.n);
  const auto add_domain = [&](const Matrix& d, int offset) {
    const int rows = static_cast<int>(d.rows());
    const int k = std::min(cfg.knn_k, std::max(1, rows - 1));
    for (const auto& e :
         affinity_edges(d, k, cfg.affinity_mode, cfg.heat_f)) {
      const int i = offset + e.row();
      const int j = offset + e.col();
      p.l_edges.emplace_back(i, j, -e.value());
      p.l_edges.emplace_back(j, i, -e.value());
      p.l_edges.emplace_back(i, i, e.value());
      p.l_edges.emplace_back(j, j, e.value());
      p.dhat(i) += e.value();
      p.dhat(j) += e.value();
    }
  };
  add_domain(d_s, 0);
  add_domain(d_t, p.ns);
}

// Shared post-processing: scale columns onto the constraint manifold,
// orient signs deterministically, record diagnostics.
void finish_model(CtmModel& model, const Matrix& w_raw, const Vector& mu,
                  const std::function<Matrix(const Matrix&)>& apply_b,
                  const std::function<Matrix(const Matrix&)>& apply_a) {
  Matrix w = w_raw;
  const int m = static_cast<int>(w.cols());
  // Polish: G^(-1/2) re-normalization against the exact constraint operator.
  const Matrix bw = apply_b(w);
  Matrix g = w.transpose() * bw;
  g = 0.5 * (g + g.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const Vector ev = es.eigenvalues();
  // B is linear, so B(w * half) = (B w) * half; carrying bw through the
  // polish saves a second full application of the constraint operator.
  Matrix bw2 = bw;
  std::vector<char> flipped(static_cast<std::size_t>(m), 0);
  if (ev.minCoeff() > 1e-14 * std::max(1.0, ev.maxCoeff())) {
    const Matrix half = es.eigenvectors() *
                        ev.cwiseSqrt().cwiseInverse().asDiagonal() *
                        es.eigenvectors().transpose();
    w = w * half;
    bw2 = bw * half;
  }
  // Deterministic orientation: first meaningful component positive.
  for (int j = 0; j < m; ++j) {
    const double big = w.col(j).cwiseAbs().maxCoeff();
    for (int i = 0; i < w.rows(); ++i) {
      if (std::abs(w(i, j)) > 1e-12 * big) {
        if (w(i, j) < 0.0) {
          w.col(j) = -w.col(j);
          flipped[static_cast<std::size_t>(j)] = 1;
        }
        break;
      }
    }
  }
  for (int j = 0; j < m; ++j)
    if (flipped[static_cast<std::size_t>(j)]) bw2.col(j) = -bw2.col(j);
  model.w = w;
  model.eigenvalues = mu;
  model.constraint_residual =
      (w.transpose() * bw2 - Matrix::Identity(m, m)).norm();
  const Matrix aw = apply_a(w);
  model.max_pair_residual = 0.0;
  for (int j = 0; j < m; ++j)
    model.max_pair_residual = std::max(
        model.max_pair_residual, (aw.col(j) - mu(j) * bw2.col(j)).norm());
}

void fit_dense(const Matrix& stacked, FitProblem& p, CtmModel& model) {
  const Matrix k = gaussian_kernel(stacked, stacked, model.config.kernel_gamma);
  const Vector a = k * p.v;
  Matrix l = Matrix::Zero(p.n, p.n);
  for (const auto& e : p.l_edges) l(e.row(), e.col()) += e.value();

  // Whiten the (positive definite) objective operator A, then the problem
  // becomes an ordinary eigenproblem for T = Wa^T B Wa: the LARGEST
  // eigenvalues nu of T give the smallest generalized values mu = 1/nu, and
  // the pairs satisfy A w = mu B w exactly.
  Matrix amat = a * a.transpose() + l +
                p.lambda * Matrix::Identity(p.n, p.n);
  amat = 0.5 * (amat + amat.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> ea(amat);
  const Vector phi = ea.eigenvalues();
  const double ath = phi.maxCoeff() * 1e-14;
  int ra = 0;
  for (int i = 0; i < p.n; ++i)
    if (phi(i) > ath) ++ra;
  const Matrix wa = ea.eigenvectors().rightCols(ra) *
                    phi.tail(ra).cwiseSqrt().cwiseInverse().asDiagonal();

  Matrix b = k * p.dhat.asDiagonal() * k;
  b = 0.5 * (b + b.transpose());
  Matrix t = wa.transpose() * b * wa;
  t = 0.5 * (t + t.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> et(t);
  if (et.eigenvalues().maxCoeff() <= 0.0) {
    // The constraint operator vanished entirely; ridge it to keep the
    // normalization meaningful.
    b += 1e-9 * Matrix::Identity(p.n, p.n);
    t = wa.transpose() * b * wa;
    t = 0.5 * (t + t.transpose());
    et.compute(t);
    p.b_ridge = true;
    model.regularized = true;
  }
  const Vector nu = et.eigenvalues();  // ascending
  const double numax = nu.maxCoeff();
  int usable = 0;
  for (int j = 0; j < std::min(p.m, ra); ++j)
    if (nu(ra - 1 - j) > numax * 1e-12) ++usable;
  if (usable < p.m) {
    p.m = std::max(usable, 1);
    model.reduced_dim = true;
  }
  Matrix w_raw(p.n, p.m);
  Vector mu(p.m);
  for (int j = 0; j < p.m; ++j) {  // largest nu first = ascending mu
    const int idx = ra - 1 - j;
    const double nj = std::max(nu(idx), 1e-300);
    w_raw.col(j) = wa * et.eigenvectors().col(idx) / std::sqrt(nj);
    mu(j) = 1.0 / nj;
  }

  const auto apply_a = [&](const Matrix& x) -> Matrix { return amat * x; };
  const auto apply_b = [&](const Matrix& x) -> Matrix { return b * x; };
  finish_model(model, w_raw, mu, apply_b, apply_a);
  model.train_embedding = k * model.w;
}

void fit_iterative(const Matrix& stacked, FitProblem& p, CtmModel& model) {
  model.iterative = true;
  // The kernel stays dense: with min-max-scaled features most anchor pairs
  // sit inside kernel range, so dense products beat sparse sweeps here. Only
  // the graph operators are sparse.
  const Matrix k = gaussian_kernel(stacked, stacked, model.config.kernel_gamma);
  const Vector a = k * p.v;
  SparseMatrix l(p.n, p.n);
  l.setFromTriplets(p.l_edges.begin(), p.l_edges.end());
  l.makeCompressed();

  // P = L + lambda I, kept SPD so A = P + a a^T admits an exact inverse via
  // a sparse factorization plus a rank-one update.
  SparseMatrix ident(p.n, p.n);
  ident.setIdentity();
  double p_ridge = p.lambda;
  SparseMatrix pm = l + p_ridge * ident;
  Eigen::SimplicialLLT<SparseMatrix> llt(pm);
  if (llt.info() != Eigen::Success) {
    p_ridge += 1e-10;
    pm = l + p_ridge * ident;
    llt.compute(pm);
    model.regularized = true;
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("ctm_fit: factorization failed");
  }
  const Vector pa = llt.solve(a);
  const double sm_denom = 1.0 + a.dot(pa);

  const bool b_zero = p.dhat.maxCoeff() <= 0.0;
  if (b_zero) {
    p.b_ridge = true;
    model.regularized = true;
  }
  // The kernel products dominate this path; routing them through the
  // symmetric-matrix kernel halves the memory traffic over the n x n matrix.
  const auto apply_b = [&](const Matrix& x) -> Matrix {
    const Matrix kx = k.selfadjointView<Eigen::Lower>() * x;
    Matrix y = k.selfadjointView<Eigen::Lower>() * (p.dhat.asDiagonal() * kx);
    if (b_zero) y += 1e-9 * x;
    return y;
  };
  const auto apply_a = [&](const Matrix& x) -> Matrix {
    return pm * x + a * (a.transpose() * x);
  };
  const auto solve_a = [&](const Matrix& r) -> Matrix {
    Matrix y = llt.solve(r);
    y.noalias() -= pa * ((a.transpose() * y) / sm_denom);
    return y;
  };

  // Block subspace iteration with Rayleigh-Ritz extraction for the largest
  // generalized values of B x = nu A x (A SPD). nu = 1/mu. Four guard
  // vectors beyond m (at least twelve columns total) buy convergence speed
  // without paying for a full 2m-wide block in the kernel products.
  const int block = std::min(p.n, std::max(p.m + 4, 12));
  Rng rng(0x5dd1f776346c2e9bULL);
  Matrix x(p.n, block);
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < block; ++j) x(i, j) = rng.gaussian();

  Matrix bx = apply_b(x);
  Vector nu = Vector::Zero(block);
  Matrix ax;
  model.converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    const Matrix z = solve_a(bx);
    const Matrix az = apply_a(z);
    const Matrix bz = apply_b(z);
    Matrix sa = z.transpose() * az;
    sa = 0.5 * (sa + sa.transpose());
    Matrix sb = z.transpose() * bz;
    sb = 0.5 * (sb + sb.transpose());
    const Eigen::SelfAdjointEigenSolver<Matrix> esa(sa);
    const Vector psi = esa.eigenvalues();
    const double pth = psi.maxCoeff() * 1e-14;
    int keep = 0;
    for (int i = 0; i < psi.size(); ++i)
      if (psi(i) > pth) ++keep;
    const Matrix whs =
        esa.eigenvectors().rightCols(keep) *
        psi.tail(keep).cwiseSqrt().cwiseInverse().asDiagonal();
    Matrix t = whs.transpose() * sb * whs;
    t = 0.5 * (t + t.transpose());
    const Eigen::SelfAdjointEigenSolver<Matrix> est(t);
    // Largest ritz values first.
    const Matrix q = whs * est.eigenvectors().rowwise().reverse();
    nu = est.eigenvalues().reverse();
    x = z * q;
    bx = bz * q;
    ax = az * q;
    bool ok = true;
    for (int j = 0; j < p.m && j < keep; ++j) {
      const double scale = bx.col(j).norm() + std::abs(nu(j)) * ax.col(j).norm();
      if ((bx.col(j) - nu(j) * ax.col(j)).norm() > 1e-10 * std::max(scale, 1e-300))
        ok = false;
    }
    if (ok && iter >= 2) {
      model.converged = true;
      break;
    }
  }

  const double nmax = std::max(nu.maxCoeff(), 0.0);
  int usable = 0;
  for (int j = 0; j < std::min<int>(p.m, static_cast<int>(nu.size())); ++j)
    if (nu(j) > nmax * 1e-12 && nu(j) > 0.0) ++usable;
  if (usable < p.m) {
    p.m = std::max(usable, 1);
    model.reduced_dim = true;
  }
  Matrix w_raw = x.leftCols(p.m);
  Vector mu(p.m);
  // Columns are ordered by descending nu, i.e. ascending mu, matching the
  // dense path.
  for (int j = 0; j < p.m; ++j) {
    const double nj = std::max(nu(j), 1e-300);
    w_raw.col(j) /= std::sqrt(nj);  // A-orthonormal -> B-norm one
    mu(j) = 1.0 / nj;
  }
  finish_model(model, w_raw, mu, apply_b, apply_a);
  model.train_embedding = k * model.w;
}

}  // namespace

CtmModel ctm_fit(const Matrix& d_s, const Matrix& d_t, const CtmConfig& cfg) {
  if (d_s.rows() < 1 || d_t.rows() < 1)
    throw std::invalid_argument("ctm_fit: empty domain");
  if (d_s.cols() != d_t.cols() || d_s.cols() < 1)
    throw std::invalid_argument("ctm_fit: dimension mismatch");
  if (!(cfg.kernel_gamma > 0.0))
    throw std::invalid_argument("ctm_fit: gamma must be positive");
  if (cfg.lambda < 0.0)
    throw std::invalid_argument("ctm_fit: lambda must be nonnegative");
  if (cfg.knn_k < 1)
    throw std::invalid_argument("ctm_fit: neighbor count must be positive");

  FitProblem p;
  p.ns = static_cast<int>(d_s.rows());
  p.nt = static_cast<int>(d_t.rows());
  p.n = p.ns + p.nt;
  p.lambda = cfg.lambda;
  if (cfg.embed_dim > p.n)
    throw std::invalid_argument("ctm_fit: embedding dimension too large");
  p.m = cfg.embed_dim > 0 ? cfg.embed_dim : std::min(8, std::max(1, p.n - 1));

  p.v.resize(p.n);
  p.v.head(p.ns).setConstant(1.0 / p.ns);
  p.v.tail(p.nt).setConstant(-1.0 / p.nt);
  build_graph(d_s, d_t, cfg, p);

  CtmModel model;
  model.config = cfg;
  model.n_source = p.ns;
  model.n_target = p.nt;
  model.anchors.resize(p.n, d_s.cols());
  model.anchors.topRows(p.ns) = d_s;
  model.anchors.bottomRows(p.nt) = d_t;

  const bool dense = cfg.solver == CtmSolver::dense ||
                     (cfg.solver == CtmSolver::automatic && p.n <= kDenseLimit);
  if (dense)
    fit_dense(model.anchors, p, model);
  else
    fit_iterative(model.anchors, p, model);
  return model;
}

Matrix ctm_transform(const CtmModel& model, const Matrix& x) {
  if (x.cols() != model.anchors.cols())
    throw std::invalid_argument("ctm_transform: dimension mismatch");
  return gaussian_kernel(x, model.anchors, model.config.kernel_gamma) * model.w;
}

}  // namespace dcshs
