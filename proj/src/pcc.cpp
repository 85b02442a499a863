#include "dcshs/pcc.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

#include "dcshs/rng.hpp"

namespace dcshs {

DbiResult dbi(const std::vector<Matrix>& clusters) {
  const int nc = static_cast<int>(clusters.size());
  if (nc == 0) throw std::invalid_argument("dbi: no clusters");
  for (const auto& c : clusters)
    if (c.rows() == 0) throw std::invalid_argument("dbi: empty cluster");
  if (nc == 1) return {0.0, false};

  std::vector<RowVector> mu(nc);
  std::vector<double> dev(nc);  // mean squared deviation from the centroid
  for (int m = 0; m < nc; ++m) {
    mu[m] = clusters[m].colwise().mean();
    dev[m] = (clusters[m].rowwise() - mu[m]).rowwise().squaredNorm().mean();
  }

  DbiResult out;
  double total = 0.0;
  for (int m = 0; m < nc; ++m) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int n = 0; n < nc; ++n) {
      if (n == m) continue;
      double gap = (mu[m] - mu[n]).squaredNorm();
      if (gap < 1e-12) {
        gap = 1e-12;  // duplicate centroids: clamp instead of dividing by zero
        out.degenerate = true;
      }
      worst = std::max(worst, (dev[m] + dev[n]) / gap);
    }
    total += worst;
  }
  out.value = total / nc;
  return out;
}

namespace {

struct ClassClustering {
  std::vector<std::vector<int>> clusters;  // absolute row indices, ascending
  double db = 0.0;
  bool degenerate = false;
};

// Shared dimension scan: centered data, covariance eigenbasis, the full
// projection, and class row lists. Built once and reused across the grid.
struct Scan {
  Matrix projected;  // centered data times the full eigenbasis
  Matrix basis;      // features x features, orthonormal
  std::vector<int> rows_of[2];
  // (class, cluster count) -> clustering at every candidate dimension d
  std::map<std::pair<int, int>, std::vector<ClassClustering>> cache;
  std::uint64_t seed = 0;

  const std::vector<ClassClustering>& scan_class(int cls, int nc);
};

const std::vector<ClassClustering>& Scan::scan_class(int cls, int nc) {
  const auto key = std::make_pair(cls, nc);
  const auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const auto& rows = rows_of[cls];
  const int nd = static_cast<int>(projected.cols());
  std::vector<ClassClustering> per_dim;
  per_dim.reserve(nd);
  Matrix sub(static_cast<int>(rows.size()), nd);
  for (size_t i = 0; i < rows.size(); ++i) sub.row(i) = projected.row(rows[i]);

  for (int d = 1; d <= nd; ++d) {
    const Matrix view = sub.leftCols(d);
    const auto km = kmeans(view, nc, derive_seed(seed, d, cls, nc));
    ClassClustering cc;
    cc.clusters.assign(nc, {});
    for (size_t i = 0; i < rows.size(); ++i)
      cc.clusters[km.assignments[i]].push_back(rows[i]);
    std::vector<Matrix> mats;
    mats.reserve(nc);
    for (int c = 0; c < nc; ++c) {
      Matrix m(static_cast<int>(0), d);
      std::vector<int> local;
      for (size_t i = 0; i < rows.size(); ++i)
        if (km.assignments[i] == c) local.push_back(static_cast<int>(i));
      m.resize(static_cast<int>(local.size()), d);
      for (size_t i = 0; i < local.size(); ++i) m.row(i) = view.row(local[i]);
      mats.push_back(std::move(m));
    }
    const auto r = dbi(mats);
    cc.db = r.value;
    cc.degenerate = r.degenerate;
    per_dim.push_back(std::move(cc));
  }
  return cache.emplace(key, std::move(per_dim)).first->second;
}

Scan make_scan(const Matrix& x, const std::vector<Label>& y,
               std::uint64_t seed) {
  if (static_cast<int>(y.size()) != x.rows())
    throw std::invalid_argument("projective clustering: label count mismatch");
  Scan s;
  s.seed = seed;
  for (int i = 0; i < x.rows(); ++i)
    s.rows_of[static_cast<int>(y[i])].push_back(i);
  const Matrix xc = center(x);
  const auto eig = sym_eig(covariance(xc));
  s.basis = eig.vectors;
  s.projected = xc * s.basis;
  return s;
}

ProjectiveClustering assemble(Scan& scan, int nc_maj, int nc_min) {
  for (int cls = 0; cls < 2; ++cls) {
    const int nc = cls == 0 ? nc_maj : nc_min;
    if (nc < 1 || nc > static_cast<int>(scan.rows_of[cls].size()))
      throw std::invalid_argument(
          "projective clustering: cluster count exceeds class size");
  }
  const auto& maj = scan.scan_class(0, nc_maj);
  const auto& min = scan.scan_class(1, nc_min);
  const int nd = static_cast<int>(scan.projected.cols());

  int best_d = 1;
  double best = std::numeric_limits<double>::infinity();
  for (int d = 1; d <= nd; ++d) {
    const double score = maj[d - 1].db + min[d - 1].db;
    if (score < best) {  // strict: ties keep the smaller dimension
      best = score;
      best_d = d;
    }
  }

  ProjectiveClustering pc;
  pc.d_t = best_d;
  pc.basis = scan.basis.leftCols(best_d);
  pc.nc_maj = nc_maj;
  pc.nc_min = nc_min;
  pc.maj_clusters = maj[best_d - 1].clusters;
  pc.min_clusters = min[best_d - 1].clusters;
  pc.db_score = best;
  pc.degenerate = maj[best_d - 1].degenerate || min[best_d - 1].degenerate;
  return pc;
}

}  // namespace

ProjectiveClustering project_cluster_select(const Matrix& x,
                                            const std::vector<Label>& y,
                                            int nc_maj, int nc_min,
                                            std::uint64_t seed) {
  Scan scan = make_scan(x, y, seed);
  return assemble(scan, nc_maj, nc_min);
}

ProjectiveClustering select_projective_clustering(const Matrix& x,
                                                  const std::vector<Label>& y,
                                                  NcChoice nc,
                                                  std::uint64_t seed) {
  if (nc.nc_maj > 0 && nc.nc_min > 0)
    return project_cluster_select(x, y, nc.nc_maj, nc.nc_min, seed);
  if (nc.nc_maj != 0 || nc.nc_min != 0)
    throw std::invalid_argument(
        "projective clustering: cluster counts must both be fixed or both automatic");

  Scan scan = make_scan(x, y, seed);
  const int max_maj =
      std::min<int>(3, static_cast<int>(scan.rows_of[0].size()));
  const int max_min =
      std::min<int>(3, static_cast<int>(scan.rows_of[1].size()));

  // A single cluster scores a flat zero, so comparing it against true
  // multi-cluster dispersions would always collapse the grid to (1, 1).
  // Pairs are therefore compared within tiers: both classes multi-cluster
  // first, then one lone cluster, then (1, 1).
  bool have = false;
  ProjectiveClustering best;
  int best_tier = 0, best_total = 0;
  for (int ncm = 1; ncm <= max_maj; ++ncm) {
    for (int ncn = 1; ncn <= max_min; ++ncn) {
      ProjectiveClustering cand = assemble(scan, ncm, ncn);
      const int tier = (ncm == 1 ? 1 : 0) + (ncn == 1 ? 1 : 0);
      const int total = ncm + ncn;
      const bool better =
          !have || tier < best_tier ||
          (tier == best_tier &&
           (cand.db_score < best.db_score ||
            (cand.db_score == best.db_score &&
             (total < best_total ||
              (total == best_total && ncm < best.nc_maj)))));
      if (better) {
        best = std::move(cand);
        best_tier = tier;
        best_total = total;
        have = true;
      }
    }
  }
  return best;
}

std::vector<CrossCompleteSubset> build_ccs(const ProjectiveClustering& pc) {
  std::vector<CrossCompleteSubset> out;
  out.reserve(pc.maj_clusters.size() * pc.min_clusters.size());
  for (size_t i = 0; i < pc.maj_clusters.size(); ++i) {
    for (size_t j = 0; j < pc.min_clusters.size(); ++j) {
      CrossCompleteSubset s;
      s.id = static_cast<int>(i * pc.min_clusters.size() + j);
      s.maj_rows = pc.maj_clusters[i];
      s.min_rows = pc.min_clusters[j];
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace dcshs
