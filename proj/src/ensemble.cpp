#include "dcshs/ensemble.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "dcshs/rng.hpp"
#include "dcshs/shs.hpp"

namespace dcshs {

namespace {

// Seed-stream tags so every stage draws from an independent stream.
enum : std::uint64_t {
  kSeedClustering = 1,
  kSeedSubset = 2,     // chained with the subset id
  kSeedOversample = 1,
  kSeedCondense = 2,
};

Matrix rows_of(const Matrix& x, const std::vector<int>& maj,
               const std::vector<int>& min) {
  Matrix out(static_cast<Eigen::Index>(maj.size() + min.size()), x.cols());
  Eigen::Index r = 0;
  for (int i : maj) out.row(r++) = x.row(i);
  for (int i : min) out.row(r++) = x.row(i);
  return out;
}

}  // namespace

FitResult fit_dcshs(const LabeledDataset& train, const DcshsConfig& cfg,
                    std::uint64_t seed) {
  if (train.x.rows() != static_cast<Eigen::Index>(train.y.size()))
    throw std::invalid_argument("fit: label count mismatch");
  if (train.count(Label::majority) < 2 || train.count(Label::minority) < 2)
    throw std::invalid_argument("fit: each class needs at least two samples");
  if (cfg.r1 < 1 || cfg.r2 < 1 || cfg.r3 < 1)
    throw std::invalid_argument("fit: neighborhood sizes must be positive");

  FitResult result;
  result.model.config = cfg;
  result.model.scaler = MinMaxScaler::fit(train.x);
  const Matrix xs = result.model.scaler.transform(train.x);

  result.model.clustering = select_projective_clustering(
      xs, train.y, cfg.nc, derive_seed(seed, kSeedClustering));
  const auto& pc = result.model.clustering;
  result.diagnostics.d_t = pc.d_t;
  result.diagnostics.nc_maj = pc.nc_maj;
  result.diagnostics.nc_min = pc.nc_min;
  result.diagnostics.db_score = pc.db_score;

  const auto subsets = build_ccs(pc);
  result.model.members.reserve(subsets.size());
  result.diagnostics.subsets.reserve(subsets.size());

  for (const auto& subset : subsets) {
    try {
      SubsetReport report;
      report.subset_id = subset.id;
      report.maj_rows = static_cast<int>(subset.maj_rows.size());
      report.min_rows = static_cast<int>(subset.min_rows.size());

      const Matrix sx = rows_of(xs, subset.maj_rows, subset.min_rows);
      std::vector<Label> sy(subset.maj_rows.size(), Label::majority);
      sy.insert(sy.end(), subset.min_rows.size(), Label::minority);

      const auto overlap = lords(sx, sy, cfg.r1, cfg.r2);
      const auto cut = undersample(sy, overlap);
      report.removed = static_cast<int>(cut.removed);
      report.retained_all = cut.retained_all;

      Matrix ux(static_cast<Eigen::Index>(cut.kept_rows.size()), sx.cols());
      std::vector<Label> uy;
      uy.reserve(cut.kept_rows.size());
      for (std::size_t i = 0; i < cut.kept_rows.size(); ++i) {
        ux.row(static_cast<Eigen::Index>(i)) = sx.row(cut.kept_rows[i]);
        uy.push_back(sy[static_cast<std::size_t>(cut.kept_rows[i])]);
      }

      const std::uint64_t subset_seed = derive_seed(
          seed, kSeedSubset, static_cast<std::uint64_t>(subset.id));
      BalancedSubset balanced =
          ifo(ux, uy, cfg.r3, derive_seed(subset_seed, kSeedOversample));
      balanced.origin_subset = subset.id;
      for (SyntheticKind kind : balanced.kinds) {
        ++report.synthetic;
        if (kind == SyntheticKind::forced) ++report.forced;
        if (kind == SyntheticKind::jittered) ++report.jittered;
      }
      report.oversample_fallback = balanced.fallback;

      const CondensedSource source =
          condense(balanced, cfg.ctm.cluster_ratio,
                   derive_seed(subset_seed, kSeedCondense));
      report.source_rows = static_cast<int>(source.x.rows());

      EnsembleMember member;
      member.subset_id = subset.id;
      member.mapping = ctm_fit(source.x, balanced.x, cfg.ctm);
      report.embed_dim = static_cast<int>(member.mapping.w.cols());
      report.ctm_regularized = member.mapping.regularized;
      report.ctm_reduced_dim = member.mapping.reduced_dim;
      report.ctm_iterative = member.mapping.iterative;
      report.ctm_converged = member.mapping.converged;

      // The anchors of the mapping are exactly [source rows; target rows], so
      // the fit's own anchor embedding doubles as the classifier's training
      // matrix without another kernel evaluation.
      Matrix train_x = std::move(member.mapping.train_embedding);
      member.mapping.train_embedding = Matrix();
      std::vector<Label> train_y = source.y;
      train_y.insert(train_y.end(), balanced.y.begin(), balanced.y.end());
      member.classifier = train_base(train_x, train_y, cfg.classifier_c);

      result.model.members.push_back(std::move(member));
      result.diagnostics.subsets.push_back(report);
    } catch (const std::exception& e) {
      throw std::runtime_error("subset " + std::to_string(subset.id) + ": " +
                               e.what());
    }
  }
  return result;
}

Prediction predict(const TrainedEnsemble& model, const Matrix& x) {
  if (model.members.empty())
    throw std::invalid_argument("predict: model has no members");
  if (x.cols() != model.scaler.mins.size())
    throw std::invalid_argument("predict: feature count mismatch");

  const Matrix xs = model.scaler.transform(x);
  Vector fused = Vector::Zero(x.rows());
  for (const auto& member : model.members) {
    const Matrix embedded = ctm_transform(member.mapping, xs);
    const Vector decisions = member.classifier.decision(embedded);
    if (model.config.fusion == FusionRule::mean_tanh) {
      fused += decisions.array().tanh().matrix();
    } else {
      for (Eigen::Index i = 0; i < decisions.size(); ++i)
        fused(i) += decisions(i) >= 0.0 ? 1.0 : -1.0;
    }
  }
  fused /= static_cast<double>(model.members.size());

  Prediction out;
  out.scores = fused;
  out.labels.reserve(static_cast<std::size_t>(x.rows()));
  // An exactly-zero fused score means the members saw no evidence either
  // way (for a narrow kernel this happens when a row sits outside kernel
  // range of every anchor). Missing a rare sample costs more than a false
  // alarm, so ties resolve to the minority class.
  for (Eigen::Index i = 0; i < fused.size(); ++i)
    out.labels.push_back(fused(i) >= 0.0 ? Label::minority : Label::majority);
  return out;
}

}  // namespace dcshs
