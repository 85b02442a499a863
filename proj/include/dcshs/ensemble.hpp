#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcshs/classifier.hpp"
#include "dcshs/ctm.hpp"
#include "dcshs/dataset.hpp"
#include "dcshs/pcc.hpp"

namespace dcshs {

enum class FusionRule : char { mean_tanh, majority_vote };

// Pipeline-wide configuration. Neighborhood sizes feed the overlap cleaning
// (r1 noise vote, r2 growth vote) and the oversampling filter (r3); an
// all-zero NcChoice requests the automatic cluster-count grid.
struct DcshsConfig {
  int r1 = 5;
  int r2 = 5;
  int r3 = 5;
  NcChoice nc;
  CtmConfig ctm;
  double classifier_c = 1.0;
  FusionRule fusion = FusionRule::mean_tanh;
};

struct EnsembleMember {
  int subset_id = 0;  // majority cluster index * nc_min + minority index
  CtmModel mapping;
  BaseClassifier classifier;
};

// Per-subset training trace, kept for inspection and tests.
struct SubsetReport {
  int subset_id = 0;
  int maj_rows = 0;
  int min_rows = 0;
  int removed = 0;           // majority rows dropped by overlap cleaning
  bool retained_all = false; // cleaning would have emptied the majority side
  int synthetic = 0;
  int forced = 0;            // admitted by the stall safety valve
  int jittered = 0;
  bool oversample_fallback = false;
  int source_rows = 0;       // condensed prototypes
  int embed_dim = 0;
  bool ctm_regularized = false;
  bool ctm_reduced_dim = false;
  bool ctm_iterative = false;
  bool ctm_converged = true;
};

struct FitDiagnostics {
  int d_t = 0;
  int nc_maj = 0;
  int nc_min = 0;
  double db_score = 0.0;
  std::vector<SubsetReport> subsets;
};

struct TrainedEnsemble {
  MinMaxScaler scaler;
  ProjectiveClustering clustering;
  std::vector<EnsembleMember> members;
  DcshsConfig config;
};

struct FitResult {
  TrainedEnsemble model;
  FitDiagnostics diagnostics;
};

// Full training pass: scale, split into cross-complete subsets, clean and
// balance each subset, condense it into a source domain, fit the transfer
// mapping, and train one linear member per subset on the embedded rows.
// Subset-stage errors are rethrown with the subset id prepended.
FitResult fit_dcshs(const LabeledDataset& train, const DcshsConfig& cfg,
                    std::uint64_t seed);

struct Prediction {
  std::vector<Label> labels;
  Vector scores;  // fused, in [-1, 1]; larger means more minority
};

// Scales rows, embeds them through every member's mapping, and fuses the
// member decisions (mean of tanh-squashed values, or mean vote sign).
// A row is labeled minority exactly when its fused score is nonnegative:
// a zero score carries no evidence either way, and missing a rare sample
// costs more than a false alarm.
Prediction predict(const TrainedEnsemble& model, const Matrix& x);

// Versioned little-endian binary container. Loading restores a model whose
// predictions are bit-identical to the saved one's.
void save_model(const std::string& path, const TrainedEnsemble& model);
TrainedEnsemble load_model(const std::string& path);

}  // namespace dcshs
