// Command-line front end: dataset inspection, one-shot training and
// prediction with a serialized model, and the cross-validation benchmark
// runner. Exit codes: 0 success, 1 total failure, 2 configuration error.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dcshs/config.hpp"
#include "dcshs/ensemble.hpp"
#include "dcshs/eval.hpp"
#include "dcshs/experiment.hpp"
#include "dcshs/io.hpp"

namespace {

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&]() {
    const std::size_t a = cur.find_first_not_of(" \t");
    const std::size_t b = cur.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(cur.substr(a, b - a + 1));
    cur.clear();
  };
  for (char c : csv) {
    if (c == ',')
      flush();
    else
      cur += c;
  }
  flush();
  return out;
}

struct RunOpts {
  std::vector<std::string> data;
  std::string config_path;
  std::string out_dir;
  std::string methods;
  std::string label_column = "class";
  std::uint64_t seed = 0;
  int rounds = 0;
  int folds = 0;
  int threads = 0;
  bool has_methods = false;
  bool has_seed = false;
  bool has_rounds = false;
  bool has_folds = false;
  bool has_threads = false;
};

struct InspectOpts {
  std::vector<std::string> data;
  std::string label_column = "class";
};

struct FitOpts {
  std::string data;
  std::string out = "model.bin";
  std::string config_path;
  std::string label_column = "class";
  std::uint64_t seed = 0;
  bool has_seed = false;
};

struct PredictOpts {
  std::string model;
  std::string data;
  std::string out;
  std::string label_column = "class";
};

dcshs::RunConfig build_config(const std::string& config_path) {
  if (config_path.empty()) return dcshs::RunConfig{};
  return dcshs::parse_config_file(config_path);
}

int cmd_run(const RunOpts& o) {
  dcshs::RunConfig cfg = build_config(o.config_path);
  if (o.has_methods) cfg.methods = split_list(o.methods);
  if (o.has_seed) cfg.seed = o.seed;
  if (o.has_rounds) cfg.rounds = o.rounds;
  if (o.has_folds) cfg.folds = o.folds;
  if (o.has_threads) cfg.threads = o.threads;
  dcshs::validate_config(cfg);

  std::vector<dcshs::LabeledDataset> datasets;
  for (const std::string& path : o.data) {
    try {
      datasets.push_back(dcshs::load_dataset(path, o.label_column));
    } catch (const std::exception& e) {
      std::fprintf(stderr, "skipping %s: %s\n", path.c_str(), e.what());
    }
  }
  if (datasets.empty()) {
    std::fprintf(stderr, "error: no dataset could be loaded\n");
    return 1;
  }

  const dcshs::ExperimentReport report = dcshs::run_experiment(datasets, cfg);
  for (const std::string& w : report.warnings)
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  for (const std::string& f : report.failures)
    std::fprintf(stderr, "dataset failed: %s\n", f.c_str());
  dcshs::write_reports(report, cfg, o.out_dir);

  std::printf("%-20s %-16s %8s %8s %8s %8s\n", "dataset", "method", "recall",
              "f1", "gmean", "auc");
  for (const dcshs::MethodSummary& s : dcshs::summarize_report(report)) {
    std::printf("%-20s %-16s %8.3f %8.3f %8.3f ", s.dataset.c_str(),
                s.method.c_str(), s.recall, s.f1, s.gmean);
    if (s.auc)
      std::printf("%8.3f\n", *s.auc);
    else
      std::printf("%8s\n", "-");
  }
  std::printf("reports written to %s (records, summary, holm, series)\n",
              o.out_dir.c_str());
  return report.datasets.empty() ? 1 : 0;
}

int cmd_inspect(const InspectOpts& o) {
  std::size_t failures = 0;
  for (const std::string& path : o.data) {
    try {
      const dcshs::LabeledDataset d = dcshs::load_dataset(path, o.label_column);
      const dcshs::DatasetSummary s = dcshs::summarize(d);
      std::printf("dataset: %s\n", s.name.c_str());
      std::printf("  instances: %d (majority %d '%s', minority %d '%s')\n",
                  s.instances, s.majority_count, d.majority_name.c_str(),
                  s.minority_count, d.minority_name.c_str());
      std::printf("  features: %d\n", s.features);
      std::printf("  imbalance ratio: %.2f\n", s.imbalance_ratio);
      std::printf("  relabeled: %s\n", s.relabeled ? "yes" : "no");
      std::printf("  dropped rows: %d\n", s.dropped_rows);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      ++failures;
    }
  }
  return failures == o.data.size() ? 1 : 0;
}

int cmd_fit(const FitOpts& o) {
  dcshs::RunConfig cfg = build_config(o.config_path);
  if (o.has_seed) cfg.seed = o.seed;
  dcshs::validate_config(cfg);

  const dcshs::LabeledDataset d = dcshs::load_dataset(o.data, o.label_column);
  const dcshs::FitResult fit = dcshs::fit_dcshs(d, cfg.pipeline, cfg.seed);
  dcshs::save_model(o.out, fit.model);

  const dcshs::FitDiagnostics& g = fit.diagnostics;
  std::printf("fitted %zu members on %s: projection dim %d, clusters %dx%d, "
              "db score %.4f\n",
              fit.model.members.size(), d.name.c_str(), g.d_t, g.nc_maj,
              g.nc_min, g.db_score);
  for (const dcshs::SubsetReport& s : g.subsets) {
    std::printf("  subset %d: maj %d, min %d, removed %d, synthetic %d "
                "(forced %d, jittered %d), source %d, embed %d%s%s%s\n",
                s.subset_id, s.maj_rows, s.min_rows, s.removed, s.synthetic,
                s.forced, s.jittered, s.source_rows, s.embed_dim,
                s.retained_all ? ", retained-all" : "",
                s.ctm_regularized ? ", regularized" : "",
                s.ctm_reduced_dim ? ", reduced-dim" : "");
  }
  std::printf("model saved to %s\n", o.out.c_str());
  return 0;
}

int cmd_predict(const PredictOpts& o) {
  const dcshs::TrainedEnsemble model = dcshs::load_model(o.model);
  const dcshs::LabeledDataset d = dcshs::load_dataset(o.data, o.label_column);
  const dcshs::Prediction p = dcshs::predict(model, d.x);
  const dcshs::MetricSet m = dcshs::metrics(d.y, p.labels, p.scores);

  std::printf("%s: recall %.4f, f1 %.4f, gmean %.4f, auc ", d.name.c_str(),
              m.recall, m.f1, m.gmean);
  if (m.auc)
    std::printf("%.4f\n", *m.auc);
  else
    std::printf("-\n");

  if (!o.out.empty()) {
    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error(o.out + ": cannot open file for writing");
    out << "row,score,predicted\n";
    char buf[32];
    for (Eigen::Index i = 0; i < p.scores.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.6f", p.scores(i));
      const bool minority =
          p.labels[static_cast<std::size_t>(i)] == dcshs::Label::minority;
      out << i << ',' << buf << ','
          << (minority ? d.minority_name : d.majority_name) << '\n';
    }
    if (!out) throw std::runtime_error(o.out + ": write failed");
    std::printf("predictions written to %s\n", o.out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-clustering stage-wise hybrid sampling pipeline"};
  app.require_subcommand(1);

  RunOpts ro;
  CLI::App* run = app.add_subcommand(
      "run", "Repeated stratified cross-validation benchmark");
  run->add_option("--data", ro.data, "Dataset file (.dat or .csv); repeatable")
      ->required();
  run->add_option("--out", ro.out_dir, "Directory for the report files")
      ->required();
  run->add_option("--config", ro.config_path, "Configuration file");
  CLI::Option* ro_methods = run->add_option(
      "--methods", ro.methods, "Comma list: dcshs,smote_baseline,raw");
  CLI::Option* ro_seed = run->add_option("--seed", ro.seed, "Master seed");
  CLI::Option* ro_rounds =
      run->add_option("--rounds", ro.rounds, "Cross-validation repetitions");
  CLI::Option* ro_folds = run->add_option("--folds", ro.folds, "Fold count");
  CLI::Option* ro_threads =
      run->add_option("--threads", ro.threads, "Worker thread count");
  run->add_option("--label-column", ro.label_column,
                  "Label column name for CSV input");

  InspectOpts io_;
  CLI::App* inspect =
      app.add_subcommand("inspect", "Print dataset summaries");
  inspect->add_option("--data", io_.data, "Dataset file; repeatable")
      ->required();
  inspect->add_option("--label-column", io_.label_column,
                      "Label column name for CSV input");

  FitOpts fo;
  CLI::App* fit = app.add_subcommand(
      "fit", "Train on a whole dataset and save the model");
  fit->add_option("--data", fo.data, "Training dataset file")->required();
  fit->add_option("--out", fo.out, "Model output path");
  fit->add_option("--config", fo.config_path, "Configuration file");
  CLI::Option* fo_seed = fit->add_option("--seed", fo.seed, "Master seed");
  fit->add_option("--label-column", fo.label_column,
                  "Label column name for CSV input");

  PredictOpts po;
  CLI::App* predict = app.add_subcommand(
      "predict", "Score a dataset with a saved model");
  predict->add_option("--model", po.model, "Model file from fit")->required();
  predict->add_option("--data", po.data, "Dataset file to score")->required();
  predict->add_option("--out", po.out, "Per-row prediction CSV output path");
  predict->add_option("--label-column", po.label_column,
                      "Label column name for CSV input");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ro.has_methods = ro_methods->count() > 0;
  ro.has_seed = ro_seed->count() > 0;
  ro.has_rounds = ro_rounds->count() > 0;
  ro.has_folds = ro_folds->count() > 0;
  ro.has_threads = ro_threads->count() > 0;
  fo.has_seed = fo_seed->count() > 0;

  try {
    if (run->parsed()) return cmd_run(ro);
    if (inspect->parsed()) return cmd_inspect(io_);
    if (fit->parsed()) return cmd_fit(fo);
    if (predict->parsed()) return cmd_predict(po);
  } catch (const dcshs::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
