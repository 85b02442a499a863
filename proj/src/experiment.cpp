#include "dcshs/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>
#include <utility>

#include "dcshs/classifier.hpp"
#include "dcshs/ensemble.hpp"
#include "dcshs/rng.hpp"

namespace dcshs {

namespace {

// Copies the rows listed in test_rows (ascending) into *test and the
// complement, original order preserved, into *train.
void split_fold(const LabeledDataset& d, const std::vector<int>& test_rows,
                LabeledDataset* train, LabeledDataset* test) {
  const Eigen::Index n = d.x.rows();
  std::vector<char> is_test(static_cast<std::size_t>(n), 0);
  for (int r : test_rows) is_test[static_cast<std::size_t>(r)] = 1;
  const Eigen::Index n_test = static_cast<Eigen::Index>(test_rows.size());
  train->name = d.name;
  test->name = d.name;
  train->x.resize(n - n_test, d.x.cols());
  test->x.resize(n_test, d.x.cols());
  train->y.clear();
  test->y.clear();
  Eigen::Index ti = 0;
  Eigen::Index si = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (is_test[static_cast<std::size_t>(i)]) {
      test->x.row(ti++) = d.x.row(i);
      test->y.push_back(d.y[static_cast<std::size_t>(i)]);
    } else {
      train->x.row(si++) = d.x.row(i);
      train->y.push_back(d.y[static_cast<std::size_t>(i)]);
    }
  }
}

// Plain synthetic-minority interpolation, the sampling-only baseline: no
// overlap cleaning beforehand and no acceptance filter afterwards. New
// points interpolate between an original minority row (visited round-robin)
// and one of its k nearest minority neighbors; a singleton minority class
// falls back to jittered duplicates.
void smote_augment(Matrix* x, std::vector<Label>* y, int r3,
                   std::uint64_t seed) {
  std::vector<int> minority;
  int n_maj = 0;
  for (std::size_t i = 0; i < y->size(); ++i) {
    if ((*y)[i] == Label::minority)
      minority.push_back(static_cast<int>(i));
    else
      ++n_maj;
  }
  const int n_min = static_cast<int>(minority.size());
  const int deficit = n_maj - n_min;
  if (deficit <= 0 || n_min == 0) return;

  const Eigen::Index dim = x->cols();
  Matrix synth(deficit, dim);
  Rng rng(seed);
  if (n_min == 1) {
    const Vector base = x->row(minority[0]).transpose();
    for (int t = 0; t < deficit; ++t)
      for (Eigen::Index j = 0; j < dim; ++j)
        synth(t, j) = base(j) + 1e-3 * rng.gaussian();
  } else {
    const int k = std::min(r3, n_min - 1);
    // k nearest same-class rows per minority row (squared Euclidean,
    // ties broken toward the smaller row index).
    std::vector<std::vector<int>> neighbors(static_cast<std::size_t>(n_min));
    for (int i = 0; i < n_min; ++i) {
      std::vector<std::pair<double, int>> dist;
      dist.reserve(static_cast<std::size_t>(n_min) - 1);
      for (int j = 0; j < n_min; ++j) {
        if (j == i) continue;
        const double d2 =
            (x->row(minority[i]) - x->row(minority[j])).squaredNorm();
        dist.emplace_back(d2, minority[j]);
      }
      std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
      for (int j = 0; j < k; ++j)
        neighbors[static_cast<std::size_t>(i)].push_back(dist[j].second);
    }
    for (int t = 0; t < deficit; ++t) {
      const int base = t % n_min;
      const int partner = neighbors[static_cast<std::size_t>(base)]
                                   [rng.index(static_cast<std::size_t>(k))];
      const double alpha = rng.uniform();
      synth.row(t) = x->row(minority[base]) +
                     alpha * (x->row(partner) - x->row(minority[base]));
    }
  }

  Matrix grown(x->rows() + deficit, dim);
  grown.topRows(x->rows()) = *x;
  grown.bottomRows(deficit) = synth;
  *x = std::move(grown);
  y->insert(y->end(), static_cast<std::size_t>(deficit), Label::minority);
}

MetricSet evaluate_item(const LabeledDataset& train, const LabeledDataset& test,
                        const std::string& method, const DcshsConfig& pipeline,
                        std::uint64_t seed) {
  if (method == "dcshs") {
    const FitResult fit = fit_dcshs(train, pipeline, seed);
    const Prediction p = predict(fit.model, test.x);
    return metrics(test.y, p.labels, p.scores);
  }
  const MinMaxScaler scaler = MinMaxScaler::fit(train.x);
  Matrix xs = scaler.transform(train.x);
  std::vector<Label> ys = train.y;
  if (method == "smote_baseline")
    smote_augment(&xs, &ys, pipeline.r3, seed);
  const BaseClassifier clf = train_base(xs, ys, pipeline.classifier_c);
  const Vector scores = clf.decision(scaler.transform(test.x));
  std::vector<Label> pred;
  pred.reserve(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    pred.push_back(scores(i) > 0.0 ? Label::minority : Label::majority);
  return metrics(test.y, pred, scores);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::ofstream open_report(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open file for writing");
  return out;
}

}  // namespace

std::uint64_t dataset_tag(const std::string& name) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ExperimentReport run_experiment(const std::vector<LabeledDataset>& datasets,
                                const RunConfig& cfg) {
  validate_config(cfg);
  ExperimentReport report;
  const int n_methods = static_cast<int>(cfg.methods.size());

  for (const LabeledDataset& d : datasets) {
    const std::uint64_t tag = dataset_tag(d.name);
    FoldPlan plan;
    try {
      plan = stratified_cv(d.y, cfg.folds, cfg.rounds,
                           derive_seed(cfg.seed, tag));
    } catch (const std::exception& e) {
      report.failures.push_back(d.name + ": " + e.what());
      continue;
    }
    if (plan.clamped)
      report.warnings.push_back(d.name + ": fold count clamped to " +
                                std::to_string(plan.folds) +
                                " by the smaller class");

    const int items = n_methods * plan.rounds * plan.folds;
    std::vector<RunRecord> slots(static_cast<std::size_t>(items));
    std::vector<std::string> errors(static_cast<std::size_t>(items));
    std::atomic<int> next{0};

    auto worker = [&]() {
      while (true) {
        const int t = next.fetch_add(1);
        if (t >= items) return;
        const int fold = t % plan.folds;
        const int round = (t / plan.folds) % plan.rounds;
        const int mi = t / (plan.folds * plan.rounds);
        RunRecord& rec = slots[static_cast<std::size_t>(t)];
        rec.dataset = d.name;
        rec.method = cfg.methods[static_cast<std::size_t>(mi)];
        rec.round = round;
        rec.fold = fold;
        try {
          LabeledDataset train;
          LabeledDataset test;
          split_fold(d, plan.test_rows[static_cast<std::size_t>(round)]
                                      [static_cast<std::size_t>(fold)],
                     &train, &test);
          rec.metrics = evaluate_item(train, test, rec.method, cfg.pipeline,
                                      derive_seed(cfg.seed, tag,
                                                  static_cast<std::uint64_t>(round),
                                                  static_cast<std::uint64_t>(fold)));
        } catch (const std::exception& e) {
          errors[static_cast<std::size_t>(t)] = e.what();
        }
      }
    };

    const int workers = std::max(1, std::min(cfg.threads, items));
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }

    std::string failure;
    for (int t = 0; t < items && failure.empty(); ++t)
      failure = errors[static_cast<std::size_t>(t)];
    if (!failure.empty()) {
      report.failures.push_back(d.name + ": " + failure);
      continue;
    }
    report.datasets.push_back(d.name);
    for (auto& rec : slots) report.records.push_back(std::move(rec));
  }
  return report;
}

std::vector<MethodSummary> summarize_report(const ExperimentReport& report) {
  struct Acc {
    int runs = 0;
    double recall = 0.0;
    double f1 = 0.0;
    double gmean = 0.0;
    double auc = 0.0;
    int auc_runs = 0;
  };
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, Acc> acc;
  for (const RunRecord& r : report.records) {
    const auto key = std::make_pair(r.dataset, r.method);
    if (!acc.count(key)) order.push_back(key);
    Acc& a = acc[key];
    a.runs++;
    a.recall += r.metrics.recall;
    a.f1 += r.metrics.f1;
    a.gmean += r.metrics.gmean;
    if (r.metrics.auc) {
      a.auc += *r.metrics.auc;
      a.auc_runs++;
    }
  }
  std::vector<MethodSummary> out;
  out.reserve(order.size());
  for (const auto& key : order) {
    const Acc& a = acc[key];
    MethodSummary s;
    s.dataset = key.first;
    s.method = key.second;
    s.runs = a.runs;
    s.recall = a.recall / a.runs;
    s.f1 = a.f1 / a.runs;
    s.gmean = a.gmean / a.runs;
    if (a.auc_runs > 0) s.auc = a.auc / a.auc_runs;
    out.push_back(std::move(s));
  }
  return out;
}

void write_reports(const ExperimentReport& report, const RunConfig& cfg,
                   const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);

  {
    std::ofstream out = open_report(out_dir + "/records.csv");
    out << "dataset,method,round,fold,recall,f1,gmean,auc\n";
    for (const RunRecord& r : report.records) {
      out << csv_field(r.dataset) << ',' << r.method << ',' << r.round << ','
          << r.fold << ',' << fmt(r.metrics.recall) << ',' << fmt(r.metrics.f1)
          << ',' << fmt(r.metrics.gmean) << ','
          << (r.metrics.auc ? fmt(*r.metrics.auc) : std::string()) << '\n';
    }
    if (!out) throw std::runtime_error(out_dir + "/records.csv: write failed");
  }

  const std::vector<MethodSummary> summaries = summarize_report(report);
  std::map<std::pair<std::string, std::string>, const MethodSummary*> lookup;
  for (const MethodSummary& s : summaries)
    lookup[{s.dataset, s.method}] = &s;

  // Per-metric mean tables over (successful dataset) x (method), used for
  // both the summary ranks and the Holm comparison. The ranking metric's
  // table exists only when every cell had at least one defined value.
  const int n_methods = static_cast<int>(cfg.methods.size());
  const int n_datasets = static_cast<int>(report.datasets.size());
  enum Metric { kRecall = 0, kF1, kGmean, kAuc, kMetricCount };
  static const char* kMetricNames[kMetricCount] = {"recall", "f1", "gmean",
                                                   "auc"};
  std::vector<std::vector<std::vector<double>>> tables(kMetricCount);
  std::vector<bool> table_ok(kMetricCount, n_datasets > 0);
  for (int m = 0; m < kMetricCount; ++m)
    tables[m].assign(static_cast<std::size_t>(n_datasets),
                     std::vector<double>(static_cast<std::size_t>(n_methods)));
  for (int di = 0; di < n_datasets; ++di) {
    for (int mi = 0; mi < n_methods; ++mi) {
      const auto it = lookup.find({report.datasets[static_cast<std::size_t>(di)],
                                   cfg.methods[static_cast<std::size_t>(mi)]});
      if (it == lookup.end()) {
        for (int m = 0; m < kMetricCount; ++m) table_ok[m] = false;
        continue;
      }
      const MethodSummary& s = *it->second;
      tables[kRecall][di][mi] = s.recall;
      tables[kF1][di][mi] = s.f1;
      tables[kGmean][di][mi] = s.gmean;
      if (s.auc)
        tables[kAuc][di][mi] = *s.auc;
      else
        table_ok[kAuc] = false;
    }
  }
  std::vector<std::vector<std::vector<double>>> ranks(kMetricCount);
  for (int m = 0; m < kMetricCount; ++m)
    if (table_ok[m]) ranks[m] = friedman_ranks(tables[m]);

  {
    std::ofstream out = open_report(out_dir + "/summary.csv");
    out << "dataset,method,runs,recall,f1,gmean,auc,recall_rank,f1_rank,"
           "gmean_rank,auc_rank\n";
    for (int di = 0; di < n_datasets; ++di) {
      for (int mi = 0; mi < n_methods; ++mi) {
        const auto it =
            lookup.find({report.datasets[static_cast<std::size_t>(di)],
                         cfg.methods[static_cast<std::size_t>(mi)]});
        if (it == lookup.end()) continue;
        const MethodSummary& s = *it->second;
        out << csv_field(s.dataset) << ',' << s.method << ',' << s.runs << ','
            << fmt(s.recall) << ',' << fmt(s.f1) << ',' << fmt(s.gmean) << ','
            << (s.auc ? fmt(*s.auc) : std::string());
        for (int m = 0; m < kMetricCount; ++m) {
          out << ',';
          if (table_ok[m]) out << fmt(ranks[m][di][mi]);
        }
        out << '\n';
      }
    }
    if (!out) throw std::runtime_error(out_dir + "/summary.csv: write failed");
  }

  {
    std::ofstream out = open_report(out_dir + "/holm.csv");
    out << "metric,method,mean_rank,z,p,p_holm\n";
    const auto control = std::find(cfg.methods.begin(), cfg.methods.end(),
                                   std::string("dcshs"));
    // The rank comparison needs at least two methods and, for the normal
    // approximation behind its p-values, at least five datasets; below that
    // the file stays header-only.
    const bool comparable =
        n_methods >= 2 && control != cfg.methods.end() && n_datasets >= 5;
    if (comparable) {
      const int ci = static_cast<int>(control - cfg.methods.begin());
      for (int m = 0; m < kMetricCount; ++m) {
        if (!table_ok[m]) continue;
        const std::vector<double> means = mean_ranks(tables[m]);
        const HolmResult h = holm_test(tables[m], ci);
        out << kMetricNames[m] << ",dcshs,"
            << fmt(means[static_cast<std::size_t>(ci)]) << ",,,\n";
        for (const HolmRow& row : h.rows) {
          out << kMetricNames[m] << ','
              << cfg.methods[static_cast<std::size_t>(row.method)] << ','
              << fmt(means[static_cast<std::size_t>(row.method)]) << ','
              << fmt(row.z) << ',' << fmt(row.raw_p) << ','
              << fmt(row.adjusted_p) << '\n';
        }
      }
    }
    if (!out) throw std::runtime_error(out_dir + "/holm.csv: write failed");
  }

  {
    std::ofstream out = open_report(out_dir + "/series.csv");
    out << "dataset,method,metric,round,fold,value\n";
    for (const RunRecord& r : report.records) {
      auto line = [&](const char* metric, double v) {
        out << csv_field(r.dataset) << ',' << r.method << ',' << metric << ','
            << r.round << ',' << r.fold << ',' << fmt(v) << '\n';
      };
      line("recall", r.metrics.recall);
      line("f1", r.metrics.f1);
      line("gmean", r.metrics.gmean);
      if (r.metrics.auc) line("auc", *r.metrics.auc);
    }
    if (!out) throw std::runtime_error(out_dir + "/series.csv: write failed");
  }
}

}  // namespace dcshs
