#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dcshs/experiment.hpp"
#include "dcshs/rng.hpp"
#include "doctest.h"

using dcshs::Label;
using dcshs::LabeledDataset;
using dcshs::RunConfig;

namespace {

LabeledDataset make_blobs(int n_min, int n_maj, double mu, unsigned seed,
                          const std::string& name) {
  dcshs::Rng rng(seed);
  LabeledDataset d;
  d.name = name;
  d.majority_name = "neg";
  d.minority_name = "pos";
  d.x.resize(n_min + n_maj, 2);
  for (int i = 0; i < n_min; ++i) {
    d.x(i, 0) = mu + 0.4 * rng.gaussian();
    d.x(i, 1) = mu + 0.4 * rng.gaussian();
    d.y.push_back(Label::minority);
  }
  for (int i = 0; i < n_maj; ++i) {
    d.x(n_min + i, 0) = 0.4 * rng.gaussian();
    d.x(n_min + i, 1) = 0.4 * rng.gaussian();
    d.y.push_back(Label::majority);
  }
  return d;
}

// Small neighborhoods and a soft kernel keep the pipeline well-conditioned
// on the tiny synthetic sets used here.
RunConfig tiny_run_config() {
  RunConfig cfg;
  cfg.methods = {"dcshs", "raw"};
  cfg.folds = 3;
  cfg.rounds = 2;
  cfg.seed = 11;
  cfg.pipeline.r1 = 3;
  cfg.pipeline.r2 = 3;
  cfg.pipeline.r3 = 3;
  cfg.pipeline.nc = {1, 1};
  cfg.pipeline.ctm.kernel_gamma = 4.0;
  cfg.pipeline.ctm.knn_k = 3;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(DCSHS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("dataset tags are stable, name-sensitive hashes") {
  CHECK(dcshs::dataset_tag("glass1") == dcshs::dataset_tag("glass1"));
  CHECK(dcshs::dataset_tag("glass1") != dcshs::dataset_tag("glass2"));
  CHECK(dcshs::dataset_tag("") != dcshs::dataset_tag("a"));
}

TEST_CASE("a run yields one record per method, round, and fold") {
  const auto data = make_blobs(12, 24, 2.0, 301u, "tiny");
  const RunConfig cfg = tiny_run_config();
  const auto report = dcshs::run_experiment({data}, cfg);

  REQUIRE(report.failures.empty());
  REQUIRE(report.datasets == std::vector<std::string>{"tiny"});
  // 2 methods x 2 rounds x 3 folds.
  REQUIRE(report.records.size() == 12);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(report.records[i].method == "dcshs");
  for (std::size_t i = 6; i < 12; ++i)
    CHECK(report.records[i].method == "raw");
  CHECK(report.records[0].round == 0);
  CHECK(report.records[0].fold == 0);
  CHECK(report.records[1].fold == 1);
  CHECK(report.records[3].round == 1);
  for (const auto& r : report.records) {
    CHECK(r.dataset == "tiny");
    CHECK(r.metrics.recall >= 0.0);
    CHECK(r.metrics.recall <= 1.0);
    REQUIRE(r.metrics.auc.has_value());
    CHECK(*r.metrics.auc <= 1.0);
  }

  const auto summaries = dcshs::summarize_report(report);
  REQUIRE(summaries.size() == 2);
  CHECK(summaries[0].method == "dcshs");
  CHECK(summaries[0].runs == 6);
  double mean_f1 = 0.0;
  for (std::size_t i = 0; i < 6; ++i) mean_f1 += report.records[i].metrics.f1;
  mean_f1 /= 6.0;
  CHECK(summaries[0].f1 == doctest::Approx(mean_f1).epsilon(1e-12));
}

TEST_CASE("reports are byte-identical across reruns and worker counts") {
  const auto data = make_blobs(12, 24, 2.0, 302u, "tiny");
  RunConfig cfg = tiny_run_config();

  const auto report_a = dcshs::run_experiment({data}, cfg);
  dcshs::write_reports(report_a, cfg, "exp_out_a");

  const auto report_b = dcshs::run_experiment({data}, cfg);
  dcshs::write_reports(report_b, cfg, "exp_out_b");

  cfg.threads = 4;
  const auto report_c = dcshs::run_experiment({data}, cfg);
  dcshs::write_reports(report_c, cfg, "exp_out_c");

  for (const char* file :
       {"records.csv", "summary.csv", "holm.csv", "series.csv"}) {
    const std::string a = slurp(std::string("exp_out_a/") + file);
    CHECK(a == slurp(std::string("exp_out_b/") + file));
    CHECK(a == slurp(std::string("exp_out_c/") + file));
  }
  std::filesystem::remove_all("exp_out_a");
  std::filesystem::remove_all("exp_out_b");
  std::filesystem::remove_all("exp_out_c");
}

TEST_CASE("one failing dataset never takes down the others") {
  const auto good = make_blobs(12, 24, 2.0, 303u, "good");
  LabeledDataset poisoned = make_blobs(2, 20, 2.0, 304u, "poisoned");
  poisoned.y[0] = Label::majority;  // a single minority row survives

  const RunConfig cfg = tiny_run_config();
  const auto report = dcshs::run_experiment({poisoned, good}, cfg);
  CHECK(report.datasets == std::vector<std::string>{"good"});
  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].find("poisoned") != std::string::npos);
  CHECK(report.records.size() == 12);
  for (const auto& r : report.records) CHECK(r.dataset == "good");
}

TEST_CASE("report files carry the declared layout") {
  const auto data = make_blobs(12, 24, 2.0, 305u, "tiny");
  const RunConfig cfg = tiny_run_config();
  const auto report = dcshs::run_experiment({data}, cfg);
  dcshs::write_reports(report, cfg, "exp_layout");

  const std::string records = slurp("exp_layout/records.csv");
  CHECK(count_lines(records) == 13);  // header + 12 records
  CHECK(records.rfind("dataset,method,round,fold,recall,f1,gmean,auc\n", 0) ==
        0);

  const std::string summary = slurp("exp_layout/summary.csv");
  CHECK(count_lines(summary) == 3);  // header + dataset x {dcshs, raw}
  CHECK(summary.find("tiny,dcshs,6,") != std::string::npos);
  CHECK(summary.find("tiny,raw,6,") != std::string::npos);

  // Single dataset: too few for the rank comparison, so header-only.
  const std::string holm = slurp("exp_layout/holm.csv");
  CHECK(holm == "metric,method,mean_rank,z,p,p_holm\n");

  const std::string series = slurp("exp_layout/series.csv");
  CHECK(count_lines(series) == 1 + 12 * 4);
  std::filesystem::remove_all("exp_layout");
}

TEST_CASE("the rank comparison appears once five datasets report") {
  // Hand-built report: dcshs strictly better on every dataset and metric.
  dcshs::ExperimentReport report;
  RunConfig cfg = tiny_run_config();
  for (int di = 0; di < 6; ++di) {
    const std::string name = "d" + std::to_string(di);
    report.datasets.push_back(name);
    for (int mi = 0; mi < 2; ++mi) {
      dcshs::RunRecord r;
      r.dataset = name;
      r.method = cfg.methods[static_cast<std::size_t>(mi)];
      r.metrics.recall = mi == 0 ? 0.9 : 0.5;
      r.metrics.f1 = mi == 0 ? 0.8 : 0.4;
      r.metrics.gmean = mi == 0 ? 0.8 : 0.4;
      r.metrics.auc = mi == 0 ? 0.9 : 0.6;
      report.records.push_back(r);
    }
  }
  dcshs::write_reports(report, cfg, "exp_holm");
  const std::string holm = slurp("exp_holm/holm.csv");
  // Header plus, per metric, one control row and one comparison row.
  CHECK(count_lines(holm) == 1 + 4 * 2);
  CHECK(holm.find("recall,dcshs,1.000000,,,\n") != std::string::npos);
  CHECK(holm.find("recall,raw,2.000000,") != std::string::npos);
  // dcshs wins all six datasets: z = sqrt(6), two-sided p about 0.0143,
  // well under the usual 0.05 line.
  CHECK(holm.find("auc,raw,2.000000,2.449490,0.014306,0.014306\n") !=
        std::string::npos);
  std::filesystem::remove_all("exp_holm");
}

TEST_CASE("the command-line tool maps outcomes to exit codes") {
  // Bad flag value: configuration error.
  CHECK(run_cli("run --data nowhere.dat --out exp_cli --folds 1") == 2);
  CHECK(run_cli("walk --data nowhere.dat") == 2);

  // Readable flags but no loadable dataset: total failure.
  CHECK(run_cli("run --data nowhere.dat --out exp_cli") == 1);
  CHECK(run_cli("inspect --data nowhere.dat") == 1);

  // A real pass over a small CSV, raw method only.
  {
    std::ofstream out("exp_cli_tiny.csv", std::ios::trunc);
    out << "f0,f1,class\n";
    for (int i = 0; i < 6; ++i)
      out << 2.0 + 0.1 * i << ',' << 2.0 - 0.1 * i << ",pos\n";
    for (int i = 0; i < 10; ++i)
      out << 0.1 * i << ',' << 0.05 * i << ",neg\n";
  }
  CHECK(run_cli("inspect --data exp_cli_tiny.csv") == 0);
  CHECK(run_cli("run --data exp_cli_tiny.csv --out exp_cli --methods raw "
                "--rounds 1 --folds 2 --seed 3") == 0);
  const std::string records = slurp("exp_cli/records.csv");
  CHECK(count_lines(records) == 3);  // header + 1 method x 1 round x 2 folds

  // Whole-dataset fit, then scoring with the saved model.
  CHECK(run_cli("fit --data exp_cli_tiny.csv --out exp_cli/model.bin "
                "--seed 3") == 0);
  CHECK(run_cli("predict --model exp_cli/model.bin --data exp_cli_tiny.csv "
                "--out exp_cli/pred.csv") == 0);
  const std::string pred = slurp("exp_cli/pred.csv");
  CHECK(count_lines(pred) == 17);  // header + one row per instance
  CHECK(pred.rfind("row,score,predicted\n", 0) == 0);

  std::remove("exp_cli_tiny.csv");
  std::filesystem::remove_all("exp_cli");
}
