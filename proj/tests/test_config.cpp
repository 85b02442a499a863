#include <cstdio>
#include <fstream>
#include <string>

#include "dcshs/config.hpp"
#include "doctest.h"

using dcshs::AffinityMode;
using dcshs::ConfigError;
using dcshs::FusionRule;
using dcshs::RunConfig;

namespace {

template <typename Fn>
std::string thrown_message(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("an empty configuration reproduces the reference settings") {
  const RunConfig cfg = dcshs::parse_config_text("", "inline");
  REQUIRE(cfg.methods.size() == 3);
  CHECK(cfg.methods[0] == "dcshs");
  CHECK(cfg.methods[1] == "smote_baseline");
  CHECK(cfg.methods[2] == "raw");
  CHECK(cfg.folds == 5);
  CHECK(cfg.rounds == 10);
  CHECK(cfg.seed == 1);
  CHECK(cfg.threads == 1);
  CHECK(cfg.pipeline.r1 == 5);
  CHECK(cfg.pipeline.r2 == 5);
  CHECK(cfg.pipeline.r3 == 5);
  CHECK(cfg.pipeline.nc.nc_maj == 0);
  CHECK(cfg.pipeline.nc.nc_min == 0);
  CHECK(cfg.pipeline.ctm.cluster_ratio == 0.5);
  CHECK(cfg.pipeline.ctm.lambda == 0.01);
  CHECK(cfg.pipeline.ctm.kernel_gamma == 100.0);
  CHECK(cfg.pipeline.ctm.affinity_mode == AffinityMode::simple);
  CHECK(cfg.pipeline.ctm.heat_f == 1.0);
  CHECK(cfg.pipeline.ctm.knn_k == 5);
  CHECK(cfg.pipeline.ctm.embed_dim == 0);
  CHECK(cfg.pipeline.classifier_c == 1.0);
  CHECK(cfg.pipeline.fusion == FusionRule::mean_tanh);
}

TEST_CASE("every section and key is assignable") {
  const std::string text =
      "; benchmark tweak file\n"
      "[run]\n"
      "methods = dcshs, raw   # only two pipelines\n"
      "folds = 3\n"
      "rounds = 2\n"
      "seed = 42\n"
      "threads = 4\n"
      "\n"
      "[sampling]\n"
      "r1 = 3\n"
      "r2 = 4\n"
      "r3 = 6\n"
      "[clustering]\n"
      "nc_maj = 2\n"
      "nc_min = 3\n"
      "[transfer]\n"
      "cluster_ratio = 0.25\n"
      "lambda = 0.5\n"
      "gamma = 4\n"
      "affinity = heat\n"
      "heat_f = 2.5\n"
      "knn_k = 7\n"
      "embed_dim = 6\n"
      "[classifier]\n"
      "c = 10\n"
      "[fusion]\n"
      "rule = majority_vote\n";
  const RunConfig cfg = dcshs::parse_config_text(text, "inline");
  REQUIRE(cfg.methods.size() == 2);
  CHECK(cfg.methods[1] == "raw");
  CHECK(cfg.folds == 3);
  CHECK(cfg.rounds == 2);
  CHECK(cfg.seed == 42);
  CHECK(cfg.threads == 4);
  CHECK(cfg.pipeline.r1 == 3);
  CHECK(cfg.pipeline.r2 == 4);
  CHECK(cfg.pipeline.r3 == 6);
  CHECK(cfg.pipeline.nc.nc_maj == 2);
  CHECK(cfg.pipeline.nc.nc_min == 3);
  CHECK(cfg.pipeline.ctm.cluster_ratio == 0.25);
  CHECK(cfg.pipeline.ctm.lambda == 0.5);
  CHECK(cfg.pipeline.ctm.kernel_gamma == 4.0);
  CHECK(cfg.pipeline.ctm.affinity_mode == AffinityMode::heat);
  CHECK(cfg.pipeline.ctm.heat_f == 2.5);
  CHECK(cfg.pipeline.ctm.knn_k == 7);
  CHECK(cfg.pipeline.ctm.embed_dim == 6);
  CHECK(cfg.pipeline.classifier_c == 10.0);
  CHECK(cfg.pipeline.fusion == FusionRule::majority_vote);
}

TEST_CASE("typos are hard errors, never silent fallbacks") {
  auto msg = thrown_message(
      [] { dcshs::parse_config_text("[run]\nfodls = 3\n", "inline"); });
  CHECK(contains(msg, "unknown key 'fodls'"));
  CHECK(contains(msg, "[run]"));
  CHECK(contains(msg, "inline:2"));

  msg = thrown_message(
      [] { dcshs::parse_config_text("[sampler]\nr1 = 3\n", "inline"); });
  CHECK(contains(msg, "unknown section [sampler]"));

  msg = thrown_message(
      [] { dcshs::parse_config_text("folds = 3\n", "inline"); });
  CHECK(contains(msg, "before any section"));

  msg = thrown_message(
      [] { dcshs::parse_config_text("[run]\nfolds = soon\n", "inline"); });
  CHECK(contains(msg, "expects an integer"));

  msg = thrown_message([] {
    dcshs::parse_config_text("[transfer]\ncluster_ratio = big\n", "inline");
  });
  CHECK(contains(msg, "expects a number"));

  msg = thrown_message([] {
    dcshs::parse_config_text("[transfer]\naffinity = fancy\n", "inline");
  });
  CHECK(contains(msg, "simple or heat"));

  msg = thrown_message(
      [] { dcshs::parse_config_text("[fusion]\nrule = averaging\n", "inline"); });
  CHECK(contains(msg, "mean_tanh or majority_vote"));

  msg = thrown_message(
      [] { dcshs::parse_config_text("[run\nfolds = 3\n", "inline"); });
  CHECK(contains(msg, "unterminated section"));

  msg = thrown_message(
      [] { dcshs::parse_config_text("[run]\njust words\n", "inline"); });
  CHECK(contains(msg, "expected key = value"));
}

TEST_CASE("validation rejects out-of-range settings") {
  auto reject = [](const std::string& text, const std::string& needle) {
    const std::string msg = thrown_message(
        [&] { dcshs::parse_config_text(text, "inline"); });
    CHECK(contains(msg, needle));
  };
  reject("[run]\nfolds = 1\n", "folds");
  reject("[run]\nrounds = 0\n", "rounds");
  reject("[run]\nthreads = 0\n", "threads");
  reject("[run]\nmethods = dcshs, sbe\n", "unknown method 'sbe'");
  reject("[run]\nmethods = raw, raw\n", "listed twice");
  reject("[sampling]\nr2 = 0\n", "r1, r2, and r3");
  reject("[clustering]\nnc_maj = 2\n", "fixed together");
  reject("[clustering]\nnc_maj = -1\nnc_min = -1\n", "negative");
  reject("[transfer]\ncluster_ratio = 0\n", "cluster_ratio");
  reject("[transfer]\ncluster_ratio = 1.5\n", "cluster_ratio");
  reject("[transfer]\nlambda = -0.1\n", "lambda");
  reject("[transfer]\ngamma = 0\n", "gamma");
  reject("[transfer]\nknn_k = 0\n", "knn_k");
  reject("[transfer]\nembed_dim = -2\n", "embed_dim");
  reject("[classifier]\nc = 0\n", "positive");
}

TEST_CASE("configuration files load like inline text") {
  const std::string path = "config_roundtrip.ini";
  {
    std::ofstream out(path, std::ios::trunc);
    out << "[run]\nseed = 9\nfolds = 4\n[transfer]\ngamma = 2\n";
  }
  const RunConfig cfg = dcshs::parse_config_file(path);
  CHECK(cfg.seed == 9);
  CHECK(cfg.folds == 4);
  CHECK(cfg.pipeline.ctm.kernel_gamma == 2.0);
  std::remove(path.c_str());
  CHECK_THROWS_AS(dcshs::parse_config_file("config_missing.ini"), ConfigError);
}
