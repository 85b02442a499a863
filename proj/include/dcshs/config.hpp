#pragma once
// Experiment configuration: a sectioned key/value text format in which every
// field carries a default, so an empty file (or no file at all) reproduces
// the reference settings.
//
// Grammar, one statement per line:
//   [section]        enters a section: run, sampling, clustering, transfer,
//                    classifier, or fusion
//   key = value      assigns within the current section
//   ; or #           starts a comment (rest of line ignored)
// Unknown sections or keys are errors, not warnings, so typos cannot
// silently fall back to defaults.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcshs/ensemble.hpp"

namespace dcshs {

// Malformed or out-of-range configuration. The command-line tool maps this
// to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::vector<std::string> methods{"dcshs", "smote_baseline", "raw"};
  int folds = 5;
  int rounds = 10;
  std::uint64_t seed = 1;
  int threads = 1;
  DcshsConfig pipeline;  // sampling, clustering, transfer, classifier, fusion
};

// Keys by section:
//   [run]        methods (comma list of dcshs|smote_baseline|raw),
//                folds, rounds, seed, threads
//   [sampling]   r1, r2, r3
//   [clustering] nc_maj, nc_min          (0 = automatic grid search)
//   [transfer]   cluster_ratio, lambda, gamma, affinity (simple|heat),
//                heat_f, knn_k, embed_dim (0 = automatic)
//   [classifier] c
//   [fusion]     rule (mean_tanh|majority_vote)
RunConfig parse_config_text(const std::string& text,
                            const std::string& origin);

// Reads and parses a configuration file; missing file is an error.
RunConfig parse_config_file(const std::string& path);

// Range-checks every field; throws ConfigError naming the offender.
void validate_config(const RunConfig& cfg);

}  // namespace dcshs
