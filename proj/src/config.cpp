#include "dcshs/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dcshs {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& what) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
}

long long parse_int(const std::string& origin, int line, const std::string& key,
                    const std::string& value) {
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size())
    fail(origin, line, key + " expects an integer, got '" + value + "'");
  return v;
}

double parse_real(const std::string& origin, int line, const std::string& key,
                  const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size())
    fail(origin, line, key + " expects a number, got '" + value + "'");
  return v;
}

std::vector<std::string> parse_methods(const std::string& origin, int line,
                                       const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream parts(value);
  while (std::getline(parts, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  if (out.empty()) fail(origin, line, "methods expects at least one entry");
  return out;
}

void assign(RunConfig& cfg, const std::string& origin, int line,
            const std::string& section, const std::string& key,
            const std::string& value) {
  auto unknown = [&]() {
    fail(origin, line, "unknown key '" + key + "' in section [" + section + "]");
  };
  if (section == "run") {
    if (key == "methods") {
      cfg.methods = parse_methods(origin, line, value);
    } else if (key == "folds") {
      cfg.folds = static_cast<int>(parse_int(origin, line, key, value));
    } else if (key == "rounds") {
      cfg.rounds = static_cast<int>(parse_int(origin, line, key, value));
    } else if (key == "seed") {
      char* end = nullptr;
      cfg.seed = std::strtoull(value.c_str(), &end, 10);
      if (value.empty() || end != value.c_str() + value.size())
        fail(origin, line, "seed expects an unsigned integer, got '" + value + "'");
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(parse_int(origin, line, key, value));
    } else {
      unknown();
    }
  } else if (section == "sampling") {
    if (key == "r1") {
      cfg.pipeline.r1 = static_cast<int>(parse_int(origin, line, key, value));
    } else if (key == "r2") {
      cfg.pipeline.r2 = static_cast<int>(parse_int(origin, line, key, value));
    } else if (key == "r3") {
      cfg.pipeline.r3 = static_cast<int>(parse_int(origin, line, key, value));
    } else {
      unknown();
    }
  } else if (section == "clustering") {
    if (key == "nc_maj") {
      cfg.pipeline.nc.nc_maj =
          static_cast<int>(parse_int(origin, line, key, value));
    } else if (key == "nc_min") {
      cfg.pipeline.nc.nc_min =
          static_cast<int>(parse_int(origin, line, key, value));
    } else {
      unknown();
    }
  } else if (section == "transfer") {
    if (key == "cluster_ratio") {
      cfg.pipeline.ctm.cluster_ratio = parse_real(origin, line, key, value);
    } else if (key == "lambda") {
      cfg.pipeline.ctm.lambda = parse_real(origin, line, key, value);
    } else if (key == "gamma") {
      cfg.pipeline.ctm.kernel_gamma = parse_real(origin, line, key, value);
    } else if (key == "affinity") {
      if (value == "simple") {
        cfg.pipeline.ctm.affinity_mode = AffinityMode::simple;
      } else if (value == "heat") {
        cfg.pipeline.ctm.affinity_mode = AffinityMode::heat;
      } else {
        fail(origin, line, "affinity expects simple or heat, got '" + value + "'");
      }
    } else if (key == "heat_f") {
      cfg.pipeline.ctm.heat_f = parse_real(origin, line, key, value);
    } else if (key == "knn_k") {
      cfg.pipeline.ctm.knn_k =
          static_cast<int>(parse_int(origin, line, key, value));
    } else if (key == "embed_dim") {
      cfg.pipeline.ctm.embed_dim =
          static_cast<int>(parse_int(origin, line, key, value));
    } else {
      unknown();
    }
  } else if (section == "classifier") {
    if (key == "c") {
      cfg.pipeline.classifier_c = parse_real(origin, line, key, value);
    } else {
      unknown();
    }
  } else if (section == "fusion") {
    if (key == "rule") {
      if (value == "mean_tanh") {
        cfg.pipeline.fusion = FusionRule::mean_tanh;
      } else if (value == "majority_vote") {
        cfg.pipeline.fusion = FusionRule::majority_vote;
      } else {
        fail(origin, line,
             "rule expects mean_tanh or majority_vote, got '" + value + "'");
      }
    } else {
      unknown();
    }
  } else {
    fail(origin, line, "unknown section [" + section + "]");
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t comment = line.find_first_of(";#");
    if (comment != std::string::npos) line.erase(comment);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail(origin, line_no, "unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      static const char* kSections[] = {"run",      "sampling",   "clustering",
                                        "transfer", "classifier", "fusion"};
      if (std::find(std::begin(kSections), std::end(kSections), section) ==
          std::end(kSections))
        fail(origin, line_no, "unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail(origin, line_no, "expected key = value, got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) fail(origin, line_no, "empty key");
    if (section.empty())
      fail(origin, line_no, "key '" + key + "' appears before any section");
    assign(cfg, origin, line_no, section, key, value);
  }
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

void validate_config(const RunConfig& cfg) {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  check(!cfg.methods.empty(), "methods must list at least one pipeline");
  for (const auto& m : cfg.methods)
    check(m == "dcshs" || m == "smote_baseline" || m == "raw",
          "unknown method '" + m + "'");
  for (std::size_t i = 0; i < cfg.methods.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.methods.size(); ++j)
      check(cfg.methods[i] != cfg.methods[j],
            "method '" + cfg.methods[i] + "' listed twice");
  check(cfg.folds >= 2, "folds must be at least 2");
  check(cfg.rounds >= 1, "rounds must be at least 1");
  check(cfg.threads >= 1, "threads must be at least 1");
  const DcshsConfig& p = cfg.pipeline;
  check(p.r1 >= 1 && p.r2 >= 1 && p.r3 >= 1,
        "r1, r2, and r3 must be at least 1");
  check(p.nc.nc_maj >= 0 && p.nc.nc_min >= 0,
        "cluster counts cannot be negative");
  check((p.nc.nc_maj == 0) == (p.nc.nc_min == 0),
        "nc_maj and nc_min must be fixed together or both left automatic");
  check(p.ctm.cluster_ratio > 0.0 && p.ctm.cluster_ratio <= 1.0,
        "cluster_ratio must lie in (0, 1]");
  check(p.ctm.lambda >= 0.0, "lambda cannot be negative");
  check(p.ctm.kernel_gamma > 0.0, "gamma must be positive");
  check(p.ctm.heat_f > 0.0, "heat_f must be positive");
  check(p.ctm.knn_k >= 1, "knn_k must be at least 1");
  check(p.ctm.embed_dim >= 0, "embed_dim cannot be negative");
  check(p.classifier_c > 0.0, "classifier c must be positive");
}

}  // namespace dcshs
