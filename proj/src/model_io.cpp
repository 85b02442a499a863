#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcshs/ensemble.hpp"

namespace dcshs {

namespace {

// Format: 8-byte magic, u32 version, then the fields in declaration order.
// Integers are little-endian fixed width; doubles are raw IEEE-754 bytes, so
// a round trip is bit-exact.
constexpr char kMagic[8] = {'D', 'C', 'S', 'H', 'S', 'M', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::string& path)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("model file: cannot open " + path);
  }

  void raw(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p),
               static_cast<std::streamsize>(n));
  }
  void u8(std::uint8_t v) { raw(&v, 1); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void i64(std::int64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void vec(const Vector& v) {
    i64(v.size());
    raw(v.data(), static_cast<std::size_t>(v.size()) * sizeof(double));
  }
  void mat(const Matrix& m) {
    i64(m.rows());
    i64(m.cols());
    raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
  }
  void ints(const std::vector<int>& v) {
    i64(static_cast<std::int64_t>(v.size()));
    for (int x : v) i64(x);
  }

  void close() {
    out_.flush();
    if (!out_) throw std::runtime_error("model file: write failed");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path)
      : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("model file: cannot open " + path);
  }

  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw std::runtime_error("model file: truncated");
  }
  std::uint8_t u8() {
    std::uint8_t v = 0;
    raw(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    raw(&v, 4);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v = 0;
    raw(&v, 8);
    return v;
  }
  double f64() {
    double v = 0.0;
    raw(&v, 8);
    return v;
  }
  std::int64_t count() {
    const std::int64_t n = i64();
    if (n < 0 || n > (1LL << 32))
      throw std::runtime_error("model file: corrupt length");
    return n;
  }
  Vector vec() {
    const std::int64_t n = count();
    Vector v(n);
    raw(v.data(), static_cast<std::size_t>(n) * sizeof(double));
    return v;
  }
  Matrix mat() {
    const std::int64_t rows = count();
    const std::int64_t cols = count();
    Matrix m(rows, cols);
    raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
    return m;
  }
  std::vector<int> ints() {
    const std::int64_t n = count();
    std::vector<int> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = static_cast<int>(i64());
    return v;
  }

 private:
  std::ifstream in_;
};

void write_ctm_config(Writer& w, const CtmConfig& cfg) {
  w.f64(cfg.cluster_ratio);
  w.i64(cfg.embed_dim);
  w.f64(cfg.lambda);
  w.f64(cfg.kernel_gamma);
  w.u8(static_cast<std::uint8_t>(cfg.affinity_mode));
  w.f64(cfg.heat_f);
  w.i64(cfg.knn_k);
  w.u8(static_cast<std::uint8_t>(cfg.solver));
}

CtmConfig read_ctm_config(Reader& r) {
  CtmConfig cfg;
  cfg.cluster_ratio = r.f64();
  cfg.embed_dim = static_cast<int>(r.i64());
  cfg.lambda = r.f64();
  cfg.kernel_gamma = r.f64();
  cfg.affinity_mode = static_cast<AffinityMode>(r.u8());
  cfg.heat_f = r.f64();
  cfg.knn_k = static_cast<int>(r.i64());
  cfg.solver = static_cast<CtmSolver>(r.u8());
  return cfg;
}

}  // namespace

void save_model(const std::string& path, const TrainedEnsemble& model) {
  Writer w(path);
  w.raw(kMagic, sizeof(kMagic));
  w.u32(kVersion);

  w.i64(model.config.r1);
  w.i64(model.config.r2);
  w.i64(model.config.r3);
  w.i64(model.config.nc.nc_maj);
  w.i64(model.config.nc.nc_min);
  write_ctm_config(w, model.config.ctm);
  w.f64(model.config.classifier_c);
  w.u8(static_cast<std::uint8_t>(model.config.fusion));

  w.vec(model.scaler.mins);
  w.vec(model.scaler.ranges);

  const auto& pc = model.clustering;
  w.i64(pc.d_t);
  w.mat(pc.basis);
  w.i64(pc.nc_maj);
  w.i64(pc.nc_min);
  w.i64(static_cast<std::int64_t>(pc.maj_clusters.size()));
  for (const auto& cluster : pc.maj_clusters) w.ints(cluster);
  w.i64(static_cast<std::int64_t>(pc.min_clusters.size()));
  for (const auto& cluster : pc.min_clusters) w.ints(cluster);
  w.f64(pc.db_score);
  w.u8(pc.degenerate ? 1 : 0);

  w.i64(static_cast<std::int64_t>(model.members.size()));
  for (const auto& member : model.members) {
    w.i64(member.subset_id);
    const auto& m = member.mapping;
    w.mat(m.anchors);
    w.mat(m.w);
    write_ctm_config(w, m.config);
    w.i64(m.n_source);
    w.i64(m.n_target);
    w.vec(m.eigenvalues);
    w.u8(m.regularized ? 1 : 0);
    w.u8(m.reduced_dim ? 1 : 0);
    w.u8(m.iterative ? 1 : 0);
    w.u8(m.converged ? 1 : 0);
    w.f64(m.constraint_residual);
    w.f64(m.max_pair_residual);
    w.vec(member.classifier.weights);
    w.f64(member.classifier.bias);
    w.u8(member.classifier.single_class ? 1 : 0);
    w.f64(member.classifier.objective);
  }
  w.close();
}

TrainedEnsemble load_model(const std::string& path) {
  Reader r(path);
  char magic[8] = {};
  r.raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("model file: unrecognized format");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw std::runtime_error("model file: unsupported version " +
                             std::to_string(version));

  TrainedEnsemble model;
  model.config.r1 = static_cast<int>(r.i64());
  model.config.r2 = static_cast<int>(r.i64());
  model.config.r3 = static_cast<int>(r.i64());
  model.config.nc.nc_maj = static_cast<int>(r.i64());
  model.config.nc.nc_min = static_cast<int>(r.i64());
  model.config.ctm = read_ctm_config(r);
  model.config.classifier_c = r.f64();
  model.config.fusion = static_cast<FusionRule>(r.u8());

  model.scaler.mins = r.vec();
  model.scaler.ranges = r.vec();

  auto& pc = model.clustering;
  pc.d_t = static_cast<int>(r.i64());
  pc.basis = r.mat();
  pc.nc_maj = static_cast<int>(r.i64());
  pc.nc_min = static_cast<int>(r.i64());
  pc.maj_clusters.resize(static_cast<std::size_t>(r.count()));
  for (auto& cluster : pc.maj_clusters) cluster = r.ints();
  pc.min_clusters.resize(static_cast<std::size_t>(r.count()));
  for (auto& cluster : pc.min_clusters) cluster = r.ints();
  pc.db_score = r.f64();
  pc.degenerate = r.u8() != 0;

  model.members.resize(static_cast<std::size_t>(r.count()));
  for (auto& member : model.members) {
    member.subset_id = static_cast<int>(r.i64());
    auto& m = member.mapping;
    m.anchors = r.mat();
    m.w = r.mat();
    m.config = read_ctm_config(r);
    m.n_source = static_cast<int>(r.i64());
    m.n_target = static_cast<int>(r.i64());
    m.eigenvalues = r.vec();
    m.regularized = r.u8() != 0;
    m.reduced_dim = r.u8() != 0;
    m.iterative = r.u8() != 0;
    m.converged = r.u8() != 0;
    m.constraint_residual = r.f64();
    m.max_pair_residual = r.f64();
    member.classifier.weights = r.vec();
    member.classifier.bias = r.f64();
    member.classifier.single_class = r.u8() != 0;
    member.classifier.objective = r.f64();
  }
  return model;
}

}  // namespace dcshs
