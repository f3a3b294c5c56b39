#include "mgccf/serialize.hpp"

#include <cstring>
#include <fstream>

#include "mgccf/errors.hpp"

namespace mgccf {

namespace {

constexpr std::uint32_t kVersion = 1;

struct Writer {
  std::ofstream out;
  explicit Writer(const std::string& path) : out(path, std::ios::binary) {
    if (!out) throw DatasetError("cannot open file for writing: " + path);
  }
  void magic(const char tag[5]) {
    out.write(tag, 4);
    u32(kVersion);
  }
  void u32(std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
  void u64(std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
  void i64(std::int64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
  void f64(double v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void ivec(const std::vector<int>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (int x : v) u32(static_cast<std::uint32_t>(x));
  }
  void i32vec(const std::vector<std::int32_t>& v) {
    u64(v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(std::int32_t)));
  }
  void dvec(const std::vector<double>& v) {
    u64(v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  void nested(const std::vector<std::vector<int>>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (const auto& inner : v) ivec(inner);
  }
  void matrix(const Matrix& m) {
    u32(static_cast<std::uint32_t>(m.rows));
    u32(static_cast<std::uint32_t>(m.cols));
    dvec(m.data);
  }
};

struct Reader {
  std::ifstream in;
  std::string path;
  explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw DatasetError("cannot open file: " + p);
  }
  void magic(const char tag[5]) {
    char got[4];
    in.read(got, 4);
    if (!in || std::memcmp(got, tag, 4) != 0) {
      throw DatasetError(path + ": not a " + std::string(tag, 4) + " file");
    }
    const std::uint32_t v = u32();
    if (v != kVersion) {
      throw DatasetError(path + ": unsupported version " + std::to_string(v));
    }
  }
  std::uint32_t u32() {
    std::uint32_t v;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    check();
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    check();
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    check();
    return v;
  }
  double f64() {
    double v;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    check();
    return v;
  }
  std::string str() {
    const auto n = u32();
    std::string s(n, '\0');
    in.read(s.data(), n);
    check();
    return s;
  }
  std::vector<int> ivec() {
    const auto n = u32();
    std::vector<int> v(n);
    for (auto& x : v) x = static_cast<int>(u32());
    return v;
  }
  std::vector<std::int32_t> i32vec() {
    const auto n = u64();
    std::vector<std::int32_t> v(n);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(std::int32_t)));
    check();
    return v;
  }
  std::vector<double> dvec() {
    const auto n = u64();
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    check();
    return v;
  }
  std::vector<std::vector<int>> nested() {
    const auto n = u32();
    std::vector<std::vector<int>> v(n);
    for (auto& inner : v) inner = ivec();
    return v;
  }
  Matrix matrix() {
    const int rows = static_cast<int>(u32());
    const int cols = static_cast<int>(u32());
    return Matrix(rows, cols, dvec());
  }
  void check() {
    if (!in) throw DatasetError(path + ": truncated or corrupt file");
  }
};

void write_interactions(Writer& w, const std::vector<Interaction>& v) {
  w.u64(v.size());
  for (const auto& x : v) {
    w.u32(static_cast<std::uint32_t>(x.user));
    w.u32(static_cast<std::uint32_t>(x.item));
  }
}

std::vector<Interaction> read_interactions(Reader& r) {
  const auto n = r.u64();
  std::vector<Interaction> v(n);
  for (auto& x : v) {
    x.user = static_cast<int>(r.u32());
    x.item = static_cast<int>(r.u32());
  }
  return v;
}

}  // namespace

void save_dataset(const InteractionDataset& ds, const std::string& path) {
  Writer w(path);
  w.magic("MGDS");
  w.u32(static_cast<std::uint32_t>(ds.num_users));
  w.u32(static_cast<std::uint32_t>(ds.num_items));
  for (const auto& id : ds.user_ids) w.str(id);
  for (const auto& id : ds.item_ids) w.str(id);
  write_interactions(w, ds.train);
  write_interactions(w, ds.validation);
  write_interactions(w, ds.test);
}

InteractionDataset load_dataset(const std::string& path) {
  Reader r(path);
  r.magic("MGDS");
  InteractionDataset ds;
  ds.num_users = static_cast<int>(r.u32());
  ds.num_items = static_cast<int>(r.u32());
  ds.user_ids.resize(ds.num_users);
  for (auto& id : ds.user_ids) id = r.str();
  ds.item_ids.resize(ds.num_items);
  for (auto& id : ds.item_ids) id = r.str();
  ds.train = read_interactions(r);
  ds.validation = read_interactions(r);
  ds.test = read_interactions(r);
  ds.finalize();
  return ds;
}

void save_bundle(const GraphBundle& b, const std::string& path) {
  Writer w(path);
  w.magic("MGGB");
  w.u32(static_cast<std::uint32_t>(b.params.target_avg_degree));
  w.u32(static_cast<std::uint32_t>(b.params.max_degree_cap));
  w.u32(static_cast<std::uint32_t>(b.params.exact_count_cutoff));
  w.u32(static_cast<std::uint32_t>(b.params.degree_sample_nodes));
  w.u32(static_cast<std::uint32_t>(b.params.max_eval_neighbors));
  w.ivec(b.params.sample_sizes);
  w.u32(static_cast<std::uint32_t>(b.params.num_presample_sets));
  w.u64(b.params.seed);

  w.nested(b.bipartite.user_neighbors);
  w.nested(b.bipartite.item_neighbors);

  for (const SimilarityGraph* g : {&b.user_graph, &b.item_graph}) {
    w.f64(g->threshold);
    w.u32(static_cast<std::uint32_t>(g->target_avg_degree));
    w.u32(g->target_unreachable ? 1 : 0);
    w.nested(g->neighbors);
  }

  w.u32(static_cast<std::uint32_t>(b.sampled.num_layers()));
  w.ivec(b.sampled.sizes());
  w.u32(static_cast<std::uint32_t>(b.sampled.num_sets()));
  w.u32(static_cast<std::uint32_t>(b.sampled.num_nodes(Side::kUser)));
  w.u32(static_cast<std::uint32_t>(b.sampled.num_nodes(Side::kItem)));
  for (Side side : {Side::kUser, Side::kItem}) {
    for (const auto& flat : b.sampled.storage(side)) w.i32vec(flat);
  }

  w.nested(b.eval_user_lists);
  w.nested(b.eval_item_lists);
}

GraphBundle load_bundle(const std::string& path) {
  Reader r(path);
  r.magic("MGGB");
  GraphBundle b;
  b.params.target_avg_degree = static_cast<int>(r.u32());
  b.params.max_degree_cap = static_cast<int>(r.u32());
  b.params.exact_count_cutoff = static_cast<int>(r.u32());
  b.params.degree_sample_nodes = static_cast<int>(r.u32());
  b.params.max_eval_neighbors = static_cast<int>(r.u32());
  b.params.sample_sizes = r.ivec();
  b.params.num_presample_sets = static_cast<int>(r.u32());
  b.params.seed = r.u64();

  b.bipartite.user_neighbors = r.nested();
  b.bipartite.item_neighbors = r.nested();

  for (SimilarityGraph* g : {&b.user_graph, &b.item_graph}) {
    g->threshold = r.f64();
    g->target_avg_degree = static_cast<int>(r.u32());
    g->target_unreachable = r.u32() != 0;
    g->neighbors = r.nested();
  }

  const int n_layers = static_cast<int>(r.u32());
  const auto sizes = r.ivec();
  if (static_cast<int>(sizes.size()) != n_layers) {
    throw DatasetError(path + ": inconsistent sampled-table layer count");
  }
  const int num_sets = static_cast<int>(r.u32());
  const int num_users = static_cast<int>(r.u32());
  const int num_items = static_cast<int>(r.u32());
  b.sampled = SampledNeighborTable(sizes, num_sets, num_users, num_items);
  for (Side side : {Side::kUser, Side::kItem}) {
    for (auto& flat : b.sampled.storage(side)) {
      auto loaded = r.i32vec();
      if (loaded.size() != flat.size()) {
        throw DatasetError(path + ": sampled-table size mismatch");
      }
      flat = std::move(loaded);
    }
  }

  b.eval_user_lists = r.nested();
  b.eval_item_lists = r.nested();
  return b;
}

void save_checkpoint(const std::string& path, const std::string& header_json,
                     const std::vector<const Parameter*>& params) {
  Writer w(path);
  w.magic("MGCK");
  w.str(header_json);
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    w.str(p->name);
    w.i64(p->step_count);
    w.u32(p->frozen ? 1 : 0);
    w.matrix(p->value);
    w.matrix(p->adam_m);
    w.matrix(p->adam_v);
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  Reader r(path);
  r.magic("MGCK");
  Checkpoint ck;
  ck.header_json = r.str();
  const auto n = r.u32();
  ck.params.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Parameter p;
    p.name = r.str();
    p.step_count = r.i64();
    p.frozen = r.u32() != 0;
    p.value = r.matrix();
    p.adam_m = r.matrix();
    p.adam_v = r.matrix();
    p.grad = Matrix(p.value.rows, p.value.cols);
    ck.params.push_back(std::move(p));
  }
  return ck;
}

const Parameter* Checkpoint::find(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open file: " + path);
  std::uint64_t h = 14695981039346656037ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace mgccf
