#include "clgm/costmodel.hpp"
#include "clgm/data.hpp"
#include "clgm/io.hpp"

#include <json.hpp>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace clgm {

using nlohmann::json;

std::string hex_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex_float(const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE)
    throw data_error("invalid real '" + text + "'");
  return v;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw data_error("write failed for '" + path.string() + "'");
}

namespace {

// Field access with a readable path in every error.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {}

  const json& raw() const { return j_; }
  const std::string& where() const { return where_; }

  Reader at(const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    auto it = j_.find(key);
    if (it == j_.end()) fail("missing field '" + key + "'");
    return {*it, where_ + "." + key};
  }
  Reader at(std::size_t k) const { return {j_.at(k), where_ + "[" + std::to_string(k) + "]"}; }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  std::size_t array_size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }
  long integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<long>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected a boolean");
    return j_.get<bool>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  double real() const {
    if (j_.is_number()) return j_.get<double>();
    if (!j_.is_string()) fail("expected a real (number or hex-float string)");
    try {
      return parse_hex_float(j_.get<std::string>());
    } catch (const data_error& e) {
      fail(e.what());
    }
  }

  [[noreturn]] void fail(const std::string& msg) const { throw data_error(where_ + ": " + msg); }

 private:
  const json& j_;
  std::string where_;
};

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw data_error(what + ": parse error: " + e.what());
  }
}

void check_schema(const Reader& root, int expected) {
  const long v = root.at("schema_version").integer();
  if (v != expected)
    root.fail("unsupported schema_version " + std::to_string(v) + " (expected " +
              std::to_string(expected) + ")");
}

json matrix_to_json(const MatrixX& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(hex_float(m(r, c)));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

MatrixX matrix_from_json(const Reader& r) {
  const long rows = r.at("rows").integer();
  const long cols = r.at("cols").integer();
  if (rows < 0 || cols < 0) r.fail("negative shape");
  const Reader data = r.at("data");
  if (data.array_size() != static_cast<std::size_t>(rows * cols)) data.fail("length does not match shape");
  MatrixX m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = data.at(static_cast<std::size_t>(i * cols + j)).real();
  return m;
}

}  // namespace

// ---------------------------------------------------------------- dataset

std::string dataset_to_json(const Dataset& ds) {
  json sets = json::array();
  for (const auto& ks : ds.sets) {
    json pts = json::array(), feats = json::array(), edges = json::array();
    for (Eigen::Index r = 0; r < ks.points.rows(); ++r)
      pts.push_back({hex_float(ks.points(r, 0)), hex_float(ks.points(r, 1))});
    for (Eigen::Index r = 0; r < ks.features.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < ks.features.cols(); ++c) row.push_back(hex_float(ks.features(r, c)));
      feats.push_back(std::move(row));
    }
    for (auto [a, b] : ks.edges) edges.push_back({a, b});
    json labels = ks.universe_labels ? json(*ks.universe_labels) : json(nullptr);
    sets.push_back({{"set_id", ks.set_id},
                    {"points", pts},
                    {"features", feats},
                    {"edges", edges},
                    {"labels", labels}});
  }
  json root = {{"schema_version", kDatasetSchemaVersion},
               {"universe_size", ds.universe_size},
               {"sets", sets}};
  return root.dump(1) + "\n";
}

Dataset dataset_from_json(const std::string& text) {
  const json j = parse_json(text, "dataset");
  const Reader root(j, "dataset");
  check_schema(root, kDatasetSchemaVersion);
  Dataset ds;
  ds.universe_size = static_cast<int>(root.at("universe_size").integer());
  const Reader sets = root.at("sets");
  for (std::size_t k = 0; k < sets.array_size(); ++k) {
    const Reader s = sets.at(k);
    KeypointSet ks;
    ks.set_id = s.at("set_id").string();
    const Reader pts = s.at("points");
    const std::size_t n = pts.array_size();
    ks.points.resize(static_cast<Eigen::Index>(n), 2);
    for (std::size_t r = 0; r < n; ++r) {
      const Reader p = pts.at(r);
      if (p.array_size() != 2) p.fail("expected [x, y]");
      ks.points(r, 0) = p.at(0).real();
      ks.points(r, 1) = p.at(1).real();
    }
    const Reader feats = s.at("features");
    if (feats.array_size() != n) feats.fail("expected one feature row per point");
    const std::size_t dim = n > 0 ? feats.at(0).array_size() : 0;
    ks.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < n; ++r) {
      const Reader row = feats.at(r);
      if (row.array_size() != dim) row.fail("inconsistent feature dimension");
      for (std::size_t c = 0; c < dim; ++c) ks.features(r, c) = row.at(c).real();
    }
    const Reader edges = s.at("edges");
    for (std::size_t e = 0; e < edges.array_size(); ++e) {
      const Reader pair = edges.at(e);
      if (pair.array_size() != 2) pair.fail("expected [i, j]");
      ks.edges.emplace_back(static_cast<Index>(pair.at(0).integer()),
                            static_cast<Index>(pair.at(1).integer()));
    }
    const Reader labels = s.at("labels");
    if (!labels.raw().is_null()) {
      std::vector<int> l;
      for (std::size_t r = 0; r < labels.array_size(); ++r)
        l.push_back(static_cast<int>(labels.at(r).integer()));
      ks.universe_labels = std::move(l);
    }
    try {
      validate(ks);
    } catch (const precondition_error& e) {
      s.fail(e.what());
    }
    ds.sets.push_back(std::move(ks));
  }
  try {
    validate(ds);
  } catch (const precondition_error& e) {
    throw data_error(e.what());
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_text_file(path, dataset_to_json(ds));
}

Dataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_json(read_text_file(path));
}

// ------------------------------------------------------------- checkpoint

void save_checkpoint(const CostModelParams& p, const std::filesystem::path& path) {
  json root = {{"schema_version", 1},
               {"kind", "cost_model"},
               {"c_hat", hex_float(p.c_hat)},
               {"node_proj", matrix_to_json(p.node_proj)},
               {"edge_proj", matrix_to_json(p.edge_proj)}};
  write_text_file(path, root.dump(1) + "\n");
}

CostModelParams load_checkpoint(const std::filesystem::path& path) {
  const json j = parse_json(read_text_file(path), "checkpoint");
  const Reader root(j, "checkpoint");
  check_schema(root, 1);
  if (root.at("kind").string() != "cost_model") root.at("kind").fail("expected 'cost_model'");
  CostModelParams p;
  p.c_hat = root.at("c_hat").real();
  p.node_proj = matrix_from_json(root.at("node_proj"));
  p.edge_proj = matrix_from_json(root.at("edge_proj"));
  try {
    validate(p);
  } catch (const precondition_error& e) {
    root.fail(e.what());
  }
  return p;
}

// --------------------------------------------------------------- instance

QapInstance instance_from_json(const std::string& text) {
  const json j = parse_json(text, "instance");
  const Reader root(j, "instance");
  check_schema(root, kInstanceSchemaVersion);
  QapInstance inst;
  inst.n1 = static_cast<Index>(root.at("n1").integer());
  inst.n2 = static_cast<Index>(root.at("n2").integer());
  if (inst.n1 < 0 || inst.n2 < 0) root.fail("negative node count");
  inst.complete = root.has("complete") ? root.at("complete").boolean() : false;
  const Reader unary = root.at("unary");
  if (unary.array_size() != static_cast<std::size_t>(inst.n1)) unary.fail("expected n1 rows");
  inst.unary.resize(inst.n1, inst.n2);
  for (Index i = 0; i < inst.n1; ++i) {
    const Reader row = unary.at(static_cast<std::size_t>(i));
    if (row.array_size() != static_cast<std::size_t>(inst.n2)) row.fail("expected n2 columns");
    for (Index s = 0; s < inst.n2; ++s) inst.unary(i, s) = row.at(static_cast<std::size_t>(s)).real();
  }
  if (root.has("pairwise")) {
    const Reader pw = root.at("pairwise");
    for (std::size_t t = 0; t < pw.array_size(); ++t) {
      const Reader e = pw.at(t);
      if (e.array_size() != 5) e.fail("expected [i, j, s, l, cost]");
      PairKey k{static_cast<Index>(e.at(0).integer()), static_cast<Index>(e.at(1).integer()),
                static_cast<Index>(e.at(2).integer()), static_cast<Index>(e.at(3).integer())};
      if (k.i > k.j) k = {k.j, k.i, k.l, k.s};
      if (!inst.pairwise.emplace(k, e.at(4).real()).second) e.fail("duplicate pairwise key");
    }
  }
  try {
    validate(inst);
  } catch (const precondition_error& e) {
    root.fail(e.what());
  }
  return inst;
}

std::string instance_to_json(const QapInstance& inst) {
  json unary = json::array();
  for (Index i = 0; i < inst.n1; ++i) {
    json row = json::array();
    for (Index s = 0; s < inst.n2; ++s) row.push_back(hex_float(inst.unary(i, s)));
    unary.push_back(std::move(row));
  }
  json pw = json::array();
  for (const auto& [k, c] : inst.pairwise) pw.push_back({k.i, k.j, k.s, k.l, hex_float(c)});
  json root = {{"schema_version", kInstanceSchemaVersion},
               {"n1", inst.n1},
               {"n2", inst.n2},
               {"complete", inst.complete},
               {"unary", unary},
               {"pairwise", pw}};
  return root.dump(1) + "\n";
}

QapInstance load_instance(const std::filesystem::path& path) {
  return instance_from_json(read_text_file(path));
}

std::string matching_to_json(const Matching& m, double objective) {
  json pairs = json::array();
  for (auto [i, s] : m.pairs()) pairs.push_back({i, s});
  json root = {{"n1", m.n1()}, {"n2", m.n2()}, {"pairs", pairs}, {"objective", objective}};
  return root.dump() + "\n";
}

}  // namespace clgm
