#include "cclab/config.hpp"

#include <algorithm>
#include <fstream>
#include <cctype>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "cclab/rng.hpp"

namespace cclab {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;
using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

enum : std::uint64_t { kStateStream = 11, kBeliefStream = 12 };

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Schema checks walk the parsed tree, which has no positions. The first
// occurrence of the key in the source is a close enough pointer.
class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    // Array indices have no text of their own; point at the enclosing key.
    std::string key;
    for (std::string rest = path; !rest.empty(); rest.resize(rest.find_last_of('/') == std::string::npos ? 0 : rest.find_last_of('/'))) {
      key = rest.substr(rest.find_last_of('/') + 1);
      if (!key.empty() && !std::isdigit(static_cast<unsigned char>(key.front()))) break;
      key.clear();
    }
    std::size_t line = 0;
    std::size_t col = 0;
    if (!key.empty()) {
      const auto pos = text_.find("\"" + key + "\"");
      if (pos != std::string::npos) std::tie(line, col) = line_col(text_, pos);
    }
    throw ConfigError(path + ": " + msg, line, col);
  }

  const Json& field(const Json& obj, const std::string& path, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing required key \"") + key + "\"");
    return *it;
  }

  void only_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
      if (!known) fail(path + "/" + it.key(), "unknown key");
    }
  }

  double number(const Json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "expected a finite number");
    return d;
  }

  std::uint64_t unsigned_int(const Json& v, const std::string& path) const {
    if (!v.is_number_unsigned()) fail(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::size_t label(const Json& v, const std::string& path, std::size_t count) const {
    const auto l = unsigned_int(v, path);
    if (l < 1 || l > count) fail(path, "label " + std::to_string(l) + " outside 1.." + std::to_string(count));
    return static_cast<std::size_t>(l - 1);
  }

  std::vector<double> vector(const Json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "/" + std::to_string(i)));
    return out;
  }

  Eigen::MatrixXd matrix(const Json& v, const std::string& path) const {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
    const auto rows = v.size();
    const auto cols = v[0].is_array() ? v[0].size() : 0;
    if (cols == 0) fail(path + "/0", "expected a non-empty row");
    Eigen::MatrixXd m(idx(rows), idx(cols));
    for (std::size_t i = 0; i < rows; ++i) {
      const auto row_path = path + "/" + std::to_string(i);
      const auto row = vector(v[i], row_path);
      if (row.size() != cols) fail(row_path, "row length differs from the first row");
      for (std::size_t j = 0; j < cols; ++j) m(idx(i), idx(j)) = row[j];
    }
    return m;
  }

 private:
  const std::string& text_;
};

OrderedJson matrix_json(const Eigen::MatrixXd& m) {
  OrderedJson rows = OrderedJson::array();
  for (Index i = 0; i < m.rows(); ++i) {
    OrderedJson row = OrderedJson::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

bool same(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

std::string split_name(SplitMode s) { return s == SplitMode::Equal ? "equal" : "floor_simplex"; }

void check_stochastic(const Reader& r, const Eigen::MatrixXd& m, const std::string& path, std::size_t n) {
  if (m.rows() != idx(n) || m.cols() != idx(n)) {
    r.fail(path, "expected a " + std::to_string(n) + " x " + std::to_string(n) + " matrix");
  }
  try {
    StochasticMatrix::validate(m);
  } catch (const InvalidInput& e) {
    r.fail(path, e.what());
  }
}

TopologyConfig parse_topology(const Reader& r, const Json& t, std::size_t n, std::size_t k) {
  const std::string path = "/topology";
  if (!t.is_object()) r.fail(path, "expected an object");
  const auto& kind = r.field(t, path, "kind");
  TopologyConfig topo;
  if (kind == "matrix") {
    r.only_keys(t, path, {"kind", "matrix"});
    topo.kind = TopologyKind::Matrix;
    topo.matrices.push_back(r.matrix(r.field(t, path, "matrix"), path + "/matrix"));
    check_stochastic(r, topo.matrices.back(), path + "/matrix", n);
  } else if (kind == "switching") {
    r.only_keys(t, path, {"kind", "matrices", "window", "floor"});
    topo.kind = TopologyKind::Switching;
    const auto& ms = r.field(t, path, "matrices");
    if (!ms.is_array() || ms.empty()) r.fail(path + "/matrices", "expected a non-empty array of matrices");
    for (std::size_t l = 0; l < ms.size(); ++l) {
      const auto p = path + "/matrices/" + std::to_string(l);
      topo.matrices.push_back(r.matrix(ms[l], p));
      check_stochastic(r, topo.matrices.back(), p, n);
    }
    topo.window = static_cast<std::size_t>(r.unsigned_int(r.field(t, path, "window"), path + "/window"));
    if (topo.window == 0) r.fail(path + "/window", "window must be positive");
    topo.floor = r.number(r.field(t, path, "floor"), path + "/floor");
    if (!(topo.floor > 0.0 && topo.floor <= 1.0)) r.fail(path + "/floor", "floor must lie in (0, 1]");
  } else if (kind == "graph") {
    r.only_keys(t, path, {"kind", "successors", "quotient", "split", "floor"});
    topo.kind = TopologyKind::Graph;
    const auto& succ = r.field(t, path, "successors");
    if (!succ.is_array() || succ.size() != n) {
      r.fail(path + "/successors", "expected one successor list per agent (" + std::to_string(n) + ")");
    }
    for (std::size_t j = 0; j < n; ++j) {
      const auto p = path + "/successors/" + std::to_string(j);
      if (!succ[j].is_array()) r.fail(p, "expected an array of agent labels");
      std::vector<std::size_t> list;
      for (std::size_t e = 0; e < succ[j].size(); ++e) list.push_back(r.label(succ[j][e], p + "/" + std::to_string(e), n));
      topo.successors.push_back(std::move(list));
    }
    topo.quotient = r.matrix(r.field(t, path, "quotient"), path + "/quotient");
    check_stochastic(r, topo.quotient, path + "/quotient", k);
    const auto& split = r.field(t, path, "split");
    if (split == "equal") {
      topo.split = SplitMode::Equal;
    } else if (split == "floor_simplex") {
      topo.split = SplitMode::FloorSimplex;
    } else {
      r.fail(path + "/split", "expected \"equal\" or \"floor_simplex\"");
    }
    topo.floor = r.number(r.field(t, path, "floor"), path + "/floor");
    if (!(topo.floor > 0.0 && topo.floor <= 1.0 / static_cast<double>(n) + 1e-15)) {
      r.fail(path + "/floor", "floor must lie in (0, 1/n]");
    }
  } else {
    r.fail(path + "/kind", "expected \"matrix\", \"switching\" or \"graph\"");
  }
  return topo;
}

}  // namespace

ConfigError::ConfigError(const std::string& what, std::size_t line, std::size_t column)
    : InvalidInput(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what
                            : what),
      line_(line),
      column_(column) {}

bool operator==(const TopologyConfig& a, const TopologyConfig& b) {
  if (a.kind != b.kind || a.window != b.window || a.floor != b.floor || a.successors != b.successors ||
      a.split != b.split || !same(a.quotient, b.quotient) || a.matrices.size() != b.matrices.size()) {
    return false;
  }
  for (std::size_t l = 0; l < a.matrices.size(); ++l)
    if (!same(a.matrices[l], b.matrices[l])) return false;
  return true;
}

bool operator==(const LearningConfig& a, const LearningConfig& b) {
  return same(a.flags, b.flags) && a.strength == b.strength && a.pair == b.pair && a.state == b.state;
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  return a.version == b.version && a.seed == b.seed && a.clusters == b.clusters && a.theorem == b.theorem &&
         a.horizon == b.horizon && a.initial_state == b.initial_state && a.topology == b.topology &&
         a.signal == b.signal && a.tolerances == b.tolerances && a.learning == b.learning;
}

ScenarioConfig parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    // Drop the library's own prefix; the position is reported separately.
    if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError(msg, line, col);
  }
  const Reader r(text);
  r.only_keys(doc, "", {"version", "seed", "theorem", "horizon", "clusters", "initial_state", "topology", "signal",
                        "tolerances", "learning"});

  ScenarioConfig cfg;
  const auto& version = r.field(doc, "", "version");
  if (!version.is_string() || version.get<std::string>() != kConfigVersion) {
    r.fail("/version", std::string("expected \"") + kConfigVersion + "\"");
  }
  if (doc.contains("seed")) cfg.seed = r.unsigned_int(doc["seed"], "/seed");

  const auto& theorem = r.field(doc, "", "theorem");
  if (!theorem.is_number_integer() || theorem.get<int>() < 1 || theorem.get<int>() > 4) {
    r.fail("/theorem", "expected 1, 2, 3 or 4");
  }
  cfg.theorem = theorem.get<int>();
  if (doc.contains("horizon")) {
    cfg.horizon = static_cast<std::size_t>(r.unsigned_int(doc["horizon"], "/horizon"));
    if (cfg.horizon == 0) r.fail("/horizon", "horizon must be at least 1");
  }

  // Clusters: a partition of 1..n.
  const auto& clusters = r.field(doc, "", "clusters");
  if (!clusters.is_array() || clusters.empty()) r.fail("/clusters", "expected a non-empty array of clusters");
  std::size_t n = 0;
  for (const auto& members : clusters) n += members.is_array() ? members.size() : 0;
  for (std::size_t p = 0; p < clusters.size(); ++p) {
    const auto path = "/clusters/" + std::to_string(p);
    if (!clusters[p].is_array() || clusters[p].empty()) r.fail(path, "expected a non-empty array of agent labels");
    std::vector<Vertex> members;
    for (std::size_t e = 0; e < clusters[p].size(); ++e)
      members.push_back(r.label(clusters[p][e], path + "/" + std::to_string(e), n));
    cfg.clusters.push_back(std::move(members));
  }
  try {
    Clustering(n, cfg.clusters);
  } catch (const InvalidInput& e) {
    r.fail("/clusters", e.what());
  }
  const std::size_t k = cfg.clusters.size();

  if (doc.contains("initial_state")) {
    cfg.initial_state = r.vector(doc["initial_state"], "/initial_state");
    if (cfg.initial_state->size() != n) r.fail("/initial_state", "expected " + std::to_string(n) + " values");
  }

  cfg.topology = parse_topology(r, r.field(doc, "", "topology"), n, k);
  if (cfg.theorem <= 2 && cfg.topology.kind == TopologyKind::Switching) {
    r.fail("/theorem", "theorems 1 and 2 need a fixed topology");
  }

  const auto& signal = r.field(doc, "", "signal");
  r.only_keys(signal, "/signal", {"period", "free_values", "alphas", "strength"});
  cfg.signal.free_values = r.vector(r.field(signal, "/signal", "free_values"), "/signal/free_values");
  const auto period = r.unsigned_int(r.field(signal, "/signal", "period"), "/signal/period");
  if (period != cfg.signal.free_values.size() + 1) r.fail("/signal/period", "period must equal len(free_values) + 1");
  cfg.signal.alphas = r.vector(r.field(signal, "/signal", "alphas"), "/signal/alphas");
  if (cfg.signal.alphas.size() != k) r.fail("/signal/alphas", "expected one alpha per cluster");
  if (signal.contains("strength")) {
    cfg.signal.strength = r.number(signal["strength"], "/signal/strength");
    if (!(*cfg.signal.strength > 0.0)) r.fail("/signal/strength", "strength must be positive");
  }
  const auto scaled = cfg.signal.scaled_alphas();
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t q = 0; q < p; ++q)
      if (scaled[p] == scaled[q]) r.fail("/signal/alphas", "alphas must be pairwise distinct");

  if (doc.contains("tolerances")) {
    const auto& tol = doc["tolerances"];
    r.only_keys(tol, "/tolerances", {"sync", "separation", "periodic"});
    auto positive = [&](const char* key, double& out) {
      if (!tol.contains(key)) return;
      const auto path = std::string("/tolerances/") + key;
      out = r.number(tol[key], path);
      if (!(out > 0.0)) r.fail(path, "tolerance must be positive");
    };
    positive("sync", cfg.tolerances.sync);
    positive("separation", cfg.tolerances.separation);
    positive("periodic", cfg.tolerances.periodic);
  }

  if (doc.contains("learning")) {
    const auto& l = doc["learning"];
    r.only_keys(l, "/learning", {"states", "flags", "strength", "pair", "state"});
    LearningConfig lc;
    const auto m = r.unsigned_int(r.field(l, "/learning", "states"), "/learning/states");
    if (m < 2) r.fail("/learning/states", "need at least two states");
    lc.flags = r.matrix(r.field(l, "/learning", "flags"), "/learning/flags");
    if (lc.flags.rows() != idx(k) || lc.flags.cols() != idx(m)) {
      r.fail("/learning/flags", "expected one row of " + std::to_string(m) + " flags per cluster");
    }
    lc.strength = r.number(r.field(l, "/learning", "strength"), "/learning/strength");
    try {
      CulturalFlags(lc.flags, lc.strength);
    } catch (const InvalidInput& e) {
      r.fail("/learning/flags", e.what());
    }
    if (l.contains("pair")) {
      const auto& pair = l["pair"];
      if (!pair.is_array() || pair.size() != 2) r.fail("/learning/pair", "expected two cluster labels");
      lc.pair = {r.label(pair[0], "/learning/pair/0", k), r.label(pair[1], "/learning/pair/1", k)};
      if (lc.pair.first == lc.pair.second) r.fail("/learning/pair", "zeta compares two different clusters");
    } else if (k < 3) {
      r.fail("/learning", "\"pair\" is required with fewer than three clusters");
    }
    if (l.contains("state")) lc.state = r.label(l["state"], "/learning/state", static_cast<std::size_t>(m));
    cfg.learning = std::move(lc);
  }

  const bool generates = !cfg.initial_state || cfg.topology.kind == TopologyKind::Graph || cfg.learning;
  if (generates && !cfg.seed) r.fail("/seed", "a seed is required when anything is generated");
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string emit_config(const ScenarioConfig& cfg) {
  OrderedJson doc;
  doc["version"] = cfg.version;
  if (cfg.seed) doc["seed"] = *cfg.seed;
  doc["theorem"] = cfg.theorem;
  doc["horizon"] = cfg.horizon;
  OrderedJson clusters = OrderedJson::array();
  for (const auto& members : cfg.clusters) {
    OrderedJson labels = OrderedJson::array();
    for (auto v : members) labels.push_back(v + 1);
    clusters.push_back(std::move(labels));
  }
  doc["clusters"] = std::move(clusters);
  if (cfg.initial_state) doc["initial_state"] = *cfg.initial_state;

  const auto& t = cfg.topology;
  OrderedJson topo;
  switch (t.kind) {
    case TopologyKind::Matrix:
      topo["kind"] = "matrix";
      topo["matrix"] = matrix_json(t.matrices.at(0));
      break;
    case TopologyKind::Switching: {
      topo["kind"] = "switching";
      OrderedJson ms = OrderedJson::array();
      for (const auto& m : t.matrices) ms.push_back(matrix_json(m));
      topo["matrices"] = std::move(ms);
      topo["window"] = t.window;
      topo["floor"] = t.floor;
      break;
    }
    case TopologyKind::Graph: {
      topo["kind"] = "graph";
      OrderedJson succ = OrderedJson::array();
      for (const auto& list : t.successors) {
        OrderedJson labels = OrderedJson::array();
        for (auto v : list) labels.push_back(v + 1);
        succ.push_back(std::move(labels));
      }
      topo["successors"] = std::move(succ);
      topo["quotient"] = matrix_json(t.quotient);
      topo["split"] = split_name(t.split);
      topo["floor"] = t.floor;
      break;
    }
  }
  doc["topology"] = std::move(topo);

  doc["signal"] = {{"period", cfg.signal.free_values.size() + 1},
                   {"free_values", cfg.signal.free_values},
                   {"alphas", cfg.signal.alphas}};
  if (cfg.signal.strength) doc["signal"]["strength"] = *cfg.signal.strength;
  doc["tolerances"] = {{"sync", cfg.tolerances.sync},
                       {"separation", cfg.tolerances.separation},
                       {"periodic", cfg.tolerances.periodic}};
  if (cfg.learning) {
    const auto& l = *cfg.learning;
    doc["learning"] = {{"states", l.flags.cols()},
                       {"flags", matrix_json(l.flags)},
                       {"strength", l.strength},
                       {"pair", {l.pair.first + 1, l.pair.second + 1}},
                       {"state", l.state + 1}};
  }
  return doc.dump(2) + "\n";
}

Clustering build_clustering(const ScenarioConfig& cfg) {
  std::size_t n = 0;
  for (const auto& m : cfg.clusters) n += m.size();
  return Clustering(n, cfg.clusters);
}

MatrixSchedule build_schedule(const ScenarioConfig& cfg) {
  const auto& t = cfg.topology;
  switch (t.kind) {
    case TopologyKind::Matrix: return MatrixSchedule::constant(StochasticMatrix::validate(t.matrices.at(0)));
    case TopologyKind::Switching: {
      std::vector<StochasticMatrix> cycle;
      for (const auto& m : t.matrices) cycle.push_back(StochasticMatrix::validate(m));
      if (cycle.size() == 1) return MatrixSchedule::constant(std::move(cycle.front()));
      return MatrixSchedule::periodic(std::move(cycle));
    }
    case TopologyKind::Graph: {
      const auto c = build_clustering(cfg);
      DirectedGraph g(c.size());
      for (std::size_t j = 0; j < t.successors.size(); ++j)
        for (auto i : t.successors[j]) g.add_edge(j, i);
      if (!cfg.seed) throw ConfigError("graph topology needs a seed");
      return MatrixSchedule::constant(realize_common_influence(g, c, t.quotient, t.floor, t.split, *cfg.seed));
    }
  }
  throw ConfigError("unknown topology kind");
}

std::vector<double> SignalConfig::scaled_alphas() const {
  auto out = alphas;
  if (strength)
    for (auto& a : out) a *= *strength;
  return out;
}

System build_system(const ScenarioConfig& cfg) {
  auto c = build_clustering(cfg);
  ClusterOffsets offsets(cfg.signal.scaled_alphas(), c);
  return System(build_schedule(cfg), std::move(c), std::move(offsets), PeriodicInput(cfg.signal.free_values));
}

Eigen::VectorXd build_initial_state(const ScenarioConfig& cfg) {
  if (cfg.initial_state) return Eigen::Map<const Eigen::VectorXd>(cfg.initial_state->data(), idx(cfg.initial_state->size()));
  if (!cfg.seed) throw ConfigError("a seed is required to draw the initial state");
  std::size_t n = 0;
  for (const auto& m : cfg.clusters) n += m.size();
  return gen_initial_state(n, Rng(*cfg.seed).fork(kStateStream).next());
}

LearningSetup build_learning(const ScenarioConfig& cfg) {
  if (!cfg.learning) throw ConfigError("config has no learning section");
  if (!cfg.seed) throw ConfigError("a seed is required to draw initial beliefs");
  const auto& l = *cfg.learning;
  auto c = build_clustering(cfg);
  const auto n = c.size();
  auto initial = BeliefProfile::random(n, static_cast<std::size_t>(l.flags.cols()),
                                       Rng(*cfg.seed).fork(kBeliefStream).next());
  return LearningSetup{build_schedule(cfg), std::move(c), CulturalFlags(l.flags, l.strength),
                       PeriodicInput(cfg.signal.free_values), std::move(initial), cfg.horizon, l.pair, l.state};
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

ScenarioConfig paper_example_config(char which) {
  if (which != 'A' && which != 'B') throw InvalidInput("example must be A or B");
  const auto ex = which == 'A' ? paper_example_a() : paper_example_b();
  ScenarioConfig cfg;
  cfg.seed = ex.seed;
  cfg.theorem = which == 'A' ? 1 : 4;
  cfg.horizon = ex.horizon;
  cfg.clusters = ex.system.clustering().clusters();
  if (which == 'A') {
    cfg.topology.kind = TopologyKind::Matrix;
    cfg.topology.matrices.push_back(ex.system.fixed_coupling().matrix());
  } else {
    cfg.topology.kind = TopologyKind::Switching;
    for (const auto& a : ex.system.coupling().cycle()) cfg.topology.matrices.push_back(a.matrix());
    cfg.topology.window = ex.window;
    cfg.topology.floor = 0.1;
  }
  cfg.signal.free_values = ex.system.signal().periodic()->free_values();
  cfg.signal.alphas = ex.system.offsets().alphas();
  cfg.learning = LearningConfig{ex.flags, ex.strength, {1, 2}, 0};
  return cfg;
}

}  // namespace cclab
