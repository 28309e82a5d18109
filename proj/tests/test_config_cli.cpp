#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cclab/cli.hpp"
#include "cclab/config.hpp"
#include "oracles.hpp"

using namespace cclab;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("cclab_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name, std::ios::binary) << text;
    return (path_ / name).string();
  }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kMinimal = R"({
  "version": "cclab/1",
  "seed": 5,
  "theorem": 1,
  "horizon": 50,
  "clusters": [[1, 2], [3]],
  "topology": {
    "kind": "matrix",
    "matrix": [[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.0, 0.0, 1.0]]
  },
  "signal": {"period": 2, "free_values": [-1.0], "alphas": [0.25, -0.5]}
})";

std::string with(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

ConfigError parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "config parsed:\n" << text;
  return ConfigError("none");
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cclab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Config, MinimalParses) {
  const auto cfg = parse_config(kMinimal);
  EXPECT_EQ(cfg.clusters, (std::vector<std::vector<Vertex>>{{0, 1}, {2}}));
  EXPECT_EQ(cfg.seed, 5u);
  EXPECT_EQ(cfg.horizon, 50u);
  EXPECT_EQ(cfg.tolerances, Tolerances{});
  const auto sys = build_system(cfg);
  EXPECT_EQ(sys.size(), 3u);
  EXPECT_EQ(sys.offsets().alphas(), (std::vector<double>{0.25, -0.5}));
  EXPECT_EQ(build_initial_state(cfg), build_initial_state(cfg));
}

TEST(Config, RoundTripReferenceExamples) {
  for (char which : {'A', 'B'}) {
    const auto cfg = paper_example_config(which);
    const auto text = emit_config(cfg);
    EXPECT_EQ(parse_config(text), cfg);
    EXPECT_EQ(emit_config(parse_config(text)), text);
  }
}

TEST(Config, RoundTripRandomDocuments) {
  Rng rng(601);
  for (int trial = 0; trial < 60; ++trial) {
    GenOptions g;
    g.sizes.assign(1 + rng.index(3), 0);
    for (auto& s : g.sizes) s = 2 + rng.index(3);
    g.seed = rng.next() >> 12;
    g.theorem = 1 + static_cast<int>(rng.index(4));
    g.density = g.theorem >= 3 ? 0.0 : rng.uniform(0.0, 1.0);
    g.period = 2 + rng.index(3);
    ScenarioConfig cfg;
    try {
      cfg = generate_config(g);
    } catch (const InfeasibleError&) {
      continue;
    }
    if (rng.bernoulli(0.5)) {
      std::vector<double> x(build_clustering(cfg).size());
      for (auto& v : x) v = rng.uniform(-10, 10);
      cfg.initial_state = x;
    }
    if (rng.bernoulli(0.5)) cfg.tolerances = {rng.uniform(1e-12, 1e-6), rng.uniform(1e-9, 1e-3), 1e-7};
    const auto text = emit_config(cfg);
    EXPECT_EQ(parse_config(text), cfg) << text;
  }
}

TEST(Config, RoundTripGraphTopology) {
  auto cfg = parse_config(kMinimal);
  cfg.topology = TopologyConfig{};
  cfg.topology.kind = TopologyKind::Graph;
  cfg.topology.successors = {{0, 1}, {0, 1}, {0, 1, 2}};
  cfg.topology.quotient = Eigen::Matrix2d(Eigen::Matrix2d::Identity());
  cfg.topology.quotient << 0.6, 0.4, 0.0, 1.0;
  cfg.topology.floor = 0.1;
  cfg.topology.split = SplitMode::Equal;
  const auto text = emit_config(cfg);
  EXPECT_EQ(parse_config(text), cfg);
  const auto a = build_system(cfg).fixed_coupling();
  Eigen::Matrix3d expected;
  expected << 0.3, 0.3, 0.4, 0.3, 0.3, 0.4, 0.0, 0.0, 1.0;
  EXPECT_LT((a.matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
  cfg.topology.split = SplitMode::FloorSimplex;
  EXPECT_EQ(build_system(cfg).fixed_coupling(), build_system(cfg).fixed_coupling());
  EXPECT_TRUE(has_common_influence(build_system(cfg).fixed_coupling(), build_clustering(cfg)));
}

TEST(Config, SyntaxErrorsCarryLineAndColumn) {
  const std::string text(kMinimal);
  const auto truncated = parse_error(text.substr(0, text.find("\"topology\"")));
  EXPECT_GT(truncated.line(), 5u);
  EXPECT_EQ(std::string(truncated.what()).rfind("line ", 0), 0u);
  const auto comma = parse_error(with(text, "\"horizon\": 50,", "\"horizon\": 50,,"));
  EXPECT_EQ(comma.line(), 5u);
}

TEST(Config, SchemaErrorsPointAtTheKey) {
  const auto unknown = parse_error(with(kMinimal, "\"horizon\": 50,", "\"horizon\": 50, \"colour\": 1,"));
  EXPECT_EQ(unknown.line(), 5u);
  EXPECT_NE(std::string(unknown.what()).find("/colour: unknown key"), std::string::npos);
  const auto label = parse_error(with(kMinimal, "[[1, 2], [3]]", "[[1, 2], [4]]"));
  EXPECT_EQ(label.line(), 6u);
  EXPECT_NE(std::string(label.what()).find("outside 1..3"), std::string::npos);
}

TEST(Config, SchemaViolations) {
  const std::string t(kMinimal);
  parse_error(with(t, "\"cclab/1\"", "\"cclab/2\""));
  parse_error(with(t, "[[1, 2], [3]]", "[[1, 2], [2]]"));
  parse_error(with(t, "[0.25, -0.5]", "[0.25, 0.25]"));
  parse_error(with(t, "[0.25, -0.5]", "[0.25]"));
  parse_error(with(t, "\"period\": 2", "\"period\": 3"));
  parse_error(with(t, "\"theorem\": 1", "\"theorem\": 7"));
  parse_error(with(t, "\"horizon\": 50", "\"horizon\": 0"));
  parse_error(with(t, "[0.0, 0.0, 1.0]]", "[0.0, 0.5, 1.0]]"));
  parse_error(with(t, "\"seed\": 5,", ""));
  parse_error(with(t, "\"kind\": \"matrix\"", "\"kind\": \"tensor\""));
  // A stated initial state makes the seed optional.
  EXPECT_NO_THROW(parse_config(with(with(t, "\"seed\": 5,", ""), "\"horizon\": 50,",
                                    "\"horizon\": 50, \"initial_state\": [1, 2, 3],")));
}

TEST(Config, SwitchingNeedsTheoremThreeOrFour) {
  auto text = emit_config(paper_example_config('B'));
  text = with(text, "\"theorem\": 4", "\"theorem\": 1");
  EXPECT_NE(std::string(parse_error(text).what()).find("fixed topology"), std::string::npos);
}

TEST(Config, LearningSection) {
  const auto cfg = paper_example_config('A');
  ASSERT_TRUE(cfg.learning);
  const auto s = build_learning(cfg);
  EXPECT_EQ(s.pair, (std::pair<std::size_t, std::size_t>{1, 2}));
  EXPECT_EQ(s.flags.strength(), 0.01);
  EXPECT_EQ(s.initial.agents(), 9u);
  EXPECT_EQ(s.initial.matrix(), build_learning(cfg).initial.matrix());
  auto text = emit_config(cfg);
  text = with(text, "-0.5", "-0.4");
  EXPECT_NE(std::string(parse_error(text).what()).find("/learning"), std::string::npos);
  EXPECT_THROW(build_learning(parse_config(kMinimal)), ConfigError);
}

TEST(Config, HashIsFnv1a) {
  EXPECT_EQ(config_hash(""), "cbf29ce484222325");
  EXPECT_EQ(config_hash("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(config_hash("foobar"), "85944171f73967e8");
}

TEST(Cli, CheckExampleAPasses) {
  TempDir dir;
  const auto path = dir.write("a.json", emit_config(paper_example_config('A')));
  EXPECT_EQ(cmd_check(path, {}, false, std::cout, std::cerr), kExitPass);
  const auto run = cli({"check", "--config", path, "--json"});
  EXPECT_EQ(run.code, kExitPass);
  const auto report = nlohmann::json::parse(run.out);
  EXPECT_EQ(report["predicted"], "intra-sync");
  EXPECT_EQ(cli({"check", "--config", path, "--theorem", "2"}).code, kExitPass);
  const auto b = dir.write("b.json", emit_config(paper_example_config('B')));
  EXPECT_EQ(cli({"check", "--config", b}).code, kExitPass);
  EXPECT_EQ(cli({"check", "--config", b, "--theorem", "3"}).code, kExitPass);
  EXPECT_EQ(cli({"check", "--config", b, "--theorem", "1"}).code, kExitInputError);
}

TEST(Cli, IdentityCouplingFailsSpanningTrees) {
  TempDir dir;
  const auto path = dir.write(
      "id.json", with(kMinimal, "[[0.5, 0.5, 0.0], [0.5, 0.5, 0.0]", "[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]"));
  const auto run = cli({"check", "--config", path});
  EXPECT_EQ(run.code, kExitHypothesisFailure);
  EXPECT_NE(run.out.find("cluster_spanning_trees"), std::string::npos);
  EXPECT_NE(run.out.find("cluster 1 has no root"), std::string::npos);
}

TEST(Cli, MalformedInputIsExitOne) {
  TempDir dir;
  const std::string text(kMinimal);
  const auto truncated = dir.write("t.json", text.substr(0, text.size() / 2));
  const auto run = cli({"check", "--config", truncated});
  EXPECT_EQ(run.code, kExitInputError);
  EXPECT_NE(run.err.find("line "), std::string::npos);
  EXPECT_EQ(cli({"check", "--config", (dir / "missing.json").string()}).code, kExitInputError);
  EXPECT_EQ(cli({"check"}).code, kExitInputError);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitInputError);
  const auto ok = dir.write("ok.json", text);
  EXPECT_EQ(cli({"simulate", "--config", ok, "--out", (dir / "o").string(), "--horizon", "0"}).code,
            kExitInputError);
}

TEST(Cli, SimulateWritesArtifactsDeterministically) {
  TempDir dir;
  const auto path = dir.write("a.json", emit_config(paper_example_config('A')));
  ASSERT_EQ(cli({"simulate", "--config", path, "--out", (dir / "r1").string()}).code, kExitPass);
  ASSERT_EQ(cli({"simulate", "--config", path, "--out", (dir / "r2").string()}).code, kExitPass);
  const auto csv = slurp(dir / "r1" / "trajectory.csv");
  EXPECT_EQ(csv, slurp(dir / "r2" / "trajectory.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x_1,x_2,x_3,x_4,x_5,x_6,x_7,x_8,x_9");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2002);

  const auto metrics = nlohmann::json::parse(slurp(dir / "r1" / "metrics.json"));
  EXPECT_EQ(metrics["config_hash"], config_hash(slurp(path)));
  EXPECT_EQ(metrics["seed"], 1);
  EXPECT_EQ(metrics["verdict"]["verdict"], "PASS");
  EXPECT_EQ(metrics["intra_diameter_series"].size(), 2001u);
  EXPECT_TRUE(metrics["bound_report"]["within"].get<bool>());
  EXPECT_GT(metrics["separation_matrix"][1][2].get<double>(), 1e-3);

  // A different seed changes the drawn initial state.
  ASSERT_EQ(cli({"simulate", "--config", path, "--out", (dir / "r3").string(), "--seed", "2"}).code, kExitPass);
  EXPECT_NE(csv, slurp(dir / "r3" / "trajectory.csv"));
}

TEST(Cli, DivergenceIsExitThreeWithPartialArtifacts) {
  TempDir dir;
  const auto path = dir.write("big.json", with(with(kMinimal, "[-1.0]", "[1e308]"), "[0.25, -0.5]", "[1e308, -1e308]"));
  const auto run = cli({"simulate", "--config", path, "--out", (dir / "o").string()});
  EXPECT_EQ(run.code, kExitDivergence);
  EXPECT_FALSE(run.err.empty());
  const auto metrics = nlohmann::json::parse(slurp(dir / "o" / "metrics.json"));
  EXPECT_EQ(metrics["error"]["kind"], "divergence");
  EXPECT_TRUE(fs::exists(dir / "o" / "trajectory.csv"));
}

TEST(Cli, GenEmitsReferenceExamples) {
  for (const char* which : {"A", "B"}) {
    const auto run = cli({"gen", "--paper-example", which});
    ASSERT_EQ(run.code, kExitPass);
    EXPECT_EQ(parse_config(run.out), paper_example_config(which[0]));
  }
  EXPECT_EQ(cli({"gen", "--paper-example", "C"}).code, kExitInputError);
}

TEST(Cli, GeneratedConfigsPassTheirDeclaredTheorem) {
  TempDir dir;
  for (int theorem = 1; theorem <= 4; ++theorem)
    for (int seed = 1; seed <= 5; ++seed) {
      const auto file = (dir / ("g" + std::to_string(theorem) + "_" + std::to_string(seed) + ".json")).string();
      std::vector<std::string> args{"gen", "--theorem", std::to_string(theorem), "--seed", std::to_string(seed),
                                    "--out", file};
      if (theorem >= 3) args.insert(args.end(), {"--density", "0"});
      ASSERT_EQ(cli(args).code, kExitPass) << theorem << "/" << seed;
      const auto run = cli({"check", "--config", file});
      EXPECT_EQ(run.code, kExitPass) << run.out;
      EXPECT_EQ(parse_config(slurp(file)).seed, static_cast<std::uint64_t>(seed));
    }
}

TEST(Cli, GenReportsInfeasibleSpecs) {
  const auto run = cli({"gen", "--theorem", "3", "--sizes", "1,1", "--density", "0", "--window", "2", "--graphs", "2"});
  EXPECT_EQ(run.code, kExitInputError);
  EXPECT_NE(run.err.find("could not split"), std::string::npos);
}

TEST(Cli, LearnSeparatesAndControlMerges) {
  TempDir dir;
  const auto path = dir.write("a.json", emit_config(paper_example_config('A')));
  ASSERT_EQ(cli({"learn", "--config", path, "--out", (dir / "l").string()}).code, kExitPass);
  const auto validity = nlohmann::json::parse(slurp(dir / "l" / "validity.json"));
  EXPECT_GT(validity["zeta_tail_min"].get<double>(), 1e-6);
  EXPECT_TRUE(validity["valid"].get<bool>());
  EXPECT_LE(validity["max_sum_deviation"].get<double>(), 1e-12);
  EXPECT_EQ(validity["config_hash"], config_hash(slurp(path)));
  const auto beliefs = slurp(dir / "l" / "beliefs.csv");
  EXPECT_EQ(beliefs.substr(0, beliefs.find('\n')), "t,agent,state,belief");
  EXPECT_EQ(std::count(beliefs.begin(), beliefs.end(), '\n'), 1 + 2001 * 9 * 2);

  ASSERT_EQ(cli({"learn", "--config", path, "--out", (dir / "c0").string(), "--strength", "0"}).code, kExitPass);
  EXPECT_LT(nlohmann::json::parse(slurp(dir / "c0" / "validity.json"))["zeta_tail_max"].get<double>(), 1e-6);
}

TEST(Cli, OversizedStrengthIsExitFour) {
  TempDir dir;
  const auto path = dir.write("a.json", emit_config(paper_example_config('A')));
  const auto run = cli({"learn", "--config", path, "--out", (dir / "l").string(), "--strength", "5"});
  EXPECT_EQ(run.code, kExitValidityViolation);
  EXPECT_NE(run.err.find("strength c=5"), std::string::npos) << run.err;
  EXPECT_EQ(cli({"learn", "--config", dir.write("m.json", kMinimal), "--out", (dir / "m").string()}).code,
            kExitInputError);
}

TEST(Cli, ReportSingleRunAndSmallEnsemble) {
  TempDir dir;
  const auto path = dir.write("a.json", emit_config(paper_example_config('A')));
  const auto single = cli({"report", "--config", path});
  EXPECT_EQ(single.code, kExitPass);
  EXPECT_NE(single.out.find("verdict: PASS"), std::string::npos);
  const auto ens = cli({"report", "--ensemble", "20"});
  EXPECT_EQ(ens.code, kExitPass) << ens.out;
  EXPECT_NE(ens.out.find("FAIL: 0"), std::string::npos);
  EXPECT_EQ(cli({"report"}).code, kExitInputError);
}

TEST(Config, SignalStrengthScalesOffsets) {
  const auto cfg = parse_config(with(kMinimal, "\"alphas\": [0.25, -0.5]", "\"alphas\": [0.25, -0.5], \"strength\": 4"));
  EXPECT_EQ(cfg.signal.strength, 4.0);
  EXPECT_EQ(build_system(cfg).offsets().alphas(), (std::vector<double>{1.0, -2.0}));
  EXPECT_EQ(parse_config(emit_config(cfg)), cfg);
  EXPECT_FALSE(parse_config(kMinimal).signal.strength);
  EXPECT_EQ(emit_config(parse_config(kMinimal)).find("strength"), std::string::npos);
  parse_error(with(kMinimal, "\"alphas\": [0.25, -0.5]", "\"alphas\": [0.25, -0.5], \"strength\": 0"));
  parse_error(with(kMinimal, "\"alphas\": [0.25, -0.5]", "\"alphas\": [0.25, -0.5], \"strength\": -1"));
}
