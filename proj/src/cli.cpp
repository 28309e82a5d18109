#include "cclab/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "cclab/rng.hpp"
#include "cclab/scenario_gen.hpp"
#include "cclab/social_learning.hpp"

namespace cclab {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number_or_null(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json report_to_json(const HypothesisReport& r) {
  Json conditions = Json::array();
  for (const auto& c : r.conditions) {
    Json item = {{"name", c.name}, {"holds", c.holds}};
    if (!c.diagnostic.empty()) item["diagnostic"] = c.diagnostic;
    conditions.push_back(std::move(item));
  }
  Json theorems = Json::array();
  for (const auto& t : r.theorems) theorems.push_back({{"name", t.name}, {"holds", t.holds}, {"requires", t.needs}});
  Json out = {{"conditions", conditions}, {"theorems", theorems}, {"predicted", to_string(r.predicted)}};
  if (!r.notes.empty()) out["notes"] = r.notes;
  return out;
}

Json reconcile_to_json(const ReconcileRecord& rec) {
  return {{"verdict", to_string(rec.verdict)},
          {"predicted", to_string(rec.predicted)},
          {"synced", rec.synced},
          {"final_intra_diameter", rec.final_diameter},
          {"sync_threshold", rec.sync_threshold},
          {"min_separation", rec.min_separation ? Json(*rec.min_separation) : Json(nullptr)},
          {"note", rec.note}};
}

Json bound_to_json(const BoundReport& b) {
  return {{"max_norm", b.max_norm}, {"applicable", b.applicable}, {"bound", number_or_null(b.bound)},
          {"within", b.within()},   {"Y", b.y},                   {"M", b.m},
          {"lambda", b.lambda},     {"note", b.note}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string csv = "t";
  for (std::size_t i = 0; i < traj.dimension(); ++i) csv += ",x_" + std::to_string(i + 1);
  csv += "\n";
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    csv += std::to_string(t);
    for (Eigen::Index i = 0; i < traj.states[t].size(); ++i) csv += "," + g17(traj.states[t](i));
    csv += "\n";
  }
  return csv;
}

double periodic_tolerance(const ScenarioConfig& cfg, const Eigen::VectorXd& x0) {
  return cfg.tolerances.periodic * (1.0 + x0.cwiseAbs().maxCoeff());
}

std::optional<PeriodicLimit> try_limit(const Trajectory& traj, const Clustering& c, std::size_t period, double tol) {
  if (traj.states.size() < 4 * period) return std::nullopt;
  return detect_periodic_limit(traj, c, period, tol);
}

std::size_t input_period(const System& sys) {
  const auto* p = sys.signal().periodic();
  return p ? p->period() : 1;
}

struct Observation {
  ReconcileRecord record;
  std::size_t horizon;
};

// Doubles the horizon until the predicted outcome shows up or the cap hits.
Observation observe(const System& sys, const HypothesisReport& report, const Eigen::VectorXd& x0,
                    std::size_t horizon, std::size_t max_horizon, const ReconcileThresholds& th) {
  const double tol = th.sync * (1.0 + x0.cwiseAbs().maxCoeff());
  const auto period = input_period(sys);
  for (;;) {
    const auto traj = simulate(sys, x0, horizon);
    const auto limit = try_limit(traj, sys.clustering(), period, tol);
    auto rec = reconcile(report, traj, sys.clustering(), limit, th);
    if (rec.verdict != Verdict::Fail || horizon >= max_horizon) return {rec, horizon};
    horizon = std::min(2 * horizon, max_horizon);
  }
}

int input_error(std::ostream& err, const std::exception& e) {
  err << "error: " << e.what() << "\n";
  return kExitInputError;
}

ScenarioConfig load_with(const std::string& path, const Overrides& o, std::string& text) {
  text = read_file(path);
  auto cfg = parse_config(text);
  apply_overrides(cfg, o);
  return cfg;
}

Json provenance(const std::string& text, const ScenarioConfig& cfg) {
  return {{"config_hash", config_hash(text)}, {"seed", cfg.seed ? Json(*cfg.seed) : Json(nullptr)}};
}

}  // namespace

void apply_overrides(ScenarioConfig& cfg, const Overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.horizon) {
    if (*o.horizon == 0) throw InvalidInput("horizon must be at least 1");
    cfg.horizon = *o.horizon;
  }
  if (o.theorem) {
    if (*o.theorem < 1 || *o.theorem > 4) throw InvalidInput("theorem must be 1, 2, 3 or 4");
    if (*o.theorem <= 2 && cfg.topology.kind == TopologyKind::Switching) {
      throw InvalidInput("theorems 1 and 2 need a fixed topology");
    }
    cfg.theorem = *o.theorem;
  }
}

HypothesisReport check_config(const ScenarioConfig& cfg) {
  const auto sys = build_system(cfg);
  std::size_t window = 1;
  double floor = 0.0;
  if (cfg.topology.kind == TopologyKind::Switching) {
    window = cfg.topology.window;
    floor = cfg.topology.floor;
  } else {
    floor = sys.coupling().min_positive_entry().value_or(1.0);
  }
  return check_theorem(sys, cfg.theorem, window, floor);
}

bool theorem_holds(const HypothesisReport& report, int theorem) {
  auto holds = [&](const char* name) {
    const auto* t = report.theorem(name);
    return t && t->holds;
  };
  switch (theorem) {
    case 1: return holds("theorem_1");
    case 2: return holds("theorem_2");
    case 3: return holds("theorem_3");
    case 4: return holds("theorem_4_boundedness") && holds("theorem_4_consensus");
    default: return false;
  }
}

std::string report_json(const HypothesisReport& report) { return report_to_json(report).dump(2) + "\n"; }

std::string report_table(const HypothesisReport& report) {
  std::size_t width = 0;
  for (const auto& c : report.conditions) width = std::max(width, c.name.size());
  std::ostringstream os;
  for (const auto& c : report.conditions) {
    os << (c.holds ? "  ok    " : "  FAIL  ") << c.name;
    if (!c.diagnostic.empty()) os << std::string(width - c.name.size() + 2, ' ') << c.diagnostic;
    os << "\n";
  }
  for (const auto& t : report.theorems) os << t.name << ": " << (t.holds ? "hypotheses hold" : "not established") << "\n";
  os << "predicted: " << to_string(report.predicted) << "\n";
  for (const auto& n : report.notes) os << "note: " << n << "\n";
  return os.str();
}

int cmd_check(const std::string& config_path, const Overrides& o, bool json, std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg;
  HypothesisReport report;
  try {
    std::string text;
    cfg = load_with(config_path, o, text);
    report = check_config(cfg);
  } catch (const Error& e) {
    return input_error(err, e);
  }
  out << (json ? report_json(report) : report_table(report));
  return theorem_holds(report, cfg.theorem) ? kExitPass : kExitHypothesisFailure;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, const Overrides& o, std::ostream& out,
                 std::ostream& err) {
  std::string text;
  ScenarioConfig cfg;
  std::optional<System> sys;
  Eigen::VectorXd x0;
  HypothesisReport report;
  try {
    cfg = load_with(config_path, o, text);
    sys.emplace(build_system(cfg));
    x0 = build_initial_state(cfg);
    report = check_config(cfg);
    fs::create_directories(out_dir);
  } catch (const Error& e) {
    return input_error(err, e);
  } catch (const fs::filesystem_error& e) {
    return input_error(err, e);
  }
  const fs::path dir(out_dir);
  Json metrics = provenance(text, cfg);
  metrics["norm"] = "l1";
  metrics["theorem"] = cfg.theorem;
  metrics["horizon"] = cfg.horizon;
  metrics["hypotheses"] = report_to_json(report);

  Trajectory traj;
  try {
    traj = simulate(*sys, x0, cfg.horizon);
  } catch (const DivergenceError& e) {
    write_text(dir / "trajectory.csv", trajectory_csv(e.partial()));
    metrics["error"] = {{"kind", "divergence"}, {"time", e.time()}, {"message", e.what()}};
    write_text(dir / "metrics.json", metrics.dump(2) + "\n");
    err << "error: " << e.what() << "\n";
    return kExitDivergence;
  }
  const auto& c = sys->clustering();
  const auto limit = try_limit(traj, c, input_period(*sys), periodic_tolerance(cfg, x0));
  const auto rec = reconcile(report, traj, c, limit, {cfg.tolerances.sync, cfg.tolerances.separation});

  write_text(dir / "trajectory.csv", trajectory_csv(traj));
  metrics["intra_diameter_series"] = intra_diameter_series(traj, c);
  if (limit) {
    metrics["periodic_limit"] = {{"period", limit->period}, {"residual", limit->residual},
                                 {"cycles", matrix_json(limit->cycles)}};
    metrics["separation_matrix"] = matrix_json(separation_metric(*limit));
  } else {
    metrics["periodic_limit"] = nullptr;
    metrics["separation_matrix"] = nullptr;
  }
  try {
    metrics["bound_report"] = bound_to_json(boundedness_report(*sys, traj));
  } catch (const ConvergenceError& e) {
    metrics["bound_report"] = {{"applicable", false}, {"note", e.what()}};
  }
  metrics["verdict"] = reconcile_to_json(rec);
  write_text(dir / "metrics.json", metrics.dump(2) + "\n");
  out << "verdict: " << to_string(rec.verdict) << " (" << rec.note << ")\n";
  return kExitPass;
}

ScenarioConfig generate_config(const GenOptions& g) {
  if (g.paper_example) return paper_example_config(*g.paper_example);
  if (g.theorem < 1 || g.theorem > 4) throw InvalidInput("theorem must be 1, 2, 3 or 4");
  GeneratorSpec spec;
  spec.cluster_sizes = g.sizes;
  spec.floor = g.floor.value_or(0.5 / static_cast<double>(spec.n()));
  spec.density = g.density;
  spec.seed = g.seed;
  const bool switching = g.theorem >= 3;
  const auto sys = switching ? gen_switching_system(spec, g.graphs, g.window, g.period)
                             : gen_static_system(spec, g.period);

  ScenarioConfig cfg;
  cfg.seed = g.seed;
  cfg.theorem = g.theorem;
  cfg.horizon = g.horizon;
  cfg.clusters = sys.clustering().clusters();
  if (switching) {
    cfg.topology.kind = TopologyKind::Switching;
    for (const auto& a : sys.coupling().cycle()) cfg.topology.matrices.push_back(a.matrix());
    cfg.topology.window = g.window;
    cfg.topology.floor = spec.floor;
  } else {
    cfg.topology.kind = TopologyKind::Matrix;
    cfg.topology.matrices.push_back(sys.fixed_coupling().matrix());
  }
  cfg.signal.free_values = sys.signal().periodic()->free_values();
  cfg.signal.alphas = sys.offsets().alphas();
  return cfg;
}

int cmd_gen(const GenOptions& g, const std::string& out_path, std::ostream& out, std::ostream& err) {
  std::string text;
  try {
    text = emit_config(generate_config(g));
  } catch (const Error& e) {
    return input_error(err, e);
  }
  if (out_path.empty()) {
    out << text;
    return kExitPass;
  }
  try {
    write_text(out_path, text);
  } catch (const Error& e) {
    return input_error(err, e);
  }
  return kExitPass;
}

int cmd_learn(const std::string& config_path, const std::string& out_dir, const Overrides& o,
              std::optional<double> strength, std::ostream& out, std::ostream& err) {
  std::string text;
  ScenarioConfig cfg;
  std::optional<LearningSetup> setup;
  try {
    cfg = load_with(config_path, o, text);
    if (strength && cfg.learning) {
      cfg.learning->strength = *strength;
      CulturalFlags(cfg.learning->flags, *strength);
    }
    setup.emplace(build_learning(cfg));
    fs::create_directories(out_dir);
  } catch (const Error& e) {
    return input_error(err, e);
  } catch (const fs::filesystem_error& e) {
    return input_error(err, e);
  }
  const fs::path dir(out_dir);
  Json validity = provenance(text, cfg);
  validity["strength"] = setup->flags.strength();
  validity["pair"] = {setup->pair.first + 1, setup->pair.second + 1};
  validity["state"] = setup->zeta_state + 1;

  LearningRun run;
  try {
    run = learn_simulate(*setup);
  } catch (const BeliefRangeError& e) {
    validity["valid"] = false;
    validity["error"] = {{"kind", "belief_range"}, {"time", e.time()}, {"strength", e.strength()},
                         {"message", e.what()}};
    write_text(dir / "validity.json", validity.dump(2) + "\n");
    err << "error: " << e.what() << "\n";
    return kExitValidityViolation;
  }

  std::string beliefs = "t,agent,state,belief\n";
  const auto states = run.per_state.size();
  for (std::size_t t = 0; t < run.zeta.size(); ++t) {
    for (std::size_t i = 0; i < setup->clustering.size(); ++i) {
      for (std::size_t s = 0; s < states; ++s) {
        beliefs += std::to_string(t) + "," + std::to_string(i + 1) + "," + std::to_string(s + 1) + "," +
                   g17(run.per_state[s].states[t](static_cast<Eigen::Index>(i))) + "\n";
      }
    }
  }
  std::string zeta = "t,zeta\n";
  for (std::size_t t = 0; t < run.zeta.size(); ++t) zeta += std::to_string(t) + "," + g17(run.zeta[t]) + "\n";
  write_text(dir / "beliefs.csv", beliefs);
  write_text(dir / "zeta.csv", zeta);

  // Tail: the last quarter of the run.
  const std::size_t tail_start = run.zeta.size() - std::max<std::size_t>(1, run.zeta.size() / 4);
  const double tail_min = *std::min_element(run.zeta.begin() + static_cast<std::ptrdiff_t>(tail_start), run.zeta.end());
  const double tail_max = *std::max_element(run.zeta.begin() + static_cast<std::ptrdiff_t>(tail_start), run.zeta.end());
  validity["valid"] = true;
  validity["max_sum_deviation"] = run.validity.max_sum_deviation;
  validity["min_belief"] = run.validity.min_belief;
  validity["max_belief"] = run.validity.max_belief;
  validity["zeta_tail_min"] = tail_min;
  validity["zeta_tail_max"] = tail_max;
  write_text(dir / "validity.json", validity.dump(2) + "\n");
  out << "zeta tail in [" << g17(tail_min) << ", " << g17(tail_max) << "]\n";
  return kExitPass;
}

double EnsembleSummary::degenerate_rate() const {
  return total() == 0 ? 0.0 : static_cast<double>(degenerate) / static_cast<double>(total());
}

std::size_t worker_threads(std::size_t requested) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CC_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = static_cast<std::size_t>(v);
  }
  return requested > 0 ? std::min(n, requested) : n;
}

EnsembleSummary run_ensemble(const EnsembleOptions& opt) {
  if (opt.max_agents < 2) throw InvalidInput("ensemble needs room for at least two agents");
  EnsembleSummary summary;
  summary.verdicts.assign(opt.count, Verdict::Fail);

  auto run_one = [&](std::size_t i) {
    Rng rng = Rng(opt.seed).fork(i);
    const std::size_t max_k = std::min<std::size_t>(4, opt.max_agents);
    const std::size_t k = 2 + rng.index(max_k - 1);
    const std::size_t max_size = std::max<std::size_t>(1, std::min<std::size_t>(3, opt.max_agents / k));
    GeneratorSpec spec;
    for (std::size_t p = 0; p < k; ++p) spec.cluster_sizes.push_back(1 + rng.index(max_size));
    spec.floor = 0.5 / static_cast<double>(spec.n());
    spec.density = rng.uniform(0.1, 0.6);
    spec.seed = rng.next();
    const std::size_t period = 2 + rng.index(3);
    const auto sys = gen_static_system(spec, period);
    const auto x0 = gen_initial_state(spec.n(), rng.next());
    const auto report = check_theorem_static_consensus(sys);
    return observe(sys, report, x0, 2000, opt.max_horizon, opt.thresholds).record.verdict;
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < opt.count; i = next++) summary.verdicts[i] = run_one(i);
  };
  const auto threads = std::min(worker_threads(opt.threads), std::max<std::size_t>(1, opt.count));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (auto v : summary.verdicts) {
    switch (v) {
      case Verdict::Pass: ++summary.pass; break;
      case Verdict::PassVacuous: ++summary.pass_vacuous; break;
      case Verdict::Degenerate: ++summary.degenerate; break;
      case Verdict::Fail: ++summary.fail; break;
    }
  }
  return summary;
}

int cmd_report(const std::string& config_path, const Overrides& o, std::size_t ensemble, double max_degenerate,
               std::ostream& out, std::ostream& err) {
  if (ensemble > 0) {
    EnsembleOptions opt;
    opt.count = ensemble;
    if (o.seed) opt.seed = *o.seed;
    if (!config_path.empty()) {
      try {
        std::string text;
        const auto cfg = load_with(config_path, o, text);
        if (cfg.seed) opt.seed = *cfg.seed;
        opt.thresholds = {cfg.tolerances.sync, cfg.tolerances.separation};
      } catch (const Error& e) {
        return input_error(err, e);
      }
    }
    const auto s = run_ensemble(opt);
    out << "instances: " << s.total() << "\n"
        << "PASS: " << s.pass << "\n"
        << "PASS_VACUOUS: " << s.pass_vacuous << "\n"
        << "DEGENERATE: " << s.degenerate << " (rate " << s.degenerate_rate() << ")\n"
        << "FAIL: " << s.fail << "\n";
    return s.fail == 0 && s.degenerate_rate() <= max_degenerate ? kExitPass : kExitHypothesisFailure;
  }

  std::string text;
  ScenarioConfig cfg;
  try {
    cfg = load_with(config_path, o, text);
    const auto sys = build_system(cfg);
    const auto x0 = build_initial_state(cfg);
    const auto report = check_config(cfg);
    const auto traj = simulate(sys, x0, cfg.horizon);
    const auto limit = try_limit(traj, sys.clustering(), input_period(sys), periodic_tolerance(cfg, x0));
    const auto rec = reconcile(report, traj, sys.clustering(), limit, {cfg.tolerances.sync, cfg.tolerances.separation});
    out << "config: " << config_path << " (hash " << config_hash(text) << ")\n";
    out << report_table(report);
    out << "final intra diameter: " << g17(rec.final_diameter) << " (threshold " << g17(rec.sync_threshold) << ")\n";
    if (rec.min_separation) out << "min separation: " << g17(*rec.min_separation) << "\n";
    out << "verdict: " << to_string(rec.verdict) << " (" << rec.note << ")\n";
    return rec.verdict == Verdict::Fail ? kExitHypothesisFailure : kExitPass;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const Error& e) {
    return input_error(err, e);
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cluster consensus lab: check, simulate and generate clustered multi-agent scenarios"};
  app.require_subcommand(1);

  std::string config;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> horizon;
  std::optional<int> theorem;
  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config, "Scenario config (JSON)");
    if (needs_config) opt->required();
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--horizon", horizon, "Override the horizon");
    sub->add_option("--theorem", theorem, "Override the theorem (1-4)");
  };

  auto* check = app.add_subcommand("check", "Check the hypotheses of the config's theorem");
  common(check, true);
  bool json = false;
  check->add_flag("--json", json, "Print the report as JSON");

  auto* sim = app.add_subcommand("simulate", "Simulate and write trajectory.csv and metrics.json");
  common(sim, true);
  sim->add_option("--out", out_path, "Output directory")->required();

  GenOptions gen_opts;
  std::string paper_example;
  std::optional<double> floor;
  auto* gen = app.add_subcommand("gen", "Generate a scenario config");
  gen->add_option("--paper-example", paper_example, "Published example A or B")->check(CLI::IsMember({"A", "B"}));
  gen->add_option("--out", out_path, "Output file (stdout when omitted)");
  gen->add_option("--seed", gen_opts.seed, "Generator seed");
  gen->add_option("--theorem", gen_opts.theorem, "1, 2 static; 3, 4 switching");
  gen->add_option("--sizes", gen_opts.sizes, "Cluster sizes")->delimiter(',');
  gen->add_option("--floor", floor, "Entry floor e (default 0.5/n)");
  gen->add_option("--density", gen_opts.density, "Optional edge probability");
  gen->add_option("--period", gen_opts.period, "Input period T");
  gen->add_option("--horizon", gen_opts.horizon, "Horizon written to the config");
  gen->add_option("--graphs", gen_opts.graphs, "Switching graph count");
  gen->add_option("--window", gen_opts.window, "Switching window L");

  auto* learn = app.add_subcommand("learn", "Run the social-learning model");
  common(learn, true);
  learn->add_option("--out", out_path, "Output directory")->required();
  std::optional<double> strength;
  learn->add_option("--strength", strength, "Override the flag strength c");

  auto* report = app.add_subcommand("report", "Summarize a run, or reconcile a random ensemble");
  common(report, false);
  std::size_t ensemble = 0;
  double max_degenerate = 0.01;
  report->add_option("--ensemble", ensemble, "Number of random consensus instances");
  report->add_option("--max-degenerate", max_degenerate, "Largest acceptable DEGENERATE rate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitPass : kExitInputError;
  }

  const Overrides o{seed, horizon, theorem};
  if (check->parsed()) return cmd_check(config, o, json, out, err);
  if (sim->parsed()) return cmd_simulate(config, out_path, o, out, err);
  if (learn->parsed()) return cmd_learn(config, out_path, o, strength, out, err);
  if (report->parsed()) {
    if (config.empty() && ensemble == 0) {
      err << "error: report needs --config or --ensemble\n";
      return kExitInputError;
    }
    return cmd_report(config, o, ensemble, max_degenerate, out, err);
  }
  if (!paper_example.empty()) gen_opts.paper_example = paper_example.front();
  gen_opts.floor = floor;
  return cmd_gen(gen_opts, out_path, out, err);
}

}  // namespace cclab
