#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cclab/config.hpp"
#include "cclab/verifier.hpp"

namespace cclab {

enum ExitCode : int {
  kExitPass = 0,
  kExitInputError = 1,
  kExitHypothesisFailure = 2,
  kExitDivergence = 3,
  kExitValidityViolation = 4,
};

/// Command-line values that replace the config's own.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> horizon;
  std::optional<int> theorem;
};

void apply_overrides(ScenarioConfig& cfg, const Overrides& o);

/// Checks the hypotheses of the config's theorem; the window and floor come
/// from a switching topology, otherwise 1 and the smallest positive entry.
HypothesisReport check_config(const ScenarioConfig& cfg);

/// Whether the report backs the given theorem (4 needs both of its parts).
bool theorem_holds(const HypothesisReport& report, int theorem);

std::string report_json(const HypothesisReport& report);
/// Plain-text table, one line per condition.
std::string report_table(const HypothesisReport& report);

int cmd_check(const std::string& config_path, const Overrides& o, bool json, std::ostream& out, std::ostream& err);

/// Writes trajectory.csv and metrics.json under out_dir.
int cmd_simulate(const std::string& config_path, const std::string& out_dir, const Overrides& o,
                 std::ostream& out, std::ostream& err);

struct GenOptions {
  /// 'A' or 'B'; random generation when empty.
  std::optional<char> paper_example;
  std::vector<std::size_t> sizes{3, 3, 3};
  std::optional<double> floor;
  double density = 0.3;
  std::uint64_t seed = 1;
  int theorem = 2;
  std::size_t period = 2;
  std::size_t horizon = 2000;
  /// Switching (theorems 3 and 4): graph count and window.
  std::size_t graphs = 3;
  std::size_t window = 3;
};

/// Builds the config gen would emit.
ScenarioConfig generate_config(const GenOptions& g);

/// Writes the config to out_path, or to out when out_path is empty.
int cmd_gen(const GenOptions& g, const std::string& out_path, std::ostream& out, std::ostream& err);

/// Writes beliefs.csv, zeta.csv and validity.json under out_dir.
int cmd_learn(const std::string& config_path, const std::string& out_dir, const Overrides& o,
              std::optional<double> strength, std::ostream& out, std::ostream& err);

struct EnsembleOptions {
  std::size_t count = 500;
  std::uint64_t seed = 1;
  std::size_t max_agents = 12;
  /// Runs are extended by doubling until the outcome is observed or this cap.
  std::size_t max_horizon = 64000;
  std::size_t threads = 0;
  ReconcileThresholds thresholds;
};

struct EnsembleSummary {
  std::size_t pass = 0;
  std::size_t pass_vacuous = 0;
  std::size_t degenerate = 0;
  std::size_t fail = 0;
  std::vector<Verdict> verdicts;

  std::size_t total() const { return pass + pass_vacuous + degenerate + fail; }
  double degenerate_rate() const;
};

/// Random static consensus-compliant instances reconciled against simulation.
EnsembleSummary run_ensemble(const EnsembleOptions& opt);

/// Worker count: CC_LAB_THREADS when set, else the hardware count, capped by
/// `requested` when nonzero.
std::size_t worker_threads(std::size_t requested);

/// Single run summary, or an ensemble when ensemble > 0.
int cmd_report(const std::string& config_path, const Overrides& o, std::size_t ensemble, double max_degenerate,
               std::ostream& out, std::ostream& err);

/// Parses argv and dispatches; returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cclab
