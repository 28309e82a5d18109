#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cclab/dynamics.hpp"
#include "cclab/errors.hpp"
#include "cclab/scenario_gen.hpp"
#include "cclab/social_learning.hpp"

namespace cclab {

/// Malformed or inconsistent scenario document. line() is 1-based, 0 when
/// the location is unknown.
class ConfigError : public InvalidInput {
 public:
  ConfigError(const std::string& what, std::size_t line = 0, std::size_t column = 0);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

inline constexpr const char* kConfigVersion = "cclab/1";

enum class TopologyKind { Matrix, Switching, Graph };

struct TopologyConfig {
  TopologyKind kind = TopologyKind::Matrix;
  /// One matrix for Matrix, the schedule cycle for Switching.
  std::vector<Eigen::MatrixXd> matrices;
  /// Switching: window L and entry floor e used by the checks.
  std::size_t window = 1;
  double floor = 0.0;
  /// Graph: successor lists (0-based in memory), quotient and split rule;
  /// the matrix is realized from the scenario seed.
  std::vector<std::vector<std::size_t>> successors;
  Eigen::MatrixXd quotient;
  SplitMode split = SplitMode::FloorSimplex;

  friend bool operator==(const TopologyConfig&, const TopologyConfig&);
};

struct SignalConfig {
  /// u_1..u_{T-1}; u(0) closes the period to a zero sum.
  std::vector<double> free_values;
  std::vector<double> alphas;
  /// Optional scale c; the offsets used are c * alphas.
  std::optional<double> strength;

  std::vector<double> scaled_alphas() const;

  friend bool operator==(const SignalConfig&, const SignalConfig&) = default;
};

struct Tolerances {
  double sync = 1e-8;
  double separation = 1e-6;
  /// Periodic-limit residual, relative to 1 + ||x(0)||_inf.
  double periodic = 1e-8;

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct LearningConfig {
  /// K x m flags sigma_k(theta).
  Eigen::MatrixXd flags;
  double strength = 0.01;
  /// Clusters compared by zeta and the tracked state, 0-based in memory.
  std::pair<std::size_t, std::size_t> pair{1, 2};
  std::size_t state = 0;

  friend bool operator==(const LearningConfig&, const LearningConfig&);
};

/// Scenario document. Agent, cluster and state labels are 1-based on disk.
struct ScenarioConfig {
  std::string version = kConfigVersion;
  std::optional<std::uint64_t> seed;
  std::vector<std::vector<Vertex>> clusters;
  int theorem = 1;
  std::size_t horizon = 1000;
  std::optional<std::vector<double>> initial_state;
  TopologyConfig topology;
  SignalConfig signal;
  Tolerances tolerances;
  std::optional<LearningConfig> learning;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&);
};

/// Throws ConfigError with the line of the offending token or key.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string emit_config(const ScenarioConfig& cfg);

Clustering build_clustering(const ScenarioConfig& cfg);
MatrixSchedule build_schedule(const ScenarioConfig& cfg);
System build_system(const ScenarioConfig& cfg);
/// The stated initial state, else uniform in [-1, 1] from the seed.
Eigen::VectorXd build_initial_state(const ScenarioConfig& cfg);
/// Needs a learning section; initial beliefs come from the seed.
LearningSetup build_learning(const ScenarioConfig& cfg);

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string config_hash(const std::string& text);

/// Example A (theorem 1) or B (theorem 4) as a self-contained document.
ScenarioConfig paper_example_config(char which);

}  // namespace cclab
