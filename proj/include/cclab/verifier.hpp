#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cclab/dynamics.hpp"

namespace cclab {

struct Condition {
  std::string name;
  bool holds;
  /// Names the failing cluster, vertex or window; empty on success.
  std::string diagnostic;
};

struct TheoremVerdict {
  std::string name;
  /// Names of the conditions this theorem needs, all present in the report.
  std::vector<std::string> needs;
  bool holds;
};

enum class Outcome { IntraSync, ClusterConsensus, NoGuarantee };

std::string to_string(Outcome o);

struct HypothesisReport {
  std::vector<Condition> conditions;
  std::vector<TheoremVerdict> theorems;
  Outcome predicted = Outcome::NoGuarantee;
  /// Interpretation notes that do not change any verdict.
  std::vector<std::string> notes;

  const Condition* condition(const std::string& name) const;
  const TheoremVerdict* theorem(const std::string& name) const;
  /// Every theorem verdict holds.
  bool holds() const;
  /// Conditions that failed, in report order.
  std::vector<const Condition*> failures() const;
};

/// Horizon used to judge general (non-periodic) inputs empirically.
inline constexpr std::size_t kInputProbeHorizon = 4096;

/// Hypotheses of the static synchronization theorem: bounded input and
/// partial sums, common influence, cluster spanning trees, positive diagonal.
/// Throws InvalidInput for a switching coupling.
HypothesisReport check_theorem_static_sync(const System& sys);

/// Hypotheses of the static cluster-consensus theorem: self-links, the
/// common-link property, cluster spanning trees, common influence (needed for
/// the quotient to exist) and a periodic zero-sum input with T >= 2.
HypothesisReport check_theorem_static_consensus(const System& sys);

/// Switching hypotheses over one schedule period: property A, entry floor e
/// (B1), diagonal floor (B2), common influence per matrix (B3), one static
/// quotient (B3*), spanning trees in every window union of length `window`,
/// plus the two input conditions. Needs a periodic schedule.
HypothesisReport check_switching(const System& sys, std::size_t window, double floor);

/// Dispatches on theorem number 1..4; 3 and 4 use check_switching.
HypothesisReport check_theorem(const System& sys, int theorem, std::size_t window, double floor);

enum class Verdict { Pass, PassVacuous, Degenerate, Fail };

std::string to_string(Verdict v);

struct ReconcileThresholds {
  /// Sync when Delta_C(x(horizon)) < sync * (1 + ||x(0)||_inf).
  double sync = 1e-8;
  /// Separation entries at or below this count as coinciding limits.
  double separation = 1e-6;
};

struct ReconcileRecord {
  Verdict verdict;
  Outcome predicted;
  bool synced;
  double final_diameter;
  double sync_threshold;
  std::optional<double> min_separation;
  std::string note;
};

/// Compares the predicted outcome against the observed run. Predicted
/// consensus without an observed periodic limit is a FAIL.
ReconcileRecord reconcile(const HypothesisReport& report, const Trajectory& traj, const Clustering& c,
                          const std::optional<PeriodicLimit>& limit, const ReconcileThresholds& th = {});

}  // namespace cclab
