#include "cclab/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cclab {

namespace {

constexpr double kQuotientTol = 1e-9;

std::string label(std::size_t zero_based) { return std::to_string(zero_based + 1); }

Condition spanning_trees_condition(const DirectedGraph& g, const Clustering& c, const std::string& name) {
  for (std::size_t p = 0; p < c.cluster_count(); ++p) {
    bool rooted = false;
    for (Vertex v = 0; v < g.size() && !rooted; ++v) rooted = is_cluster_root(g, c, p, v);
    if (!rooted) return {name, false, "cluster " + label(p) + " has no root reaching all its members"};
  }
  return {name, true, {}};
}

Condition common_influence_condition(const StochasticMatrix& a, const Clustering& c, const std::string& name) {
  if (has_common_influence(a, c)) return {name, true, {}};
  std::ostringstream os;
  os << "block row sums differ by " << common_influence_defect(a, c);
  return {name, false, os.str()};
}

Condition positive_diagonal_condition(const StochasticMatrix& a, const std::string& name) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a(i, i) > 0.0)) return {name, false, "agent " + label(i) + " has a zero diagonal entry"};
  return {name, true, {}};
}

Condition common_link_condition(const DirectedGraph& g, const Clustering& c, const std::string& name) {
  if (auto bad = common_link_violation(g, c)) {
    return {name, false,
            "links from cluster " + label(bad->second) + " reach only part of cluster " + label(bad->first)};
  }
  return {name, true, {}};
}

Condition bounded_input_condition(const InputSignal& sig) {
  if (partial_sums_look_bounded(sig, kInputProbeHorizon)) return {"bounded_input", true, {}};
  return {"bounded_input", false, "partial sums of u grow over the probe horizon"};
}

Condition zero_sum_input_condition(const InputSignal& sig) {
  const std::string name = "periodic_zero_sum_input";
  const auto* p = sig.periodic();
  if (!p) return {name, false, "input is not periodic"};
  if (p->period() < 2) return {name, false, "period 1 forces u = 0, leaving nothing to separate clusters"};
  return {name, true, {}};
}

void add_theorem(HypothesisReport& r, std::string name, std::vector<std::string> needs) {
  bool holds = true;
  for (const auto& n : needs) {
    const auto* c = r.condition(n);
    holds = holds && c && c->holds;
  }
  r.theorems.push_back({std::move(name), std::move(needs), holds});
}

// Cross-cluster block support: which (p, q), p != q, carry links at all.
std::vector<bool> cross_support(const DirectedGraph& g, const Clustering& c) {
  const auto k = c.cluster_count();
  std::vector<bool> support(k * k, false);
  for (Vertex j = 0; j < g.size(); ++j)
    for (Vertex i : g.out_neighbors(j))
      if (c.cluster_of(i) != c.cluster_of(j)) support[c.cluster_of(i) * k + c.cluster_of(j)] = true;
  return support;
}

}  // namespace

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::IntraSync: return "intra-sync";
    case Outcome::ClusterConsensus: return "cluster-consensus";
    case Outcome::NoGuarantee: return "no-guarantee";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::PassVacuous: return "PASS_VACUOUS";
    case Verdict::Degenerate: return "DEGENERATE";
    case Verdict::Fail: return "FAIL";
  }
  return "?";
}

const Condition* HypothesisReport::condition(const std::string& name) const {
  auto it = std::find_if(conditions.begin(), conditions.end(), [&](const Condition& c) { return c.name == name; });
  return it == conditions.end() ? nullptr : &*it;
}

const TheoremVerdict* HypothesisReport::theorem(const std::string& name) const {
  auto it = std::find_if(theorems.begin(), theorems.end(), [&](const TheoremVerdict& t) { return t.name == name; });
  return it == theorems.end() ? nullptr : &*it;
}

bool HypothesisReport::holds() const {
  return std::all_of(theorems.begin(), theorems.end(), [](const TheoremVerdict& t) { return t.holds; });
}

std::vector<const Condition*> HypothesisReport::failures() const {
  std::vector<const Condition*> out;
  for (const auto& c : conditions)
    if (!c.holds) out.push_back(&c);
  return out;
}

HypothesisReport check_theorem_static_sync(const System& sys) {
  const auto& a = sys.fixed_coupling();
  const auto& c = sys.clustering();
  const auto g = graph_of_matrix(a);
  HypothesisReport r;
  r.conditions.push_back(bounded_input_condition(sys.signal()));
  r.conditions.push_back(common_influence_condition(a, c, "common_influence"));
  r.conditions.push_back(spanning_trees_condition(g, c, "cluster_spanning_trees"));
  r.conditions.push_back(positive_diagonal_condition(a, "positive_diagonal"));
  add_theorem(r, "theorem_1", {"bounded_input", "common_influence", "cluster_spanning_trees", "positive_diagonal"});
  r.predicted = r.holds() ? Outcome::IntraSync : Outcome::NoGuarantee;
  return r;
}

HypothesisReport check_theorem_static_consensus(const System& sys) {
  const auto& a = sys.fixed_coupling();
  const auto& c = sys.clustering();
  const auto g = graph_of_matrix(a);
  HypothesisReport r;
  r.conditions.push_back(positive_diagonal_condition(a, "self_links"));
  r.conditions.push_back(common_link_condition(g, c, "common_link_property"));
  r.conditions.push_back(spanning_trees_condition(g, c, "cluster_spanning_trees"));
  r.conditions.push_back(common_influence_condition(a, c, "common_influence"));
  r.conditions.push_back(zero_sum_input_condition(sys.signal()));
  add_theorem(r, "theorem_2",
              {"self_links", "common_link_property", "cluster_spanning_trees", "common_influence",
               "periodic_zero_sum_input"});
  r.predicted = r.holds() ? Outcome::ClusterConsensus : Outcome::NoGuarantee;
  return r;
}

HypothesisReport check_switching(const System& sys, std::size_t window, double floor) {
  const auto& schedule = sys.coupling();
  const auto period = schedule.period();
  if (!period) throw InvalidInput("switching checks need a periodic schedule");
  if (window == 0) throw InvalidInput("window length must be positive");
  if (!(floor > 0.0)) throw InvalidInput("entry floor must be positive");
  const auto& c = sys.clustering();
  const auto& cycle = schedule.cycle();

  std::vector<DirectedGraph> graphs;
  for (const auto& a : cycle) graphs.push_back(graph_of_matrix(a));

  HypothesisReport r;

  Condition prop_a{"property_a", true, {}};
  const auto support = cross_support(graphs.front(), c);
  for (std::size_t l = 0; l < graphs.size() && prop_a.holds; ++l) {
    auto link = common_link_condition(graphs[l], c, prop_a.name);
    if (!link.holds) {
      prop_a = link;
      prop_a.diagnostic = "graph " + label(l) + ": " + prop_a.diagnostic;
    } else if (cross_support(graphs[l], c) != support) {
      prop_a = {prop_a.name, false, "graph " + label(l) + " links a different set of cluster pairs than graph 1"};
    }
  }
  r.conditions.push_back(prop_a);

  Condition b1{"entry_floor", true, {}};
  Condition b2{"diagonal_floor", true, {}};
  for (std::size_t l = 0; l < cycle.size(); ++l) {
    const auto& a = cycle[l];
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (b2.holds && a(i, i) < floor) {
        b2 = {b2.name, false, "graph " + label(l) + ", agent " + label(i) + ": diagonal below e"};
      }
      for (std::size_t j = 0; j < a.size() && b1.holds; ++j) {
        const double v = a(i, j);
        if (v > kDefaultZeroTol && v < floor) {
          b1 = {b1.name, false,
                "graph " + label(l) + ", entry (" + label(i) + "," + label(j) + ") is positive but below e"};
        }
      }
    }
  }
  r.conditions.push_back(b1);
  r.conditions.push_back(b2);

  Condition b3{"common_influence", true, {}};
  for (std::size_t l = 0; l < cycle.size() && b3.holds; ++l) {
    auto ci = common_influence_condition(cycle[l], c, b3.name);
    if (!ci.holds) b3 = {b3.name, false, "graph " + label(l) + ": " + ci.diagnostic};
  }
  r.conditions.push_back(b3);

  Condition b3s{"static_quotient", b3.holds, b3.holds ? std::string{} : "no quotient without common influence"};
  if (b3.holds) {
    const auto first = quotient_matrix(cycle.front(), c).matrix();
    for (std::size_t l = 1; l < cycle.size() && b3s.holds; ++l) {
      const double gap = (quotient_matrix(cycle[l], c).matrix() - first).cwiseAbs().maxCoeff();
      if (gap > kQuotientTol) {
        std::ostringstream os;
        os << "quotient of graph " << label(l) << " differs from graph 1 by " << gap;
        b3s = {b3s.name, false, os.str()};
      }
    }
  }
  r.conditions.push_back(b3s);

  Condition windows{"window_spanning_trees", true, {}};
  for (std::size_t s = 0; s < *period && windows.holds; ++s) {
    std::vector<DirectedGraph> span;
    for (std::size_t t = s; t < s + window; ++t) span.push_back(graphs[t % graphs.size()]);
    auto cond = spanning_trees_condition(union_graph(span), c, windows.name);
    if (!cond.holds) {
      windows = {windows.name, false,
                 "window starting at t=" + std::to_string(s) + ": " + cond.diagnostic};
    }
  }
  r.conditions.push_back(windows);

  r.conditions.push_back(bounded_input_condition(sys.signal()));
  r.conditions.push_back(zero_sum_input_condition(sys.signal()));

  const std::vector<std::string> base{"property_a", "entry_floor", "diagonal_floor"};
  auto with = [&](std::initializer_list<std::string> extra) {
    auto v = base;
    v.insert(v.end(), extra);
    return v;
  };
  add_theorem(r, "theorem_3", with({"common_influence", "window_spanning_trees"}));
  add_theorem(r, "theorem_4_boundedness", with({"static_quotient", "window_spanning_trees", "bounded_input"}));
  add_theorem(r, "theorem_4_consensus",
              with({"static_quotient", "window_spanning_trees", "bounded_input", "periodic_zero_sum_input"}));

  r.notes.push_back(
      "zero sum is checked over whole periods u(0) + ... + u(T-1); requiring u(1) + ... + u(T-1) = 0 as well "
      "would force u(0) = 0");
  if (r.theorem("theorem_4_consensus")->holds) {
    r.predicted = Outcome::ClusterConsensus;
  } else if (r.theorem("theorem_3")->holds) {
    r.predicted = Outcome::IntraSync;
  }
  return r;
}

HypothesisReport check_theorem(const System& sys, int theorem, std::size_t window, double floor) {
  switch (theorem) {
    case 1: return check_theorem_static_sync(sys);
    case 2: return check_theorem_static_consensus(sys);
    case 3:
    case 4: return check_switching(sys, window, floor);
    default: throw InvalidInput("theorem must be 1, 2, 3 or 4; got " + std::to_string(theorem));
  }
}

ReconcileRecord reconcile(const HypothesisReport& report, const Trajectory& traj, const Clustering& c,
                          const std::optional<PeriodicLimit>& limit, const ReconcileThresholds& th) {
  if (traj.states.empty()) throw InvalidInput("empty trajectory");
  ReconcileRecord rec{Verdict::Fail, report.predicted, false, 0.0, 0.0, std::nullopt, {}};
  rec.final_diameter = state_diameter(traj.states.back(), c);
  rec.sync_threshold = th.sync * (1.0 + traj.states.front().cwiseAbs().maxCoeff());
  rec.synced = rec.final_diameter < rec.sync_threshold;
  if (limit && limit->cycles.rows() > 1) {
    const auto sep = separation_metric(*limit);
    double lo = std::numeric_limits<double>::infinity();
    for (Eigen::Index p = 0; p < sep.rows(); ++p)
      for (Eigen::Index q = 0; q < sep.cols(); ++q)
        if (p != q) lo = std::min(lo, sep(p, q));
    rec.min_separation = lo;
  }

  switch (report.predicted) {
    case Outcome::NoGuarantee:
      rec.verdict = Verdict::PassVacuous;
      rec.note = "hypotheses unmet; the theorems are sufficient conditions only";
      break;
    case Outcome::IntraSync:
      rec.verdict = rec.synced ? Verdict::Pass : Verdict::Fail;
      rec.note = rec.synced ? "intra-cluster sync observed" : "intra-cluster sync predicted but not observed";
      break;
    case Outcome::ClusterConsensus:
      if (!rec.synced) {
        rec.verdict = Verdict::Fail;
        rec.note = "intra-cluster sync predicted but not observed";
      } else if (!limit) {
        rec.verdict = Verdict::Fail;
        rec.note = "no periodic limit detected";
      } else if (rec.min_separation && *rec.min_separation <= th.separation) {
        rec.verdict = Verdict::Degenerate;
        rec.note = "two clusters share a limit; non-generic parameters";
      } else {
        rec.verdict = Verdict::Pass;
        rec.note = "cluster consensus observed";
      }
      break;
  }
  return rec;
}

}  // namespace cclab
