#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "maip/belief.hpp"

namespace maip {

/// Conditional plan produced by a solve: an action per expanded observation
/// history (along the best-action subtree), plus a per-depth fallback chosen
/// by immediate expected reward for histories never expanded (sampling).
struct Policy {
  int horizon = 0;
  std::map<std::vector<int>, int> plan;  // observation-index history -> action
  std::vector<int> default_action;       // per depth 0..horizon-1

  /// Planned action at `history` (falls back per depth).
  int action_for(std::span<const int> history) const;

  /// Lines "default <depth> <action>" then "plan <h1/h2/...> <action>" with
  /// observation names; the empty history prints as "-".
  std::string to_text(const Domain& domain) const;

  bool operator==(const Policy&) const = default;
};

/// One node of the reachability tree.  Branches hold either a retained child
/// or just its backed-up value (children are normally released bottom-up to
/// bound memory by depth).
struct ReachabilityNode {
  struct Branch {
    int obs = -1;
    double weight = 0.0;  // Pr(obs|b,a0) exact, or draw-count/k when sampled
    double child_value = 0.0;
    bool child_valued = false;
    std::unique_ptr<ReachabilityNode> child;
  };
  struct ActionEdge {
    double immediate = 0.0;  // expected reward of this action at the belief
    std::vector<Branch> branches;
  };

  FactoredBelief belief;
  int depth = 0;
  std::vector<ActionEdge> actions;  // per planner action; empty until expanded
  double value = 0.0;
  int best_action = -1;
  bool valued = false;
};

/// Bellman backup at one node: value = max over actions of immediate +
/// gamma * sum of weight * child value; ties break to the lowest action
/// index.  Nodes with no actions (horizon) get value 0.  ValidationError if a
/// branch carries no value.
double backup(ReachabilityNode& node, double gamma);

struct SolveOptions {
  int horizon = 1;
  double gamma = 0.9;
  int samples = 1;           // observation draws per (node, action) when sampling
  bool exhaustive = false;   // sampling solver expands every observation instead
  std::uint64_t seed = 0;
  long long node_guard = 10'000'000;   // max reachability-tree size
  long long naive_guard = 1'000'000;   // max joint action/node space (naive)
  double prune_eps = 0.0;              // configuration-trie support pruning
};

struct SolveResult {
  double value = 0.0;
  Policy policy;
  long long nodes_expanded = 0;
  std::size_t trie_peak = 0;
};

/// Full-width reachability tree with the configuration-based engine.
SolveResult solve_exact(const FactoredBelief& b0, const Domain& domain,
                        const SolveOptions& opt);

/// Observation-sampled tree (k i.i.d. draws per action node, empirical
/// weights); deterministic in the seed.  With `exhaustive` set it runs the
/// same full expansion as solve_exact.
SolveResult solve_sampled(const FactoredBelief& b0, const Domain& domain,
                          const SolveOptions& opt);

/// Full-width tree with the joint-enumeration engine (reference solver).
SolveResult naive_solve(const FactoredBelief& b0, const Domain& domain,
                        const SolveOptions& opt);

}  // namespace maip
