#pragma once

#include <array>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "maip/configuration.hpp"
#include "maip/domain.hpp"

namespace maip {

/// Belief over the interactive state, factored as a distribution over joint
/// physical states plus, per modeled agent and state, a conditional
/// distribution over that agent's controller nodes.  Storage is
/// Θ(|S| + N·|S|·max|M|), linear in the number of agents.
struct FactoredBelief {
  std::vector<double> state_dist;
  /// model_dists[j][s][m] = Pr(agent j's controller is at node m | state s).
  std::vector<std::vector<std::vector<double>>> model_dists;
  /// Per state: nonzero when the model rows at this state are uniform
  /// placeholders written because the state had zero posterior mass.
  std::vector<char> placeholder;

  int num_states() const { return static_cast<int>(state_dist.size()); }
  int num_agents() const { return static_cast<int>(model_dists.size()); }

  /// Number of stored probability entries (structural, allocator-independent).
  std::size_t structural_size() const;

  ValidationReport validate(const Domain& domain) const;

  bool operator==(const FactoredBelief&) const = default;
};

/// Initial belief as declared by the domain.
FactoredBelief make_initial_belief(const Domain& domain);

/// Text snapshot: "s <state> <prob>" lines, then "m <agent> <state> <node>
/// <prob>" lines, in index order.
std::string dump_belief(const FactoredBelief& b);

/// One-step state filtering results for every planner observation under one
/// planner action.
struct StateStep {
  std::vector<double> lik;                     // Pr(obs | b, a0), sums to 1
  std::vector<std::vector<double>> posterior;  // [obs][s'], normalized; empty at lik 0
};

/// Shared interface of the structured (configuration-based) and naive
/// (joint-enumeration) update engines.  Engines are stateful only through
/// internal memoization; updates never mutate their inputs.
class BeliefOps {
 public:
  explicit BeliefOps(const Domain& domain) : domain_(domain) {}
  virtual ~BeliefOps() = default;

  /// Filtering over physical states for all observations at once.
  virtual StateStep state_step(const FactoredBelief& b, int a0) = 0;

  /// Posterior node rows for every agent and successor state: [j][s'][m'].
  /// A row is empty when its raw mass was zero (no consistent explanation).
  virtual std::vector<std::vector<std::vector<double>>> model_rows(
      const FactoredBelief& b, int a0) = 0;

  virtual double expected_reward(const FactoredBelief& b, int a0) = 0;

  /// Largest configuration-trie support built so far (0 for engines that
  /// never build tries).
  virtual std::size_t trie_peak() const { return 0; }

  const Domain& domain() const { return domain_; }

  /// Assembles the successor belief for one branch from a normalized state
  /// posterior and precomputed model rows.  States with zero posterior mass
  /// get uniform placeholder rows; a zero-mass model row at a positive-mass
  /// state raises ZeroEvidenceError.
  FactoredBelief compose(
      const std::vector<double>& posterior,
      const std::vector<std::vector<std::vector<double>>>& rows) const;

 protected:
  const Domain& domain_;
};

/// Configuration-based engine: per-factor expectations over configuration
/// distributions, memoized per (state, context) within an update; when every
/// assigned controller has a single node the caches are belief-independent
/// and persist across updates.
class StructuredOps : public BeliefOps {
 public:
  explicit StructuredOps(const Domain& domain, double prune_eps = 0.0);

  StateStep state_step(const FactoredBelief& b, int a0) override;
  std::vector<std::vector<std::vector<double>>> model_rows(
      const FactoredBelief& b, int a0) override;
  double expected_reward(const FactoredBelief& b, int a0) override;
  std::size_t trie_peak() const override { return peak_; }

 private:
  // Cached expectation rows, keyed (kind, factor, value, action, s, rep, a0).
  using RowKey = std::array<int, 7>;

  void refresh(const FactoredBelief& b);
  const ConfigTrie& trie_all(const FactoredBelief& b, int s, const Neighborhood& nu);
  const ConfigTrie& trie_excl(const FactoredBelief& b, int s, const Neighborhood& nu,
                              int rep, int a0);

  /// Expectation of the transition row over successor values of factor k.
  const std::vector<double>& t_row(const FactoredBelief& b, int s, int k, int x,
                                   int a0);
  /// Expectation of the planner's observation component of factor k, per
  /// joint observation (each joint observation uses its own context).
  const std::vector<double>& o_row(const FactoredBelief& b, int s, int k,
                                   int x_next, int a0);
  /// Same for the observation model of agent `rep`'s frame, with the planner's
  /// action folded into the configuration.
  const std::vector<double>& f_row(const FactoredBelief& b, int s, int rep, int k,
                                   int x_next, int a, int a0);
  double r_val(const FactoredBelief& b, int s, int k, int x, int a0);

  bool trivial_;
  double prune_eps_;
  std::size_t peak_ = 0;
  FactoredBelief cached_for_;
  bool have_cache_key_ = false;
  std::unordered_map<std::string, ConfigTrie> tries_;
  std::map<RowKey, std::vector<double>> rows_;
  std::vector<int> factor_value_;  // [s * K + k] = value of factor k in state s
  Configuration scratch_;
};

/// Joint-enumeration engine: sums over every combination of the modeled
/// agents' nodes and actions.  Exponential in N by construction; per-cell
/// results are memoized within one update.
class NaiveOps : public BeliefOps {
 public:
  /// GuardError when the joint action or joint node space exceeds the guard.
  explicit NaiveOps(const Domain& domain, long long guard = 1'000'000);

  StateStep state_step(const FactoredBelief& b, int a0) override;
  std::vector<std::vector<std::vector<double>>> model_rows(
      const FactoredBelief& b, int a0) override;
  double expected_reward(const FactoredBelief& b, int a0) override;

  /// Posterior node row for one agent at one successor state.
  std::vector<double> model_row(const FactoredBelief& b, int a0, int s_next, int j);

 private:
  using RowKey = std::array<int, 7>;

  void refresh(const FactoredBelief& b);
  const std::vector<double>& t_row(const FactoredBelief& b, int s, int k, int x,
                                   int a0);
  const std::vector<double>& o_row(const FactoredBelief& b, int s, int k,
                                   int x_next, int a0);
  double r_val(const FactoredBelief& b, int s, int k, int x, int a0);

  FactoredBelief cached_for_;
  bool have_cache_key_ = false;
  std::map<RowKey, std::vector<double>> rows_;
  std::vector<int> factor_value_;
};

// --- one-shot operations ----------------------------------------------------

/// Posterior over joint states after acting and observing.  ZeroEvidenceError
/// when the observation has zero likelihood.
std::vector<double> update_state(const FactoredBelief& b, int a0, int obs,
                                 const Domain& domain);

/// Pr(obs | b, a0): the normalizing constant of the state update.
double obs_likelihood(const FactoredBelief& b, int a0, int obs,
                      const Domain& domain);

/// Posterior node rows [j][m'] at one successor state.  ZeroEvidenceError if
/// some agent's row has zero mass.
std::vector<std::vector<double>> update_models(const FactoredBelief& b, int a0,
                                               int s_next, const Domain& domain);

/// Full successor belief for one (action, observation) branch.
FactoredBelief belief_update(const FactoredBelief& b, int a0, int obs,
                             const Domain& domain);

/// Joint-enumeration counterparts (oracles for the structured engine).
std::vector<double> naive_update_state(const FactoredBelief& b, int a0, int obs,
                                       const Domain& domain);
std::vector<double> naive_update_model(const FactoredBelief& b, int a0, int s_next,
                                       int j, const Domain& domain);
FactoredBelief naive_belief_update(const FactoredBelief& b, int a0, int obs,
                                   const Domain& domain);
double naive_expected_reward(const FactoredBelief& b, int a0, const Domain& domain);

}  // namespace maip
