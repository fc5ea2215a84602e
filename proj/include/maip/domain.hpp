#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "maip/configuration.hpp"
#include "maip/hypergraph.hpp"
#include "maip/population.hpp"

namespace maip {

/// Evaluates the component functions at configuration-compressed arguments.
/// Transition and reward consume a configuration over the context's
/// neighborhood together with the neighborhood itself (so implementations can
/// interpret slots by their (action, frame) identity).  Observation
/// evaluators return the probability of one observation component of the
/// queried factor.
struct DynamicsModel {
  virtual ~DynamicsModel() = default;

  /// Pr(x_next | x, a0, config) for state factor k.
  virtual double transition(int k, int x, int a0, const Neighborhood& nu,
                            const Configuration& c, int x_next) const = 0;
  /// Pr(component w of the planner's observation | x_next, a0, config), factor k.
  virtual double observation(int k, int x_next, int a0, const Neighborhood& nu,
                             const Configuration& c, int w) const = 0;
  /// Pr(component w of a frame-`frame` agent's observation | x_next, its own
  /// action a, config over the other agents and the planner), factor k.
  virtual double frame_observation(int frame, int k, int x_next, int a,
                                   const Neighborhood& nu, const Configuration& c,
                                   int w) const = 0;
  /// Reward contribution of factor k under (x, a0, config).
  virtual double reward(int k, int x, int a0, const Neighborhood& nu,
                        const Configuration& c) const = 0;

  /// Writes a probability row (over all tail values / observation components)
  /// for one configuration.  Used in tight expectation loops so
  /// implementations can hoist per-context lookups; defaults delegate to the
  /// scalar evaluators.
  using RowFn = std::function<void(const Configuration&, std::span<double>)>;
  using ScalarFn = std::function<double(const Configuration&)>;

  virtual RowFn transition_rows(int k, int x, int a0, const Neighborhood& nu) const;
  virtual RowFn observation_rows(int k, int x_next, int a0,
                                 const Neighborhood& nu) const;
  virtual RowFn frame_observation_rows(int frame, int k, int x_next, int a,
                                       const Neighborhood& nu) const;
  virtual ScalarFn reward_values(int k, int x, int a0, const Neighborhood& nu) const;
};

/// Tabular dynamics: guarded rows selected by weighted-count statistics over
/// neighborhood slots.  This is the serializable representation used by
/// generated and loaded domains.
struct RuleDynamics : DynamicsModel {
  struct StatTerm {
    int frame = 0;  // kAgent0Frame allowed
    int action = 0;
    double weight = 1.0;
  };
  enum class Op { Lt, Ge };
  struct Guard {
    std::vector<StatTerm> stat;
    Op op = Op::Ge;
    double threshold = 0.0;  // fraction of the population size
  };
  /// First rule whose guards all hold supplies the row; a rule with no guards
  /// is a catch-all.
  struct Rule {
    std::vector<Guard> when;
    std::vector<double> row;  // distribution over x_next / observation component,
                              // or a single reward value
  };
  /// Table key: (factor, value, action); action -1 is a wildcard matched when
  /// no exact entry exists.  Frame observation tables additionally key on the
  /// frame (first tuple slot; -2 marks tables that do not use it).
  using Key = std::tuple<int, int, int, int>;

  std::map<Key, std::vector<Rule>> transition_rules;   // (-2, factor, x, a0)
  std::map<Key, std::vector<Rule>> observation_rules;  // (-2, factor, x_next, a0)
  std::map<Key, std::vector<Rule>> frame_obs_rules;    // (frame, factor, x_next, a)
  std::map<Key, std::vector<Rule>> reward_rules;       // (-2, factor, x, a0)
  int population_n = 0;  // denominator for threshold fractions

  double transition(int k, int x, int a0, const Neighborhood& nu,
                    const Configuration& c, int x_next) const override;
  double observation(int k, int x_next, int a0, const Neighborhood& nu,
                     const Configuration& c, int w) const override;
  double frame_observation(int frame, int k, int x_next, int a,
                           const Neighborhood& nu, const Configuration& c,
                           int w) const override;
  double reward(int k, int x, int a0, const Neighborhood& nu,
                const Configuration& c) const override;

  RowFn transition_rows(int k, int x, int a0, const Neighborhood& nu) const override;
  RowFn observation_rows(int k, int x_next, int a0,
                         const Neighborhood& nu) const override;
  RowFn frame_observation_rows(int frame, int k, int x_next, int a,
                               const Neighborhood& nu) const override;
  ScalarFn reward_values(int k, int x, int a0, const Neighborhood& nu) const override;

  const std::vector<Rule>& lookup(const std::map<Key, std::vector<Rule>>& table,
                                  int frame, int factor, int v, int action) const;
  const std::vector<double>& select(const std::vector<Rule>& rules,
                                    const Neighborhood& nu,
                                    const Configuration& c) const;
};

/// Closure-backed dynamics for programmatic (chiefly test) domains.
struct LambdaDynamics : DynamicsModel {
  std::function<double(int, int, int, const Neighborhood&, const Configuration&, int)>
      transition_fn;
  std::function<double(int, int, int, const Neighborhood&, const Configuration&, int)>
      observation_fn;
  std::function<double(int, int, int, int, const Neighborhood&, const Configuration&,
                       int)>
      frame_observation_fn;
  std::function<double(int, int, int, const Neighborhood&, const Configuration&)>
      reward_fn;

  double transition(int k, int x, int a0, const Neighborhood& nu,
                    const Configuration& c, int x_next) const override {
    return transition_fn(k, x, a0, nu, c, x_next);
  }
  double observation(int k, int x_next, int a0, const Neighborhood& nu,
                     const Configuration& c, int w) const override {
    return observation_fn(k, x_next, a0, nu, c, w);
  }
  double frame_observation(int frame, int k, int x_next, int a,
                           const Neighborhood& nu, const Configuration& c,
                           int w) const override {
    return frame_observation_fn(frame, k, x_next, a, nu, c, w);
  }
  double reward(int k, int x, int a0, const Neighborhood& nu,
                const Configuration& c) const override {
    return reward_fn(k, x, a0, nu, c);
  }
};

/// How the initial conditional model beliefs are specified.
struct InitialModelBelief {
  enum class Kind { Uniform, Node0, Explicit };
  Kind kind = Kind::Uniform;
  /// explicit_dists[agent][state][node]; only for Kind::Explicit.
  std::vector<std::vector<std::vector<double>>> explicit_dists;
};

/// A complete planning problem: factored states, the planning agent's action
/// and observation sets, modeled frames with controllers and population
/// assignment, the frame-action hypergraphs of every component function, the
/// dynamics evaluators, and the initial belief.
struct Domain {
  std::string name;

  StateSpace states;
  std::vector<std::string> a0_actions;
  ObsSpace obs0;

  std::vector<Frame> frames;
  std::vector<Fsc> fscs;
  AgentPopulation pop;

  FrameActionHypergraph t_graph{FunctionKind::Transition};
  FrameActionHypergraph o_graph{FunctionKind::Observation};
  FrameActionHypergraph r_graph{FunctionKind::Reward};
  std::vector<FrameActionHypergraph> frame_o_graphs;  // one per frame

  std::shared_ptr<const DynamicsModel> dynamics;

  std::vector<double> initial_state_dist;  // over joint states
  InitialModelBelief initial_models;

  FrameOrder order;  // computed by finalize()

  int num_a0() const { return static_cast<int>(a0_actions.size()); }
  int num_states() const { return static_cast<int>(states.num_states()); }
  int num_frames() const { return static_cast<int>(frames.size()); }
  int a0_index(const std::string& name) const;

  /// True when every controller assigned in the population has one node, in
  /// which case conditional model beliefs are constant point masses.
  bool all_models_trivial() const;

  /// Per-agent frame index / action count / controller views of the population.
  std::vector<int> population_frames() const { return pop.frame_of; }
  std::vector<int> population_action_counts() const;
  std::vector<const Fsc*> population_models() const;

  /// Computes the canonical frame order and freezes all hypergraphs.
  /// Must be called after all fields are populated.
  void finalize();

  ValidationReport validate() const;

  // --- joint-action oracles -------------------------------------------------
  // Evaluate component functions at explicit joint actions of the counted
  // agents by projecting onto the context's neighborhood.  These are the
  // reference semantics for the naive solver and anonymity validation.

  double transition_joint(int k, int x, int a0, int x_next,
                          std::span<const int> actions,
                          std::span<const int> agent_frames,
                          std::span<const int> agent_num_actions) const;
  double observation_joint(int k, int x_next, int a0, int omega,
                           std::span<const int> actions,
                           std::span<const int> agent_frames,
                           std::span<const int> agent_num_actions) const;
  double frame_observation_joint(int frame, int k, int x_next, int a, int omega,
                                 std::span<const int> actions,
                                 std::span<const int> agent_frames,
                                 std::span<const int> agent_num_actions) const;
  double reward_joint(int k, int x, int a0, std::span<const int> actions,
                      std::span<const int> agent_frames,
                      std::span<const int> agent_num_actions) const;
};

/// Anonymity checks over every context of the planner's three component
/// functions, with joint-action oracles over the modeled population.
std::vector<AnonymityCheck> build_anonymity_checks(const Domain& domain, int a0);

}  // namespace maip
