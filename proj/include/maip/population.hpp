#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "maip/common.hpp"

namespace maip {

/// Factored physical state space.  Joint states are indexed row-major over the
/// declared factor order (factor 0 most significant, last factor fastest).
struct StateSpace {
  struct Factor {
    std::string name;
    std::vector<std::string> values;
  };

  std::vector<Factor> factors;

  int num_factors() const { return static_cast<int>(factors.size()); }
  int factor_size(int k) const;
  long long num_states() const;

  /// Row-major index of a joint assignment (one value index per factor).
  int state_index(std::span<const int> values) const;
  /// Value index of factor k in joint state s.
  int value_at(int s, int k) const;
  std::vector<int> state_values(int s) const;

  int factor_index(const std::string& name) const;  // LookupError if unknown
  int value_index(int k, const std::string& value) const;

  ValidationReport validate() const;
};

/// Factored observation space: one component domain per state factor, joint
/// observations indexed row-major over components.  A singleton component
/// means the factor is uninformative for this observer.  Joint observation
/// names are the concatenated component names.
struct ObsSpace {
  std::vector<std::vector<std::string>> components;  // [factor][component value]

  int num_factors() const { return static_cast<int>(components.size()); }
  int component_size(int k) const;
  int joint_size() const;
  int joint_index(std::span<const int> comps) const;
  int component_of(int obs, int k) const;
  std::string joint_name(int obs) const;
  /// Index of a joint observation given its concatenated name; LookupError if
  /// no joint observation has that name.
  int find_joint(const std::string& name) const;

  ValidationReport validate(int expected_factors) const;
};

/// A frame: the public type of an agent (action set, observation space, and
/// the pool of admissible controllers).
struct Frame {
  std::string id;
  std::vector<std::string> actions;
  ObsSpace observations;
  std::vector<std::string> fsc_pool;  // admissible controller ids

  int num_actions() const { return static_cast<int>(actions.size()); }
  int action_index(const std::string& name) const;
};

/// Finite-state controller: per-node action distribution and per
/// (node, action, observation) distribution over successor nodes.
struct Fsc {
  std::string id;
  int frame = -1;  // owning frame index within the domain
  int num_nodes = 0;
  /// action_dist[node][action]
  std::vector<std::vector<double>> action_dist;
  /// node_transition[node][action][obs][next_node]
  std::vector<std::vector<std::vector<std::vector<double>>>> node_transition;

  /// Pr(action | node).  LookupError on an undeclared node.
  std::span<const double> action_distribution(int node) const;
  /// Pr(next node | node, action, observation).  LookupError on bad indices.
  std::span<const double> step_distribution(int node, int action, int obs) const;

  ValidationReport validate(const Frame& frame) const;
};

/// The population of modeled agents: per-agent frame and controller choice.
struct AgentPopulation {
  int n = 0;
  std::vector<int> frame_of;  // size n
  std::vector<int> fsc_of;    // size n, indices into the domain controller list
};

/// Node of a finite-horizon conditional plan.  Interior nodes carry one child
/// per observation of the executing frame (complete branching); leaves have no
/// children.
struct PlanNode {
  int action = -1;
  std::vector<std::unique_ptr<PlanNode>> children;
};

/// Compiles a conditional plan into an equivalent deterministic FSC with one
/// node per plan node.  Throws ValidationError if an interior node does not
/// branch on every observation of `frame`, or an action index is out of range.
Fsc policy_to_fsc(const PlanNode& root, const Frame& frame, int frame_index,
                  std::string id);

/// Structural checks across a population: assignment references, controller
/// shape, and row normalization.  Reports issues; does not throw.
ValidationReport validate_population(const AgentPopulation& pop,
                                     const std::vector<Frame>& frames,
                                     const std::vector<Fsc>& fscs);

}  // namespace maip
