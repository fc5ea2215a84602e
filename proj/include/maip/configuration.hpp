#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maip/common.hpp"
#include "maip/hypergraph.hpp"
#include "maip/population.hpp"

namespace maip {

/// Count vector over a neighborhood's slots; the dummy slot is last.  The
/// counts sum to the number of agents covered.
struct Configuration {
  std::vector<int> counts;

  int sum() const {
    int t = 0;
    for (int c : counts) t += c;
    return t;
  }
  bool operator==(const Configuration&) const = default;
};

/// Sparse map from configurations to probabilities, stored as a trie keyed
/// digit-by-digit on the counts (most significant slot first, dummy slot
/// last).  Element access walks one trie level per slot.  Iteration is
/// depth-first over sorted children, i.e. ascending lexicographic key order,
/// which makes sums and dumps reproducible.
class ConfigTrie {
 public:
  explicit ConfigTrie(int key_length);

  int key_length() const { return key_length_; }
  std::size_t size() const { return values_.size(); }

  /// Adds p to the entry at `key`, creating it if absent.
  void add(std::span<const int> key, double p);

  /// Stored probability, or nullopt if the configuration is absent.
  std::optional<double> find(std::span<const int> key) const;

  /// Depth-first visit in canonical order: f(key, probability).
  template <typename F>
  void for_each(F&& f) const {
    std::vector<int> key(static_cast<std::size_t>(key_length_));
    walk(0, 0, key, f);
  }

  double total() const;
  std::vector<std::pair<Configuration, double>> entries() const;

  /// Copy without entries below `eps` (support pruning between agent passes).
  ConfigTrie pruned(double eps) const;

 private:
  struct Node {
    // child digit -> node index (interior) or value index (deepest level)
    std::vector<std::pair<int, std::int32_t>> kids;
  };

  template <typename F>
  void walk(std::size_t node, int depth, std::vector<int>& key, F& f) const {
    const bool leaf_level = depth == key_length_ - 1;
    for (const auto& [digit, child] : nodes_[node].kids) {
      key[static_cast<std::size_t>(depth)] = digit;
      if (leaf_level)
        f(std::span<const int>(key), values_[static_cast<std::size_t>(child)]);
      else
        walk(static_cast<std::size_t>(child), depth + 1, key, f);
    }
  }

  int key_length_ = 1;
  std::vector<Node> nodes_;    // nodes_[0] is the root
  std::vector<double> values_;
};

/// Sorted "counts -> probability" text lines for debugging.
std::string dump_trie(const ConfigTrie& trie);

/// Projects a joint action of the counted agents onto a configuration over
/// `nu`: each (action, frame) lands in its slot or the dummy slot.
/// `num_actions[i]` bounds agent i's action index (ValidationError otherwise).
Configuration project(std::span<const int> joint_action,
                      std::span<const int> frames,
                      std::span<const int> num_actions,
                      const Neighborhood& nu);

/// All count vectors over `nu` summing to n_agents, in ascending
/// lexicographic order.  Exactly C(n_agents + |nu|, |nu|) of them.
std::vector<Configuration> enumerate_configs(const Neighborhood& nu, int n_agents);

long long count_configs(const Neighborhood& nu, int n_agents);

/// One agent's contribution to a configuration distribution: its action
/// marginal folded onto neighborhood slots.
struct AgentMixture {
  std::vector<double> slot_weight;  // over nu slots, sums to 1
};

AgentMixture make_mixture(const Neighborhood& nu, int frame,
                          std::span<const double> action_marginal);

/// Exact distribution over configurations induced by independent per-agent
/// mixtures, built one agent at a time through successive tries.  When
/// prune_eps > 0, entries below it are dropped after each agent pass.
/// `peak` (optional) receives the largest intermediate trie size.
ConfigTrie config_distribution_mixtures(const Neighborhood& nu,
                                        std::span<const AgentMixture> agents,
                                        double prune_eps = 0.0,
                                        std::size_t* peak = nullptr);

/// Distribution over configurations of the whole modeled population, with
/// agent j's action drawn from sum_m b(m|s) Pr(a|m).  `cond_beliefs[j]` is the
/// conditional node belief of agent j (must be normalized), `models[j]` its
/// controller, `frames[j]` its frame index.
ConfigTrie config_distribution(const Neighborhood& nu,
                               const std::vector<std::vector<double>>& cond_beliefs,
                               const std::vector<const Fsc*>& models,
                               const std::vector<int>& frames,
                               double prune_eps = 0.0,
                               std::size_t* peak = nullptr);

/// Same, but excluding agent j and then crediting the planning agent's fixed
/// action a0 (slot of (a0, agent 0) or the dummy slot).  Counts sum to the
/// population size: the excluded agent is replaced by the planning agent.
ConfigTrie config_distribution_for_agent_j(
    const Neighborhood& nu,
    const std::vector<std::vector<double>>& cond_beliefs,
    const std::vector<const Fsc*>& models,
    const std::vector<int>& frames,
    int excluded_agent,
    int a0,
    double prune_eps = 0.0,
    std::size_t* peak = nullptr);

/// Copy of a trie with one slot's count incremented in every key.
ConfigTrie shift_slot(const ConfigTrie& trie, int slot);

}  // namespace maip
