#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "maip/common.hpp"

namespace maip {

struct Configuration;  // configuration.hpp

/// Which component function a hypergraph annotates.
enum class FunctionKind { Transition, Observation, Reward };

std::string to_string(FunctionKind kind);

/// Reserved frame id for the planning agent when it appears as a neighbor in
/// another agent's observation hypergraph.
inline constexpr int kAgent0Frame = -1;

/// An (action, frame) node of a frame-action hypergraph.  `frame` is a frame
/// index within the domain, or kAgent0Frame for the planning agent; `action`
/// indexes that frame's action set.
struct FrameActionPair {
  int frame = 0;
  int action = 0;
  bool operator==(const FrameActionPair&) const = default;
};

/// Canonical ordering rank per frame index (lexicographic by frame id), used
/// to fix configuration-vector layout globally.  The planning agent ranks
/// before every modeled frame.
struct FrameOrder {
  std::vector<int> rank;  // rank[frame index]

  int rank_of(int frame) const {
    if (frame == kAgent0Frame) return -1;
    return rank.at(frame);
  }
};

/// The incident (action, frame) pairs of a context, in canonical order, plus
/// the implicit dummy slot (always last) collecting non-incident actions.
struct Neighborhood {
  std::vector<FrameActionPair> pairs;

  int num_pairs() const { return static_cast<int>(pairs.size()); }
  /// Slots of a configuration vector over this neighborhood: pairs + dummy.
  int num_slots() const { return num_pairs() + 1; }
  int phi_slot() const { return num_pairs(); }
  bool empty() const { return pairs.empty(); }

  /// Slot owning (frame, action); the dummy slot if the pair is not incident.
  int slot_of(int frame, int action) const {
    for (int i = 0; i < num_pairs(); ++i)
      if (pairs[i].frame == frame && pairs[i].action == action) return i;
    return phi_slot();
  }

  /// Stable byte key identifying the neighborhood (memoization).
  std::string key() const;

  /// Sorts pairs canonically and drops duplicates.
  static Neighborhood canonical(std::vector<FrameActionPair> pairs,
                                const FrameOrder& order);
};

/// Expected ranges for context components, used to reject malformed queries.
struct ContextDims {
  std::vector<int> factor_sizes;      // |X_k| per factor
  int num_actions = 0;                // context action set (A_0, or the owning frame's)
  std::vector<int> tail_sizes;        // per factor: |X_k| (transition), |Omega| (observation), 1 (reward)
};

/// A 3-uniform hypergraph connecting function contexts to the (action, frame)
/// pairs the function is sensitive to.  Context payloads are per state factor:
///   transition   (factor, x_k, a, x_k')
///   observation  (factor, x_k', a, omega)
///   reward       (factor, x_k, a)        -- tail component unused
class FrameActionHypergraph {
 public:
  struct Edge {
    int factor = 0;
    int v = 0;     // x_k (transition, reward) or x_k' (observation)
    int action = 0;
    int tail = 0;  // x_k' (transition), omega (observation), 0 (reward)
    FrameActionPair pair;
  };

  FrameActionHypergraph() = default;
  explicit FrameActionHypergraph(FunctionKind kind) : kind_(kind) {}

  FunctionKind kind() const { return kind_; }

  void add_edge(int factor, int v, int action, int tail, FrameActionPair pair);

  /// Validates component ranges, sorts neighborhoods canonically, and freezes
  /// the context index.  Must be called before neighborhood queries.
  void finalize(const ContextDims& dims, const FrameOrder& order);

  /// Incident pairs of a context (empty neighborhood if no edge mentions it).
  /// Throws ValidationError for a malformed context.
  const Neighborhood& neighborhood(int factor, int v, int action, int tail = 0) const;

  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  bool finalized() const { return finalized_; }

 private:
  std::uint64_t pack(int factor, int v, int action, int tail) const;
  void check(int factor, int v, int action, int tail) const;

  FunctionKind kind_ = FunctionKind::Transition;
  std::vector<Edge> edges_;
  std::unordered_map<std::uint64_t, Neighborhood> index_;
  ContextDims dims_;
  bool finalized_ = false;
};

/// One context to check for frame-action anonymity: a joint-action oracle and
/// the configuration-keyed table it is supposed to collapse to.
struct AnonymityCheck {
  std::string label;
  const Neighborhood* nu = nullptr;
  /// Value under an explicit joint action of the counted agents.
  std::function<double(std::span<const int>)> joint_value;
  /// Value under a configuration over `nu`.
  std::function<double(const Configuration&)> config_value;
};

struct AnonymityReport {
  struct Violation {
    std::string label;
    std::vector<int> profile_a;
    std::vector<int> profile_b;  // empty when the config table itself disagrees
    double value_a = 0.0;
    double value_b = 0.0;
    std::string what;
  };
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Exhaustively verifies that each joint-action oracle is invariant within
/// projection classes and agrees with its configuration table.  `frames` and
/// `num_actions` describe the counted agents.  Throws GuardError when the
/// joint action space exceeds `guard` profiles.
AnonymityReport validate_anonymity(std::span<const AnonymityCheck> checks,
                                   std::span<const int> frames,
                                   std::span<const int> num_actions,
                                   long long guard = 4096,
                                   double tol = 1e-12);

}  // namespace maip
