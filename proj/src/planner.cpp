#include "maip/planner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace maip {

int Policy::action_for(std::span<const int> history) const {
  auto it = plan.find(std::vector<int>(history.begin(), history.end()));
  if (it != plan.end()) return it->second;
  const std::size_t depth = history.size();
  if (depth < default_action.size()) return default_action[depth];
  throw LookupError("no planned action for a history of length " +
                    std::to_string(depth));
}

std::string Policy::to_text(const Domain& domain) const {
  std::ostringstream os;
  os << "horizon " << horizon << '\n';
  for (std::size_t d = 0; d < default_action.size(); ++d)
    os << "default " << d << ' ' << domain.a0_actions.at(default_action[d])
       << '\n';
  for (const auto& [hist, action] : plan) {
    os << "plan ";
    if (hist.empty()) {
      os << '-';
    } else {
      for (std::size_t i = 0; i < hist.size(); ++i) {
        if (i) os << '/';
        os << domain.obs0.joint_name(hist[i]);
      }
    }
    os << ' ' << domain.a0_actions.at(action) << '\n';
  }
  return os.str();
}

double backup(ReachabilityNode& node, double gamma) {
  if (node.actions.empty()) {
    node.value = 0.0;
    node.best_action = -1;
    node.valued = true;
    return node.value;
  }
  double best = 0.0;
  int best_a = -1;
  for (std::size_t a = 0; a < node.actions.size(); ++a) {
    const ReachabilityNode::ActionEdge& edge = node.actions[a];
    double future = 0.0;
    for (const ReachabilityNode::Branch& br : edge.branches) {
      double v;
      if (br.child) {
        if (!br.child->valued)
          throw ValidationError("backup requires valued children");
        v = br.child->value;
      } else if (br.child_valued) {
        v = br.child_value;
      } else {
        throw ValidationError("backup requires valued children");
      }
      future += br.weight * v;
    }
    const double q = edge.immediate + gamma * future;
    if (best_a < 0 || q > best) {
      best = q;
      best_a = static_cast<int>(a);
    }
  }
  node.value = best;
  node.best_action = best_a;
  node.valued = true;
  return node.value;
}

namespace {

int argmax_lowest(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

struct SubPlan {
  double value = 0.0;
  std::map<std::vector<int>, int> plan;
};

class Solver {
 public:
  Solver(const Domain& domain, BeliefOps& ops, const SolveOptions& opt,
         bool sampling)
      : domain_(domain), ops_(ops), opt_(opt),
        sampling_(sampling && !opt.exhaustive) {}

  SolveResult run(const FactoredBelief& b0) {
    SolveResult out;
    out.policy.horizon = opt_.horizon;
    if (opt_.horizon > 0) {
      SubPlan root = solve_node(b0, 0, opt_.seed);
      out.value = root.value;
      out.policy.plan = std::move(root.plan);
    }
    out.policy.default_action = std::move(defaults_);
    out.nodes_expanded = expanded_;
    out.trie_peak = ops_.trie_peak();
    return out;
  }

 private:
  SubPlan solve_node(const FactoredBelief& b, int depth, std::uint64_t path) {
    ++expanded_;
    const int num_a = domain_.num_a0();
    const int num_w = domain_.obs0.joint_size();

    ReachabilityNode node;
    node.belief = b;
    node.depth = depth;
    node.actions.resize(static_cast<std::size_t>(num_a));
    std::vector<double> immediate(static_cast<std::size_t>(num_a));
    for (int a = 0; a < num_a; ++a) {
      immediate[a] = ops_.expected_reward(b, a);
      node.actions[a].immediate = immediate[a];
    }
    if (static_cast<int>(defaults_.size()) == depth)
      defaults_.push_back(argmax_lowest(immediate));

    // Per action, the sub-plans of its expanded children, kept until the
    // backup decides which action's subtree enters the policy.
    std::vector<std::vector<std::pair<int, std::map<std::vector<int>, int>>>>
        child_plans(static_cast<std::size_t>(num_a));

    if (depth + 1 < opt_.horizon) {  // depth+1 == horizon children are worth 0
      for (int a = 0; a < num_a; ++a) {
        StateStep st = ops_.state_step(b, a);
        const auto rows = ops_.model_rows(b, a);
        std::vector<std::pair<int, double>> picks;  // (obs, weight)
        if (!sampling_) {
          for (int w = 0; w < num_w; ++w)
            if (st.lik[w] > 0.0) picks.emplace_back(w, st.lik[w]);
        } else {
          picks = draw_observations(st.lik, path, a);
        }
        for (const auto& [w, weight] : picks) {
          FactoredBelief child_belief = ops_.compose(st.posterior[w], rows);
          SubPlan sp =
              solve_node(child_belief, depth + 1,
                         mix64(path, static_cast<std::uint64_t>(a) * num_w + w + 1));
          ReachabilityNode::Branch br;
          br.obs = w;
          br.weight = weight;
          br.child_value = sp.value;
          br.child_valued = true;
          node.actions[a].branches.push_back(std::move(br));
          child_plans[a].emplace_back(w, std::move(sp.plan));
        }
      }
    }

    backup(node, opt_.gamma);

    SubPlan out;
    out.value = node.value;
    out.plan[{}] = node.best_action;
    for (auto& [w, sub] : child_plans[node.best_action]) {
      for (auto& [hist, action] : sub) {
        std::vector<int> key;
        key.reserve(hist.size() + 1);
        key.push_back(w);
        key.insert(key.end(), hist.begin(), hist.end());
        out.plan.emplace(std::move(key), action);
      }
    }
    return out;
  }

  /// k i.i.d. draws from the observation likelihoods; returns the distinct
  /// observations with empirical weights count/k, in observation order.
  std::vector<std::pair<int, double>> draw_observations(
      const std::vector<double>& lik, std::uint64_t path, int action) const {
    const int num_w = static_cast<int>(lik.size());
    std::vector<int> count(static_cast<std::size_t>(num_w), 0);
    std::uint64_t state = mix64(path, 0x5eedu + static_cast<std::uint64_t>(action));
    for (int d = 0; d < opt_.samples; ++d) {
      state = mix64(state, static_cast<std::uint64_t>(d) + 1);
      const double u =
          static_cast<double>(state >> 11) * 0x1.0p-53;  // [0, 1)
      double cum = 0.0;
      int pick = -1;
      for (int w = 0; w < num_w; ++w) {
        if (lik[w] <= 0.0) continue;
        cum += lik[w];
        if (u < cum) {
          pick = w;
          break;
        }
        pick = w;  // fall back to the last positive observation
      }
      if (pick >= 0) ++count[pick];
    }
    std::vector<std::pair<int, double>> picks;
    for (int w = 0; w < num_w; ++w)
      if (count[w] > 0)
        picks.emplace_back(w, static_cast<double>(count[w]) / opt_.samples);
    return picks;
  }

  const Domain& domain_;
  BeliefOps& ops_;
  const SolveOptions& opt_;
  bool sampling_;
  std::vector<int> defaults_;
  long long expanded_ = 0;
};

void check_options(const Domain& domain, const SolveOptions& opt, bool sampling) {
  if (opt.horizon < 0) throw ValidationError("horizon must be nonnegative");
  if (opt.gamma < 0.0 || opt.gamma > 1.0)
    throw ValidationError("discount must lie in [0, 1]");
  if (sampling && !opt.exhaustive && opt.samples < 1)
    throw ValidationError("sampling requires at least one draw per action");

  const int num_a = domain.num_a0();
  const int num_w = domain.obs0.joint_size();
  const int branch =
      (sampling && !opt.exhaustive) ? std::min(opt.samples, num_w) : num_w;
  double est = 1.0;
  double level = 1.0;
  for (int d = 1; d < opt.horizon; ++d) {
    level *= static_cast<double>(num_a) * branch;
    est += level;
    if (est > static_cast<double>(opt.node_guard))
      throw GuardError("reachability tree needs about " +
                       std::to_string(est) + " nodes, over the guard of " +
                       std::to_string(opt.node_guard));
  }
}

}  // namespace

SolveResult solve_exact(const FactoredBelief& b0, const Domain& domain,
                        const SolveOptions& opt) {
  check_options(domain, opt, false);
  StructuredOps ops(domain, opt.prune_eps);
  return Solver(domain, ops, opt, false).run(b0);
}

SolveResult solve_sampled(const FactoredBelief& b0, const Domain& domain,
                          const SolveOptions& opt) {
  check_options(domain, opt, true);
  StructuredOps ops(domain, opt.prune_eps);
  return Solver(domain, ops, opt, true).run(b0);
}

SolveResult naive_solve(const FactoredBelief& b0, const Domain& domain,
                        const SolveOptions& opt) {
  check_options(domain, opt, false);
  NaiveOps ops(domain, opt.naive_guard);
  return Solver(domain, ops, opt, false).run(b0);
}

}  // namespace maip
