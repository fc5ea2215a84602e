#include "maip/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace maip {

namespace {

std::string key_str(int frame, int factor, int v, int action) {
  std::ostringstream os;
  os << "(frame " << frame << ", factor " << factor << ", value " << v
     << ", action " << action << ")";
  return os.str();
}

}  // namespace

const std::vector<RuleDynamics::Rule>& RuleDynamics::lookup(
    const std::map<Key, std::vector<Rule>>& table, int frame, int factor, int v,
    int action) const {
  auto it = table.find({frame, factor, v, action});
  if (it == table.end()) it = table.find({frame, factor, v, -1});
  if (it == table.end())
    throw LookupError("no dynamics rule for context " +
                      key_str(frame, factor, v, action));
  return it->second;
}

const std::vector<double>& RuleDynamics::select(const std::vector<Rule>& rules,
                                                const Neighborhood& nu,
                                                const Configuration& c) const {
  for (const Rule& rule : rules) {
    bool pass = true;
    for (const Guard& g : rule.when) {
      double stat = 0.0;
      for (const StatTerm& t : g.stat) {
        const int slot = nu.slot_of(t.frame, t.action);
        if (slot != nu.phi_slot()) stat += t.weight * c.counts.at(slot);
      }
      const double bound = g.threshold * std::max(population_n, 1);
      const bool hold = (g.op == Op::Lt) ? (stat < bound) : (stat >= bound);
      if (!hold) {
        pass = false;
        break;
      }
    }
    if (pass) return rule.row;
  }
  throw ValidationError("no dynamics rule matched (missing catch-all row)");
}

double RuleDynamics::transition(int k, int x, int a0, const Neighborhood& nu,
                                const Configuration& c, int x_next) const {
  const auto& row = select(lookup(transition_rules, -2, k, x, a0), nu, c);
  return row.at(x_next);
}

double RuleDynamics::observation(int k, int x_next, int a0, const Neighborhood& nu,
                                 const Configuration& c, int w) const {
  const auto& row = select(lookup(observation_rules, -2, k, x_next, a0), nu, c);
  return row.at(w);
}

double RuleDynamics::frame_observation(int frame, int k, int x_next, int a,
                                       const Neighborhood& nu,
                                       const Configuration& c, int w) const {
  const auto& row = select(lookup(frame_obs_rules, frame, k, x_next, a), nu, c);
  return row.at(w);
}

double RuleDynamics::reward(int k, int x, int a0, const Neighborhood& nu,
                            const Configuration& c) const {
  const auto& row = select(lookup(reward_rules, -2, k, x, a0), nu, c);
  return row.at(0);
}

namespace {

DynamicsModel::RowFn rule_row_fn(const RuleDynamics* self,
                                 const std::vector<RuleDynamics::Rule>* rules,
                                 const Neighborhood* nu) {
  return [self, rules, nu](const Configuration& c, std::span<double> out) {
    const std::vector<double>& row = self->select(*rules, *nu, c);
    if (row.size() != out.size())
      throw ValidationError("dynamics rule row has wrong width");
    std::copy(row.begin(), row.end(), out.begin());
  };
}

}  // namespace

DynamicsModel::RowFn RuleDynamics::transition_rows(int k, int x, int a0,
                                                   const Neighborhood& nu) const {
  return rule_row_fn(this, &lookup(transition_rules, -2, k, x, a0), &nu);
}

DynamicsModel::RowFn RuleDynamics::observation_rows(int k, int x_next, int a0,
                                                    const Neighborhood& nu) const {
  return rule_row_fn(this, &lookup(observation_rules, -2, k, x_next, a0), &nu);
}

DynamicsModel::RowFn RuleDynamics::frame_observation_rows(
    int frame, int k, int x_next, int a, const Neighborhood& nu) const {
  return rule_row_fn(this, &lookup(frame_obs_rules, frame, k, x_next, a), &nu);
}

DynamicsModel::ScalarFn RuleDynamics::reward_values(int k, int x, int a0,
                                                    const Neighborhood& nu) const {
  const std::vector<Rule>* rules = &lookup(reward_rules, -2, k, x, a0);
  return [this, rules, &nu](const Configuration& c) {
    return select(*rules, nu, c).at(0);
  };
}

DynamicsModel::RowFn DynamicsModel::transition_rows(int k, int x, int a0,
                                                    const Neighborhood& nu) const {
  return [this, k, x, a0, &nu](const Configuration& c, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = transition(k, x, a0, nu, c, static_cast<int>(i));
  };
}

DynamicsModel::RowFn DynamicsModel::observation_rows(int k, int x_next, int a0,
                                                     const Neighborhood& nu) const {
  return [this, k, x_next, a0, &nu](const Configuration& c, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = observation(k, x_next, a0, nu, c, static_cast<int>(i));
  };
}

DynamicsModel::RowFn DynamicsModel::frame_observation_rows(
    int frame, int k, int x_next, int a, const Neighborhood& nu) const {
  return [this, frame, k, x_next, a, &nu](const Configuration& c,
                                          std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = frame_observation(frame, k, x_next, a, nu, c, static_cast<int>(i));
  };
}

DynamicsModel::ScalarFn DynamicsModel::reward_values(int k, int x, int a0,
                                                     const Neighborhood& nu) const {
  return [this, k, x, a0, &nu](const Configuration& c) {
    return reward(k, x, a0, nu, c);
  };
}

int Domain::a0_index(const std::string& name) const {
  for (int i = 0; i < num_a0(); ++i)
    if (a0_actions[i] == name) return i;
  throw LookupError("unknown planner action '" + name + "'");
}

bool Domain::all_models_trivial() const {
  for (int m : pop.fsc_of)
    if (fscs.at(m).num_nodes != 1) return false;
  return true;
}

std::vector<int> Domain::population_action_counts() const {
  std::vector<int> out(pop.n);
  for (int j = 0; j < pop.n; ++j)
    out[j] = frames.at(pop.frame_of[j]).num_actions();
  return out;
}

std::vector<const Fsc*> Domain::population_models() const {
  std::vector<const Fsc*> out(pop.n);
  for (int j = 0; j < pop.n; ++j) out[j] = &fscs.at(pop.fsc_of[j]);
  return out;
}

void Domain::finalize() {
  // Canonical frame order: lexicographic rank of frame ids.
  std::vector<int> idx(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) idx[i] = static_cast<int>(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return frames[a].id < frames[b].id;
  });
  order.rank.assign(frames.size(), 0);
  for (std::size_t pos = 0; pos < idx.size(); ++pos)
    order.rank[idx[pos]] = static_cast<int>(pos);

  const int num_factors = states.num_factors();
  std::vector<int> factor_sizes(num_factors);
  for (int k = 0; k < num_factors; ++k) factor_sizes[k] = states.factor_size(k);

  ContextDims t_dims{factor_sizes, num_a0(), factor_sizes};
  ContextDims o_dims{factor_sizes, num_a0(),
                     std::vector<int>(num_factors, obs0.joint_size())};
  ContextDims r_dims{factor_sizes, num_a0(), std::vector<int>(num_factors, 1)};
  t_graph.finalize(t_dims, order);
  o_graph.finalize(o_dims, order);
  r_graph.finalize(r_dims, order);

  if (frame_o_graphs.size() != frames.size())
    throw ValidationError("expected one frame-observation hypergraph per frame");
  for (std::size_t f = 0; f < frames.size(); ++f) {
    ContextDims f_dims{factor_sizes, frames[f].num_actions(),
                       std::vector<int>(num_factors,
                                        frames[f].observations.joint_size())};
    frame_o_graphs[f].finalize(f_dims, order);
  }
}

ValidationReport Domain::validate() const {
  ValidationReport rep;
  if (name.empty()) rep.add("domain name is empty");
  if (a0_actions.empty()) rep.add("planner has no actions");
  {
    std::set<std::string> names(a0_actions.begin(), a0_actions.end());
    if (static_cast<int>(names.size()) != num_a0())
      rep.add("duplicate planner action names");
  }
  rep.merge(states.validate());
  rep.merge(obs0.validate(states.num_factors()));

  std::set<std::string> frame_ids;
  for (const Frame& f : frames) {
    if (!frame_ids.insert(f.id).second)
      rep.add("duplicate frame id '" + f.id + "'");
    rep.merge(f.observations.validate(states.num_factors()));
    if (f.actions.empty()) rep.add("frame '" + f.id + "' has no actions");
  }
  rep.merge(validate_population(pop, frames, fscs));

  if (!t_graph.finalized() || !o_graph.finalized() || !r_graph.finalized())
    rep.add("hypergraphs are not finalized (call finalize())");
  for (const auto& g : frame_o_graphs)
    if (!g.finalized()) rep.add("frame-observation hypergraph is not finalized");

  if (!dynamics) rep.add("dynamics model is missing");

  if (static_cast<int>(initial_state_dist.size()) != num_states())
    rep.add("initial state distribution has wrong length");
  else if (!is_distribution(initial_state_dist, kBeliefSumTol))
    rep.add("initial state distribution does not sum to 1");

  if (initial_models.kind == InitialModelBelief::Kind::Explicit) {
    const auto& d = initial_models.explicit_dists;
    if (static_cast<int>(d.size()) != pop.n) {
      rep.add("explicit initial model belief has wrong agent count");
    } else {
      for (int j = 0; j < pop.n; ++j) {
        if (static_cast<int>(d[j].size()) != num_states()) {
          rep.add("explicit initial model belief: wrong state count for agent " +
                  std::to_string(j));
          continue;
        }
        const int nodes = fscs.at(pop.fsc_of[j]).num_nodes;
        for (int s = 0; s < num_states(); ++s) {
          if (static_cast<int>(d[j][s].size()) != nodes ||
              !is_distribution(d[j][s], kBeliefSumTol)) {
            rep.add("explicit initial model belief: bad row for agent " +
                    std::to_string(j) + ", state " + std::to_string(s));
            break;
          }
        }
      }
    }
  }
  return rep;
}

namespace {

/// Projects a joint action onto a context's neighborhood and evaluates `f`.
template <typename F>
double eval_joint(const Neighborhood& nu, std::span<const int> actions,
                  std::span<const int> agent_frames,
                  std::span<const int> agent_num_actions, F&& f) {
  Configuration c = project(actions, agent_frames, agent_num_actions, nu);
  return f(nu, c);
}

}  // namespace

double Domain::transition_joint(int k, int x, int a0, int x_next,
                                std::span<const int> actions,
                                std::span<const int> agent_frames,
                                std::span<const int> agent_num_actions) const {
  const Neighborhood& nu = t_graph.neighborhood(k, x, a0, x_next);
  return eval_joint(nu, actions, agent_frames, agent_num_actions,
                    [&](const Neighborhood& n, const Configuration& c) {
                      return dynamics->transition(k, x, a0, n, c, x_next);
                    });
}

double Domain::observation_joint(int k, int x_next, int a0, int omega,
                                 std::span<const int> actions,
                                 std::span<const int> agent_frames,
                                 std::span<const int> agent_num_actions) const {
  const Neighborhood& nu = o_graph.neighborhood(k, x_next, a0, omega);
  const int w = obs0.component_of(omega, k);
  return eval_joint(nu, actions, agent_frames, agent_num_actions,
                    [&](const Neighborhood& n, const Configuration& c) {
                      return dynamics->observation(k, x_next, a0, n, c, w);
                    });
}

double Domain::frame_observation_joint(int frame, int k, int x_next, int a,
                                       int omega, std::span<const int> actions,
                                       std::span<const int> agent_frames,
                                       std::span<const int> agent_num_actions) const {
  const Neighborhood& nu = frame_o_graphs.at(frame).neighborhood(k, x_next, a, omega);
  const int w = frames.at(frame).observations.component_of(omega, k);
  return eval_joint(nu, actions, agent_frames, agent_num_actions,
                    [&](const Neighborhood& n, const Configuration& c) {
                      return dynamics->frame_observation(frame, k, x_next, a, n, c, w);
                    });
}

double Domain::reward_joint(int k, int x, int a0, std::span<const int> actions,
                            std::span<const int> agent_frames,
                            std::span<const int> agent_num_actions) const {
  const Neighborhood& nu = r_graph.neighborhood(k, x, a0);
  return eval_joint(nu, actions, agent_frames, agent_num_actions,
                    [&](const Neighborhood& n, const Configuration& c) {
                      return dynamics->reward(k, x, a0, n, c);
                    });
}

std::vector<AnonymityCheck> build_anonymity_checks(const Domain& domain, int a0) {
  std::vector<AnonymityCheck> checks;
  const int num_factors = domain.states.num_factors();

  auto label = [&](const char* fn, int k, int v, int tail) {
    std::ostringstream os;
    os << fn << " factor=" << k << " value=" << v << " a0=" << a0;
    if (tail >= 0) os << " tail=" << tail;
    return os.str();
  };

  for (int k = 0; k < num_factors; ++k) {
    const int xs = domain.states.factor_size(k);
    for (int x = 0; x < xs; ++x) {
      for (int x2 = 0; x2 < xs; ++x2) {
        const Neighborhood& nu = domain.t_graph.neighborhood(k, x, a0, x2);
        checks.push_back(AnonymityCheck{
            label("transition", k, x, x2), &nu,
            [&domain, k, x, a0, x2](std::span<const int> acts) {
              const auto fr = domain.population_frames();
              const auto na = domain.population_action_counts();
              return domain.transition_joint(k, x, a0, x2, acts, fr, na);
            },
            [&domain, &nu, k, x, a0, x2](const Configuration& c) {
              return domain.dynamics->transition(k, x, a0, nu, c, x2);
            }});
      }
      for (int omega = 0; omega < domain.obs0.joint_size(); ++omega) {
        const Neighborhood& nu = domain.o_graph.neighborhood(k, x, a0, omega);
        const int w = domain.obs0.component_of(omega, k);
        checks.push_back(AnonymityCheck{
            label("observation", k, x, omega), &nu,
            [&domain, k, x, a0, omega](std::span<const int> acts) {
              const auto fr = domain.population_frames();
              const auto na = domain.population_action_counts();
              return domain.observation_joint(k, x, a0, omega, acts, fr, na);
            },
            [&domain, &nu, k, x, a0, w](const Configuration& c) {
              return domain.dynamics->observation(k, x, a0, nu, c, w);
            }});
      }
      {
        const Neighborhood& nu = domain.r_graph.neighborhood(k, x, a0);
        checks.push_back(AnonymityCheck{
            label("reward", k, x, -1), &nu,
            [&domain, k, x, a0](std::span<const int> acts) {
              const auto fr = domain.population_frames();
              const auto na = domain.population_action_counts();
              return domain.reward_joint(k, x, a0, acts, fr, na);
            },
            [&domain, &nu, k, x, a0](const Configuration& c) {
              return domain.dynamics->reward(k, x, a0, nu, c);
            }});
      }
    }
  }
  return checks;
}

}  // namespace maip
