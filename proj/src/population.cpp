#include "maip/population.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace maip {

namespace {

std::string idx(const std::string& what, int i) {
  std::ostringstream os;
  os << what << "[" << i << "]";
  return os.str();
}

}  // namespace

int StateSpace::factor_size(int k) const {
  if (k < 0 || k >= num_factors()) throw LookupError("state factor out of range");
  return static_cast<int>(factors[k].values.size());
}

long long StateSpace::num_states() const {
  long long n = 1;
  for (const auto& f : factors) n *= static_cast<long long>(f.values.size());
  return n;
}

int StateSpace::state_index(std::span<const int> values) const {
  if (static_cast<int>(values.size()) != num_factors())
    throw LookupError("joint state arity mismatch");
  long long s = 0;
  for (int k = 0; k < num_factors(); ++k) {
    const int size = factor_size(k);
    if (values[k] < 0 || values[k] >= size)
      throw LookupError("factor value out of range in joint state");
    s = s * size + values[k];
  }
  return static_cast<int>(s);
}

int StateSpace::value_at(int s, int k) const {
  if (s < 0 || s >= num_states()) throw LookupError("joint state out of range");
  long long rest = s;
  for (int j = num_factors() - 1; j > k; --j) rest /= factor_size(j);
  return static_cast<int>(rest % factor_size(k));
}

std::vector<int> StateSpace::state_values(int s) const {
  if (s < 0 || s >= num_states()) throw LookupError("joint state out of range");
  std::vector<int> out(num_factors());
  long long rest = s;
  for (int k = num_factors() - 1; k >= 0; --k) {
    out[k] = static_cast<int>(rest % factor_size(k));
    rest /= factor_size(k);
  }
  return out;
}

int StateSpace::factor_index(const std::string& name) const {
  for (int k = 0; k < num_factors(); ++k)
    if (factors[k].name == name) return k;
  throw LookupError("unknown state factor: " + name);
}

int StateSpace::value_index(int k, const std::string& value) const {
  const auto& vals = factors.at(k).values;
  for (int v = 0; v < static_cast<int>(vals.size()); ++v)
    if (vals[v] == value) return v;
  throw LookupError("unknown value '" + value + "' for factor " + factors.at(k).name);
}

ValidationReport StateSpace::validate() const {
  ValidationReport rep;
  if (factors.empty()) rep.add("state space declares no factors");
  std::set<std::string> names;
  for (int k = 0; k < num_factors(); ++k) {
    const auto& f = factors[k];
    if (f.values.empty()) rep.add("factor " + f.name + " has no values");
    if (!names.insert(f.name).second) rep.add("duplicate factor name " + f.name);
    std::set<std::string> vs(f.values.begin(), f.values.end());
    if (vs.size() != f.values.size())
      rep.add("factor " + f.name + " has duplicate value names");
  }
  return rep;
}

int ObsSpace::component_size(int k) const {
  if (k < 0 || k >= num_factors()) throw LookupError("observation component out of range");
  return static_cast<int>(components[k].size());
}

int ObsSpace::joint_size() const {
  long long n = 1;
  for (const auto& c : components) n *= static_cast<long long>(c.size());
  return static_cast<int>(n);
}

int ObsSpace::joint_index(std::span<const int> comps) const {
  if (static_cast<int>(comps.size()) != num_factors())
    throw LookupError("joint observation arity mismatch");
  long long o = 0;
  for (int k = 0; k < num_factors(); ++k) {
    if (comps[k] < 0 || comps[k] >= component_size(k))
      throw LookupError("observation component out of range");
    o = o * component_size(k) + comps[k];
  }
  return static_cast<int>(o);
}

int ObsSpace::component_of(int obs, int k) const {
  if (obs < 0 || obs >= joint_size()) throw LookupError("joint observation out of range");
  long long rest = obs;
  for (int j = num_factors() - 1; j > k; --j) rest /= component_size(j);
  return static_cast<int>(rest % component_size(k));
}

std::string ObsSpace::joint_name(int obs) const {
  std::string out;
  for (int k = 0; k < num_factors(); ++k) out += components[k][component_of(obs, k)];
  return out;
}

int ObsSpace::find_joint(const std::string& name) const {
  for (int o = 0; o < joint_size(); ++o)
    if (joint_name(o) == name) return o;
  throw LookupError("unknown joint observation: " + name);
}

ValidationReport ObsSpace::validate(int expected_factors) const {
  ValidationReport rep;
  if (num_factors() != expected_factors)
    rep.add("observation space declares " + std::to_string(num_factors()) +
            " components, expected one per state factor (" +
            std::to_string(expected_factors) + ")");
  for (int k = 0; k < num_factors(); ++k)
    if (components[k].empty())
      rep.add(idx("observation component", k) + " is empty");
  // joint names must be distinguishable
  std::set<std::string> names;
  for (int o = 0; o < joint_size(); ++o)
    if (!names.insert(joint_name(o)).second)
      rep.add("joint observation name collision: " + joint_name(o));
  return rep;
}

int Frame::action_index(const std::string& name) const {
  for (int a = 0; a < num_actions(); ++a)
    if (actions[a] == name) return a;
  throw LookupError("unknown action '" + name + "' in frame " + id);
}

std::span<const double> Fsc::action_distribution(int node) const {
  if (node < 0 || node >= num_nodes)
    throw LookupError("controller " + id + ": unknown node " + std::to_string(node));
  return action_dist[node];
}

std::span<const double> Fsc::step_distribution(int node, int action, int obs) const {
  if (node < 0 || node >= num_nodes)
    throw LookupError("controller " + id + ": unknown node " + std::to_string(node));
  const auto& per_action = node_transition[node];
  if (action < 0 || action >= static_cast<int>(per_action.size()))
    throw LookupError("controller " + id + ": unknown action " + std::to_string(action));
  const auto& per_obs = per_action[action];
  if (obs < 0 || obs >= static_cast<int>(per_obs.size()))
    throw LookupError("controller " + id + ": unknown observation " + std::to_string(obs));
  return per_obs[obs];
}

ValidationReport Fsc::validate(const Frame& frame) const {
  ValidationReport rep;
  const std::string where = "controller " + id;
  if (num_nodes <= 0) rep.add(where + ": no nodes");
  if (static_cast<int>(action_dist.size()) != num_nodes ||
      static_cast<int>(node_transition.size()) != num_nodes) {
    rep.add(where + ": table shape does not match node count");
    return rep;
  }
  const int na = frame.num_actions();
  const int no = frame.observations.joint_size();
  for (int m = 0; m < num_nodes; ++m) {
    if (static_cast<int>(action_dist[m].size()) != na) {
      rep.add(where + ", node " + std::to_string(m) + ": action row arity mismatch");
      continue;
    }
    if (!is_distribution(action_dist[m]))
      rep.add(where + ", node " + std::to_string(m) +
              ": action distribution does not sum to 1");
    if (static_cast<int>(node_transition[m].size()) != na) {
      rep.add(where + ", node " + std::to_string(m) + ": transition arity mismatch");
      continue;
    }
    for (int a = 0; a < na; ++a) {
      if (static_cast<int>(node_transition[m][a].size()) != no) {
        rep.add(where + ", node " + std::to_string(m) + ", action " + frame.actions[a] +
                ": observation arity mismatch");
        continue;
      }
      for (int o = 0; o < no; ++o) {
        const auto& row = node_transition[m][a][o];
        if (static_cast<int>(row.size()) != num_nodes ||
            !is_distribution(row))
          rep.add(where + ", node " + std::to_string(m) + ", action " +
                  frame.actions[a] + ", observation " +
                  frame.observations.joint_name(o) +
                  ": successor distribution invalid");
      }
    }
  }
  return rep;
}

namespace {

int count_plan_nodes(const PlanNode& node, const Frame& frame) {
  if (node.action < 0 || node.action >= frame.num_actions())
    throw ValidationError("plan action out of range for frame " + frame.id);
  if (node.children.empty()) return 1;
  if (static_cast<int>(node.children.size()) != frame.observations.joint_size())
    throw ValidationError("plan node missing an observation branch (frame " +
                          frame.id + ")");
  int total = 1;
  for (const auto& child : node.children) {
    if (!child) throw ValidationError("plan node missing an observation branch (frame " +
                                      frame.id + ")");
    total += count_plan_nodes(*child, frame);
  }
  return total;
}

}  // namespace

Fsc policy_to_fsc(const PlanNode& root, const Frame& frame, int frame_index,
                  std::string id) {
  const int n_nodes = count_plan_nodes(root, frame);
  const int na = frame.num_actions();
  const int no = frame.observations.joint_size();

  Fsc fsc;
  fsc.id = std::move(id);
  fsc.frame = frame_index;
  fsc.num_nodes = n_nodes;
  fsc.action_dist.assign(n_nodes, std::vector<double>(na, 0.0));
  fsc.node_transition.assign(
      n_nodes, std::vector<std::vector<std::vector<double>>>(
                   na, std::vector<std::vector<double>>(
                           no, std::vector<double>(n_nodes, 0.0))));

  // Assign node ids in preorder; default every successor row to a self-loop,
  // then point the executed action's rows at the observation children.
  int next_id = 0;
  auto emit = [&](auto&& self, const PlanNode& node) -> int {
    const int me = next_id++;
    fsc.action_dist[me][node.action] = 1.0;
    for (int a = 0; a < na; ++a)
      for (int o = 0; o < no; ++o) fsc.node_transition[me][a][o][me] = 1.0;
    for (int o = 0; o < static_cast<int>(node.children.size()); ++o) {
      const int child = self(self, *node.children[o]);
      auto& row = fsc.node_transition[me][node.action][o];
      std::fill(row.begin(), row.end(), 0.0);
      row[child] = 1.0;
    }
    return me;
  };
  emit(emit, root);
  return fsc;
}

ValidationReport validate_population(const AgentPopulation& pop,
                                     const std::vector<Frame>& frames,
                                     const std::vector<Fsc>& fscs) {
  ValidationReport rep;
  if (pop.n < 0) rep.add("population size is negative");
  if (static_cast<int>(pop.frame_of.size()) != pop.n ||
      static_cast<int>(pop.fsc_of.size()) != pop.n) {
    rep.add("population assignment arrays do not match population size");
    return rep;
  }
  for (int f = 0; f < static_cast<int>(fscs.size()); ++f) {
    const auto& fsc = fscs[f];
    if (fsc.frame < 0 || fsc.frame >= static_cast<int>(frames.size())) {
      rep.add("controller " + fsc.id + " references an undeclared frame");
      continue;
    }
    rep.merge(fsc.validate(frames[fsc.frame]));
  }
  for (int j = 0; j < pop.n; ++j) {
    const std::string who = "agent " + std::to_string(j);
    if (pop.frame_of[j] < 0 || pop.frame_of[j] >= static_cast<int>(frames.size())) {
      rep.add(who + " references an undeclared frame");
      continue;
    }
    if (pop.fsc_of[j] < 0 || pop.fsc_of[j] >= static_cast<int>(fscs.size())) {
      rep.add(who + " references an undeclared controller");
      continue;
    }
    const Fsc& fsc = fscs[pop.fsc_of[j]];
    if (fsc.frame != pop.frame_of[j])
      rep.add(who + " pairs frame " + frames[pop.frame_of[j]].id +
              " with controller " + fsc.id + " of a different frame");
    const Frame& frame = frames[pop.frame_of[j]];
    bool pooled = false;
    for (const auto& pid : frame.fsc_pool) pooled |= (pid == fsc.id);
    if (!frame.fsc_pool.empty() && !pooled)
      rep.add(who + ": controller " + fsc.id + " is not in the pool of frame " +
              frame.id);
  }
  return rep;
}

}  // namespace maip
