#include "maip/domain_io.hpp"

#include <fstream>
#include <memory>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "maip/common.hpp"

namespace maip {

namespace {

using nlohmann::json;
using Key = RuleDynamics::Key;
using Rule = RuleDynamics::Rule;
using Guard = RuleDynamics::Guard;
using StatTerm = RuleDynamics::StatTerm;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

std::string idx(const std::string& path, size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing field '") + key + "'");
  return *it;
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

std::vector<double> as_row(const json& j, const std::string& path) {
  as_array(j, path);
  std::vector<double> row;
  row.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i)
    row.push_back(as_double(j[i], idx(path, i)));
  return row;
}

std::vector<std::string> as_strings(const json& j, const std::string& path) {
  as_array(j, path);
  std::vector<std::string> out;
  out.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i)
    out.push_back(as_string(j[i], idx(path, i)));
  return out;
}

ObsSpace load_obs_space(const json& j, const std::string& path) {
  ObsSpace obs;
  as_array(j, path);
  for (size_t k = 0; k < j.size(); ++k)
    obs.components.push_back(as_strings(j[k], idx(path, k)));
  return obs;
}

json obs_space_json(const ObsSpace& obs) { return json(obs.components); }

/// Shared state of one load: the domain under construction plus name
/// resolution against its frames and action lists.
struct Loader {
  Domain d;

  int frame_index(const std::string& name, const std::string& path) const {
    if (name == "agent0") return kAgent0Frame;
    for (size_t f = 0; f < d.frames.size(); ++f)
      if (d.frames[f].id == name) return static_cast<int>(f);
    fail(path, "unknown frame '" + name + "'");
  }

  int action_index(int frame, const std::string& name, const std::string& path,
                   bool allow_wildcard) const {
    if (allow_wildcard && name == "*") return -1;
    const std::vector<std::string>& acts =
        frame == kAgent0Frame ? d.a0_actions
                              : d.frames[static_cast<size_t>(frame)].actions;
    for (size_t a = 0; a < acts.size(); ++a)
      if (acts[a] == name) return static_cast<int>(a);
    fail(path, "unknown action '" + name + "'");
  }

  int fsc_index(const std::string& id, const std::string& path) const {
    for (size_t i = 0; i < d.fscs.size(); ++i)
      if (d.fscs[i].id == id) return static_cast<int>(i);
    fail(path, "unknown controller '" + id + "'");
  }

  Fsc load_fsc(const json& j, int frame_idx, const std::string& path) const {
    Fsc f;
    f.id = as_string(field(j, "id", path), path + ".id");
    f.frame = frame_idx;
    f.num_nodes = as_int(field(j, "nodes", path), path + ".nodes");
    const json& ad = as_array(field(j, "action_dist", path), path + ".action_dist");
    for (size_t m = 0; m < ad.size(); ++m)
      f.action_dist.push_back(as_row(ad[m], idx(path + ".action_dist", m)));
    const std::string ntp = path + ".node_transition";
    const json& nt = as_array(field(j, "node_transition", path), ntp);
    for (size_t m = 0; m < nt.size(); ++m) {
      const json& per_action = as_array(nt[m], idx(ntp, m));
      std::vector<std::vector<std::vector<double>>> rows_a;
      for (size_t a = 0; a < per_action.size(); ++a) {
        const json& per_obs = as_array(per_action[a], idx(idx(ntp, m), a));
        std::vector<std::vector<double>> rows_w;
        for (size_t w = 0; w < per_obs.size(); ++w)
          rows_w.push_back(as_row(per_obs[w], idx(idx(idx(ntp, m), a), w)));
        rows_a.push_back(std::move(rows_w));
      }
      f.node_transition.push_back(std::move(rows_a));
    }
    return f;
  }

  void load_edges(FrameActionHypergraph& g, const json& arr,
                  const std::string& path) const {
    as_array(arr, path);
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string ep = idx(path, i);
      const json& e = as_array(arr[i], ep);
      if (e.size() != 3)
        fail(ep, "expected [context, action name, frame name]");
      const json& ctx = as_array(e[0], ep + "[0]");
      if (ctx.size() != 4)
        fail(ep + "[0]", "expected [factor, value, action, tail]");
      const int factor = as_int(ctx[0], ep + "[0][0]");
      const int v = as_int(ctx[1], ep + "[0][1]");
      const int action = as_int(ctx[2], ep + "[0][2]");
      const int tail = as_int(ctx[3], ep + "[0][3]");
      const int pf = frame_index(as_string(e[2], ep + "[2]"), ep + "[2]");
      const int pa = action_index(pf, as_string(e[1], ep + "[1]"), ep + "[1]",
                                  /*allow_wildcard=*/false);
      g.add_edge(factor, v, action, tail, {pf, pa});
    }
  }

  Guard load_guard(const json& j, const std::string& path) const {
    Guard g;
    const json& st = as_array(field(j, "stat", path), path + ".stat");
    for (size_t t = 0; t < st.size(); ++t) {
      const std::string tp = idx(path + ".stat", t);
      const json& term = st[t];
      StatTerm out;
      out.frame = frame_index(as_string(field(term, "frame", tp), tp + ".frame"),
                              tp + ".frame");
      out.action =
          action_index(out.frame, as_string(field(term, "action", tp), tp + ".action"),
                       tp + ".action", /*allow_wildcard=*/false);
      out.weight = as_double(field(term, "weight", tp), tp + ".weight");
      g.stat.push_back(out);
    }
    const std::string op = as_string(field(j, "op", path), path + ".op");
    if (op == "lt")
      g.op = RuleDynamics::Op::Lt;
    else if (op == "ge")
      g.op = RuleDynamics::Op::Ge;
    else
      fail(path + ".op", "expected 'lt' or 'ge'");
    g.threshold = as_double(field(j, "threshold", path), path + ".threshold");
    return g;
  }

  void load_table(std::map<Key, std::vector<Rule>>& table, const json& arr,
                  bool framed, const std::string& path) const {
    as_array(arr, path);
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string ep = idx(path, i);
      const json& e = arr[i];
      int fr = -2;
      if (framed) {
        fr = frame_index(as_string(field(e, "frame", ep), ep + ".frame"),
                         ep + ".frame");
        if (fr == kAgent0Frame)
          fail(ep + ".frame", "frame observation tables cannot use agent0");
      }
      const int factor = as_int(field(e, "factor", ep), ep + ".factor");
      const int value = as_int(field(e, "value", ep), ep + ".value");
      const int action =
          action_index(framed ? fr : kAgent0Frame,
                       as_string(field(e, "action", ep), ep + ".action"),
                       ep + ".action", /*allow_wildcard=*/true);
      std::vector<Rule> rules;
      const json& rs = as_array(field(e, "rules", ep), ep + ".rules");
      for (size_t r = 0; r < rs.size(); ++r) {
        const std::string rp = idx(ep + ".rules", r);
        Rule rule;
        const json& when = as_array(field(rs[r], "when", rp), rp + ".when");
        for (size_t gidx = 0; gidx < when.size(); ++gidx)
          rule.when.push_back(load_guard(when[gidx], idx(rp + ".when", gidx)));
        rule.row = as_row(field(rs[r], "row", rp), rp + ".row");
        rules.push_back(std::move(rule));
      }
      const Key key{fr, factor, value, action};
      if (table.count(key)) fail(ep, "duplicate rule-table entry");
      table[key] = std::move(rules);
    }
  }
};

std::string frame_name(const Domain& d, int frame) {
  return frame == kAgent0Frame ? "agent0"
                               : d.frames[static_cast<size_t>(frame)].id;
}

std::string action_name(const Domain& d, int frame, int action) {
  const std::vector<std::string>& acts =
      frame == kAgent0Frame ? d.a0_actions
                            : d.frames[static_cast<size_t>(frame)].actions;
  return acts.at(static_cast<size_t>(action));
}

json fsc_json(const Fsc& f) {
  json j;
  j["id"] = f.id;
  j["nodes"] = f.num_nodes;
  j["action_dist"] = f.action_dist;
  j["node_transition"] = f.node_transition;
  return j;
}

json edges_json(const Domain& d, const FrameActionHypergraph& g) {
  json arr = json::array();
  for (const auto& e : g.edges())
    arr.push_back(json::array({json::array({e.factor, e.v, e.action, e.tail}),
                               action_name(d, e.pair.frame, e.pair.action),
                               frame_name(d, e.pair.frame)}));
  return arr;
}

json table_json(const Domain& d, const std::map<Key, std::vector<Rule>>& table,
                bool framed) {
  json arr = json::array();
  for (const auto& [key, rules] : table) {
    const auto& [fr, factor, value, action] = key;
    json e;
    if (framed) e["frame"] = frame_name(d, fr);
    e["factor"] = factor;
    e["value"] = value;
    e["action"] = action < 0
                      ? std::string("*")
                      : action_name(d, framed ? fr : kAgent0Frame, action);
    json rj = json::array();
    for (const Rule& rule : rules) {
      json wj = json::array();
      for (const Guard& g : rule.when) {
        json sj = json::array();
        for (const StatTerm& t : g.stat) {
          json tj;
          tj["frame"] = frame_name(d, t.frame);
          tj["action"] = action_name(d, t.frame, t.action);
          tj["weight"] = t.weight;
          sj.push_back(tj);
        }
        json gj;
        gj["stat"] = sj;
        gj["op"] = g.op == RuleDynamics::Op::Lt ? "lt" : "ge";
        gj["threshold"] = g.threshold;
        wj.push_back(gj);
      }
      json rule_j;
      rule_j["when"] = wj;
      rule_j["row"] = rule.row;
      rj.push_back(rule_j);
    }
    e["rules"] = rj;
    arr.push_back(e);
  }
  return arr;
}

}  // namespace

std::string domain_to_json(const Domain& domain) {
  const auto* dyn = dynamic_cast<const RuleDynamics*>(domain.dynamics.get());
  if (dyn == nullptr)
    throw ValidationError(
        "only rule-table dynamics can be serialized to JSON");

  json j;
  j["name"] = domain.name;

  json factors = json::array();
  for (const auto& f : domain.states.factors) {
    json fj;
    fj["name"] = f.name;
    fj["values"] = f.values;
    factors.push_back(fj);
  }
  j["state_factors"] = factors;

  j["agent0"]["actions"] = domain.a0_actions;
  j["agent0"]["observations"] = obs_space_json(domain.obs0);

  json frames = json::array();
  for (const auto& frame : domain.frames) {
    json fj;
    fj["id"] = frame.id;
    fj["actions"] = frame.actions;
    fj["observations"] = obs_space_json(frame.observations);
    json pool = json::array();
    for (const std::string& id : frame.fsc_pool) {
      bool found = false;
      for (const Fsc& f : domain.fscs)
        if (f.id == id) {
          pool.push_back(fsc_json(f));
          found = true;
          break;
        }
      if (!found)
        throw ValidationError("controller '" + id +
                              "' in a frame pool is not defined");
    }
    fj["fscs"] = pool;
    frames.push_back(fj);
  }
  j["frames"] = frames;

  json assignments = json::array();
  for (int a = 0; a < domain.pop.n;) {
    int b = a;
    while (b < domain.pop.n &&
           domain.pop.frame_of[static_cast<size_t>(b)] ==
               domain.pop.frame_of[static_cast<size_t>(a)] &&
           domain.pop.fsc_of[static_cast<size_t>(b)] ==
               domain.pop.fsc_of[static_cast<size_t>(a)])
      ++b;
    json aj;
    aj["frame"] = frame_name(domain, domain.pop.frame_of[static_cast<size_t>(a)]);
    aj["fsc"] =
        domain.fscs[static_cast<size_t>(domain.pop.fsc_of[static_cast<size_t>(a)])]
            .id;
    aj["count"] = b - a;
    assignments.push_back(aj);
    a = b;
  }
  j["population"]["n"] = domain.pop.n;
  j["population"]["assignments"] = assignments;

  j["hypergraphs"]["transition"] = edges_json(domain, domain.t_graph);
  j["hypergraphs"]["observation"] = edges_json(domain, domain.o_graph);
  j["hypergraphs"]["reward"] = edges_json(domain, domain.r_graph);
  json frame_obs;
  for (size_t f = 0; f < domain.frame_o_graphs.size(); ++f)
    frame_obs[domain.frames[f].id] = edges_json(domain, domain.frame_o_graphs[f]);
  j["hypergraphs"]["frame_observation"] =
      frame_obs.is_null() ? json::object() : frame_obs;

  j["dynamics"]["population_n"] = dyn->population_n;
  j["dynamics"]["transition"] = table_json(domain, dyn->transition_rules, false);
  j["dynamics"]["observation"] =
      table_json(domain, dyn->observation_rules, false);
  j["dynamics"]["frame_observation"] =
      table_json(domain, dyn->frame_obs_rules, true);
  j["reward"] = table_json(domain, dyn->reward_rules, false);

  j["initial_belief"]["state"] = domain.initial_state_dist;
  switch (domain.initial_models.kind) {
    case InitialModelBelief::Kind::Uniform:
      j["initial_belief"]["models"] = "uniform";
      break;
    case InitialModelBelief::Kind::Node0:
      j["initial_belief"]["models"] = "node0";
      break;
    case InitialModelBelief::Kind::Explicit:
      j["initial_belief"]["models"]["explicit"] =
          domain.initial_models.explicit_dists;
      break;
  }

  return j.dump(2);
}

Domain load_domain_json(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": " + e.what());
  }
  if (!root.is_object()) fail(origin, "expected a top-level object");

  Loader ld;
  Domain& d = ld.d;
  d.name = as_string(field(root, "name", origin), "name");

  const json& factors = as_array(field(root, "state_factors", origin), "state_factors");
  for (size_t k = 0; k < factors.size(); ++k) {
    const std::string fp = idx("state_factors", k);
    StateSpace::Factor f;
    f.name = as_string(field(factors[k], "name", fp), fp + ".name");
    f.values = as_strings(field(factors[k], "values", fp), fp + ".values");
    d.states.factors.push_back(std::move(f));
  }

  const json& a0 = field(root, "agent0", origin);
  d.a0_actions = as_strings(field(a0, "actions", "agent0"), "agent0.actions");
  d.obs0 = load_obs_space(field(a0, "observations", "agent0"),
                          "agent0.observations");

  const json& frames = as_array(field(root, "frames", origin), "frames");
  for (size_t f = 0; f < frames.size(); ++f) {
    const std::string fp = idx("frames", f);
    Frame frame;
    frame.id = as_string(field(frames[f], "id", fp), fp + ".id");
    frame.actions = as_strings(field(frames[f], "actions", fp), fp + ".actions");
    frame.observations =
        load_obs_space(field(frames[f], "observations", fp), fp + ".observations");
    d.frames.push_back(std::move(frame));
  }
  // Controllers after all frames exist, so ids resolve across the pool.
  for (size_t f = 0; f < frames.size(); ++f) {
    const std::string fp = idx("frames", f) + ".fscs";
    const json& pool = as_array(field(frames[f], "fscs", idx("frames", f)), fp);
    for (size_t c = 0; c < pool.size(); ++c) {
      Fsc fsc = ld.load_fsc(pool[c], static_cast<int>(f), idx(fp, c));
      d.frames[f].fsc_pool.push_back(fsc.id);
      d.fscs.push_back(std::move(fsc));
    }
  }

  const json& pop = field(root, "population", origin);
  d.pop.n = as_int(field(pop, "n", "population"), "population.n");
  const json& assignments =
      as_array(field(pop, "assignments", "population"), "population.assignments");
  for (size_t i = 0; i < assignments.size(); ++i) {
    const std::string ap = idx("population.assignments", i);
    const json& a = assignments[i];
    const int frame = ld.frame_index(
        as_string(field(a, "frame", ap), ap + ".frame"), ap + ".frame");
    if (frame == kAgent0Frame) fail(ap + ".frame", "cannot assign agent0");
    const int fsc =
        ld.fsc_index(as_string(field(a, "fsc", ap), ap + ".fsc"), ap + ".fsc");
    const int count = as_int(field(a, "count", ap), ap + ".count");
    if (count < 0) fail(ap + ".count", "count must be nonnegative");
    for (int c = 0; c < count; ++c) {
      d.pop.frame_of.push_back(frame);
      d.pop.fsc_of.push_back(fsc);
    }
  }
  if (static_cast<int>(d.pop.frame_of.size()) != d.pop.n)
    fail("population.assignments",
         "assignment counts sum to " + std::to_string(d.pop.frame_of.size()) +
             " but n is " + std::to_string(d.pop.n));

  const json& graphs = field(root, "hypergraphs", origin);
  ld.load_edges(d.t_graph, field(graphs, "transition", "hypergraphs"),
                "hypergraphs.transition");
  ld.load_edges(d.o_graph, field(graphs, "observation", "hypergraphs"),
                "hypergraphs.observation");
  ld.load_edges(d.r_graph, field(graphs, "reward", "hypergraphs"),
                "hypergraphs.reward");
  d.frame_o_graphs.assign(d.frames.size(),
                          FrameActionHypergraph(FunctionKind::Observation));
  const json& fo = field(graphs, "frame_observation", "hypergraphs");
  if (!fo.is_object())
    fail("hypergraphs.frame_observation", "expected an object keyed by frame id");
  for (auto it = fo.begin(); it != fo.end(); ++it) {
    const std::string fp = "hypergraphs.frame_observation." + it.key();
    const int f = ld.frame_index(it.key(), fp);
    if (f == kAgent0Frame) fail(fp, "agent0 has no frame observation graph");
    ld.load_edges(d.frame_o_graphs[static_cast<size_t>(f)], it.value(), fp);
  }

  auto dyn = std::make_shared<RuleDynamics>();
  const json& dj = field(root, "dynamics", origin);
  dyn->population_n =
      as_int(field(dj, "population_n", "dynamics"), "dynamics.population_n");
  ld.load_table(dyn->transition_rules, field(dj, "transition", "dynamics"),
                false, "dynamics.transition");
  ld.load_table(dyn->observation_rules, field(dj, "observation", "dynamics"),
                false, "dynamics.observation");
  ld.load_table(dyn->frame_obs_rules, field(dj, "frame_observation", "dynamics"),
                true, "dynamics.frame_observation");
  ld.load_table(dyn->reward_rules, field(root, "reward", origin), false,
                "reward");
  d.dynamics = dyn;

  const json& ib = field(root, "initial_belief", origin);
  d.initial_state_dist =
      as_row(field(ib, "state", "initial_belief"), "initial_belief.state");
  const json& models = field(ib, "models", "initial_belief");
  if (models.is_string()) {
    const std::string kind = models.get<std::string>();
    if (kind == "uniform")
      d.initial_models.kind = InitialModelBelief::Kind::Uniform;
    else if (kind == "node0")
      d.initial_models.kind = InitialModelBelief::Kind::Node0;
    else
      fail("initial_belief.models", "expected 'uniform', 'node0', or explicit");
  } else {
    const json& ex = field(models, "explicit", "initial_belief.models");
    d.initial_models.kind = InitialModelBelief::Kind::Explicit;
    const std::string xp = "initial_belief.models.explicit";
    as_array(ex, xp);
    for (size_t a = 0; a < ex.size(); ++a) {
      const json& per_state = as_array(ex[a], idx(xp, a));
      std::vector<std::vector<double>> rows;
      for (size_t s = 0; s < per_state.size(); ++s)
        rows.push_back(as_row(per_state[s], idx(idx(xp, a), s)));
      d.initial_models.explicit_dists.push_back(std::move(rows));
    }
  }

  d.finalize();
  d.validate().require("domain " + origin);
  return d;
}

Domain load_domain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open domain file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_domain_json(buf.str(), path);
}

void save_domain(const Domain& domain, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << domain_to_json(domain) << '\n';
  if (!out) throw ValidationError("failed writing " + path);
}

}  // namespace maip
