#include "support/random_instance.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <unordered_map>

namespace maip::testing {

namespace {

using Table = std::unordered_map<std::string, std::vector<double>>;

int pick(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::vector<double> random_dist(std::mt19937_64& rng, int size) {
  std::vector<double> row(static_cast<size_t>(size));
  double total = 0.0;
  for (double& v : row) {
    v = 0.05 + std::generate_canonical<double, 53>(rng);
    total += v;
  }
  for (double& v : row) v /= total;
  return row;
}

std::string table_key(char kind, std::initializer_list<int> ids,
                      std::span<const int> counts) {
  std::string key(1, kind);
  auto append = [&key](int v) {
    key.append(reinterpret_cast<const char*>(&v), sizeof v);
  };
  for (int v : ids) append(v);
  for (int v : counts) append(v);
  return key;
}

const std::vector<double>& table_row(const Table& table, const std::string& key) {
  auto it = table.find(key);
  if (it == table.end()) throw LookupError("generated-instance table miss");
  return it->second;
}

/// Random neighborhood pair set over the given candidates: empty, all, or a
/// random subset (deduplicated by construction since candidates are unique).
std::vector<FrameActionPair> roll_pairs(std::mt19937_64& rng,
                                        const std::vector<FrameActionPair>& candidates,
                                        bool force_empty) {
  if (force_empty) return {};
  const int mode = pick(rng, 0, 9);
  if (mode < 2) return {};
  if (mode < 5) return candidates;
  std::vector<FrameActionPair> out;
  for (const FrameActionPair& p : candidates)
    if (rng() % 2 == 0) out.push_back(p);
  return out;
}

}  // namespace

Domain random_domain(std::uint64_t seed, InstanceOptions opt) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 0xd1b54a32d192ed03ULL);
  Domain d;
  d.name = "random-" + std::to_string(seed);

  // --- spaces ---------------------------------------------------------------
  const int num_factors = pick(rng, 1, 2);
  const char* value_names[3] = {"p", "q", "r"};
  for (int k = 0; k < num_factors; ++k) {
    StateSpace::Factor f;
    f.name = "x" + std::to_string(k);
    const int size = pick(rng, 2, 3);
    for (int v = 0; v < size; ++v) f.values.push_back(value_names[v]);
    d.states.factors.push_back(std::move(f));
  }

  const int num_a0 = pick(rng, 2, 3);
  for (int a = 0; a < num_a0; ++a) d.a0_actions.push_back("u" + std::to_string(a));

  const char* comp_names[2] = {"a", "b"};
  auto roll_obs_space = [&](bool force_first_two) {
    ObsSpace obs;
    for (int k = 0; k < num_factors; ++k) {
      const int size = (force_first_two && k == 0) ? 2 : pick(rng, 1, 2);
      std::vector<std::string> comps;
      for (int c = 0; c < size; ++c) comps.push_back(comp_names[c]);
      obs.components.push_back(std::move(comps));
    }
    return obs;
  };
  d.obs0 = roll_obs_space(opt.zero_obs);

  // --- frames, controllers, population --------------------------------------
  const int num_frames = pick(rng, 1, 2);
  for (int f = 0; f < num_frames; ++f) {
    Frame frame;
    frame.id = "f" + std::to_string(f);
    const int num_actions = pick(rng, 2, 3);
    for (int a = 0; a < num_actions; ++a)
      frame.actions.push_back("v" + std::to_string(a));
    frame.observations = roll_obs_space(false);
    d.frames.push_back(std::move(frame));
  }
  for (int f = 0; f < num_frames; ++f) {
    const int pool = pick(rng, 1, 2);
    for (int c = 0; c < pool; ++c) {
      Fsc fsc;
      fsc.id = "c" + std::to_string(f) + std::to_string(c);
      fsc.frame = f;
      fsc.num_nodes = pick(rng, 1, 2);
      const int acts = d.frames[static_cast<size_t>(f)].num_actions();
      const int wj = d.frames[static_cast<size_t>(f)].observations.joint_size();
      for (int m = 0; m < fsc.num_nodes; ++m)
        fsc.action_dist.push_back(random_dist(rng, acts));
      fsc.node_transition.assign(
          static_cast<size_t>(fsc.num_nodes),
          std::vector<std::vector<std::vector<double>>>(
              static_cast<size_t>(acts),
              std::vector<std::vector<double>>(static_cast<size_t>(wj))));
      for (int m = 0; m < fsc.num_nodes; ++m)
        for (int a = 0; a < acts; ++a)
          for (int w = 0; w < wj; ++w)
            fsc.node_transition[static_cast<size_t>(m)][static_cast<size_t>(a)]
                               [static_cast<size_t>(w)] =
                random_dist(rng, fsc.num_nodes);
      d.frames[static_cast<size_t>(f)].fsc_pool.push_back(fsc.id);
      d.fscs.push_back(std::move(fsc));
    }
  }

  d.pop.n = pick(rng, 1, 3);
  for (int j = 0; j < d.pop.n; ++j) {
    const int f = pick(rng, 0, num_frames - 1);
    std::vector<int> in_frame;
    for (size_t c = 0; c < d.fscs.size(); ++c)
      if (d.fscs[c].frame == f) in_frame.push_back(static_cast<int>(c));
    d.pop.frame_of.push_back(f);
    d.pop.fsc_of.push_back(
        in_frame[static_cast<size_t>(pick(rng, 0, static_cast<int>(in_frame.size()) - 1))]);
  }

  // --- hypergraphs ------------------------------------------------------------
  std::vector<FrameActionPair> modeled_pairs;
  for (int f = 0; f < num_frames; ++f)
    for (int a = 0; a < d.frames[static_cast<size_t>(f)].num_actions(); ++a)
      modeled_pairs.push_back({f, a});
  std::vector<FrameActionPair> frame_obs_pairs = modeled_pairs;
  for (int a = 0; a < num_a0; ++a) frame_obs_pairs.push_back({kAgent0Frame, a});

  const int w0 = d.obs0.joint_size();
  for (int k = 0; k < num_factors; ++k) {
    const int xs = d.states.factor_size(k);
    for (int x = 0; x < xs; ++x)
      for (int a0 = 0; a0 < num_a0; ++a0) {
        for (const FrameActionPair& p : roll_pairs(rng, modeled_pairs, opt.pomdp))
          for (int x2 = 0; x2 < xs; ++x2) d.t_graph.add_edge(k, x, a0, x2, p);
        for (const FrameActionPair& p : roll_pairs(rng, modeled_pairs, opt.pomdp))
          d.r_graph.add_edge(k, x, a0, 0, p);
      }
    for (int x2 = 0; x2 < xs; ++x2)
      for (int a0 = 0; a0 < num_a0; ++a0)
        for (const FrameActionPair& p : roll_pairs(rng, modeled_pairs, opt.pomdp))
          for (int w = 0; w < w0; ++w) d.o_graph.add_edge(k, x2, a0, w, p);
  }
  d.frame_o_graphs.assign(static_cast<size_t>(num_frames),
                          FrameActionHypergraph(FunctionKind::Observation));
  for (int f = 0; f < num_frames; ++f) {
    const Frame& frame = d.frames[static_cast<size_t>(f)];
    const int wj = frame.observations.joint_size();
    for (int k = 0; k < num_factors; ++k) {
      const int xs = d.states.factor_size(k);
      for (int x2 = 0; x2 < xs; ++x2)
        for (int a = 0; a < frame.num_actions(); ++a)
          for (const FrameActionPair& p :
               roll_pairs(rng, frame_obs_pairs, opt.pomdp))
            for (int w = 0; w < wj; ++w)
              d.frame_o_graphs[static_cast<size_t>(f)].add_edge(k, x2, a, w, p);
    }
  }

  d.finalize();

  // --- table dynamics over enumerated configurations -------------------------
  auto tables = std::make_shared<Table>();
  const int n = d.pop.n;
  for (int k = 0; k < num_factors; ++k) {
    const int xs = d.states.factor_size(k);
    for (int a0 = 0; a0 < num_a0; ++a0) {
      for (int x = 0; x < xs; ++x) {
        for (const Configuration& c :
             enumerate_configs(d.t_graph.neighborhood(k, x, a0, 0), n))
          (*tables)[table_key('T', {k, x, a0}, c.counts)] = random_dist(rng, xs);
        for (const Configuration& c :
             enumerate_configs(d.r_graph.neighborhood(k, x, a0, 0), n))
          (*tables)[table_key('R', {k, x, a0}, c.counts)] = {
              std::generate_canonical<double, 53>(rng) * 2.0 - 1.0};
      }
      for (int x2 = 0; x2 < xs; ++x2)
        for (const Configuration& c :
             enumerate_configs(d.o_graph.neighborhood(k, x2, a0, 0), n)) {
          std::vector<double> row = random_dist(rng, d.obs0.component_size(k));
          if (opt.zero_obs && k == 0) {
            // Component 0 of the first factor never occurs.
            const double keep = 1.0 - row[0];
            row[0] = 0.0;
            for (double& v : row) v /= keep;
          }
          (*tables)[table_key('O', {k, x2, a0}, c.counts)] = std::move(row);
        }
    }
  }
  for (int f = 0; f < num_frames; ++f) {
    const Frame& frame = d.frames[static_cast<size_t>(f)];
    for (int k = 0; k < num_factors; ++k) {
      const int xs = d.states.factor_size(k);
      for (int x2 = 0; x2 < xs; ++x2)
        for (int a = 0; a < frame.num_actions(); ++a)
          for (const Configuration& c : enumerate_configs(
                   d.frame_o_graphs[static_cast<size_t>(f)].neighborhood(k, x2, a, 0),
                   n))
            (*tables)[table_key('F', {f, k, x2, a}, c.counts)] =
                random_dist(rng, frame.observations.component_size(k));
    }
  }

  auto dyn = std::make_shared<LambdaDynamics>();
  dyn->transition_fn = [tables](int k, int x, int a0, const Neighborhood&,
                                const Configuration& c, int x2) {
    return table_row(*tables, table_key('T', {k, x, a0}, c.counts))
        .at(static_cast<size_t>(x2));
  };
  dyn->observation_fn = [tables](int k, int x2, int a0, const Neighborhood&,
                                 const Configuration& c, int w) {
    return table_row(*tables, table_key('O', {k, x2, a0}, c.counts))
        .at(static_cast<size_t>(w));
  };
  dyn->frame_observation_fn = [tables](int f, int k, int x2, int a,
                                       const Neighborhood&, const Configuration& c,
                                       int w) {
    return table_row(*tables, table_key('F', {f, k, x2, a}, c.counts))
        .at(static_cast<size_t>(w));
  };
  dyn->reward_fn = [tables](int k, int x, int a0, const Neighborhood&,
                            const Configuration& c) {
    return table_row(*tables, table_key('R', {k, x, a0}, c.counts))[0];
  };
  d.dynamics = dyn;

  // --- initial belief ---------------------------------------------------------
  d.initial_state_dist = random_dist(rng, d.num_states());
  if (pick(rng, 0, 2) == 0 && d.num_states() > 1) {
    // Sparse start: zero out some states, keep at least one.
    for (size_t s = 1; s < d.initial_state_dist.size(); ++s)
      if (rng() % 2 == 0) d.initial_state_dist[s] = 0.0;
    double total = 0.0;
    for (double v : d.initial_state_dist) total += v;
    for (double& v : d.initial_state_dist) v /= total;
  }
  switch (pick(rng, 0, 2)) {
    case 0:
      d.initial_models.kind = InitialModelBelief::Kind::Uniform;
      break;
    case 1:
      d.initial_models.kind = InitialModelBelief::Kind::Node0;
      break;
    default: {
      d.initial_models.kind = InitialModelBelief::Kind::Explicit;
      for (int j = 0; j < d.pop.n; ++j) {
        std::vector<std::vector<double>> per_state;
        const int nodes = d.fscs[static_cast<size_t>(d.pop.fsc_of[static_cast<size_t>(j)])]
                              .num_nodes;
        for (int s = 0; s < d.num_states(); ++s)
          per_state.push_back(random_dist(rng, nodes));
        d.initial_models.explicit_dists.push_back(std::move(per_state));
      }
      break;
    }
  }

  d.validate().require("generated instance");
  return d;
}

FactoredBelief random_belief(const Domain& domain, std::mt19937_64& rng) {
  FactoredBelief b;
  b.state_dist = random_dist(rng, domain.num_states());
  if (pick(rng, 0, 2) == 0 && domain.num_states() > 1) {
    for (size_t s = 1; s < b.state_dist.size(); ++s)
      if (rng() % 2 == 0) b.state_dist[s] = 0.0;
    double total = 0.0;
    for (double v : b.state_dist) total += v;
    for (double& v : b.state_dist) v /= total;
  }
  for (int j = 0; j < domain.pop.n; ++j) {
    const int nodes =
        domain.fscs[static_cast<size_t>(domain.pop.fsc_of[static_cast<size_t>(j)])]
            .num_nodes;
    std::vector<std::vector<double>> per_state;
    for (int s = 0; s < domain.num_states(); ++s)
      per_state.push_back(random_dist(rng, nodes));
    b.model_dists.push_back(std::move(per_state));
  }
  b.placeholder.assign(static_cast<size_t>(domain.num_states()), 0);
  return b;
}

double belief_distance(const FactoredBelief& a, const FactoredBelief& b) {
  double worst = 0.0;
  for (size_t s = 0; s < a.state_dist.size(); ++s)
    worst = std::max(worst, std::abs(a.state_dist[s] - b.state_dist[s]));
  for (size_t j = 0; j < a.model_dists.size(); ++j)
    for (size_t s = 0; s < a.model_dists[j].size(); ++s)
      for (size_t m = 0; m < a.model_dists[j][s].size(); ++m)
        worst = std::max(worst, std::abs(a.model_dists[j][s][m] -
                                         b.model_dists[j][s][m]));
  return worst;
}

Domain deterministic_domain() {
  Domain d;
  d.name = "deterministic";
  d.states.factors.push_back({"x", {"x0", "x1"}});
  d.a0_actions = {"keep", "flip"};
  d.obs0.components = {{"a", "b"}};

  Frame frame;
  frame.id = "f0";
  frame.actions = {"v0", "v1"};
  frame.observations.components = {{"a"}};
  frame.fsc_pool = {"c0"};
  d.frames.push_back(frame);

  Fsc fsc;
  fsc.id = "c0";
  fsc.frame = 0;
  fsc.num_nodes = 1;
  fsc.action_dist = {{0.5, 0.5}};
  fsc.node_transition = {{{{1.0}}, {{1.0}}}};
  d.fscs.push_back(fsc);

  d.pop.n = 1;
  d.pop.frame_of = {0};
  d.pop.fsc_of = {0};

  d.frame_o_graphs.assign(1, FrameActionHypergraph(FunctionKind::Observation));
  d.finalize();

  auto dyn = std::make_shared<LambdaDynamics>();
  dyn->transition_fn = [](int, int x, int a0, const Neighborhood&,
                          const Configuration&, int x2) {
    const int next = a0 == 0 ? x : 1 - x;
    return x2 == next ? 1.0 : 0.0;
  };
  dyn->observation_fn = [](int, int x2, int, const Neighborhood&,
                           const Configuration&, int w) {
    return w == x2 ? 1.0 : 0.0;
  };
  dyn->frame_observation_fn = [](int, int, int, int, const Neighborhood&,
                                 const Configuration&, int) { return 1.0; };
  dyn->reward_fn = [](int, int x, int, const Neighborhood&,
                      const Configuration&) { return x == 0 ? 1.0 : 0.0; };
  d.dynamics = dyn;

  d.initial_state_dist = {1.0, 0.0};
  d.initial_models.kind = InitialModelBelief::Kind::Node0;
  d.validate().require("deterministic instance");
  return d;
}

}  // namespace maip::testing
