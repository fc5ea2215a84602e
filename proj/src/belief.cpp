#include "maip/belief.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace maip {

namespace {

constexpr double kUnderflowGuard = 1e-300;

/// Appends the raw bytes of `v` to `out` (exact-equality cache keys).
template <typename T>
void append_bytes(std::string& out, const T& v) {
  const char* p = reinterpret_cast<const char*>(&v);
  out.append(p, p + sizeof(T));
}

/// Product of nonnegative factors with an underflow fallback: a zero factor
/// gives an exact zero; otherwise factors below the guard switch the product
/// to log space so that graded tiny masses stay ordered.
template <typename GetFactor>
double guarded_product(int n, GetFactor&& get) {
  double p = 1.0;
  bool tiny = false;
  for (int i = 0; i < n; ++i) {
    const double v = get(i);
    if (v == 0.0) return 0.0;
    if (v < kUnderflowGuard) tiny = true;
    p *= v;
  }
  if (tiny || p == 0.0) {
    double lg = 0.0;
    for (int i = 0; i < n; ++i) lg += std::log(get(i));
    p = std::exp(lg);
  }
  return p;
}

std::vector<int> build_factor_values(const StateSpace& states) {
  const int S = static_cast<int>(states.num_states());
  const int K = states.num_factors();
  std::vector<int> out(static_cast<std::size_t>(S) * K);
  for (int s = 0; s < S; ++s) {
    const std::vector<int> vals = states.state_values(s);
    for (int k = 0; k < K; ++k) out[static_cast<std::size_t>(s) * K + k] = vals[k];
  }
  return out;
}

/// Representatives of exchangeable agents: same frame, same controller, and
/// bitwise-identical conditional node beliefs give identical posterior rows.
struct Groups {
  std::vector<int> rep_of;
  std::vector<int> reps;
};

Groups group_agents(const Domain& d, const FactoredBelief& b) {
  Groups g;
  g.rep_of.resize(static_cast<std::size_t>(d.pop.n));
  std::unordered_map<std::string, int> seen;
  std::string key;
  for (int j = 0; j < d.pop.n; ++j) {
    key.clear();
    append_bytes(key, d.pop.frame_of[j]);
    append_bytes(key, d.pop.fsc_of[j]);
    for (const auto& row : b.model_dists[j])
      key.append(reinterpret_cast<const char*>(row.data()),
                 reinterpret_cast<const char*>(row.data() + row.size()));
    auto [it, inserted] = seen.emplace(key, j);
    if (inserted) g.reps.push_back(j);
    g.rep_of[j] = it->second;
  }
  return g;
}

}  // namespace

// --- FactoredBelief ----------------------------------------------------------

std::size_t FactoredBelief::structural_size() const {
  std::size_t n = state_dist.size();
  for (const auto& agent : model_dists)
    for (const auto& row : agent) n += row.size();
  return n;
}

ValidationReport FactoredBelief::validate(const Domain& domain) const {
  ValidationReport rep;
  const int S = domain.num_states();
  if (num_states() != S) rep.add("belief state distribution has wrong length");
  else if (!is_distribution(state_dist, kBeliefSumTol))
    rep.add("belief state distribution does not sum to 1");
  if (num_agents() != domain.pop.n) {
    rep.add("belief has wrong agent count");
    return rep;
  }
  if (static_cast<int>(placeholder.size()) != S)
    rep.add("belief placeholder flags have wrong length");
  for (int j = 0; j < num_agents(); ++j) {
    if (static_cast<int>(model_dists[j].size()) != S) {
      rep.add("agent " + std::to_string(j) + ": wrong state count in model rows");
      continue;
    }
    const int nodes = domain.fscs.at(domain.pop.fsc_of[j]).num_nodes;
    for (int s = 0; s < S; ++s) {
      const auto& row = model_dists[j][s];
      if (static_cast<int>(row.size()) != nodes ||
          !is_distribution(row, kBeliefSumTol)) {
        rep.add("agent " + std::to_string(j) + ", state " + std::to_string(s) +
                ": node row is not a distribution");
        break;
      }
    }
  }
  return rep;
}

FactoredBelief make_initial_belief(const Domain& domain) {
  FactoredBelief b;
  b.state_dist = domain.initial_state_dist;
  const int S = domain.num_states();
  b.placeholder.assign(static_cast<std::size_t>(S), 0);
  b.model_dists.resize(static_cast<std::size_t>(domain.pop.n));
  for (int j = 0; j < domain.pop.n; ++j) {
    const int nodes = domain.fscs.at(domain.pop.fsc_of[j]).num_nodes;
    b.model_dists[j].resize(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s) {
      switch (domain.initial_models.kind) {
        case InitialModelBelief::Kind::Uniform:
          b.model_dists[j][s].assign(static_cast<std::size_t>(nodes),
                                     1.0 / nodes);
          break;
        case InitialModelBelief::Kind::Node0:
          b.model_dists[j][s].assign(static_cast<std::size_t>(nodes), 0.0);
          b.model_dists[j][s][0] = 1.0;
          break;
        case InitialModelBelief::Kind::Explicit:
          b.model_dists[j][s] = domain.initial_models.explicit_dists.at(j).at(s);
          break;
      }
    }
  }
  return b;
}

std::string dump_belief(const FactoredBelief& b) {
  std::ostringstream os;
  os.precision(17);
  for (int s = 0; s < b.num_states(); ++s) os << "s " << s << ' ' << b.state_dist[s] << '\n';
  for (int j = 0; j < b.num_agents(); ++j)
    for (int s = 0; s < b.num_states(); ++s)
      for (std::size_t m = 0; m < b.model_dists[j][s].size(); ++m)
        os << "m " << j << ' ' << s << ' ' << m << ' ' << b.model_dists[j][s][m]
           << '\n';
  return os.str();
}

// --- BeliefOps ----------------------------------------------------------------

FactoredBelief BeliefOps::compose(
    const std::vector<double>& posterior,
    const std::vector<std::vector<std::vector<double>>>& rows) const {
  const int S = domain_.num_states();
  const int N = domain_.pop.n;
  FactoredBelief nb;
  nb.state_dist = posterior;
  nb.placeholder.assign(static_cast<std::size_t>(S), 0);
  nb.model_dists.resize(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j)
    nb.model_dists[j].resize(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) {
    if (posterior[s] > 0.0) {
      for (int j = 0; j < N; ++j) {
        const auto& row = rows[j][s];
        if (row.empty())
          throw ZeroEvidenceError(
              "no consistent node posterior for agent " + std::to_string(j) +
              " at reachable state " + std::to_string(s));
        nb.model_dists[j][s] = row;
      }
    } else {
      nb.placeholder[s] = 1;
      for (int j = 0; j < N; ++j) {
        const int nodes = domain_.fscs.at(domain_.pop.fsc_of[j]).num_nodes;
        nb.model_dists[j][s].assign(static_cast<std::size_t>(nodes), 1.0 / nodes);
      }
    }
  }
  return nb;
}

// --- StructuredOps -------------------------------------------------------------

StructuredOps::StructuredOps(const Domain& domain, double prune_eps)
    : BeliefOps(domain),
      trivial_(domain.all_models_trivial()),
      prune_eps_(prune_eps),
      factor_value_(build_factor_values(domain.states)) {}

void StructuredOps::refresh(const FactoredBelief& b) {
  if (trivial_) return;
  if (have_cache_key_ && cached_for_ == b) return;
  tries_.clear();
  rows_.clear();
  cached_for_ = b;
  have_cache_key_ = true;
}

const ConfigTrie& StructuredOps::trie_all(const FactoredBelief& b, int s,
                                          const Neighborhood& nu) {
  std::string key(1, 'A');
  if (!trivial_) append_bytes(key, s);
  key += nu.key();
  auto it = tries_.find(key);
  if (it != tries_.end()) return it->second;

  std::vector<std::vector<double>> cond(static_cast<std::size_t>(domain_.pop.n));
  for (int j = 0; j < domain_.pop.n; ++j) cond[j] = b.model_dists[j][s];
  std::size_t local_peak = 0;
  ConfigTrie t =
      config_distribution(nu, cond, domain_.population_models(),
                          domain_.pop.frame_of, prune_eps_, &local_peak);
  peak_ = std::max(peak_, local_peak);
  return tries_.emplace(std::move(key), std::move(t)).first->second;
}

const ConfigTrie& StructuredOps::trie_excl(const FactoredBelief& b, int s,
                                           const Neighborhood& nu, int rep,
                                           int a0) {
  std::string key(1, 'X');
  append_bytes(key, rep);
  append_bytes(key, a0);
  if (!trivial_) append_bytes(key, s);
  key += nu.key();
  auto it = tries_.find(key);
  if (it != tries_.end()) return it->second;

  std::vector<std::vector<double>> cond(static_cast<std::size_t>(domain_.pop.n));
  for (int j = 0; j < domain_.pop.n; ++j) cond[j] = b.model_dists[j][s];
  std::size_t local_peak = 0;
  ConfigTrie t = config_distribution_for_agent_j(
      nu, cond, domain_.population_models(), domain_.pop.frame_of, rep, a0,
      prune_eps_, &local_peak);
  peak_ = std::max(peak_, local_peak);
  return tries_.emplace(std::move(key), std::move(t)).first->second;
}

const std::vector<double>& StructuredOps::t_row(const FactoredBelief& b, int s,
                                                int k, int x, int a0) {
  const RowKey key{0, k, x, a0, trivial_ ? -1 : s, -1, -1};
  auto it = rows_.find(key);
  if (it != rows_.end()) return it->second;

  const int width = domain_.states.factor_size(k);
  std::vector<double> acc(static_cast<std::size_t>(width), 0.0);
  std::vector<double> tmp(static_cast<std::size_t>(width));
  int t = 0;
  while (t < width) {
    const Neighborhood& nu = domain_.t_graph.neighborhood(k, x, a0, t);
    int t2 = t;
    while (t2 + 1 < width &&
           &domain_.t_graph.neighborhood(k, x, a0, t2 + 1) == &nu)
      ++t2;
    const auto fn = domain_.dynamics->transition_rows(k, x, a0, nu);
    const ConfigTrie& trie = trie_all(b, s, nu);
    trie.for_each([&](std::span<const int> ckey, double p) {
      scratch_.counts.assign(ckey.begin(), ckey.end());
      fn(scratch_, tmp);
      for (int v = t; v <= t2; ++v) acc[v] += p * tmp[v];
    });
    t = t2 + 1;
  }
  return rows_.emplace(key, std::move(acc)).first->second;
}

const std::vector<double>& StructuredOps::o_row(const FactoredBelief& b, int s,
                                                int k, int x_next, int a0) {
  const RowKey key{1, k, x_next, a0, trivial_ ? -1 : s, -1, -1};
  auto it = rows_.find(key);
  if (it != rows_.end()) return it->second;

  const int joint = domain_.obs0.joint_size();
  const int width = domain_.obs0.component_size(k);
  std::vector<double> acc(static_cast<std::size_t>(joint), 0.0);
  std::vector<double> tmp(static_cast<std::size_t>(width));
  std::vector<int> comp(static_cast<std::size_t>(joint));
  for (int w = 0; w < joint; ++w) comp[w] = domain_.obs0.component_of(w, k);
  int t = 0;
  while (t < joint) {
    const Neighborhood& nu = domain_.o_graph.neighborhood(k, x_next, a0, t);
    int t2 = t;
    while (t2 + 1 < joint &&
           &domain_.o_graph.neighborhood(k, x_next, a0, t2 + 1) == &nu)
      ++t2;
    const auto fn = domain_.dynamics->observation_rows(k, x_next, a0, nu);
    const ConfigTrie& trie = trie_all(b, s, nu);
    trie.for_each([&](std::span<const int> ckey, double p) {
      scratch_.counts.assign(ckey.begin(), ckey.end());
      fn(scratch_, tmp);
      for (int w = t; w <= t2; ++w) acc[w] += p * tmp[comp[w]];
    });
    t = t2 + 1;
  }
  return rows_.emplace(key, std::move(acc)).first->second;
}

const std::vector<double>& StructuredOps::f_row(const FactoredBelief& b, int s,
                                                int rep, int k, int x_next, int a,
                                                int a0) {
  const RowKey key{2, k, x_next, a, trivial_ ? -1 : s, rep, a0};
  auto it = rows_.find(key);
  if (it != rows_.end()) return it->second;

  const int frame = domain_.pop.frame_of[rep];
  const ObsSpace& obs = domain_.frames[frame].observations;
  const FrameActionHypergraph& graph = domain_.frame_o_graphs[frame];
  const int joint = obs.joint_size();
  const int width = obs.component_size(k);
  std::vector<double> acc(static_cast<std::size_t>(joint), 0.0);
  std::vector<double> tmp(static_cast<std::size_t>(width));
  std::vector<int> comp(static_cast<std::size_t>(joint));
  for (int w = 0; w < joint; ++w) comp[w] = obs.component_of(w, k);
  int t = 0;
  while (t < joint) {
    const Neighborhood& nu = graph.neighborhood(k, x_next, a, t);
    int t2 = t;
    while (t2 + 1 < joint && &graph.neighborhood(k, x_next, a, t2 + 1) == &nu)
      ++t2;
    const auto fn = domain_.dynamics->frame_observation_rows(frame, k, x_next, a, nu);
    const ConfigTrie& trie = trie_excl(b, s, nu, rep, a0);
    trie.for_each([&](std::span<const int> ckey, double p) {
      scratch_.counts.assign(ckey.begin(), ckey.end());
      fn(scratch_, tmp);
      for (int w = t; w <= t2; ++w) acc[w] += p * tmp[comp[w]];
    });
    t = t2 + 1;
  }
  return rows_.emplace(key, std::move(acc)).first->second;
}

double StructuredOps::r_val(const FactoredBelief& b, int s, int k, int x, int a0) {
  const RowKey key{3, k, x, a0, trivial_ ? -1 : s, -1, -1};
  auto it = rows_.find(key);
  if (it != rows_.end()) return it->second[0];

  const Neighborhood& nu = domain_.r_graph.neighborhood(k, x, a0);
  const auto fn = domain_.dynamics->reward_values(k, x, a0, nu);
  const ConfigTrie& trie = trie_all(b, s, nu);
  double acc = 0.0;
  trie.for_each([&](std::span<const int> ckey, double p) {
    scratch_.counts.assign(ckey.begin(), ckey.end());
    acc += p * fn(scratch_);
  });
  rows_.emplace(key, std::vector<double>{acc});
  return acc;
}

StateStep StructuredOps::state_step(const FactoredBelief& b, int a0) {
  refresh(b);
  const int S = domain_.num_states();
  const int K = domain_.states.num_factors();
  const int W = domain_.obs0.joint_size();

  std::vector<std::vector<double>> joint(
      static_cast<std::size_t>(W), std::vector<double>(static_cast<std::size_t>(S), 0.0));

  std::vector<const std::vector<double>*> tr(static_cast<std::size_t>(K));
  std::vector<std::vector<const std::vector<double>*>> orows(
      static_cast<std::size_t>(K));
  for (int s = 0; s < S; ++s) {
    const double bs = b.state_dist[s];
    if (bs <= 0.0) continue;
    const int* vals = &factor_value_[static_cast<std::size_t>(s) * K];
    for (int k = 0; k < K; ++k) {
      tr[k] = &t_row(b, s, k, vals[k], a0);
      const int xs = domain_.states.factor_size(k);
      orows[k].resize(static_cast<std::size_t>(xs));
      for (int v = 0; v < xs; ++v) orows[k][v] = &o_row(b, s, k, v, a0);
    }
    for (int s2 = 0; s2 < S; ++s2) {
      const int* nvals = &factor_value_[static_cast<std::size_t>(s2) * K];
      const double tb =
          guarded_product(K, [&](int k) { return (*tr[k])[nvals[k]]; });
      if (tb == 0.0) continue;
      const double mass = bs * tb;
      for (int w = 0; w < W; ++w) {
        const double ob = guarded_product(
            K, [&](int k) { return (*orows[k][nvals[k]])[w]; });
        if (ob != 0.0) joint[w][s2] += mass * ob;
      }
    }
  }

  StateStep out;
  out.lik.assign(static_cast<std::size_t>(W), 0.0);
  out.posterior.resize(static_cast<std::size_t>(W));
  for (int w = 0; w < W; ++w) {
    double lik = 0.0;
    for (double v : joint[w]) lik += v;
    out.lik[w] = lik;
    if (lik > 0.0) {
      out.posterior[w] = std::move(joint[w]);
      for (double& v : out.posterior[w]) v /= lik;
    }
  }
  return out;
}

std::vector<std::vector<std::vector<double>>> StructuredOps::model_rows(
    const FactoredBelief& b, int a0) {
  refresh(b);
  const int S = domain_.num_states();
  const int K = domain_.states.num_factors();
  const int N = domain_.pop.n;
  std::vector<std::vector<std::vector<double>>> rows(static_cast<std::size_t>(N));

  Groups groups = group_agents(domain_, b);
  std::vector<std::vector<std::vector<double>>> rep_rows(static_cast<std::size_t>(N));

  for (int rep : groups.reps) {
    const Fsc& fsc = domain_.fscs[domain_.pop.fsc_of[rep]];
    if (fsc.num_nodes == 1) continue;  // point mass, assembled below
    const int frame = domain_.pop.frame_of[rep];
    const Frame& fr = domain_.frames[frame];
    const int M = fsc.num_nodes;
    const int A = fr.num_actions();
    const int WJ = fr.observations.joint_size();

    std::vector<std::vector<double>> acc(
        static_cast<std::size_t>(S), std::vector<double>(static_cast<std::size_t>(M), 0.0));

    // frow[k][v][a] -> expectation row over the frame's joint observations
    std::vector<std::vector<std::vector<const std::vector<double>*>>> frow(
        static_cast<std::size_t>(K));
    for (int s = 0; s < S; ++s) {
      const double bs = b.state_dist[s];
      if (bs <= 0.0) continue;
      for (int k = 0; k < K; ++k) {
        const int xs = domain_.states.factor_size(k);
        frow[k].resize(static_cast<std::size_t>(xs));
        for (int v = 0; v < xs; ++v) {
          frow[k][v].resize(static_cast<std::size_t>(A));
          for (int a = 0; a < A; ++a)
            frow[k][v][a] = &f_row(b, s, rep, k, v, a, a0);
        }
      }
      const auto& pm = b.model_dists[rep][s];
      for (int s2 = 0; s2 < S; ++s2) {
        const int* nvals = &factor_value_[static_cast<std::size_t>(s2) * K];
        auto& out_row = acc[s2];
        for (int m = 0; m < M; ++m) {
          const double wm = pm[m];
          if (wm <= 0.0) continue;
          for (int a = 0; a < A; ++a) {
            const double wa = fsc.action_dist[m][a];
            if (wa <= 0.0) continue;
            const double w1 = bs * wm * wa;
            for (int w = 0; w < WJ; ++w) {
              const double e = guarded_product(
                  K, [&](int k) { return (*frow[k][nvals[k]][a])[w]; });
              if (e == 0.0) continue;
              const double w2 = w1 * e;
              const auto step = fsc.step_distribution(m, a, w);
              for (int m2 = 0; m2 < M; ++m2) out_row[m2] += w2 * step[m2];
            }
          }
        }
      }
    }
    // normalize per successor state; zero mass -> empty marker
    for (int s2 = 0; s2 < S; ++s2) {
      double mass = 0.0;
      for (double v : acc[s2]) mass += v;
      if (mass <= 0.0)
        acc[s2].clear();
      else
        for (double& v : acc[s2]) v /= mass;
    }
    rep_rows[rep] = std::move(acc);
  }

  for (int j = 0; j < N; ++j) {
    const Fsc& fsc = domain_.fscs[domain_.pop.fsc_of[j]];
    if (fsc.num_nodes == 1) {
      rows[j].assign(static_cast<std::size_t>(S), std::vector<double>{1.0});
    } else {
      rows[j] = rep_rows[groups.rep_of[j]];
    }
  }
  return rows;
}

double StructuredOps::expected_reward(const FactoredBelief& b, int a0) {
  refresh(b);
  const int S = domain_.num_states();
  const int K = domain_.states.num_factors();
  double total = 0.0;
  for (int s = 0; s < S; ++s) {
    const double bs = b.state_dist[s];
    if (bs == 0.0) continue;
    const int* vals = &factor_value_[static_cast<std::size_t>(s) * K];
    double sum_k = 0.0;
    for (int k = 0; k < K; ++k) sum_k += r_val(b, s, k, vals[k], a0);
    total += bs * sum_k;
  }
  return total;
}

// --- NaiveOps -------------------------------------------------------------------

namespace {

/// Depth-first enumeration of every joint (node, action) choice of the modeled
/// agents, accumulating the probability weight and maintaining the
/// configuration over `nu` incrementally.  `skip` (or -1) is left out.
template <typename Leaf>
void enum_joint(const Domain& d, const FactoredBelief& b, int s,
                const Neighborhood& nu, Configuration& cfg, int j, double w,
                int skip, Leaf&& leaf) {
  if (j == d.pop.n) {
    leaf(w);
    return;
  }
  if (j == skip) {
    enum_joint(d, b, s, nu, cfg, j + 1, w, skip, leaf);
    return;
  }
  const Fsc& fsc = d.fscs[d.pop.fsc_of[j]];
  const int frame = d.pop.frame_of[j];
  const auto& node_belief = b.model_dists[j][s];
  for (int m = 0; m < fsc.num_nodes; ++m) {
    const double wm = node_belief[m];
    if (wm <= 0.0) continue;
    const auto& adist = fsc.action_dist[m];
    for (std::size_t a = 0; a < adist.size(); ++a) {
      const double wa = adist[a];
      if (wa <= 0.0) continue;
      const int slot = nu.slot_of(frame, static_cast<int>(a));
      ++cfg.counts[slot];
      enum_joint(d, b, s, nu, cfg, j + 1, w * wm * wa, skip, leaf);
      --cfg.counts[slot];
    }
  }
}

}  // namespace

NaiveOps::NaiveOps(const Domain& domain, long long guard)
    : BeliefOps(domain), factor_value_(build_factor_values(domain.states)) {
  long long actions = 1, nodes = 1;
  for (int j = 0; j < domain.pop.n; ++j) {
    const Fsc& fsc = domain.fscs[domain.pop.fsc_of[j]];
    const int na = domain.frames[domain.pop.frame_of[j]].num_actions();
    if (actions > guard / std::max(na, 1))
      throw GuardError("joint action space exceeds guard (" +
                       std::to_string(guard) + "): at least " +
                       std::to_string(actions) + " x " + std::to_string(na));
    actions *= na;
    if (nodes > guard / std::max(fsc.num_nodes, 1))
      throw GuardError("joint node space exceeds guard (" +
                       std::to_string(guard) + "): at least " +
                       std::to_string(nodes) + " x " +
                       std::to_string(fsc.num_nodes));
    nodes *= fsc.num_nodes;
  }
}

void NaiveOps::refresh(const FactoredBelief& b) {
  if (have_cache_key_ && cached_for_ == b) return;
  rows_.clear();
  cached_for_ = b;
  have_cache_key_ = true;
}

const std::vector<double>& NaiveOps::t_row(const FactoredBelief& b, int s, int k,
                                           int x, int a0) {
  const RowKey key{0, k, x, a0, s, -1, -1};
  auto it = rows_.find(key);
  if (it != rows_.end()) return it->second;

  const int width = domain_.states.factor_size(k);
  std::vector<double> acc(static_cast<std::size_t>(width), 0.0);
  std::vector<double> tmp(static_cast<std::size_t>(width));
  Configuration cfg;
  int t = 0;
  while (t < width) {
    const Neighborhood& nu = domain_.t_graph.neighborhood(k, x, a0, t);
    int t2 = t;
    while (t2 + 1 < width &&
           &domain_.t_graph.neighborhood(k, x, a0, t2 + 1) == &nu)
      ++t2;
    const auto fn = domain_.dynamics->transition_rows(k, x, a0, nu);
    cfg.counts.assign(static_cast<std::size_t>(nu.num_slots()), 0);
    enum_joint(domain_, b, s, nu, cfg, 0, 1.0, -1, [&](double w) {
      fn(cfg, tmp);
      for (int v = t; v <= t2; ++v) acc[v] += w * tmp[v];
    });
    t = t2 + 1;
  }
  return rows_.emplace(key, std::move(acc)).first->second;
}

const std::vector<double>& NaiveOps::o_row(const FactoredBelief& b, int s, int k,
                                           int x_next, int a0) {
  const RowKey key{1, k, x_next, a0, s, -1, -1};
  auto it = rows_.find(key);
  if (it != rows_.end()) return it->second;

  const int joint = domain_.obs0.joint_size();
  const int width = domain_.obs0.component_size(k);
  std::vector<double> acc(static_cast<std::size_t>(joint), 0.0);
  std::vector<double> tmp(static_cast<std::size_t>(width));
  std::vector<int> comp(static_cast<std::size_t>(joint));
  for (int w = 0; w < joint; ++w) comp[w] = domain_.obs0.component_of(w, k);
  Configuration cfg;
  int t = 0;
  while (t < joint) {
    const Neighborhood& nu = domain_.o_graph.neighborhood(k, x_next, a0, t);
    int t2 = t;
    while (t2 + 1 < joint &&
           &domain_.o_graph.neighborhood(k, x_next, a0, t2 + 1) == &nu)
      ++t2;
    const auto fn = domain_.dynamics->observation_rows(k, x_next, a0, nu);
    cfg.counts.assign(static_cast<std::size_t>(nu.num_slots()), 0);
    enum_joint(domain_, b, s, nu, cfg, 0, 1.0, -1, [&](double w) {
      fn(cfg, tmp);
      for (int o = t; o <= t2; ++o) acc[o] += w * tmp[comp[o]];
    });
    t = t2 + 1;
  }
  return rows_.emplace(key, std::move(acc)).first->second;
}

double NaiveOps::r_val(const FactoredBelief& b, int s, int k, int x, int a0) {
  const RowKey key{3, k, x, a0, s, -1, -1};
  auto it = rows_.find(key);
  if (it != rows_.end()) return it->second[0];

  const Neighborhood& nu = domain_.r_graph.neighborhood(k, x, a0);
  const auto fn = domain_.dynamics->reward_values(k, x, a0, nu);
  Configuration cfg;
  cfg.counts.assign(static_cast<std::size_t>(nu.num_slots()), 0);
  double acc = 0.0;
  enum_joint(domain_, b, s, nu, cfg, 0, 1.0, -1,
             [&](double w) { acc += w * fn(cfg); });
  rows_.emplace(key, std::vector<double>{acc});
  return acc;
}

StateStep NaiveOps::state_step(const FactoredBelief& b, int a0) {
  refresh(b);
  const int S = domain_.num_states();
  const int K = domain_.states.num_factors();
  const int W = domain_.obs0.joint_size();

  std::vector<std::vector<double>> joint(
      static_cast<std::size_t>(W), std::vector<double>(static_cast<std::size_t>(S), 0.0));
  std::vector<const std::vector<double>*> tr(static_cast<std::size_t>(K));
  std::vector<std::vector<const std::vector<double>*>> orows(
      static_cast<std::size_t>(K));
  for (int s = 0; s < S; ++s) {
    const double bs = b.state_dist[s];
    if (bs <= 0.0) continue;
    const int* vals = &factor_value_[static_cast<std::size_t>(s) * K];
    for (int k = 0; k < K; ++k) {
      tr[k] = &t_row(b, s, k, vals[k], a0);
      const int xs = domain_.states.factor_size(k);
      orows[k].resize(static_cast<std::size_t>(xs));
      for (int v = 0; v < xs; ++v) orows[k][v] = &o_row(b, s, k, v, a0);
    }
    for (int s2 = 0; s2 < S; ++s2) {
      const int* nvals = &factor_value_[static_cast<std::size_t>(s2) * K];
      const double tb =
          guarded_product(K, [&](int k) { return (*tr[k])[nvals[k]]; });
      if (tb == 0.0) continue;
      const double mass = bs * tb;
      for (int w = 0; w < W; ++w) {
        const double ob = guarded_product(
            K, [&](int k) { return (*orows[k][nvals[k]])[w]; });
        if (ob != 0.0) joint[w][s2] += mass * ob;
      }
    }
  }

  StateStep out;
  out.lik.assign(static_cast<std::size_t>(W), 0.0);
  out.posterior.resize(static_cast<std::size_t>(W));
  for (int w = 0; w < W; ++w) {
    double lik = 0.0;
    for (double v : joint[w]) lik += v;
    out.lik[w] = lik;
    if (lik > 0.0) {
      out.posterior[w] = std::move(joint[w]);
      for (double& v : out.posterior[w]) v /= lik;
    }
  }
  return out;
}

std::vector<double> NaiveOps::model_row(const FactoredBelief& b, int a0,
                                        int s_next, int j) {
  refresh(b);
  const int K = domain_.states.num_factors();
  const Fsc& fsc = domain_.fscs[domain_.pop.fsc_of[j]];
  if (fsc.num_nodes == 1) return {1.0};

  const int frame = domain_.pop.frame_of[j];
  const Frame& fr = domain_.frames[frame];
  const FrameActionHypergraph& graph = domain_.frame_o_graphs[frame];
  const int M = fsc.num_nodes;
  const int A = fr.num_actions();
  const int WJ = fr.observations.joint_size();
  const int* nvals = &factor_value_[static_cast<std::size_t>(s_next) * K];

  std::vector<double> acc(static_cast<std::size_t>(M), 0.0);
  Configuration cfg;
  // exp_row[a][k][w]: per-factor expectation of the frame's observation
  // component under the other agents' action mixture at the current state,
  // with the planner's action credited into the configuration.  Factors are
  // decoupled exactly as in the structured engine.
  std::vector<std::vector<std::vector<double>>> exp_row(
      static_cast<std::size_t>(A),
      std::vector<std::vector<double>>(static_cast<std::size_t>(K)));
  std::vector<int> comp(static_cast<std::size_t>(WJ));
  for (int s = 0; s < domain_.num_states(); ++s) {
    const double bs = b.state_dist[s];
    if (bs <= 0.0) continue;
    for (int a = 0; a < A; ++a)
      for (int k = 0; k < K; ++k) {
        auto& row = exp_row[a][k];
        row.assign(static_cast<std::size_t>(WJ), 0.0);
        const int width = fr.observations.component_size(k);
        std::vector<double> tmp(static_cast<std::size_t>(width));
        for (int w = 0; w < WJ; ++w) comp[w] = fr.observations.component_of(w, k);
        int t = 0;
        while (t < WJ) {
          const Neighborhood& nu = graph.neighborhood(k, nvals[k], a, t);
          int t2 = t;
          while (t2 + 1 < WJ &&
                 &graph.neighborhood(k, nvals[k], a, t2 + 1) == &nu)
            ++t2;
          const auto fn =
              domain_.dynamics->frame_observation_rows(frame, k, nvals[k], a, nu);
          cfg.counts.assign(static_cast<std::size_t>(nu.num_slots()), 0);
          ++cfg.counts[static_cast<std::size_t>(nu.slot_of(kAgent0Frame, a0))];
          enum_joint(domain_, b, s, nu, cfg, 0, 1.0, j, [&](double w_others) {
            fn(cfg, tmp);
            for (int w = t; w <= t2; ++w) row[w] += w_others * tmp[comp[w]];
          });
          t = t2 + 1;
        }
      }
    const auto& pm = b.model_dists[j][s];
    for (int m = 0; m < M; ++m) {
      const double wm = pm[m];
      if (wm <= 0.0) continue;
      for (int a = 0; a < A; ++a) {
        const double wa = fsc.action_dist[m][a];
        if (wa <= 0.0) continue;
        const double w1 = bs * wm * wa;
        for (int w = 0; w < WJ; ++w) {
          const double e = guarded_product(
              K, [&](int k) { return exp_row[a][k][w]; });
          if (e == 0.0) continue;
          const double w2 = w1 * e;
          const auto step = fsc.step_distribution(m, a, w);
          for (int m2 = 0; m2 < M; ++m2) acc[m2] += w2 * step[m2];
        }
      }
    }
  }
  double mass = 0.0;
  for (double v : acc) mass += v;
  if (mass <= 0.0) return {};
  for (double& v : acc) v /= mass;
  return acc;
}

std::vector<std::vector<std::vector<double>>> NaiveOps::model_rows(
    const FactoredBelief& b, int a0) {
  const int S = domain_.num_states();
  const int N = domain_.pop.n;
  std::vector<std::vector<std::vector<double>>> rows(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) {
    const Fsc& fsc = domain_.fscs[domain_.pop.fsc_of[j]];
    if (fsc.num_nodes == 1) {
      rows[j].assign(static_cast<std::size_t>(S), std::vector<double>{1.0});
      continue;
    }
    rows[j].resize(static_cast<std::size_t>(S));
    for (int s2 = 0; s2 < S; ++s2) rows[j][s2] = model_row(b, a0, s2, j);
  }
  return rows;
}

double NaiveOps::expected_reward(const FactoredBelief& b, int a0) {
  refresh(b);
  const int S = domain_.num_states();
  const int K = domain_.states.num_factors();
  double total = 0.0;
  for (int s = 0; s < S; ++s) {
    const double bs = b.state_dist[s];
    if (bs == 0.0) continue;
    const int* vals = &factor_value_[static_cast<std::size_t>(s) * K];
    double sum_k = 0.0;
    for (int k = 0; k < K; ++k) sum_k += r_val(b, s, k, vals[k], a0);
    total += bs * sum_k;
  }
  return total;
}

// --- one-shot operations ---------------------------------------------------------

namespace {

void check_action_obs(const Domain& d, int a0, int obs) {
  if (a0 < 0 || a0 >= d.num_a0())
    throw LookupError("planner action index out of range: " + std::to_string(a0));
  if (obs < 0 || obs >= d.obs0.joint_size())
    throw LookupError("planner observation index out of range: " +
                      std::to_string(obs));
}

}  // namespace

std::vector<double> update_state(const FactoredBelief& b, int a0, int obs,
                                 const Domain& domain) {
  check_action_obs(domain, a0, obs);
  StructuredOps ops(domain);
  StateStep st = ops.state_step(b, a0);
  if (st.lik[obs] <= 0.0)
    throw ZeroEvidenceError("observation " + std::to_string(obs) +
                            " has zero likelihood under action " +
                            std::to_string(a0));
  return std::move(st.posterior[obs]);
}

double obs_likelihood(const FactoredBelief& b, int a0, int obs,
                      const Domain& domain) {
  check_action_obs(domain, a0, obs);
  StructuredOps ops(domain);
  return ops.state_step(b, a0).lik[obs];
}

std::vector<std::vector<double>> update_models(const FactoredBelief& b, int a0,
                                               int s_next, const Domain& domain) {
  if (s_next < 0 || s_next >= domain.num_states())
    throw LookupError("state index out of range: " + std::to_string(s_next));
  StructuredOps ops(domain);
  auto rows = ops.model_rows(b, a0);
  std::vector<std::vector<double>> out(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (rows[j][s_next].empty())
      throw ZeroEvidenceError("no consistent node posterior for agent " +
                              std::to_string(j) + " at state " +
                              std::to_string(s_next));
    out[j] = std::move(rows[j][s_next]);
  }
  return out;
}

FactoredBelief belief_update(const FactoredBelief& b, int a0, int obs,
                             const Domain& domain) {
  check_action_obs(domain, a0, obs);
  StructuredOps ops(domain);
  StateStep st = ops.state_step(b, a0);
  if (st.lik[obs] <= 0.0)
    throw ZeroEvidenceError("observation " + std::to_string(obs) +
                            " has zero likelihood under action " +
                            std::to_string(a0));
  const auto rows = ops.model_rows(b, a0);
  return ops.compose(st.posterior[obs], rows);
}

std::vector<double> naive_update_state(const FactoredBelief& b, int a0, int obs,
                                       const Domain& domain) {
  check_action_obs(domain, a0, obs);
  NaiveOps ops(domain);
  StateStep st = ops.state_step(b, a0);
  if (st.lik[obs] <= 0.0)
    throw ZeroEvidenceError("observation " + std::to_string(obs) +
                            " has zero likelihood under action " +
                            std::to_string(a0));
  return std::move(st.posterior[obs]);
}

std::vector<double> naive_update_model(const FactoredBelief& b, int a0, int s_next,
                                       int j, const Domain& domain) {
  if (j < 0 || j >= domain.pop.n)
    throw LookupError("agent index out of range: " + std::to_string(j));
  if (s_next < 0 || s_next >= domain.num_states())
    throw LookupError("state index out of range: " + std::to_string(s_next));
  NaiveOps ops(domain);
  std::vector<double> row = ops.model_row(b, a0, s_next, j);
  if (row.empty())
    throw ZeroEvidenceError("no consistent node posterior for agent " +
                            std::to_string(j) + " at state " +
                            std::to_string(s_next));
  return row;
}

FactoredBelief naive_belief_update(const FactoredBelief& b, int a0, int obs,
                                   const Domain& domain) {
  check_action_obs(domain, a0, obs);
  NaiveOps ops(domain);
  StateStep st = ops.state_step(b, a0);
  if (st.lik[obs] <= 0.0)
    throw ZeroEvidenceError("observation " + std::to_string(obs) +
                            " has zero likelihood under action " +
                            std::to_string(a0));
  const auto rows = ops.model_rows(b, a0);
  return ops.compose(st.posterior[obs], rows);
}

double naive_expected_reward(const FactoredBelief& b, int a0, const Domain& domain) {
  NaiveOps ops(domain);
  return ops.expected_reward(b, a0);
}

}  // namespace maip
