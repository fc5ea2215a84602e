#include "maip/configuration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace maip {

ConfigTrie::ConfigTrie(int key_length) : key_length_(key_length) {
  if (key_length <= 0) throw ValidationError("trie key length must be positive");
  nodes_.emplace_back();
}

void ConfigTrie::add(std::span<const int> key, double p) {
  if (static_cast<int>(key.size()) != key_length_)
    throw ValidationError("trie key arity mismatch");
  std::size_t node = 0;
  for (int d = 0; d + 1 < key_length_; ++d) {
    auto& kids = nodes_[node].kids;
    const int digit = key[static_cast<std::size_t>(d)];
    // ascending bulk loads append at the back; fall back to binary search
    if (kids.empty() || digit > kids.back().first) {
      kids.emplace_back(digit, static_cast<std::int32_t>(nodes_.size()));
      node = nodes_.size();
      nodes_.emplace_back();
      continue;
    }
    if (digit == kids.back().first) {
      node = static_cast<std::size_t>(kids.back().second);
      continue;
    }
    const auto it = std::lower_bound(
        kids.begin(), kids.end(), digit,
        [](const auto& kv, int dg) { return kv.first < dg; });
    if (it != kids.end() && it->first == digit) {
      node = static_cast<std::size_t>(it->second);
    } else {
      const auto inserted =
          kids.insert(it, {digit, static_cast<std::int32_t>(nodes_.size())});
      node = nodes_.size();
      nodes_.emplace_back();
      (void)inserted;
    }
  }
  auto& kids = nodes_[node].kids;
  const int digit = key[static_cast<std::size_t>(key_length_ - 1)];
  if (kids.empty() || digit > kids.back().first) {
    kids.emplace_back(digit, static_cast<std::int32_t>(values_.size()));
    values_.push_back(p);
    return;
  }
  if (digit == kids.back().first) {
    values_[static_cast<std::size_t>(kids.back().second)] += p;
    return;
  }
  const auto it = std::lower_bound(
      kids.begin(), kids.end(), digit,
      [](const auto& kv, int dg) { return kv.first < dg; });
  if (it != kids.end() && it->first == digit) {
    values_[static_cast<std::size_t>(it->second)] += p;
  } else {
    kids.insert(it, {digit, static_cast<std::int32_t>(values_.size())});
    values_.push_back(p);
  }
}

std::optional<double> ConfigTrie::find(std::span<const int> key) const {
  if (static_cast<int>(key.size()) != key_length_)
    throw ValidationError("trie key arity mismatch");
  std::size_t node = 0;
  for (int d = 0; d < key_length_; ++d) {
    const auto& kids = nodes_[node].kids;
    const int digit = key[static_cast<std::size_t>(d)];
    const auto it = std::lower_bound(
        kids.begin(), kids.end(), digit,
        [](const auto& kv, int dg) { return kv.first < dg; });
    if (it == kids.end() || it->first != digit) return std::nullopt;
    if (d + 1 == key_length_) return values_[static_cast<std::size_t>(it->second)];
    node = static_cast<std::size_t>(it->second);
  }
  return std::nullopt;
}

double ConfigTrie::total() const {
  double t = 0.0;
  for_each([&](std::span<const int>, double p) { t += p; });
  return t;
}

std::vector<std::pair<Configuration, double>> ConfigTrie::entries() const {
  std::vector<std::pair<Configuration, double>> out;
  out.reserve(size());
  for_each([&](std::span<const int> key, double p) {
    out.push_back({Configuration{{key.begin(), key.end()}}, p});
  });
  return out;
}

ConfigTrie ConfigTrie::pruned(double eps) const {
  ConfigTrie out(key_length_);
  for_each([&](std::span<const int> key, double p) {
    if (p >= eps) out.add(key, p);
  });
  return out;
}

std::string dump_trie(const ConfigTrie& trie) {
  std::string out;
  char buf[64];
  trie.for_each([&](std::span<const int> key, double p) {
    std::string line;
    for (std::size_t i = 0; i < key.size(); ++i) {
      if (i) line += ' ';
      line += std::to_string(key[i]);
    }
    std::snprintf(buf, sizeof(buf), " -> %.17g\n", p);
    out += line;
    out += buf;
  });
  return out;
}

Configuration project(std::span<const int> joint_action,
                      std::span<const int> frames,
                      std::span<const int> num_actions,
                      const Neighborhood& nu) {
  if (joint_action.size() != frames.size() || frames.size() != num_actions.size())
    throw ValidationError("project: agent arity mismatch");
  Configuration c{std::vector<int>(static_cast<std::size_t>(nu.num_slots()), 0)};
  for (std::size_t i = 0; i < joint_action.size(); ++i) {
    const int a = joint_action[i];
    if (a < 0 || a >= num_actions[i])
      throw ValidationError("project: action outside agent " + std::to_string(i) +
                            "'s frame action set");
    ++c.counts[static_cast<std::size_t>(nu.slot_of(frames[i], a))];
  }
  return c;
}

namespace {

void enumerate_rec(int slots_left, int remaining, std::vector<int>& prefix,
                   std::vector<Configuration>& out) {
  if (slots_left == 1) {
    prefix.push_back(remaining);
    out.push_back(Configuration{prefix});
    prefix.pop_back();
    return;
  }
  for (int c = 0; c <= remaining; ++c) {
    prefix.push_back(c);
    enumerate_rec(slots_left - 1, remaining - c, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<Configuration> enumerate_configs(const Neighborhood& nu, int n_agents) {
  if (n_agents < 0) throw ValidationError("enumerate_configs: negative agent count");
  std::vector<Configuration> out;
  std::vector<int> prefix;
  enumerate_rec(nu.num_slots(), n_agents, prefix, out);
  return out;
}

long long count_configs(const Neighborhood& nu, int n_agents) {
  // C(n + |nu|, |nu|) computed stepwise to avoid overflow
  const int k = nu.num_pairs();
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n_agents + i) / i;
  return r;
}

AgentMixture make_mixture(const Neighborhood& nu, int frame,
                          std::span<const double> action_marginal) {
  AgentMixture mix;
  mix.slot_weight.assign(static_cast<std::size_t>(nu.num_slots()), 0.0);
  for (int a = 0; a < static_cast<int>(action_marginal.size()); ++a)
    mix.slot_weight[static_cast<std::size_t>(nu.slot_of(frame, a))] +=
        action_marginal[a];
  return mix;
}

ConfigTrie config_distribution_mixtures(const Neighborhood& nu,
                                        std::span<const AgentMixture> agents,
                                        double prune_eps, std::size_t* peak) {
  const int L = nu.num_slots();
  ConfigTrie cur(L);
  {
    std::vector<int> zero(static_cast<std::size_t>(L), 0);
    cur.add(zero, 1.0);
  }
  if (peak) *peak = std::max(*peak, cur.size());

  std::vector<int> base_keys;
  std::vector<double> base_probs;
  std::vector<int> key(static_cast<std::size_t>(L));
  for (const auto& agent : agents) {
    if (static_cast<int>(agent.slot_weight.size()) != L)
      throw ValidationError("agent mixture arity does not match neighborhood");
    base_keys.clear();
    base_probs.clear();
    base_keys.reserve(cur.size() * static_cast<std::size_t>(L));
    base_probs.reserve(cur.size());
    cur.for_each([&](std::span<const int> k, double p) {
      base_keys.insert(base_keys.end(), k.begin(), k.end());
      base_probs.push_back(p);
    });
    const std::size_t n_base = base_probs.size();

    std::vector<int> slots;
    for (int s = 0; s < L; ++s)
      if (agent.slot_weight[static_cast<std::size_t>(s)] > 0.0) slots.push_back(s);
    if (slots.empty())
      throw ValidationError("agent mixture has zero total probability");

    // Each retained slot induces a stream of incremented keys, already in
    // ascending order because the trie iterates ascending; merge the streams,
    // accumulating entries that land on the same configuration.
    ConfigTrie next(L);
    std::vector<std::size_t> pos(slots.size(), 0);
    const auto key_at = [&](std::size_t entry) {
      return base_keys.data() + entry * static_cast<std::size_t>(L);
    };
    // lexicographic compare of base[i]+e_s vs base[j]+e_t
    const auto less = [&](std::size_t i, int s, std::size_t j, int t) {
      const int* a = key_at(i);
      const int* b = key_at(j);
      for (int d = 0; d < L; ++d) {
        const int av = a[d] + (d == s);
        const int bv = b[d] + (d == t);
        if (av != bv) return av < bv;
      }
      return false;
    };
    while (true) {
      int best = -1;
      for (int si = 0; si < static_cast<int>(slots.size()); ++si) {
        if (pos[static_cast<std::size_t>(si)] >= n_base) continue;
        if (best < 0 ||
            less(pos[static_cast<std::size_t>(si)], slots[static_cast<std::size_t>(si)],
                 pos[static_cast<std::size_t>(best)], slots[static_cast<std::size_t>(best)]))
          best = si;
      }
      if (best < 0) break;
      const std::size_t bi = pos[static_cast<std::size_t>(best)];
      const int bs = slots[static_cast<std::size_t>(best)];
      const int* bk = key_at(bi);
      for (int d = 0; d < L; ++d) key[static_cast<std::size_t>(d)] = bk[d] + (d == bs);
      double acc = 0.0;
      for (std::size_t si = 0; si < slots.size(); ++si) {
        while (pos[si] < n_base) {
          const int* k2 = key_at(pos[si]);
          bool equal = true;
          for (int d = 0; d < L; ++d)
            if (k2[d] + (d == slots[si]) != key[static_cast<std::size_t>(d)]) {
              equal = false;
              break;
            }
          if (!equal) break;
          acc += base_probs[pos[si]] *
                 agent.slot_weight[static_cast<std::size_t>(slots[si])];
          ++pos[si];
        }
      }
      if (!(prune_eps > 0.0) || acc >= prune_eps) next.add(key, acc);
    }
    cur = std::move(next);
    if (peak) *peak = std::max(*peak, cur.size());
  }
  return cur;
}

namespace {

std::vector<double> action_marginal(const std::vector<double>& cond_belief,
                                    const Fsc& model, int agent) {
  if (static_cast<int>(cond_belief.size()) != model.num_nodes)
    throw ValidationError("conditional model belief of agent " +
                          std::to_string(agent) +
                          " does not match controller " + model.id);
  if (!is_distribution(cond_belief, kBeliefSumTol))
    throw ValidationError("conditional model belief of agent " +
                          std::to_string(agent) + " is not normalized");
  const std::size_t na = model.action_dist.empty() ? 0 : model.action_dist[0].size();
  std::vector<double> q(na, 0.0);
  for (int m = 0; m < model.num_nodes; ++m) {
    const double bm = cond_belief[static_cast<std::size_t>(m)];
    if (bm == 0.0) continue;
    const auto row = model.action_distribution(m);
    for (std::size_t a = 0; a < na; ++a) q[a] += bm * row[a];
  }
  return q;
}

void check_population_arity(const std::vector<std::vector<double>>& cond_beliefs,
                            const std::vector<const Fsc*>& models,
                            const std::vector<int>& frames) {
  if (cond_beliefs.size() != models.size() || models.size() != frames.size())
    throw ValidationError("config distribution: population arity mismatch");
  for (std::size_t j = 0; j < models.size(); ++j)
    if (models[j] == nullptr)
      throw ValidationError("config distribution: agent " + std::to_string(j) +
                            " has no controller");
}

}  // namespace

ConfigTrie config_distribution(const Neighborhood& nu,
                               const std::vector<std::vector<double>>& cond_beliefs,
                               const std::vector<const Fsc*>& models,
                               const std::vector<int>& frames,
                               double prune_eps, std::size_t* peak) {
  check_population_arity(cond_beliefs, models, frames);
  std::vector<AgentMixture> mixtures;
  mixtures.reserve(models.size());
  for (std::size_t j = 0; j < models.size(); ++j)
    mixtures.push_back(make_mixture(
        nu, frames[j],
        action_marginal(cond_beliefs[j], *models[j], static_cast<int>(j))));
  return config_distribution_mixtures(nu, mixtures, prune_eps, peak);
}

ConfigTrie shift_slot(const ConfigTrie& trie, int slot) {
  if (slot < 0 || slot >= trie.key_length())
    throw ValidationError("shift_slot: slot out of range");
  ConfigTrie out(trie.key_length());
  std::vector<int> key(static_cast<std::size_t>(trie.key_length()));
  trie.for_each([&](std::span<const int> k, double p) {
    std::copy(k.begin(), k.end(), key.begin());
    ++key[static_cast<std::size_t>(slot)];
    out.add(key, p);
  });
  return out;
}

ConfigTrie config_distribution_for_agent_j(
    const Neighborhood& nu,
    const std::vector<std::vector<double>>& cond_beliefs,
    const std::vector<const Fsc*>& models,
    const std::vector<int>& frames,
    int excluded_agent, int a0, double prune_eps, std::size_t* peak) {
  check_population_arity(cond_beliefs, models, frames);
  const int n = static_cast<int>(models.size());
  if (excluded_agent < 0 || excluded_agent >= n)
    throw ValidationError("config distribution: excluded agent out of range");
  if (a0 < 0) throw ValidationError("config distribution: bad planner action");
  std::vector<AgentMixture> mixtures;
  mixtures.reserve(static_cast<std::size_t>(n - 1));
  for (int j = 0; j < n; ++j) {
    if (j == excluded_agent) continue;
    mixtures.push_back(make_mixture(
        nu, frames[static_cast<std::size_t>(j)],
        action_marginal(cond_beliefs[static_cast<std::size_t>(j)],
                        *models[static_cast<std::size_t>(j)], j)));
  }
  const ConfigTrie base = config_distribution_mixtures(nu, mixtures, prune_eps, peak);
  ConfigTrie out = shift_slot(base, nu.slot_of(kAgent0Frame, a0));
  if (peak) *peak = std::max(*peak, out.size());
  return out;
}

}  // namespace maip
