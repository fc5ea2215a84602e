#include "maip/hypergraph.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "maip/configuration.hpp"

namespace maip {

std::string to_string(FunctionKind kind) {
  switch (kind) {
    case FunctionKind::Transition: return "transition";
    case FunctionKind::Observation: return "observation";
    case FunctionKind::Reward: return "reward";
  }
  return "?";
}

std::string Neighborhood::key() const {
  std::string out;
  out.reserve(pairs.size() * 8);
  for (const auto& p : pairs) {
    out.append(reinterpret_cast<const char*>(&p.frame), sizeof(int));
    out.append(reinterpret_cast<const char*>(&p.action), sizeof(int));
  }
  return out;
}

Neighborhood Neighborhood::canonical(std::vector<FrameActionPair> pairs,
                                     const FrameOrder& order) {
  std::sort(pairs.begin(), pairs.end(),
            [&](const FrameActionPair& a, const FrameActionPair& b) {
              const int ra = order.rank_of(a.frame), rb = order.rank_of(b.frame);
              if (ra != rb) return ra < rb;
              return a.action < b.action;
            });
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  Neighborhood nu;
  nu.pairs = std::move(pairs);
  return nu;
}

void FrameActionHypergraph::add_edge(int factor, int v, int action, int tail,
                                     FrameActionPair pair) {
  if (finalized_)
    throw ValidationError("hypergraph already finalized; cannot add edges");
  edges_.push_back(Edge{factor, v, action, tail, pair});
}

std::uint64_t FrameActionHypergraph::pack(int factor, int v, int action,
                                          int tail) const {
  return (static_cast<std::uint64_t>(factor) << 48) |
         (static_cast<std::uint64_t>(v & 0xffff) << 32) |
         (static_cast<std::uint64_t>(action & 0xffff) << 16) |
         static_cast<std::uint64_t>(tail & 0xffff);
}

void FrameActionHypergraph::check(int factor, int v, int action, int tail) const {
  const auto bad = [&](const std::string& what) {
    std::ostringstream os;
    os << "malformed " << to_string(kind_) << " context (" << what << "): factor="
       << factor << " v=" << v << " action=" << action << " tail=" << tail;
    throw ValidationError(os.str());
  };
  if (factor < 0 || factor >= static_cast<int>(dims_.factor_sizes.size()))
    bad("factor out of range");
  if (v < 0 || v >= dims_.factor_sizes[factor]) bad("factor value out of range");
  if (action < 0 || action >= dims_.num_actions) bad("action out of range");
  if (tail < 0 || tail >= dims_.tail_sizes[factor]) bad("tail component out of range");
}

void FrameActionHypergraph::finalize(const ContextDims& dims, const FrameOrder& order) {
  dims_ = dims;
  finalized_ = true;
  // canonical edge order makes serialization deterministic
  std::sort(edges_.begin(), edges_.end(), [&](const Edge& a, const Edge& b) {
    const auto ka = std::tuple(a.factor, a.v, a.action, a.tail,
                               order.rank_of(a.pair.frame), a.pair.action);
    const auto kb = std::tuple(b.factor, b.v, b.action, b.tail,
                               order.rank_of(b.pair.frame), b.pair.action);
    return ka < kb;
  });
  std::map<std::uint64_t, std::vector<FrameActionPair>> grouped;
  for (const auto& e : edges_) {
    check(e.factor, e.v, e.action, e.tail);
    grouped[pack(e.factor, e.v, e.action, e.tail)].push_back(e.pair);
  }
  index_.clear();
  for (auto& [key, pairs] : grouped)
    index_.emplace(key, Neighborhood::canonical(std::move(pairs), order));
}

const Neighborhood& FrameActionHypergraph::neighborhood(int factor, int v,
                                                        int action, int tail) const {
  static const Neighborhood kEmpty;
  if (!finalized_) throw ValidationError("hypergraph queried before finalize()");
  check(factor, v, action, tail);
  const auto it = index_.find(pack(factor, v, action, tail));
  return it == index_.end() ? kEmpty : it->second;
}

AnonymityReport validate_anonymity(std::span<const AnonymityCheck> checks,
                                   std::span<const int> frames,
                                   std::span<const int> num_actions,
                                   long long guard, double tol) {
  if (frames.size() != num_actions.size())
    throw ValidationError("anonymity check: agent arity mismatch");
  const int n = static_cast<int>(frames.size());
  long long profiles = 1;
  for (int i = 0; i < n; ++i) {
    if (num_actions[i] <= 0)
      throw ValidationError("anonymity check: agent with empty action set");
    profiles *= num_actions[i];
    if (profiles > guard) {
      std::ostringstream os;
      os << "anonymity check refused: " << profiles << "+ joint actions exceed guard "
         << guard;
      throw GuardError(os.str());
    }
  }

  AnonymityReport report;
  std::vector<int> profile(static_cast<std::size_t>(n), 0);
  for (const auto& check : checks) {
    // representative profile and value per projection class
    std::map<std::vector<int>, std::pair<std::vector<int>, double>> classes;
    std::fill(profile.begin(), profile.end(), 0);
    for (long long it = 0; it < profiles; ++it) {
      const Configuration c = project(profile, frames, num_actions, *check.nu);
      const double v = check.joint_value(profile);
      auto [pos, fresh] = classes.try_emplace(c.counts, profile, v);
      if (!fresh && std::abs(pos->second.second - v) > tol) {
        report.violations.push_back(
            {check.label, pos->second.first, profile, pos->second.second, v,
             "joint values differ within one projection class"});
      } else if (fresh) {
        const double cv = check.config_value(c);
        if (std::abs(cv - v) > tol)
          report.violations.push_back(
              {check.label, profile, {}, v, cv,
               "configuration table disagrees with joint oracle"});
      }
      // odometer
      for (int i = n - 1; i >= 0; --i) {
        if (++profile[static_cast<std::size_t>(i)] < num_actions[i]) break;
        profile[static_cast<std::size_t>(i)] = 0;
      }
    }
  }
  return report;
}

}  // namespace maip
