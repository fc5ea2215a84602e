#include "maip/protest.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace maip {

namespace {

constexpr int kSites = 3;
constexpr int kLevels = 3;  // low, med, high

/// Turns an {escalate, stay, de-escalate} triple into a distribution over the
/// next intensity of a site currently at `x`; mass that would leave the scale
/// stays put instead.
std::vector<double> clamp_row(int x, const std::array<double, 3>& esd) {
  std::vector<double> row(kLevels, 0.0);
  const double esc = esd[0], stay = esd[1], deesc = esd[2];
  row[x] += stay;
  if (x + 1 < kLevels)
    row[x + 1] += esc;
  else
    row[x] += esc;
  if (x - 1 >= 0)
    row[x - 1] += deesc;
  else
    row[x] += deesc;
  return row;
}

double flag_prob(const ProtestParams& p, int x_next, int bucket) {
  return std::min(p.flag_cap, p.flag_base[static_cast<size_t>(x_next)] +
                                  p.flag_shift * bucket);
}

/// Three bucketed rules (>= hi, >= lo, catch-all) selecting from `rows`, with
/// the bucket statistic given by `stat`.
std::vector<RuleDynamics::Rule> bucket_rules(
    const ProtestParams& p, const std::vector<RuleDynamics::StatTerm>& stat,
    const std::array<std::vector<double>, 3>& rows) {
  using Guard = RuleDynamics::Guard;
  using Rule = RuleDynamics::Rule;
  std::vector<Rule> rules;
  rules.push_back(Rule{{Guard{stat, RuleDynamics::Op::Ge, p.theta_hi}}, rows[2]});
  rules.push_back(Rule{{Guard{stat, RuleDynamics::Op::Ge, p.theta_lo}}, rows[1]});
  rules.push_back(Rule{{}, rows[0]});
  return rules;
}

Fsc make_controller(const std::string& id, int frame_index, int obs_joint,
                    const std::array<double, 4>& base_row,
                    const ProtestParams& p) {
  Fsc fsc;
  fsc.id = id;
  fsc.frame = frame_index;
  const int acts = 4;
  if (!p.reactive) {
    fsc.num_nodes = 1;
    fsc.action_dist = {std::vector<double>(base_row.begin(), base_row.end())};
    fsc.node_transition.assign(
        1, std::vector<std::vector<std::vector<double>>>(
               acts, std::vector<std::vector<double>>(obs_joint, {1.0})));
    return fsc;
  }
  fsc.num_nodes = 2;
  fsc.action_dist = {std::vector<double>(base_row.begin(), base_row.end()),
                     std::vector<double>(p.alerted_row.begin(),
                                         p.alerted_row.end())};
  // Deterministic node switch: any raised flag alerts, all-clear relaxes.
  fsc.node_transition.assign(
      2, std::vector<std::vector<std::vector<double>>>(
             acts, std::vector<std::vector<double>>(obs_joint)));
  for (int m = 0; m < 2; ++m)
    for (int a = 0; a < acts; ++a)
      for (int w = 0; w < obs_joint; ++w)
        fsc.node_transition[m][a][w] =
            (w != 0) ? std::vector<double>{0.0, 1.0}
                     : std::vector<double>{1.0, 0.0};
  return fsc;
}

}  // namespace

ValidationReport ProtestParams::validate() const {
  ValidationReport rep;
  if (n < 0) rep.add("protestor count must be nonnegative");
  if (frame_mix < 0.0 || frame_mix > 1.0)
    rep.add("frame_mix must lie in [0, 1]");
  if (!(theta_lo >= 0.0 && theta_lo < theta_hi && theta_hi <= 1.0))
    rep.add("pressure thresholds must satisfy 0 <= lo < hi <= 1");
  auto check_row = [&rep](std::span<const double> row, const std::string& what) {
    if (!is_distribution(row, kRowSumTol))
      rep.add(what + " is not a probability distribution");
  };
  check_row(two_troop_row, "two-troop intensity row");
  for (int b = 0; b < 3; ++b) {
    check_row(one_troop_rows[static_cast<size_t>(b)],
              "one-troop intensity row " + std::to_string(b));
    check_row(zero_troop_rows[static_cast<size_t>(b)],
              "zero-troop intensity row " + std::to_string(b));
  }
  for (double v : flag_base)
    if (v < 0.0 || v > 1.0) rep.add("flag base probabilities must lie in [0, 1]");
  if (flag_shift < 0.0) rep.add("flag_shift must be nonnegative");
  if (flag_cap < 0.0 || flag_cap > 1.0) rep.add("flag_cap must lie in [0, 1]");
  check_row(peaceful_row, "peaceful action row");
  check_row(disruptive_row, "disruptive action row");
  if (reactive) check_row(alerted_row, "alerted action row");
  check_row(initial_site, "initial site distribution");
  return rep;
}

int protest_troops_at(int a0, int site) {
  const int first = a0 / kSites, second = a0 % kSites;
  return (first == site ? 1 : 0) + (second == site ? 1 : 0);
}

Domain build_protest_domain(const ProtestParams& params) {
  auto issues = params.validate();
  issues.require("protest parameters");

  Domain d;
  d.name = "protest-K3-N" + std::to_string(params.n);

  for (int k = 0; k < kSites; ++k)
    d.states.factors.push_back(
        {"site-" + std::to_string(k), {"low", "med", "high"}});

  for (int i = 0; i < kSites; ++i)
    for (int j = 0; j < kSites; ++j)
      d.a0_actions.push_back("troops-" + std::to_string(i) + "-" +
                             std::to_string(j));

  ObsSpace flags;
  flags.components.assign(kSites, {"0", "1"});
  d.obs0 = flags;

  const std::vector<std::string> protest_actions = {"go-site-0", "go-site-1",
                                                    "go-site-2", "stay-home"};
  Frame peaceful{"peaceful", protest_actions, flags, {}};
  Frame disruptive{"disruptive", protest_actions, flags, {}};
  const int obs_joint = flags.joint_size();

  const std::string suffix = params.reactive ? "-reactive" : "-blind";
  Fsc peaceful_fsc = make_controller("peaceful" + suffix, 0, obs_joint,
                                     params.peaceful_row, params);
  Fsc disruptive_fsc = make_controller("disruptive" + suffix, 1, obs_joint,
                                       params.disruptive_row, params);
  peaceful.fsc_pool = {peaceful_fsc.id};
  disruptive.fsc_pool = {disruptive_fsc.id};
  d.frames = {peaceful, disruptive};
  d.fscs = {peaceful_fsc, disruptive_fsc};

  d.pop.n = params.n;
  const int n_peaceful = static_cast<int>(
      std::llround(params.frame_mix * static_cast<double>(params.n)));
  for (int j = 0; j < params.n; ++j) {
    const int f = j < n_peaceful ? 0 : 1;
    d.pop.frame_of.push_back(f);
    d.pop.fsc_of.push_back(f);  // controller index equals frame index here
  }

  // --- hypergraph edges -----------------------------------------------------
  const int num_a0 = static_cast<int>(d.a0_actions.size());
  for (int k = 0; k < kSites; ++k) {
    for (int a0 = 0; a0 < num_a0; ++a0) {
      const int troops = protest_troops_at(a0, k);
      // Transition: protestors at the site matter unless it is fully policed.
      if (troops < 2) {
        for (int x = 0; x < kLevels; ++x)
          for (int x2 = 0; x2 < kLevels; ++x2) {
            d.t_graph.add_edge(k, x, a0, x2, {0, k});  // peaceful go-site-k
            d.t_graph.add_edge(k, x, a0, x2, {1, k});  // disruptive go-site-k
          }
      }
      // Planner observation: flag odds rise with disruptive presence.
      for (int x2 = 0; x2 < kLevels; ++x2)
        for (int w = 0; w < obs_joint; ++w)
          d.o_graph.add_edge(k, x2, a0, w, {1, k});
      // Reward: disruption penalty only where policing is thin.
      if (troops < 2)
        for (int x = 0; x < kLevels; ++x)
          d.r_graph.add_edge(k, x, a0, 0, {1, k});
    }
  }
  d.frame_o_graphs.assign(2, FrameActionHypergraph(FunctionKind::Observation));
  for (int f = 0; f < 2; ++f)
    for (int k = 0; k < kSites; ++k)
      for (int a = 0; a < 4; ++a)
        for (int x2 = 0; x2 < kLevels; ++x2)
          for (int w = 0; w < obs_joint; ++w)
            d.frame_o_graphs[static_cast<size_t>(f)].add_edge(k, x2, a, w,
                                                              {1, k});

  // --- rule dynamics ----------------------------------------------------------
  auto dyn = std::make_shared<RuleDynamics>();
  dyn->population_n = params.n;
  using StatTerm = RuleDynamics::StatTerm;
  using Rule = RuleDynamics::Rule;

  for (int k = 0; k < kSites; ++k) {
    // Pressure counts peaceful attendees once, disruptive ones twice.
    const std::vector<StatTerm> pressure = {{0, k, 1.0}, {1, k, 2.0}};
    const std::vector<StatTerm> disruption = {{1, k, 1.0}};

    for (int a0 = 0; a0 < num_a0; ++a0) {
      const int troops = protest_troops_at(a0, k);
      for (int x = 0; x < kLevels; ++x) {
        const RuleDynamics::Key key{-2, k, x, a0};
        if (troops >= 2) {
          dyn->transition_rules[key] = {Rule{{}, clamp_row(x, params.two_troop_row)}};
        } else {
          const auto& tbl =
              troops == 1 ? params.one_troop_rows : params.zero_troop_rows;
          dyn->transition_rules[key] = bucket_rules(
              params, pressure,
              {clamp_row(x, tbl[0]), clamp_row(x, tbl[1]), clamp_row(x, tbl[2])});
        }

        // Reward for factor k at intensity x under placement a0.
        const double base = params.reward_base[static_cast<size_t>(x)] -
                            params.troop_cost * troops;
        if (troops >= 2) {
          dyn->reward_rules[key] = {Rule{{}, {base}}};
        } else {
          std::array<std::vector<double>, 3> rows;
          for (int b = 0; b < 3; ++b)
            rows[static_cast<size_t>(b)] = {
                base - params.disruption_penalty[static_cast<size_t>(b)]};
          dyn->reward_rules[key] = bucket_rules(params, disruption, rows);
        }
      }
    }

    // Flag probabilities do not depend on the placement: wildcard action.
    for (int x2 = 0; x2 < kLevels; ++x2) {
      std::array<std::vector<double>, 3> rows;
      for (int b = 0; b < 3; ++b) {
        const double p = flag_prob(params, x2, b);
        rows[static_cast<size_t>(b)] = {1.0 - p, p};
      }
      dyn->observation_rules[{-2, k, x2, -1}] =
          bucket_rules(params, disruption, rows);
      for (int f = 0; f < 2; ++f)
        dyn->frame_obs_rules[{f, k, x2, -1}] =
            bucket_rules(params, disruption, rows);
    }
  }
  d.dynamics = dyn;

  // --- initial belief ---------------------------------------------------------
  d.initial_state_dist.assign(static_cast<size_t>(d.states.num_states()), 0.0);
  for (int s = 0; s < d.num_states(); ++s) {
    double p = 1.0;
    for (int k = 0; k < kSites; ++k)
      p *= params.initial_site[static_cast<size_t>(d.states.value_at(s, k))];
    d.initial_state_dist[static_cast<size_t>(s)] = p;
  }
  d.initial_models.kind = InitialModelBelief::Kind::Node0;

  d.finalize();
  return d;
}

double protest_transition(const Domain& domain, int site, int x, int a0,
                          const Configuration& c, int x_next) {
  const Neighborhood& nu = domain.t_graph.neighborhood(site, x, a0, x_next);
  if (static_cast<int>(c.counts.size()) != nu.num_slots())
    throw ValidationError("configuration does not match the transition context");
  return domain.dynamics->transition(site, x, a0, nu, c, x_next);
}

double protest_observation(const Domain& domain, int site, int x_next, int a0,
                           const Configuration& c, int flag) {
  const Neighborhood& nu = domain.o_graph.neighborhood(site, x_next, a0, 0);
  if (static_cast<int>(c.counts.size()) != nu.num_slots())
    throw ValidationError("configuration does not match the observation context");
  return domain.dynamics->observation(site, x_next, a0, nu, c, flag);
}

double protest_reward(const Domain& domain, int site, int x, int a0,
                      const Configuration& c) {
  const Neighborhood& nu = domain.r_graph.neighborhood(site, x, a0, 0);
  if (static_cast<int>(c.counts.size()) != nu.num_slots())
    throw ValidationError("configuration does not match the reward context");
  return domain.dynamics->reward(site, x, a0, nu, c);
}

}  // namespace maip
