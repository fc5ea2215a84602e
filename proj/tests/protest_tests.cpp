#include <cmath>

#include <doctest.h>

#include "maip/belief.hpp"
#include "maip/protest.hpp"

using namespace maip;

namespace {

Domain domain_of(int n, bool reactive = false, double mix = 0.5) {
  ProtestParams params;
  params.n = n;
  params.reactive = reactive;
  params.frame_mix = mix;
  return build_protest_domain(params);
}

/// Configuration over the transition neighborhood of site k with the given
/// attendee counts (remaining population mass on the dummy slot).
Configuration pressure_config(const Domain& d, int k, int x, int a0,
                              int peaceful, int disruptive, int n) {
  const Neighborhood& nu = d.t_graph.neighborhood(k, x, a0, 0);
  Configuration c;
  c.counts.assign(static_cast<size_t>(nu.num_slots()), 0);
  c.counts[static_cast<size_t>(nu.slot_of(0, k))] = peaceful;
  c.counts[static_cast<size_t>(nu.slot_of(1, k))] = disruptive;
  c.counts[static_cast<size_t>(nu.phi_slot())] = n - peaceful - disruptive;
  return c;
}

}  // namespace

TEST_SUITE("protest") {
  TEST_CASE("domain shape matches the benchmark layout") {
    Domain d = domain_of(4);
    CHECK(d.num_states() == 27);
    CHECK(d.num_a0() == 9);
    CHECK(d.obs0.joint_size() == 8);
    CHECK(d.num_frames() == 2);
    CHECK(d.frames[0].id == "peaceful");
    CHECK(d.frames[1].id == "disruptive");
    CHECK(d.frames[0].num_actions() == 4);
    CHECK(d.fscs.size() == 2);
    CHECK(d.fscs[0].num_nodes == 1);
    CHECK(d.all_models_trivial());
    CHECK(d.validate().ok());

    Domain r = domain_of(4, /*reactive=*/true);
    CHECK(r.fscs[0].num_nodes == 2);
    CHECK_FALSE(r.all_models_trivial());
    CHECK(r.validate().ok());
  }

  TEST_CASE("troop placement counting") {
    CHECK(protest_troops_at(0, 0) == 2);  // troops-0-0
    CHECK(protest_troops_at(4, 1) == 2);  // troops-1-1
    CHECK(protest_troops_at(5, 1) == 1);  // troops-1-2
    CHECK(protest_troops_at(5, 2) == 1);
    CHECK(protest_troops_at(5, 0) == 0);
  }

  TEST_CASE("fully policed sites have empty transition neighborhoods") {
    Domain d = domain_of(4);
    // a0 = troops-1-1 puts both troops at site 1.
    CHECK(d.t_graph.neighborhood(1, 0, 4, 0).empty());
    CHECK_FALSE(d.t_graph.neighborhood(0, 0, 4, 0).empty());
    CHECK(d.t_graph.neighborhood(0, 0, 4, 0).num_pairs() == 2);
    // Observation and reward neighborhoods count disruptive attendance only.
    CHECK(d.o_graph.neighborhood(2, 0, 4, 0).num_pairs() == 1);
    CHECK(d.r_graph.neighborhood(1, 0, 4, 0).empty());  // no penalty when policed
    CHECK(d.r_graph.neighborhood(0, 0, 4, 0).num_pairs() == 1);
  }

  TEST_CASE("transition rows normalize over every configuration") {
    Domain d = domain_of(6);
    for (int k = 0; k < 3; ++k)
      for (int x = 0; x < 3; ++x)
        for (int a0 = 0; a0 < 9; ++a0) {
          const Neighborhood& nu = d.t_graph.neighborhood(k, x, a0, 0);
          for (const Configuration& c : enumerate_configs(nu, 6)) {
            double total = 0.0;
            for (int x2 = 0; x2 < 3; ++x2)
              total += protest_transition(d, k, x, a0, c, x2);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
          }
        }
  }

  TEST_CASE("observation components normalize and rise with pressure") {
    Domain d = domain_of(6);
    const int k = 0, a0 = 4;  // no troops at site 0
    const Neighborhood& nu = d.o_graph.neighborhood(k, 0, a0, 0);

    double prev_by_bucket = -1.0;
    for (int disruptive : {0, 2, 3}) {  // lo, mid (>=1.5), hi (>=3) buckets at n=6
      Configuration c;
      c.counts.assign(static_cast<size_t>(nu.num_slots()), 0);
      c.counts[static_cast<size_t>(nu.slot_of(1, k))] = disruptive;
      c.counts[static_cast<size_t>(nu.phi_slot())] = 6 - disruptive;

      double prev_by_intensity = -1.0;
      for (int x2 = 0; x2 < 3; ++x2) {
        const double flag = protest_observation(d, k, x2, a0, c, 1);
        const double calm = protest_observation(d, k, x2, a0, c, 0);
        CHECK(flag + calm == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(flag >= prev_by_intensity);  // monotone in intensity
        prev_by_intensity = flag;
      }
      const double flag_high = protest_observation(d, k, 2, a0, c, 1);
      CHECK(flag_high >= prev_by_bucket);  // monotone in disruption bucket
      CHECK(flag_high <= 0.95 + 1e-15);
      prev_by_bucket = flag_high;
    }
  }

  TEST_CASE("pressure buckets pick the declared intensity rows") {
    Domain d = domain_of(4);
    const int k = 0, x = 0;
    const int none_here = 4;  // troops-1-1: zero troops at site 0
    const int one_here = 5;   // troops-1-2: zero at site 0... pick troops-0-1
    const int a_one = 1;      // troops-0-1: one troop at site 0

    // Zero troops, no attendance: low bucket row {0, .8, .2} clamps at x=0.
    CHECK(protest_transition(d, k, x, none_here,
                             pressure_config(d, k, x, none_here, 0, 0, 4), 0) ==
          doctest::Approx(1.0));

    // One peaceful attendee: pressure 1 = lo threshold (0.25 * 4) -> middle.
    Configuration mid = pressure_config(d, k, x, none_here, 1, 0, 4);
    CHECK(protest_transition(d, k, x, none_here, mid, 0) == doctest::Approx(0.5));
    CHECK(protest_transition(d, k, x, none_here, mid, 1) == doctest::Approx(0.5));

    // One disruptive attendee: pressure 2 = hi threshold (0.5 * 4) -> high.
    Configuration hi = pressure_config(d, k, x, none_here, 0, 1, 4);
    CHECK(protest_transition(d, k, x, none_here, hi, 0) == doctest::Approx(0.1));
    CHECK(protest_transition(d, k, x, none_here, hi, 1) == doctest::Approx(0.9));

    // One troop, high pressure, already at high intensity: escalation clamps.
    Configuration hi2 = pressure_config(d, k, 2, a_one, 0, 2, 4);
    CHECK(protest_transition(d, k, 2, a_one, hi2, 2) == doctest::Approx(1.0));
    CHECK(protest_transition(d, k, 2, a_one, hi2, 1) == doctest::Approx(0.0));

    // Two troops pacify regardless of attendance.
    const Neighborhood& nu2 = d.t_graph.neighborhood(1, 1, 4, 0);
    Configuration all_phi;
    all_phi.counts.assign(static_cast<size_t>(nu2.num_slots()), 0);
    all_phi.counts.back() = 4;
    CHECK(protest_transition(d, 1, 1, 4, all_phi, 0) == doctest::Approx(0.9));
    CHECK(protest_transition(d, 1, 1, 4, all_phi, 1) == doctest::Approx(0.1));
    CHECK(protest_transition(d, 1, 1, 4, all_phi, 2) == doctest::Approx(0.0));
    (void)one_here;
  }

  TEST_CASE("rewards combine intensity, disruption penalty, and troop cost") {
    Domain d = domain_of(4);

    // Both troops at site 0, intensity low: 10 - 2 * troop_cost, no penalty.
    {
      const Neighborhood& nu = d.r_graph.neighborhood(0, 0, 0, 0);
      REQUIRE(nu.empty());
      Configuration c;
      c.counts = {4};
      CHECK(protest_reward(d, 0, 0, 0, c) == doctest::Approx(8.0));
    }
    // No troops at site 0, two disruptive attendees: hi bucket penalty 5.
    {
      const Neighborhood& nu = d.r_graph.neighborhood(0, 0, 4, 0);
      Configuration c;
      c.counts.assign(static_cast<size_t>(nu.num_slots()), 0);
      c.counts[static_cast<size_t>(nu.slot_of(1, 0))] = 2;
      c.counts[static_cast<size_t>(nu.phi_slot())] = 2;
      CHECK(protest_reward(d, 0, 0, 4, c) == doctest::Approx(5.0));
      // High intensity instead: -10 base.
      CHECK(protest_reward(d, 0, 2, 4, c) == doctest::Approx(-15.0));
    }
    // One troop at site 2 via troops-1-2, no attendance: 0 base - 1 cost - 0.
    {
      const Neighborhood& nu = d.r_graph.neighborhood(2, 1, 5, 0);
      Configuration c;
      c.counts.assign(static_cast<size_t>(nu.num_slots()), 0);
      c.counts[static_cast<size_t>(nu.phi_slot())] = 4;
      CHECK(protest_reward(d, 2, 1, 5, c) == doctest::Approx(-1.0));
    }
  }

  TEST_CASE("population assignment follows the frame mix") {
    Domain half = domain_of(4, false, 0.5);
    CHECK(half.pop.frame_of == std::vector<int>{0, 0, 1, 1});
    Domain all_disruptive = domain_of(3, false, 0.0);
    CHECK(all_disruptive.pop.frame_of == std::vector<int>{1, 1, 1});
    Domain mostly = domain_of(3, false, 0.5);  // rounds to 2 peaceful
    CHECK(mostly.pop.frame_of == std::vector<int>{0, 0, 1});
  }

  TEST_CASE("initial belief factors over sites") {
    Domain d = domain_of(2);
    FactoredBelief b = make_initial_belief(d);
    // All-medium state: 0.6^3.
    const int mid = d.states.state_index(std::vector<int>{1, 1, 1});
    CHECK(b.state_dist[static_cast<size_t>(mid)] == doctest::Approx(0.216));
    const int corner = d.states.state_index(std::vector<int>{0, 2, 1});
    CHECK(b.state_dist[static_cast<size_t>(corner)] ==
          doctest::Approx(0.2 * 0.2 * 0.6));
    double total = 0.0;
    for (double v : b.state_dist) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("reactive controllers alert on any flag and relax on none") {
    Domain d = domain_of(2, /*reactive=*/true);
    const Fsc& fsc = d.fscs[0];
    REQUIRE(fsc.num_nodes == 2);
    for (int m = 0; m < 2; ++m)
      for (int a = 0; a < 4; ++a) {
        CHECK(fsc.step_distribution(m, a, 0)[0] == doctest::Approx(1.0));
        for (int w = 1; w < 8; ++w)
          CHECK(fsc.step_distribution(m, a, w)[1] == doctest::Approx(1.0));
      }
    // The alerted node mostly stays home.
    CHECK(fsc.action_dist[1][3] == doctest::Approx(0.7));
  }

  TEST_CASE("joint-action oracles are anonymous") {
    Domain d = domain_of(2);
    for (int a0 : {0, 4}) {
      auto checks = build_anonymity_checks(d, a0);
      auto report = validate_anonymity(checks, d.population_frames(),
                                       d.population_action_counts());
      CHECK(report.ok());
    }
  }

  TEST_CASE("evaluators reject mismatched configurations") {
    Domain d = domain_of(4);
    Configuration wrong;
    wrong.counts = {1, 3};  // transition context expects 3 slots
    CHECK_THROWS_AS((void)protest_transition(d, 0, 0, 4, wrong, 0),
                    ValidationError);
  }

  TEST_CASE("parameter validation rejects malformed tables") {
    ProtestParams bad;
    bad.theta_lo = 0.6;  // above theta_hi
    CHECK_THROWS_AS((void)build_protest_domain(bad), ValidationError);

    ProtestParams mix;
    mix.frame_mix = 1.5;
    CHECK_THROWS_AS((void)build_protest_domain(mix), ValidationError);

    ProtestParams rows;
    rows.one_troop_rows[0] = {0.5, 0.2, 0.2};  // sums to 0.9
    CHECK_THROWS_AS((void)build_protest_domain(rows), ValidationError);
  }
}
