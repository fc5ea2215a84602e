#include <cmath>
#include <random>

#include <doctest.h>

#include "maip/planner.hpp"
#include "maip/protest.hpp"
#include "support/random_instance.hpp"

using namespace maip;
using namespace maip::testing;

namespace {

SolveOptions small_opts(int horizon, double gamma = 0.9) {
  SolveOptions opt;
  opt.horizon = horizon;
  opt.gamma = gamma;
  return opt;
}

/// Largest per-step reward magnitude reachable in a generated instance.
double reward_bound(const Domain& d) {
  // Generated tables draw rewards in [-1, 1] per factor.
  return static_cast<double>(d.states.num_factors());
}

}  // namespace

TEST_SUITE("planner") {
  TEST_CASE("backup maximizes discounted branch values with low-index ties") {
    ReachabilityNode node;
    node.actions.resize(2);
    node.actions[0].immediate = 1.0;
    node.actions[1].immediate = 0.5;
    node.actions[1].branches.push_back({0, 0.5, 2.0, true, nullptr});
    node.actions[1].branches.push_back({1, 0.5, 0.0, true, nullptr});

    const double value = backup(node, 0.5);
    // Action 0: 1.0; action 1: 0.5 + 0.5 * (0.5*2.0 + 0.5*0.0) = 1.0 -> tie.
    CHECK(value == doctest::Approx(1.0));
    CHECK(node.best_action == 0);
    CHECK(node.valued);

    SUBCASE("strictly better branch wins") {
      node.actions[1].branches[1].child_value = 2.0;
      CHECK(backup(node, 0.5) == doctest::Approx(1.5));
      CHECK(node.best_action == 1);
    }
    SUBCASE("unvalued children are rejected") {
      node.actions[1].branches[0].child_valued = false;
      CHECK_THROWS_AS(backup(node, 0.5), ValidationError);
    }
    SUBCASE("leaf nodes value to zero") {
      ReachabilityNode leaf;
      CHECK(backup(leaf, 0.5) == 0.0);
      CHECK(leaf.best_action == -1);
    }
  }

  TEST_CASE("deterministic chain solves to the exact discounted sum") {
    Domain d = deterministic_domain();
    FactoredBelief b = make_initial_belief(d);

    SolveResult h1 = solve_exact(b, d, small_opts(1, 0.5));
    CHECK(h1.value == doctest::Approx(1.0));
    CHECK(h1.policy.action_for(std::vector<int>{}) == 0);  // keep

    SolveResult h3 = solve_exact(b, d, small_opts(3, 0.5));
    CHECK(h3.value == doctest::Approx(1.75));
    // Along the best branch the plan still keeps.
    CHECK(h3.policy.action_for(std::vector<int>{0}) == 0);
    CHECK(h3.policy.action_for(std::vector<int>{0, 0}) == 0);

    SolveResult h0 = solve_exact(b, d, small_opts(0));
    CHECK(h0.value == 0.0);
    CHECK(h0.nodes_expanded == 0);
    CHECK_THROWS_AS(h0.policy.action_for(std::vector<int>{}), LookupError);
  }

  TEST_CASE("zero discount reduces to the best immediate reward") {
    for (std::uint64_t seed : {101, 102, 103}) {
      CAPTURE(seed);
      Domain d = random_domain(seed);
      FactoredBelief b = make_initial_belief(d);
      StructuredOps eng(d);
      double best = -1e300;
      for (int a0 = 0; a0 < d.num_a0(); ++a0)
        best = std::max(best, eng.expected_reward(b, a0));
      SolveResult r = solve_exact(b, d, small_opts(3, 0.0));
      CHECK(r.value == doctest::Approx(best).epsilon(1e-12));
    }
  }

  TEST_CASE("exact and naive solvers agree in value and policy") {
    for (std::uint64_t seed = 60; seed < 68; ++seed) {
      CAPTURE(seed);
      Domain d = random_domain(seed);
      FactoredBelief b = make_initial_belief(d);
      SolveOptions opt = small_opts(2);

      SolveResult fast = solve_exact(b, d, opt);
      SolveResult slow = naive_solve(b, d, opt);
      CHECK(std::abs(fast.value - slow.value) <= 1e-9);
      CHECK(fast.policy == slow.policy);
      CHECK(fast.nodes_expanded == slow.nodes_expanded);
    }
  }

  TEST_CASE("values respect the discounted reward bound") {
    for (std::uint64_t seed = 70; seed < 74; ++seed) {
      CAPTURE(seed);
      Domain d = random_domain(seed);
      FactoredBelief b = make_initial_belief(d);
      const int horizon = 3;
      const double gamma = 0.9;
      SolveResult r = solve_exact(b, d, small_opts(horizon, gamma));
      double bound = 0.0;
      for (int t = 0; t < horizon; ++t) bound += std::pow(gamma, t);
      bound *= reward_bound(d);
      CHECK(std::abs(r.value) <= bound + 1e-9);
    }
  }

  TEST_CASE("exhaustive sampling equals exact solving bit for bit") {
    for (std::uint64_t seed = 80; seed < 84; ++seed) {
      CAPTURE(seed);
      Domain d = random_domain(seed);
      FactoredBelief b = make_initial_belief(d);

      SolveOptions exact_opt = small_opts(2);
      SolveOptions sample_opt = exact_opt;
      sample_opt.exhaustive = true;
      sample_opt.samples = 1;
      sample_opt.seed = seed;

      SolveResult a = solve_exact(b, d, exact_opt);
      SolveResult s = solve_sampled(b, d, sample_opt);
      CHECK(a.value == s.value);  // bitwise
      CHECK(a.policy == s.policy);
      CHECK(a.nodes_expanded == s.nodes_expanded);
    }
  }

  TEST_CASE("sampled solving is seed-deterministic") {
    Domain d = random_domain(93);
    FactoredBelief b = make_initial_belief(d);
    REQUIRE(d.obs0.joint_size() > 1);  // with one observation every seed agrees
    SolveOptions opt = small_opts(3);
    opt.samples = 2;
    opt.seed = 1234;

    SolveResult first = solve_sampled(b, d, opt);
    SolveResult second = solve_sampled(b, d, opt);
    CHECK(first.value == second.value);
    CHECK(first.policy == second.policy);
    CHECK(first.nodes_expanded == second.nodes_expanded);

    // Any single pair of seeds may coincide by chance; across several seeds
    // the draws must differ somewhere or the seed is being ignored.
    bool any_differ = false;
    for (std::uint64_t alt : {std::uint64_t{99}, std::uint64_t{7},
                              std::uint64_t{21}, std::uint64_t{500},
                              std::uint64_t{123457}}) {
      opt.seed = alt;
      SolveResult other = solve_sampled(b, d, opt);
      any_differ = any_differ || other.value != first.value ||
                   !(other.policy == first.policy);
    }
    CHECK(any_differ);
  }

  TEST_CASE("sampling error shrinks as draws increase") {
    Domain d = random_domain(91);
    FactoredBelief b = make_initial_belief(d);
    SolveOptions opt = small_opts(3);
    const double exact = solve_exact(b, d, opt).value;

    auto mse_at = [&](int k) {
      double total = 0.0;
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SolveOptions s = opt;
        s.samples = k;
        s.seed = seed;
        const double err = solve_sampled(b, d, s).value - exact;
        total += err * err;
      }
      return total / 20.0;
    };
    CHECK(mse_at(8) < mse_at(1));
  }

  TEST_CASE("node guard stops oversized reachability trees") {
    Domain d = random_domain(92);
    FactoredBelief b = make_initial_belief(d);
    SolveOptions opt = small_opts(8);
    opt.node_guard = 100;
    CHECK_THROWS_AS((void)solve_exact(b, d, opt), GuardError);
  }

  TEST_CASE("option validation rejects malformed requests") {
    Domain d = random_domain(93);
    FactoredBelief b = make_initial_belief(d);

    SolveOptions bad_h = small_opts(-1);
    CHECK_THROWS_AS((void)solve_exact(b, d, bad_h), ValidationError);

    SolveOptions bad_gamma = small_opts(2, 1.5);
    CHECK_THROWS_AS((void)solve_exact(b, d, bad_gamma), ValidationError);

    SolveOptions bad_samples = small_opts(2);
    bad_samples.samples = 0;
    CHECK_THROWS_AS((void)solve_sampled(b, d, bad_samples), ValidationError);
  }

  TEST_CASE("policies fall back to per-depth defaults off the sampled tree") {
    ProtestParams params;
    params.n = 4;
    Domain d = build_protest_domain(params);
    FactoredBelief b = make_initial_belief(d);

    SolveOptions opt = small_opts(2);
    opt.samples = 2;
    opt.seed = 5;
    SolveResult r = solve_sampled(b, d, opt);

    REQUIRE(r.policy.default_action.size() == 2);
    // Any single-step history resolves, sampled or not.
    for (int w = 0; w < d.obs0.joint_size(); ++w) {
      const int a = r.policy.action_for(std::vector<int>{w});
      CHECK(a >= 0);
      CHECK(a < d.num_a0());
    }

    const std::string text = r.policy.to_text(d);
    CHECK(text.find("horizon 2") != std::string::npos);
    CHECK(text.find("default 0 ") != std::string::npos);
    CHECK(text.find("plan - ") != std::string::npos);
  }

  TEST_CASE("policy text names actions and observations") {
    Domain d = deterministic_domain();
    FactoredBelief b = make_initial_belief(d);
    SolveResult r = solve_exact(b, d, small_opts(2, 0.5));
    const std::string text = r.policy.to_text(d);
    CHECK(text.find("plan - keep") != std::string::npos);
    CHECK(text.find("plan a keep") != std::string::npos);
  }
}
