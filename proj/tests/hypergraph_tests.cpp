#include <doctest.h>

#include "maip/configuration.hpp"
#include "maip/hypergraph.hpp"

using namespace maip;

namespace {

FrameOrder two_frame_order() {
  FrameOrder order;
  order.rank = {1, 0};  // frame 1 ranks before frame 0
  return order;
}

}  // namespace

TEST_SUITE("hypergraph") {
  TEST_CASE("canonical neighborhoods order by frame rank then action") {
    const FrameOrder order = two_frame_order();
    Neighborhood nu = Neighborhood::canonical(
        {{0, 1}, {1, 2}, {kAgent0Frame, 0}, {1, 0}, {0, 0}}, order);

    REQUIRE(nu.num_pairs() == 5);
    // Planner pairs first, then frame 1 (rank 0), then frame 0 (rank 1),
    // actions ascending within a frame.
    CHECK(nu.pairs[0].frame == kAgent0Frame);
    CHECK(nu.pairs[1].frame == 1);
    CHECK(nu.pairs[1].action == 0);
    CHECK(nu.pairs[2].frame == 1);
    CHECK(nu.pairs[2].action == 2);
    CHECK(nu.pairs[3].frame == 0);
    CHECK(nu.pairs[3].action == 0);
    CHECK(nu.pairs[4].frame == 0);
    CHECK(nu.pairs[4].action == 1);

    CHECK(nu.num_slots() == 6);
    CHECK(nu.phi_slot() == 5);
    CHECK(nu.slot_of(1, 2) == 2);
    CHECK(nu.slot_of(0, 7) == nu.phi_slot());  // absent pair -> dummy
    CHECK_FALSE(nu.empty());

    Neighborhood none = Neighborhood::canonical({}, order);
    CHECK(none.empty());
    CHECK(none.num_slots() == 1);
  }

  TEST_CASE("duplicate pairs collapse") {
    Neighborhood nu =
        Neighborhood::canonical({{0, 1}, {0, 1}, {0, 1}}, two_frame_order());
    CHECK(nu.num_pairs() == 1);
  }

  TEST_CASE("neighborhood keys distinguish pair sets") {
    const FrameOrder order = two_frame_order();
    CHECK(Neighborhood::canonical({{0, 1}}, order).key() !=
          Neighborhood::canonical({{0, 2}}, order).key());
    CHECK(Neighborhood::canonical({{0, 1}}, order).key() !=
          Neighborhood::canonical({{1, 1}}, order).key());
    CHECK(Neighborhood::canonical({{0, 1}, {1, 0}}, order).key() ==
          Neighborhood::canonical({{1, 0}, {0, 1}}, order).key());
  }

  TEST_CASE("graphs intern neighborhoods per context") {
    FrameActionHypergraph g(FunctionKind::Transition);
    g.add_edge(0, 0, 0, 0, {0, 1});
    g.add_edge(0, 0, 0, 0, {1, 0});
    g.add_edge(0, 0, 0, 1, {0, 1});
    g.add_edge(0, 1, 0, 0, {0, 0});

    CHECK_FALSE(g.finalized());
    CHECK_THROWS_AS(g.neighborhood(0, 0, 0, 0), ValidationError);

    ContextDims dims;
    dims.factor_sizes = {2};
    dims.num_actions = 1;
    dims.tail_sizes = {2};
    g.finalize(dims, two_frame_order());
    CHECK(g.finalized());
    CHECK_THROWS_AS(g.add_edge(0, 0, 0, 0, {0, 0}), ValidationError);

    const Neighborhood& nu = g.neighborhood(0, 0, 0, 0);
    CHECK(nu.num_pairs() == 2);
    CHECK(&g.neighborhood(0, 0, 0, 0) == &nu);  // stable reference

    // Context (0,0,0,1) saw only one pair; context (0,1,0,*) another.
    CHECK(g.neighborhood(0, 0, 0, 1).num_pairs() == 1);
    CHECK(g.neighborhood(0, 1, 0, 0).num_pairs() == 1);
    // Unlisted contexts get the shared empty neighborhood.
    CHECK(g.neighborhood(0, 1, 0, 1).empty());
    CHECK(&g.neighborhood(0, 1, 0, 1) == &g.neighborhood(0, 1, 0, 1));

    CHECK(g.edge_count() == 4);
  }

  TEST_CASE("out-of-range contexts are rejected at finalize") {
    FrameActionHypergraph g(FunctionKind::Reward);
    g.add_edge(0, 5, 0, 0, {0, 0});  // value 5 exceeds factor size 2
    ContextDims dims;
    dims.factor_sizes = {2};
    dims.num_actions = 1;
    dims.tail_sizes = {1};
    CHECK_THROWS_AS(g.finalize(dims, two_frame_order()), ValidationError);
  }

  TEST_CASE("anonymity validation accepts count-based functions") {
    const FrameOrder order = two_frame_order();
    // Two agents of frame 0 with 2 actions each; nu counts action 0.
    Neighborhood nu = Neighborhood::canonical({{0, 0}}, order);
    const std::vector<int> frames = {0, 0};
    const std::vector<int> num_actions = {2, 2};

    AnonymityCheck good;
    good.label = "count-based";
    good.nu = &nu;
    good.joint_value = [](std::span<const int> actions) {
      int zeros = 0;
      for (int a : actions) zeros += a == 0 ? 1 : 0;
      return 0.25 * zeros;
    };
    good.config_value = [&nu](const Configuration& c) {
      return 0.25 * c.counts[static_cast<size_t>(nu.slot_of(0, 0))];
    };

    auto report = validate_anonymity(std::vector<AnonymityCheck>{good}, frames,
                                     num_actions);
    CHECK(report.ok());
  }

  TEST_CASE("anonymity validation flags identity-dependent functions") {
    const FrameOrder order = two_frame_order();
    Neighborhood nu = Neighborhood::canonical({{0, 0}}, order);
    const std::vector<int> frames = {0, 0};
    const std::vector<int> num_actions = {2, 2};

    AnonymityCheck bad;
    bad.label = "identity-dependent";
    bad.nu = &nu;
    // Depends on WHICH agent plays action 0, not only on how many.
    bad.joint_value = [](std::span<const int> actions) {
      return actions[0] == 0 ? 1.0 : 0.0;
    };
    bad.config_value = [&nu](const Configuration& c) {
      return c.counts[static_cast<size_t>(nu.slot_of(0, 0))] > 0 ? 1.0 : 0.0;
    };

    auto report = validate_anonymity(std::vector<AnonymityCheck>{bad}, frames,
                                     num_actions);
    CHECK_FALSE(report.ok());
    REQUIRE_FALSE(report.violations.empty());
    CHECK(report.violations[0].label == "identity-dependent");
  }

  TEST_CASE("anonymity validation guards huge profile spaces") {
    const FrameOrder order = two_frame_order();
    Neighborhood nu = Neighborhood::canonical({{0, 0}}, order);
    const std::vector<int> frames(20, 0);
    const std::vector<int> num_actions(20, 3);  // 3^20 profiles

    AnonymityCheck check;
    check.label = "guarded";
    check.nu = &nu;
    check.joint_value = [](std::span<const int>) { return 0.0; };
    check.config_value = [](const Configuration&) { return 0.0; };

    CHECK_THROWS_AS(validate_anonymity(std::vector<AnonymityCheck>{check},
                                       frames, num_actions),
                    GuardError);
  }
}
