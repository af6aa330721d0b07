#include <cstdlib>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "varic/varic.hpp"

using namespace varic;

TEST_CASE("exhaustive solves of the fixtures") {
  SECTION("cheapest half") {
    ExactSolution ex = solve_exact(fixtures::cheapest_half());
    REQUIRE(ex.feasible);
    CHECK(ex.optimum == 0.125);
    CHECK(ex.policy_count == 16);
    CHECK(ex.feasible_count == 6);  // policies with exactly two ones
    REQUIRE(ex.optimal_policies.size() == 1);
    CHECK(ex.optimal_policies[0] == Policy{{1, 1, 0, 0}});
    CHECK(ex.minimizers_complete);
  }

  SECTION("single atom") {
    ExactSolution ex = solve_exact(fixtures::single_atom());
    REQUIRE(ex.feasible);
    CHECK(ex.optimum == 0.0);
    CHECK(ex.feasible_count == 1);
    REQUIRE(ex.optimal_policies.size() == 1);
    CHECK(ex.optimal_policies[0] == Policy{{1}});  // the a = 1/2 entry
  }

  SECTION("unreachable singleton target") {
    Scenario bad = perturb_constraint(fixtures::cheapest_half(), {-0.2});
    ExactSolution ex = solve_exact(bad);
    CHECK_FALSE(ex.feasible);
    CHECK(ex.optimum == kInf);
    CHECK(ex.feasible_count == 0);
    CHECK(ex.optimal_policies.empty());
  }
}

TEST_CASE("perturbed solves reuse the same enumeration") {
  Scenario s1 = fixtures::cheapest_half();

  ExactSolution left = value_exact(s1, {-0.25});
  REQUIRE(left.feasible);
  CHECK(left.optimum == Catch::Approx(1.0 / 32.0).margin(1e-15));

  ExactSolution right = value_exact(s1, {0.5});
  REQUIRE(right.feasible);
  CHECK(right.optimum == Catch::Approx(0.5).margin(1e-15));

  ExactSolution center = value_exact(s1, {0.0});
  ExactSolution direct = solve_exact(s1);
  CHECK(center.optimum == direct.optimum);
  CHECK(center.feasible_count == direct.feasible_count);
}

TEST_CASE("policy budgets saturate instead of overflowing") {
  // 40 atoms x 3 entries: 3^40 policies overflow 64-bit multiplication
  // unless the product saturates.
  Rng rng(5);
  testutil::InstanceOptions opts;
  opts.max_atoms = 1;
  Scenario tiny = testutil::random_scenario(rng, opts);

  Primitive primitive;
  primitive.grid = {{0.0}, {0.5}, {1.0}};
  primitive.phi.kind = ComponentSpec::Kind::poly;
  primitive.phi.terms = {{1.0, 0, 1, 0}};
  ComponentSpec load;
  load.kind = ComponentSpec::Kind::poly;
  load.terms = {{1.0, 0, 1, 0}};
  primitive.loads = {load};
  Scenario wide = make_scenario(primitive, uniform_space(40),
                                ConstraintSet::singleton({0.5}));
  CHECK(detail::policy_product(wide, 10000000) == 10000001);
  CHECK_THROWS_AS(solve_exact(wide), budget_error);
  CHECK_THROWS_AS(value_exact(wide, {0.1}), budget_error);

  // A generous explicit budget admits mid-sized instances.
  CHECK_NOTHROW(solve_exact(tiny, 100));
}

TEST_CASE("optimum is invariant under atom relabeling") {
  Rng rng(271828);
  for (int trial = 0; trial < 20; ++trial) {
    testutil::InstanceOptions opts;
    opts.max_atoms = 6;
    Scenario s = testutil::random_scenario(rng, opts);
    std::size_t atoms = s.space.size();

    // Rebuild the same instance with atoms listed in reverse order.
    std::vector<double> points, weights;
    Primitive reversed;
    reversed.grid = s.primitive.grid;
    reversed.phi.kind = ComponentSpec::Kind::table;
    for (std::size_t k = 0; k < s.dim; ++k) {
      ComponentSpec load;
      load.kind = ComponentSpec::Kind::table;
      reversed.loads.push_back(load);
    }
    for (std::size_t i = atoms; i-- > 0;) {
      points.push_back(s.space.at(i).t);
      weights.push_back(s.space.at(i).w);
      reversed.phi.values.push_back(s.primitive.phi.values[i]);
      for (std::size_t k = 0; k < s.dim; ++k) {
        reversed.loads[k].values.push_back(s.primitive.loads[k].values[i]);
      }
    }
    Scenario flipped =
        make_scenario(std::move(reversed),
                      MeasureSpace(std::move(points), std::move(weights)),
                      s.constraint);

    ExactSolution a = solve_exact(s);
    ExactSolution b = solve_exact(flipped);
    CHECK(a.feasible == b.feasible);
    if (a.feasible) {
      CHECK(a.optimum ==
            Catch::Approx(b.optimum).margin(1e-12 * (1.0 + std::abs(a.optimum))));
      CHECK(a.feasible_count == b.feasible_count);
    }
  }
}

TEST_CASE("worker count does not change the result") {
  Rng rng(1618);
  testutil::InstanceOptions opts;
  opts.max_atoms = 8;
  Scenario s = testutil::random_scenario(rng, opts);

  ExactSolution serial = solve_exact(s);

  setenv("VARIC_WORKERS", "4", 1);
  ExactSolution parallel = solve_exact(s);
  unsetenv("VARIC_WORKERS");

  CHECK(parallel.feasible == serial.feasible);
  CHECK(parallel.optimum == serial.optimum);  // bitwise: per-block Kahan order
  CHECK(parallel.feasible_count == serial.feasible_count);
  REQUIRE(parallel.optimal_policies.size() == serial.optimal_policies.size());
  for (std::size_t i = 0; i < serial.optimal_policies.size(); ++i) {
    CHECK(parallel.optimal_policies[i] == serial.optimal_policies[i]);
  }
}
