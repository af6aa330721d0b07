#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "varic/varic.hpp"

using namespace varic;

TEST_CASE("range cloud enumerates subset integrals") {
  SECTION("constant density on four atoms gives the quarter lattice") {
    MeasureSpace space = uniform_space(4);
    RangeCloud cloud = range_cloud(space, std::vector<Vec>(4, Vec{1.0}));
    CHECK(cloud.dim == 1);
    CHECK(cloud.atom_count == 4);
    // 16 subsets collapse onto 5 distinct masses.
    REQUIRE(cloud.points.size() == 5);
    CHECK(cloud.points[0] == Vec{0.0});
    CHECK(cloud.points[1] == Vec{0.25});
    CHECK(cloud.points[2] == Vec{0.5});
    CHECK(cloud.points[3] == Vec{0.75});
    CHECK(cloud.points[4] == Vec{1.0});
  }

  SECTION("one atom gives the endpoints only") {
    RangeCloud cloud = range_cloud(uniform_space(1), {Vec{1.0}});
    REQUIRE(cloud.points.size() == 2);
    CHECK(cloud.points[0] == Vec{0.0});
    CHECK(cloud.points[1] == Vec{1.0});
  }

  SECTION("two-dimensional densities keep both coordinates") {
    RangeCloud cloud =
        range_cloud(uniform_space(2), {Vec{1.0, 0.0}, Vec{0.0, 1.0}});
    REQUIRE(cloud.points.size() == 4);
    CHECK(cloud.points[0] == Vec{0.0, 0.0});
    CHECK(cloud.points[3] == Vec{0.5, 0.5});
  }

  SECTION("the exponential guard refuses oversized spaces") {
    CHECK_THROWS_AS(
        range_cloud(uniform_space(21), std::vector<Vec>(21, Vec{1.0})),
        budget_error);
  }

  SECTION("malformed densities are rejected") {
    CHECK_THROWS_AS(range_cloud(uniform_space(3), {Vec{1.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(range_cloud(uniform_space(2), {Vec{1.0}, Vec{1.0, 2.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(range_cloud(uniform_space(1), {Vec{kInf}}),
                    std::invalid_argument);
  }
}

TEST_CASE("convexity deficit closed forms") {
  SECTION("a uniform one-dimensional lattice has half-gap deficit") {
    std::vector<Vec> pts{{0.0}, {0.25}, {0.5}, {0.75}, {1.0}};
    DeficitResult d = convexity_deficit(pts, 1);
    CHECK(d.exact);
    CHECK(d.value == 0.125);
    CHECK(d.lower == 0.125);
    CHECK(d.upper == 0.125);
    CHECK(d.sample_count == 0);
  }

  SECTION("two points: the midpoint is farthest") {
    DeficitResult d = convexity_deficit({{0.0}, {1.0}}, 1);
    CHECK(d.exact);
    CHECK(d.value == 0.5);
  }

  SECTION("a single point is trivially convex") {
    DeficitResult d = convexity_deficit({{3.0, 4.0}}, 2);
    CHECK(d.exact);
    CHECK(d.value == 0.0);
  }

  SECTION("square corners: the centre is sqrt(1/2) from the cloud") {
    std::vector<Vec> pts{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
    DeficitResult d = convexity_deficit(pts, 2);
    CHECK(d.exact);
    CHECK(d.upper - d.lower <= 1e-8);
    CHECK(d.value == Catch::Approx(std::sqrt(0.5)).margin(1e-8));
  }

  SECTION("collinear points embedded in the plane reduce to one dimension") {
    std::vector<Vec> pts{{0.0, 0.0}, {0.3, 0.4}, {0.6, 0.8}};
    DeficitResult d = convexity_deficit(pts, 2);
    CHECK(d.exact);
    // Consecutive gaps have length 1/2 along the line.
    CHECK(d.value == Catch::Approx(0.25).margin(1e-12));
  }

  SECTION("a starved node budget still returns an honest enclosure") {
    std::vector<Vec> pts{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
    DeficitOptions opts;
    opts.max_nodes = 1;
    DeficitResult d = convexity_deficit(pts, 2, opts);
    CHECK_FALSE(d.exact);
    CHECK(d.lower <= std::sqrt(0.5));
    CHECK(d.upper >= std::sqrt(0.5) - 1e-12);
    CHECK(d.upper < kInf);
  }

  SECTION("high dimensions fall back to a seeded lower estimate") {
    // Simplex corners in dimension 4: affine rank 4 exceeds the certified
    // range.
    std::vector<Vec> pts{{0, 0, 0, 0},
                         {1, 0, 0, 0},
                         {0, 1, 0, 0},
                         {0, 0, 1, 0},
                         {0, 0, 0, 1}};
    DeficitOptions opts;
    opts.samples = 2000;
    DeficitResult d = convexity_deficit(pts, 4, opts);
    CHECK_FALSE(d.exact);
    CHECK(d.upper == kInf);
    CHECK(d.sample_count == 2000);
    CHECK(d.lower > 0.3);  // the centroid is ~0.69 away from every corner

    DeficitResult again = convexity_deficit(pts, 4, opts);
    CHECK(again.lower == d.lower);  // seeded draws are reproducible
  }

  SECTION("malformed clouds are rejected") {
    CHECK_THROWS_AS(convexity_deficit({}, 1), std::invalid_argument);
    CHECK_THROWS_AS(convexity_deficit({Vec{1.0}, Vec{1.0, 2.0}}, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("aumann sums collect one integral per policy") {
  SECTION("two atoms, three entries: nine points in policy order") {
    AumannSum sum = aumann_sum(fixtures::concave_cost());
    CHECK(sum.dim == 2);
    REQUIRE(sum.points.size() == 9);  // duplicates are kept
    CHECK(sum.points[0] == Vec{-0.25, 0.0});  // both atoms on entry 0
    CHECK(sum.points[4] == Vec{0.0, 0.5});    // both at the midpoint
    CHECK(sum.points[8] == Vec{-0.25, 1.0});  // both at the far end
  }

  SECTION("refinement halves the single-atom deficit") {
    AumannSum coarse = aumann_sum(fixtures::single_atom());
    REQUIRE(coarse.points.size() == 3);
    CHECK(coarse.deficit.exact);
    // Farthest hull point: (-1/4, 5/16) on the chord of extreme controls,
    // equidistant (5/16) from the endpoint and midpoint integrals.
    CHECK(coarse.deficit.value == Catch::Approx(0.3125).margin(1e-8));

    AumannSum fine = aumann_sum(refine_scenario(fixtures::single_atom(), 2));
    CHECK(fine.deficit.exact);
    CHECK(fine.deficit.value == Catch::Approx(0.15625).margin(1e-8));
    CHECK(fine.deficit.value < coarse.deficit.value);
  }

  SECTION("the policy-count budget is enforced") {
    CHECK_THROWS_AS(aumann_sum(fixtures::cheapest_half(), 10), budget_error);
  }
}

TEST_CASE("filippov selection hits prescribed integrals") {
  Scenario s1 = fixtures::cheapest_half();

  SECTION("the optimal integral is hit by its unique policy") {
    SelectResult hit = filippov_select(s1, {0.125, 0.5}, 1e-12);
    REQUIRE(hit.found);
    CHECK(hit.policy == Policy{{1, 1, 0, 0}});
    CHECK(hit.distance == 0.0);
  }

  SECTION("the zero integral is hit by the all-off policy") {
    SelectResult hit = filippov_select(s1, {0.0, 0.0}, 1e-12);
    REQUIRE(hit.found);
    CHECK(hit.policy == Policy{{0, 0, 0, 0}});
    CHECK(hit.distance == 0.0);
  }

  SECTION("misses report the certified nearest policy") {
    SelectResult miss = filippov_select(s1, {0.0, 0.1}, 1e-3);
    CHECK_FALSE(miss.found);
    CHECK(miss.policy == Policy{{0, 0, 0, 0}});
    CHECK(miss.distance == Catch::Approx(0.1).margin(1e-15));
  }

  SECTION("every aumann point is recoverable") {
    Scenario s2 = fixtures::concave_cost();
    AumannSum sum = aumann_sum(s2);
    for (const Vec& target : sum.points) {
      SelectResult hit = filippov_select(s2, target, 1e-12);
      CHECK(hit.found);
      CHECK(integral_point(s2, hit.policy).cost ==
            Catch::Approx(target[0]).margin(1e-12));
    }
  }

  SECTION("budgets and malformed targets are enforced") {
    CHECK_THROWS_AS(filippov_select(s1, {0.125, 0.5}, 1e-12, 3), budget_error);
    CHECK_THROWS_AS(filippov_select(s1, {0.125}, 1e-12),
                    std::invalid_argument);
    CHECK_THROWS_AS(filippov_select(s1, {0.125, 0.5}, -1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("rounding a half-half mixture reproduces the two-atom split") {
  Scenario s3 = fixtures::single_atom();
  RelaxedPolicy rp;
  rp.weights = {Vec{0.5, 0.0, 0.5}};

  RoundResult r = sf_round(s3, rp);
  CHECK(r.split_count == 1);
  CHECK(r.pivot_count == 0);
  CHECK(r.relaxed.cost == -0.25);
  CHECK(r.relaxed.load == Vec{0.5});
  CHECK(r.rounded.cost == r.relaxed.cost);
  CHECK(r.rounded.load == r.relaxed.load);

  // The sub-atoms land exactly on the two-atom refinement of the space.
  REQUIRE(r.scenario.space.size() == 2);
  CHECK(r.scenario.space.at(0).t == 0.25);
  CHECK(r.scenario.space.at(0).w == 0.5);
  CHECK(r.scenario.space.at(1).t == 0.75);
  CHECK(r.scenario.space.at(1).w == 0.5);
  CHECK(r.policy == Policy{{0, 2}});
}

TEST_CASE("rounding leaves pure policies untouched") {
  Scenario s2 = fixtures::concave_cost();
  RelaxedPolicy rp;
  rp.weights = {Vec{0.0, 1.0, 0.0}, Vec{0.0, 0.0, 1.0}};

  RoundResult r = sf_round(s2, rp);
  CHECK(r.split_count == 0);
  CHECK(r.pivot_count == 0);
  REQUIRE(r.scenario.space.size() == 2);
  CHECK(r.scenario.space.at(0).t == s2.space.at(0).t);
  CHECK(r.scenario.space.at(1).t == s2.space.at(1).t);
  CHECK(r.policy == Policy{{1, 2}});
  CHECK(r.rounded.cost == r.relaxed.cost);
  CHECK(r.rounded.load == r.relaxed.load);
}

TEST_CASE("rounding preserves the integral exactly on clean mixtures") {
  // Rows summing to 1 in exact binary arithmetic: the sub-atom products
  // coincide term by term with the relaxed integral.
  Scenario s2 = fixtures::concave_cost();
  RelaxedPolicy rp;
  rp.weights = {Vec{0.5, 0.25, 0.25}, Vec{0.25, 0.25, 0.5}};

  RoundResult r = sf_round(s2, rp);
  CHECK(r.split_count == 2);
  CHECK(r.pivot_count == 0);
  CHECK(r.scenario.space.size() == 6);
  CHECK(r.rounded.cost == r.relaxed.cost);
  CHECK(r.rounded.load == r.relaxed.load);
  CHECK(r.scenario.space.total_mass() == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("rounding prunes wide mixing supports before splitting") {
  // Four mixing atoms in one load dimension: at most 2 may remain
  // fractional, so at least two pivots must fire.
  Scenario s1 = fixtures::cheapest_half();
  RelaxedPolicy rp;
  rp.weights.assign(4, Vec{0.5, 0.5});

  RoundResult r = sf_round(s1, rp);
  CHECK(r.pivot_count >= 1);
  CHECK(r.split_count <= 2);  // n + 1 with n = 1
  double scale = 1.0 + std::abs(r.relaxed.cost);
  CHECK(r.rounded.cost == Catch::Approx(r.relaxed.cost).margin(1e-12 * scale));
  CHECK(r.rounded.load[0] ==
        Catch::Approx(r.relaxed.load[0]).margin(1e-12 * scale));
  CHECK(r.scenario.space.total_mass() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("rounding is exact on random mixtures") {
  Rng rng(31337);
  for (int trial = 0; trial < 50; ++trial) {
    Scenario s = testutil::random_scenario(rng);
    RelaxedPolicy rp = testutil::random_relaxed_policy(rng, s);

    RoundResult r = sf_round(s, rp);
    CHECK(r.split_count <= s.dim + 1);
    double scale = 1.0 + std::abs(r.relaxed.cost) + norm(r.relaxed.load);
    CHECK(std::abs(r.rounded.cost - r.relaxed.cost) <= 1e-10 * scale);
    CHECK(distance(r.rounded.load, r.relaxed.load) <= 1e-10 * scale);
    CHECK(r.scenario.space.total_mass() ==
          Catch::Approx(s.space.total_mass()).margin(1e-12));

    // The pure policy is valid on the split scenario.
    CHECK_NOTHROW(integral_point(r.scenario, r.policy));
  }
}

TEST_CASE("rounding rejects malformed weights") {
  Scenario s3 = fixtures::single_atom();
  RelaxedPolicy rp;

  rp.weights = {Vec{0.5, 0.5}};  // wrong row length
  CHECK_THROWS_AS(sf_round(s3, rp), std::invalid_argument);

  rp.weights = {Vec{0.7, 0.0, 0.2}};  // sums to 0.9
  CHECK_THROWS_AS(sf_round(s3, rp), std::invalid_argument);

  rp.weights = {Vec{1.5, 0.0, -0.5}};  // negative mass
  CHECK_THROWS_AS(sf_round(s3, rp), std::invalid_argument);

  rp.weights = {};  // wrong row count
  CHECK_THROWS_AS(sf_round(s3, rp), std::invalid_argument);
  CHECK_THROWS_AS(relaxed_integral(s3, rp), std::invalid_argument);
}

TEST_CASE("deficit CSV is exact and stable") {
  std::vector<DeficitRow> rows(2);
  rows[0].level = 0;
  rows[0].atoms = 1;
  rows[0].points = 3;
  rows[0].deficit.value = 0.25;
  rows[0].deficit.lower = 0.25;
  rows[0].deficit.upper = 0.25;
  rows[0].deficit.exact = true;
  rows[1].level = 1;
  rows[1].atoms = 2;
  rows[1].points = 9;
  rows[1].deficit.value = 0.125;
  rows[1].deficit.lower = 0.1;
  rows[1].deficit.upper = kInf;
  rows[1].deficit.exact = false;
  rows[1].deficit.sample_count = 1000;

  std::ostringstream out;
  write_deficit_csv(out, rows);
  CHECK(out.str() ==
        "level,atomCount,points,deficit,lower,upper,exact,sampleCount\n"
        "0,1,3,0.25,0.25,0.25,true,0\n"
        "1,2,9,0.125,0.10000000000000001,inf,false,1000\n");
}
