#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "varic/varic.hpp"

using namespace varic;

namespace {

// Random constraint of every variant, for the property checks below.
ConstraintSet random_constraint(Rng& rng, std::size_t dim) {
  switch (rng.index(4)) {
    case 0: {
      Vec x(dim);
      for (double& v : x) v = rng.uniform(-2, 2);
      return ConstraintSet::singleton(std::move(x));
    }
    case 1: {
      Vec lo(dim), hi(dim);
      for (std::size_t k = 0; k < dim; ++k) {
        lo[k] = rng.uniform(-2, 0);
        hi[k] = lo[k] + rng.uniform(0, 2);
      }
      return ConstraintSet::box(std::move(lo), std::move(hi));
    }
    case 2: {
      Vec c(dim);
      for (double& v : c) v = rng.uniform(-2, 2);
      return ConstraintSet::ball(std::move(c), rng.uniform(0, 2));
    }
    default: {
      std::vector<Vec> verts(1 + rng.index(5), Vec(dim));
      for (Vec& v : verts) {
        for (double& x : v) x = rng.uniform(-2, 2);
      }
      return ConstraintSet::vpolytope(std::move(verts));
    }
  }
}

Vec random_vec(Rng& rng, std::size_t dim, double lo = -2, double hi = 2) {
  Vec v(dim);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("constraint factories validate their invariants") {
  CHECK_THROWS_AS(ConstraintSet::box({0.0, 0.0}, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ConstraintSet::box({1.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(ConstraintSet::ball({0.0}, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(ConstraintSet::vpolytope({}), std::invalid_argument);
  CHECK_THROWS_AS(ConstraintSet::vpolytope({{0.0, 1.0}, {0.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ConstraintSet::singleton({}), std::invalid_argument);

  CHECK(ConstraintSet::box({0.0}, {0.0}).dim() == 1);
  CHECK(ConstraintSet::ball({0.0, 0.0}, 0.0).dim() == 2);
}

TEST_CASE("support function matches the closed forms") {
  SECTION("singleton") {
    ConstraintSet c = ConstraintSet::singleton({0.5});
    SupportResult r = c.support({-1.0});
    CHECK(r.value == -0.5);
    CHECK(r.maximizer == Vec{0.5});
  }

  SECTION("box selects by sign, componentwise") {
    ConstraintSet c = ConstraintSet::box({0.0}, {1.0});
    CHECK(c.support({1.0}).value == 1.0);
    CHECK(c.support({1.0}).maximizer == Vec{1.0});
    CHECK(c.support({-1.0}).value == 0.0);
    CHECK(c.support({-1.0}).maximizer == Vec{0.0});
    // p = 0 picks the lower corner; value is 0 either way.
    CHECK(c.support({0.0}).value == 0.0);
  }

  SECTION("ball is the Cauchy-Schwarz equality case") {
    ConstraintSet c = ConstraintSet::ball({0.0, 0.0}, 1.0);
    SupportResult r = c.support({3.0, 4.0});
    CHECK(r.value == Catch::Approx(5.0).margin(1e-14));
    CHECK(r.maximizer[0] == Catch::Approx(0.6).margin(1e-14));
    CHECK(r.maximizer[1] == Catch::Approx(0.8).margin(1e-14));
    // Zero direction returns the center.
    CHECK(c.support({0.0, 0.0}).maximizer == Vec{0.0, 0.0});
  }

  SECTION("vpolytope scans vertices, lowest index on ties") {
    ConstraintSet c =
        ConstraintSet::vpolytope({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
    SupportResult r = c.support({1.0, 1.0});
    CHECK(r.value == 1.0);
    CHECK(r.maximizer == Vec{1.0, 0.0});  // ties with (0,1); index 1 < 2
    CHECK(c.support({-1.0, -1.0}).maximizer == Vec{0.0, 0.0});
  }
}

TEST_CASE("support function properties hold on random data") {
  Rng rng(20240817);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t dim = 1 + rng.index(3);
    ConstraintSet c = random_constraint(rng, dim);
    Vec p = random_vec(rng, dim);
    Vec q = random_vec(rng, dim);

    SupportResult rp = c.support(p);
    SupportResult rq = c.support(q);
    SupportResult rpq = c.support(add(p, q));

    // Subadditivity.
    CHECK(rpq.value <= rp.value + rq.value + 1e-10 * (1.0 + c.scale()));

    // The maximizer is a member attaining the value.
    double tol = 1e-9 * (1.0 + c.scale());
    CHECK(c.contains(rp.maximizer, tol));
    CHECK(std::abs(dot(p, rp.maximizer) - rp.value) <= tol * (1.0 + norm(p)));

    // Translation covariance.
    Vec x = random_vec(rng, dim);
    ConstraintSet shifted = c.translated(x);
    CHECK(shifted.support(p).value ==
          Catch::Approx(rp.value + dot(p, x)).margin(1e-9 * (1.0 + c.scale() + norm(x))));
  }
}

TEST_CASE("projection and distance agree with hand values") {
  SECTION("box clamps") {
    ConstraintSet c = ConstraintSet::box({0.0, 0.0}, {1.0, 2.0});
    CHECK(c.project({-1.0, 3.0}) == Vec{0.0, 2.0});
    CHECK(c.project({0.5, 0.5}) == Vec{0.5, 0.5});
    CHECK(c.distance({-1.0, 0.5}) == 1.0);
  }

  SECTION("ball projects radially") {
    ConstraintSet c = ConstraintSet::ball({0.0, 0.0}, 1.0);
    Vec p = c.project({3.0, 4.0});
    CHECK(p[0] == Catch::Approx(0.6).margin(1e-14));
    CHECK(p[1] == Catch::Approx(0.8).margin(1e-14));
    CHECK(c.distance({3.0, 4.0}) == Catch::Approx(4.0).margin(1e-14));
    CHECK(c.distance({0.1, 0.0}) == 0.0);
  }

  SECTION("polytope projects onto faces") {
    // Unit triangle: project (1,1) onto the hypotenuse midpoint.
    ConstraintSet c =
        ConstraintSet::vpolytope({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
    Vec p = c.project({1.0, 1.0});
    CHECK(p[0] == Catch::Approx(0.5).margin(1e-9));
    CHECK(p[1] == Catch::Approx(0.5).margin(1e-9));
    CHECK(c.distance({1.0, 1.0}) == Catch::Approx(std::sqrt(0.5)).margin(1e-9));
    // Interior points stay put.
    CHECK(c.distance({0.2, 0.2}) <= 1e-12);
  }

  SECTION("singleton distance is the norm of the difference") {
    ConstraintSet c = ConstraintSet::singleton({0.5});
    CHECK(c.distance({0.75}) == 0.25);
    CHECK(c.contains({0.5}, 0.0));
    CHECK_FALSE(c.contains({0.75}, 1e-3));
  }
}

TEST_CASE("projection is idempotent and a member on random data") {
  Rng rng(77001);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t dim = 1 + rng.index(3);
    ConstraintSet c = random_constraint(rng, dim);
    Vec y = random_vec(rng, dim, -3, 3);
    Vec proj = c.project(y);
    double tol = 1e-8 * (1.0 + c.scale());
    CHECK(c.contains(proj, tol));
    // Projecting the projection moves nothing.
    CHECK(distance(c.project(proj), proj) <= tol);
    // The projection is no farther than any support maximizer.
    CHECK(distance(y, proj) <= distance(y, c.support(sub(y, proj)).maximizer) + tol);
  }
}

TEST_CASE("minimum-norm-point projection handles hand geometries") {
  using detail::project_hull;

  SECTION("segment in the plane") {
    std::vector<Vec> pts = {{0.0, 0.0}, {2.0, 0.0}};
    auto r = project_hull(pts, {1.0, 1.0});
    CHECK(r.distance == Catch::Approx(1.0).margin(1e-10));
    CHECK(r.point[0] == Catch::Approx(1.0).margin(1e-10));
    CHECK(r.point[1] == Catch::Approx(0.0).margin(1e-10));
  }

  SECTION("query inside the hull") {
    std::vector<Vec> pts = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
    auto r = project_hull(pts, {0.5, 0.5});
    CHECK(r.distance <= 1e-10);
  }

  SECTION("duplicate and redundant vertices are harmless") {
    std::vector<Vec> pts = {{0.0}, {0.0}, {1.0}, {0.5}};
    auto r = project_hull(pts, {2.0});
    CHECK(r.distance == Catch::Approx(1.0).margin(1e-10));
    CHECK(r.point[0] == Catch::Approx(1.0).margin(1e-10));
  }

  SECTION("hull coefficients reconstruct the projection") {
    Rng rng(5150);
    for (int trial = 0; trial < 100; ++trial) {
      std::size_t dim = 1 + rng.index(3);
      std::vector<Vec> pts(2 + rng.index(6), Vec(dim));
      for (Vec& v : pts) {
        for (double& x : v) x = rng.uniform(-1, 1);
      }
      Vec query = random_vec(rng, dim);
      auto r = project_hull(pts, query);
      REQUIRE(!r.coeffs.empty());
      Vec rebuilt(dim, 0.0);
      double total = 0.0;
      for (const auto& [idx, lambda] : r.coeffs) {
        REQUIRE(idx < pts.size());
        CHECK(lambda >= -1e-12);
        axpy(lambda, pts[idx], rebuilt);
        total += lambda;
      }
      CHECK(total == Catch::Approx(1.0).margin(1e-9));
      CHECK(distance(rebuilt, r.point) <= 1e-8);
      CHECK(std::abs(distance(query, r.point) - r.distance) <= 1e-9);
    }
  }
}

TEST_CASE("dense solves and null vectors behave") {
  using detail::null_vector;
  using detail::solve_dense;

  SECTION("2x2 solve") {
    std::vector<Vec> a = {{2.0, 1.0}, {1.0, 3.0}};
    Vec b = {3.0, 4.0};
    REQUIRE(solve_dense(a, b));
    CHECK(b[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(b[1] == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("singular systems are reported, not solved") {
    std::vector<Vec> a = {{1.0, 1.0}, {1.0, 1.0}};
    Vec b = {1.0, 2.0};
    CHECK_FALSE(solve_dense(a, b));
  }

  SECTION("null vector of dependent columns") {
    // Three vectors in R^2 are always dependent.
    std::vector<Vec> cols = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
    Vec alpha = null_vector(cols, 2);
    REQUIRE(alpha.size() == 3);
    Vec combo(2, 0.0);
    for (std::size_t i = 0; i < 3; ++i) axpy(alpha[i], cols[i], combo);
    CHECK(norm(combo) <= 1e-12);
    // Normalized so the largest magnitude is 1.
    double amax = 0.0;
    for (double v : alpha) amax = std::max(amax, std::abs(v));
    CHECK(amax == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("independent columns have no null vector") {
    std::vector<Vec> cols = {{1.0, 0.0}, {0.0, 1.0}};
    CHECK_THROWS_AS(null_vector(cols, 2), std::invalid_argument);
  }
}
