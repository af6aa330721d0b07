#pragma once

// The three canonical instances used across the tests and the demo:
//
//   cheapest_half  four uniform atoms, controls {0,1}, cost t*a, load a,
//                  target {1/2}: fill the cheapest half of the interval.
//   concave_cost   two uniform atoms, controls {0,1/2,1}, cost -(a-1/2)^2,
//                  load a, target {1/2}: concavity rewards the extremes.
//   single_atom    the concave primitive on one atom, where the discrete
//                  duality gap is genuinely positive until the atom splits.

#include "varic/constraint.hpp"
#include "varic/measure.hpp"
#include "varic/scenario.hpp"

namespace varic::fixtures {

inline Primitive linear_cost_primitive() {
  Primitive p;
  p.grid = {Vec{0.0}, Vec{1.0}};
  p.phi.kind = ComponentSpec::Kind::poly;
  p.phi.terms = {PolyTerm{1.0, 1, 1, 0}};  // t * a
  p.loads.resize(1);
  p.loads[0].kind = ComponentSpec::Kind::poly;
  p.loads[0].terms = {PolyTerm{1.0, 0, 1, 0}};  // a
  return p;
}

inline Primitive concave_cost_primitive() {
  Primitive p;
  p.grid = {Vec{0.0}, Vec{0.5}, Vec{1.0}};
  p.phi.kind = ComponentSpec::Kind::poly;
  // -(a - 1/2)^2 = -a^2 + a - 1/4
  p.phi.terms = {PolyTerm{-1.0, 0, 2, 0}, PolyTerm{1.0, 0, 1, 0},
                 PolyTerm{-0.25, 0, 0, 0}};
  p.loads.resize(1);
  p.loads[0].kind = ComponentSpec::Kind::poly;
  p.loads[0].terms = {PolyTerm{1.0, 0, 1, 0}};  // a
  return p;
}

inline Scenario cheapest_half() {
  return make_scenario(linear_cost_primitive(), uniform_space(4),
                       ConstraintSet::singleton(Vec{0.5}));
}

inline Scenario concave_cost() {
  return make_scenario(concave_cost_primitive(), uniform_space(2),
                       ConstraintSet::singleton(Vec{0.5}));
}

inline Scenario single_atom() {
  return make_scenario(concave_cost_primitive(), uniform_space(1),
                       ConstraintSet::singleton(Vec{0.5}));
}

}  // namespace varic::fixtures
