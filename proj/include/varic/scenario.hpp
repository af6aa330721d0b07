#pragma once

// Problem instances: a measure space, a per-atom menu of admissible controls
// with their running cost and constraint load, and a target set for the
// integrated load. Menus come from primitive descriptions (polynomials in
// (t, a) or explicit tables) so an instance can be re-evaluated on a refined
// space. JSON load/save keeps instances on disk; rendering uses 17
// significant digits so round-trips are exact.

#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "varic/common.hpp"
#include "varic/constraint.hpp"
#include "varic/detail/json17.hpp"
#include "varic/measure.hpp"

namespace varic {

// One admissible control at an atom: the control value itself (its
// identifier), the running cost, and the constraint load.
struct MenuEntry {
  Vec control;
  double cost = 0.0;
  Vec load;

  bool operator==(const MenuEntry& o) const {
    return control == o.control && cost == o.cost && load == o.load;
  }
};

struct AtomMenu {
  std::size_t atom_index = 0;
  std::vector<MenuEntry> entries;  // canonical control-grid order
};

// ---------------------------------------------------------------------------
// Primitives

// c * t^pt * a[comp]^pa
struct PolyTerm {
  double c = 0.0;
  int pt = 0;
  int pa = 0;
  std::size_t comp = 0;

  bool operator==(const PolyTerm& o) const {
    return c == o.c && pt == o.pt && pa == o.pa && comp == o.comp;
  }
};

struct ComponentSpec {
  enum class Kind { poly, table };
  Kind kind = Kind::poly;
  std::vector<PolyTerm> terms;  // poly
  std::vector<Vec> values;      // table: values[atom][entry]

  bool operator==(const ComponentSpec& o) const {
    return kind == o.kind && terms == o.terms && values == o.values;
  }
};

struct Primitive {
  std::vector<Vec> grid;            // control grid, canonical entry order
  ComponentSpec phi;                // running cost
  std::vector<ComponentSpec> loads;  // one spec per constraint component

  bool operator==(const Primitive& o) const {
    return grid == o.grid && phi == o.phi && loads == o.loads;
  }
};

struct Scenario {
  std::size_t dim = 0;  // constraint dimension n
  MeasureSpace space;
  Primitive primitive;
  std::vector<AtomMenu> menus;
  ConstraintSet constraint;

  bool operator==(const Scenario& o) const {
    return dim == o.dim && space == o.space && primitive == o.primitive &&
           constraint == o.constraint;
  }
};

namespace detail {

inline double ipow(double x, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= x;
  return out;
}

inline double eval_poly(const std::vector<PolyTerm>& terms, double t,
                        const Vec& a) {
  double s = 0.0;
  for (const PolyTerm& term : terms) {
    s += term.c * ipow(t, term.pt) * ipow(a[term.comp], term.pa);
  }
  return s;
}

inline double eval_component(const ComponentSpec& spec, std::size_t atom,
                             std::size_t entry, double t, const Vec& a) {
  if (spec.kind == ComponentSpec::Kind::poly) {
    return eval_poly(spec.terms, t, a);
  }
  return spec.values[atom][entry];
}

}  // namespace detail

// Evaluates the primitive on a measure space. Table components must carry
// exactly one row per atom; every value must come out finite.
inline std::vector<AtomMenu> build_menus(const Primitive& primitive,
                                         const MeasureSpace& space) {
  if (primitive.grid.empty()) {
    throw schema_error("scenario: field \"controls.grid\" must be nonempty");
  }
  auto check_table = [&](const ComponentSpec& spec, const std::string& name) {
    if (spec.kind != ComponentSpec::Kind::table) return;
    if (spec.values.size() != space.size()) {
      throw schema_error("scenario: field \"" + name + ".values\" must have " +
                         std::to_string(space.size()) + " rows");
    }
    for (const Vec& row : spec.values) {
      if (row.size() != primitive.grid.size()) {
        throw schema_error("scenario: field \"" + name +
                           ".values\" rows must match the control grid size");
      }
    }
  };
  check_table(primitive.phi, "phi");
  for (std::size_t kcomp = 0; kcomp < primitive.loads.size(); ++kcomp) {
    check_table(primitive.loads[kcomp],
                "Phi[" + std::to_string(kcomp) + "]");
  }

  std::vector<AtomMenu> menus;
  menus.reserve(space.size());
  for (const Atom& atom : space.atoms()) {
    AtomMenu menu;
    menu.atom_index = atom.index;
    menu.entries.reserve(primitive.grid.size());
    for (std::size_t e = 0; e < primitive.grid.size(); ++e) {
      const Vec& a = primitive.grid[e];
      MenuEntry entry;
      entry.control = a;
      entry.cost =
          detail::eval_component(primitive.phi, atom.index, e, atom.t, a);
      entry.load.resize(primitive.loads.size());
      for (std::size_t kcomp = 0; kcomp < primitive.loads.size(); ++kcomp) {
        entry.load[kcomp] = detail::eval_component(primitive.loads[kcomp],
                                                   atom.index, e, atom.t, a);
      }
      if (!std::isfinite(entry.cost) || !all_finite(entry.load)) {
        throw evaluation_error(
            "scenario: primitive evaluated to a non-finite value at atom " +
            std::to_string(atom.index) + ", entry " + std::to_string(e));
      }
      menu.entries.push_back(std::move(entry));
    }
    menus.push_back(std::move(menu));
  }
  return menus;
}

inline Scenario make_scenario(Primitive primitive, MeasureSpace space,
                              ConstraintSet constraint) {
  if (primitive.grid.empty()) {
    throw schema_error("scenario: field \"controls.grid\" must be nonempty");
  }
  std::size_t control_dim = primitive.grid.front().size();
  for (const Vec& a : primitive.grid) {
    if (a.size() != control_dim || a.empty()) {
      throw schema_error(
          "scenario: field \"controls.grid\" entries must share one "
          "dimension");
    }
    if (!all_finite(a)) {
      throw schema_error(
          "scenario: field \"controls.grid\" has a non-finite entry");
    }
  }
  for (const PolyTerm& term : primitive.phi.terms) {
    if (term.comp >= control_dim || term.pt < 0 || term.pa < 0) {
      throw schema_error("scenario: field \"phi.terms\" has an invalid term");
    }
  }
  if (primitive.loads.size() != constraint.dim()) {
    throw schema_error(
        "scenario: field \"Phi\" must have one component per constraint "
        "dimension");
  }
  for (std::size_t kcomp = 0; kcomp < primitive.loads.size(); ++kcomp) {
    for (const PolyTerm& term : primitive.loads[kcomp].terms) {
      if (term.comp >= control_dim || term.pt < 0 || term.pa < 0) {
        throw schema_error("scenario: field \"Phi[" + std::to_string(kcomp) +
                           "].terms\" has an invalid term");
      }
    }
  }

  Scenario s;
  s.dim = constraint.dim();
  s.space = std::move(space);
  s.primitive = std::move(primitive);
  s.constraint = std::move(constraint);
  s.menus = build_menus(s.primitive, s.space);
  return s;
}

// ---------------------------------------------------------------------------
// JSON schema

namespace detail {

inline const json& require_field(const json& j, const std::string& key,
                                 const std::string& path) {
  if (!j.is_object() || !j.contains(key)) {
    throw schema_error("scenario: missing field \"" + path + key + "\"");
  }
  return j.at(key);
}

inline double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) {
    throw schema_error("scenario: field \"" + where + "\" must be a number");
  }
  return j.get<double>();
}

inline Vec as_vec(const json& j, const std::string& where) {
  if (!j.is_array()) {
    throw schema_error("scenario: field \"" + where +
                       "\" must be an array of numbers");
  }
  Vec out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(as_number(e, where));
  return out;
}

inline ComponentSpec component_from_json(const json& j,
                                         const std::string& path) {
  const json& type = require_field(j, "type", path + ".");
  ComponentSpec spec;
  if (type == "poly") {
    spec.kind = ComponentSpec::Kind::poly;
    const json& terms = require_field(j, "terms", path + ".");
    if (!terms.is_array()) {
      throw schema_error("scenario: field \"" + path +
                         ".terms\" must be an array");
    }
    for (const auto& tj : terms) {
      PolyTerm term;
      term.c = as_number(require_field(tj, "c", path + ".terms."),
                         path + ".terms.c");
      if (tj.contains("pt")) term.pt = tj.at("pt").get<int>();
      if (tj.contains("pa")) term.pa = tj.at("pa").get<int>();
      if (tj.contains("comp")) term.comp = tj.at("comp").get<std::size_t>();
      spec.terms.push_back(term);
    }
  } else if (type == "table") {
    spec.kind = ComponentSpec::Kind::table;
    const json& values = require_field(j, "values", path + ".");
    if (!values.is_array()) {
      throw schema_error("scenario: field \"" + path +
                         ".values\" must be an array of rows");
    }
    for (const auto& row : values) {
      spec.values.push_back(as_vec(row, path + ".values"));
    }
  } else {
    throw schema_error("scenario: field \"" + path +
                       ".type\" must be \"poly\" or \"table\"");
  }
  return spec;
}

inline json component_to_json(const ComponentSpec& spec) {
  json j;
  if (spec.kind == ComponentSpec::Kind::poly) {
    j["type"] = "poly";
    j["terms"] = json::array();
    for (const PolyTerm& term : spec.terms) {
      json tj;
      tj["c"] = term.c;
      if (term.pt != 0) tj["pt"] = term.pt;
      if (term.pa != 0) tj["pa"] = term.pa;
      if (term.comp != 0) tj["comp"] = term.comp;
      j["terms"].push_back(tj);
    }
  } else {
    j["type"] = "table";
    j["values"] = json::array();
    for (const Vec& row : spec.values) j["values"].push_back(row);
  }
  return j;
}

inline ConstraintSet constraint_from_json(const json& j) {
  const json& type = require_field(j, "type", "C.");
  if (type == "singleton") {
    return ConstraintSet::singleton(as_vec(require_field(j, "x", "C."), "C.x"));
  }
  if (type == "box") {
    return ConstraintSet::box(as_vec(require_field(j, "lo", "C."), "C.lo"),
                              as_vec(require_field(j, "hi", "C."), "C.hi"));
  }
  if (type == "ball") {
    return ConstraintSet::ball(
        as_vec(require_field(j, "center", "C."), "C.center"),
        as_number(require_field(j, "radius", "C."), "C.radius"));
  }
  if (type == "vpolytope") {
    const json& verts = require_field(j, "vertices", "C.");
    if (!verts.is_array() || verts.empty()) {
      throw schema_error(
          "scenario: field \"C.vertices\" must be a nonempty array");
    }
    std::vector<Vec> vertices;
    for (const auto& v : verts) vertices.push_back(as_vec(v, "C.vertices"));
    return ConstraintSet::vpolytope(std::move(vertices));
  }
  throw schema_error(
      "scenario: field \"C.type\" must be one of \"singleton\", \"box\", "
      "\"ball\", \"vpolytope\"");
}

inline json constraint_to_json(const ConstraintSet& c) {
  json j;
  switch (c.kind()) {
    case ConstraintKind::singleton:
      j["type"] = "singleton";
      j["x"] = c.point();
      break;
    case ConstraintKind::box:
      j["type"] = "box";
      j["lo"] = c.lo();
      j["hi"] = c.hi();
      break;
    case ConstraintKind::ball:
      j["type"] = "ball";
      j["center"] = c.center();
      j["radius"] = c.radius();
      break;
    case ConstraintKind::vpolytope: {
      j["type"] = "vpolytope";
      j["vertices"] = json::array();
      for (const Vec& v : c.vertices()) j["vertices"].push_back(v);
      break;
    }
  }
  return j;
}

}  // namespace detail

inline Scenario scenario_from_json(const detail::json& j) {
  using detail::as_number;
  using detail::as_vec;
  using detail::require_field;

  const detail::json& dim_j = require_field(j, "dim", "");
  if (!dim_j.is_number_integer() || dim_j.get<long>() <= 0) {
    throw schema_error("scenario: field \"dim\" must be a positive integer");
  }
  std::size_t dim = dim_j.get<std::size_t>();

  const detail::json& space_j = require_field(j, "space", "");
  MeasureSpace space;
  if (space_j.contains("uniform")) {
    const detail::json& n = space_j.at("uniform");
    if (!n.is_number_integer() || n.get<long>() <= 0) {
      throw schema_error(
          "scenario: field \"space.uniform\" must be a positive integer");
    }
    space = uniform_space(n.get<std::size_t>());
  } else if (space_j.contains("atoms")) {
    const detail::json& atoms = space_j.at("atoms");
    if (!atoms.is_array() || atoms.empty()) {
      throw schema_error(
          "scenario: field \"space.atoms\" must be a nonempty array");
    }
    std::vector<double> points, weights;
    for (const auto& aj : atoms) {
      points.push_back(
          as_number(require_field(aj, "t", "space.atoms."), "space.atoms.t"));
      weights.push_back(
          as_number(require_field(aj, "w", "space.atoms."), "space.atoms.w"));
    }
    try {
      space = MeasureSpace(std::move(points), std::move(weights));
    } catch (const std::invalid_argument& e) {
      throw schema_error("scenario: field \"space.atoms\" is invalid: " +
                         std::string(e.what()));
    }
  } else {
    throw schema_error(
        "scenario: field \"space\" must contain \"uniform\" or \"atoms\"");
  }

  const detail::json& controls = require_field(j, "controls", "");
  const detail::json& grid_j = require_field(controls, "grid", "controls.");
  if (!grid_j.is_array() || grid_j.empty()) {
    throw schema_error("scenario: field \"controls.grid\" must be nonempty");
  }
  Primitive primitive;
  for (const auto& gj : grid_j) {
    if (gj.is_number()) {
      primitive.grid.push_back(Vec{gj.get<double>()});
    } else {
      primitive.grid.push_back(as_vec(gj, "controls.grid"));
    }
  }

  primitive.phi = detail::component_from_json(require_field(j, "phi", ""),
                                              "phi");
  const detail::json& loads_j = require_field(j, "Phi", "");
  if (!loads_j.is_array() || loads_j.size() != dim) {
    throw schema_error("scenario: field \"Phi\" must be an array of " +
                       std::to_string(dim) + " component specs");
  }
  for (std::size_t kcomp = 0; kcomp < dim; ++kcomp) {
    primitive.loads.push_back(detail::component_from_json(
        loads_j.at(kcomp), "Phi[" + std::to_string(kcomp) + "]"));
  }

  ConstraintSet constraint =
      detail::constraint_from_json(require_field(j, "C", ""));
  if (constraint.dim() != dim) {
    throw schema_error(
        "scenario: field \"C\" dimension does not match \"dim\"");
  }

  return make_scenario(std::move(primitive), std::move(space),
                       std::move(constraint));
}

inline detail::json scenario_to_json(const Scenario& s) {
  detail::json j;
  j["dim"] = s.dim;
  j["space"]["atoms"] = detail::json::array();
  for (const Atom& a : s.space.atoms()) {
    detail::json aj;
    aj["t"] = a.t;
    aj["w"] = a.w;
    j["space"]["atoms"].push_back(aj);
  }
  j["controls"]["grid"] = detail::json::array();
  for (const Vec& a : s.primitive.grid) {
    if (a.size() == 1) {
      j["controls"]["grid"].push_back(a[0]);
    } else {
      j["controls"]["grid"].push_back(a);
    }
  }
  j["phi"] = detail::component_to_json(s.primitive.phi);
  j["Phi"] = detail::json::array();
  for (const ComponentSpec& spec : s.primitive.loads) {
    j["Phi"].push_back(detail::component_to_json(spec));
  }
  j["C"] = detail::constraint_to_json(s.constraint);
  return j;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw schema_error("scenario: cannot open \"" + path + "\"");
  }
  detail::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw schema_error("scenario: \"" + path +
                       "\" is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

inline void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("scenario: cannot write \"" + path + "\"");
  }
  out << detail::dump_json(scenario_to_json(s));
}

// ---------------------------------------------------------------------------
// Derived instances

// Replaces the target set C by C + x: the perturbed problem whose optimal
// value traces out the value function.
inline Scenario perturb_constraint(const Scenario& s, const Vec& x) {
  if (x.size() != s.dim) {
    throw std::invalid_argument("perturb_constraint: dimension mismatch");
  }
  Scenario out = s;
  out.constraint = s.constraint.translated(x);
  return out;
}

// Splits every atom into k sub-atoms and re-evaluates the menus. Polynomial
// components see the new sample points; table components are piecewise
// constant in t, so sub-atoms inherit their parent's row.
inline Scenario refine_scenario(const Scenario& s, std::size_t k) {
  if (k == 0) {
    throw std::invalid_argument("refine_scenario: split factor must be positive");
  }
  if (k == 1) return s;
  Primitive primitive = s.primitive;
  auto expand = [&](ComponentSpec& spec) {
    if (spec.kind != ComponentSpec::Kind::table) return;
    std::vector<Vec> rows;
    rows.reserve(spec.values.size() * k);
    for (const Vec& row : spec.values) {
      for (std::size_t j = 0; j < k; ++j) rows.push_back(row);
    }
    spec.values = std::move(rows);
  };
  expand(primitive.phi);
  for (ComponentSpec& spec : primitive.loads) expand(spec);
  return make_scenario(std::move(primitive), refine(s.space, k),
                       s.constraint);
}

// ---------------------------------------------------------------------------
// Hypothesis validation

enum class FeasStatus { holds, fails, unknown };

struct HypothesesReport {
  bool menus_ok = false;     // nonempty menus, finite costs and loads
  FeasStatus feasibility = FeasStatus::unknown;
  bool certain = false;      // verdict backed by a witness or a full search
  std::vector<std::size_t> witness;  // feasible policy when one was found
  double nearest_distance = kInf;    // best distance to C encountered
  std::string note;
};

namespace detail {

// DFS over policies that can only discard branches provably unable to land
// within tol of C's bounding box. Returns true when a feasible policy is
// found; complete when it exhausts the tree within the node budget.
struct FeasSearch {
  const Scenario& s;
  double tol;
  Vec bbox_lo, bbox_hi;
  std::vector<Vec> suffix_min, suffix_max;  // [atom][comp], weighted
  std::vector<std::size_t> choice;
  std::vector<std::size_t> best_choice;
  double best_dist = kInf;
  std::uint64_t nodes = 0;
  std::uint64_t node_budget;
  bool complete = true;
  bool found = false;

  FeasSearch(const Scenario& sc, double tolerance, std::uint64_t budget)
      : s(sc), tol(tolerance), node_budget(budget) {
    std::size_t n = s.dim;
    std::size_t atoms = s.space.size();
    switch (s.constraint.kind()) {
      case ConstraintKind::singleton:
        bbox_lo = bbox_hi = s.constraint.point();
        break;
      case ConstraintKind::box:
        bbox_lo = s.constraint.lo();
        bbox_hi = s.constraint.hi();
        break;
      case ConstraintKind::ball:
        bbox_lo = bbox_hi = s.constraint.center();
        for (std::size_t c = 0; c < n; ++c) {
          bbox_lo[c] -= s.constraint.radius();
          bbox_hi[c] += s.constraint.radius();
        }
        break;
      case ConstraintKind::vpolytope:
        bbox_lo.assign(n, kInf);
        bbox_hi.assign(n, -kInf);
        for (const Vec& v : s.constraint.vertices()) {
          for (std::size_t c = 0; c < n; ++c) {
            bbox_lo[c] = std::min(bbox_lo[c], v[c]);
            bbox_hi[c] = std::max(bbox_hi[c], v[c]);
          }
        }
        break;
    }
    suffix_min.assign(atoms + 1, Vec(n, 0.0));
    suffix_max.assign(atoms + 1, Vec(n, 0.0));
    for (std::size_t i = atoms; i-- > 0;) {
      double w = s.space.at(i).w;
      for (std::size_t c = 0; c < n; ++c) {
        double lo = kInf, hi = -kInf;
        for (const MenuEntry& e : s.menus[i].entries) {
          lo = std::min(lo, w * e.load[c]);
          hi = std::max(hi, w * e.load[c]);
        }
        suffix_min[i][c] = lo + suffix_min[i + 1][c];
        suffix_max[i][c] = hi + suffix_max[i + 1][c];
      }
    }
    choice.assign(atoms, 0);
  }

  bool run() {
    Vec partial(s.dim, 0.0);
    dfs(0, partial);
    return found;
  }

  void dfs(std::size_t atom, Vec& partial) {
    if (found || !complete) return;
    if (++nodes > node_budget) {
      complete = false;
      return;
    }
    if (atom == s.space.size()) {
      double d = s.constraint.distance(partial);
      if (d < best_dist) {
        best_dist = d;
        best_choice = choice;
      }
      if (d <= tol) found = true;
      return;
    }
    // Distance from the reachable box to C's bounding box lower-bounds every
    // leaf below; drop the branch only when it can neither reach tolerance
    // nor improve on the best distance seen.
    double gap2 = 0.0;
    for (std::size_t c = 0; c < s.dim; ++c) {
      double lo = partial[c] + suffix_min[atom][c];
      double hi = partial[c] + suffix_max[atom][c];
      double gap = std::max({0.0, bbox_lo[c] - hi, lo - bbox_hi[c]});
      gap2 += gap * gap;
    }
    if (gap2 > tol * tol && gap2 >= best_dist * best_dist) return;
    double w = s.space.at(atom).w;
    for (std::size_t e = 0; e < s.menus[atom].entries.size(); ++e) {
      choice[atom] = e;
      const Vec& load = s.menus[atom].entries[e].load;
      for (std::size_t c = 0; c < s.dim; ++c) partial[c] += w * load[c];
      dfs(atom + 1, partial);
      for (std::size_t c = 0; c < s.dim; ++c) partial[c] -= w * load[c];
      if (found || !complete) return;
    }
  }
};

// Cheapest-entry start followed by best single-atom exchanges that shrink
// the distance to C. Used as a feasibility probe when the policy tree is too
// large to enumerate.
inline std::pair<std::vector<std::size_t>, double> greedy_feasibility_probe(
    const Scenario& s) {
  std::size_t atoms = s.space.size();
  std::vector<std::size_t> choice(atoms, 0);
  for (std::size_t i = 0; i < atoms; ++i) {
    std::size_t best = 0;
    for (std::size_t e = 1; e < s.menus[i].entries.size(); ++e) {
      if (s.menus[i].entries[e].cost < s.menus[i].entries[best].cost) best = e;
    }
    choice[i] = best;
  }
  auto load_of = [&](const std::vector<std::size_t>& ch) {
    VecAccumulator acc(s.dim);
    for (std::size_t i = 0; i < atoms; ++i) {
      acc.add_scaled(s.space.at(i).w, s.menus[i].entries[ch[i]].load);
    }
    return acc.value();
  };
  Vec load = load_of(choice);
  double dist = s.constraint.distance(load);
  double shrink_tol = 1e-15 * (1.0 + dist);
  for (std::size_t round = 0; round < 4 * atoms + 16 && dist > 0.0; ++round) {
    std::size_t best_atom = atoms, best_entry = 0;
    double best_dist = dist;
    for (std::size_t i = 0; i < atoms; ++i) {
      double w = s.space.at(i).w;
      const Vec& cur = s.menus[i].entries[choice[i]].load;
      for (std::size_t e = 0; e < s.menus[i].entries.size(); ++e) {
        if (e == choice[i]) continue;
        Vec trial = load;
        for (std::size_t c = 0; c < s.dim; ++c) {
          trial[c] += w * (s.menus[i].entries[e].load[c] - cur[c]);
        }
        double d = s.constraint.distance(trial);
        if (d < best_dist - shrink_tol) {
          best_dist = d;
          best_atom = i;
          best_entry = e;
        }
      }
    }
    if (best_atom == atoms) break;
    choice[best_atom] = best_entry;
    load = load_of(choice);
    dist = s.constraint.distance(load);
  }
  return {std::move(choice), dist};
}

}  // namespace detail

// Checks the standing hypotheses on an instance: every atom offers a
// nonempty finite menu, and a feasible policy exists. Feasibility is settled
// exactly when the policy tree fits the node budget; otherwise a greedy
// probe reports holds (with a witness) or unknown.
inline HypothesesReport validate_hypotheses(const Scenario& s,
                                            std::uint64_t budget = 2000000) {
  HypothesesReport report;
  report.menus_ok = !s.menus.empty();
  for (const AtomMenu& menu : s.menus) {
    if (menu.entries.empty()) report.menus_ok = false;
    for (const MenuEntry& e : menu.entries) {
      if (!std::isfinite(e.cost) || !all_finite(e.load)) {
        report.menus_ok = false;
      }
    }
  }
  if (!report.menus_ok) {
    report.note = "menus: an atom offers no admissible finite control";
    report.feasibility = FeasStatus::unknown;
    return report;
  }

  double tol = 1e-9 * (1.0 + s.constraint.scale());
  detail::FeasSearch search(s, tol, budget);
  search.run();
  report.nearest_distance = search.best_dist;
  if (search.found) {
    report.feasibility = FeasStatus::holds;
    report.certain = true;
    report.witness = search.best_choice;
    report.note = "feasible policy found by search";
  } else if (search.complete) {
    report.feasibility = FeasStatus::fails;
    report.certain = true;
    report.note = "no feasible policy at this discretization";
  } else {
    auto [probe, dist] = detail::greedy_feasibility_probe(s);
    report.nearest_distance = std::min(report.nearest_distance, dist);
    if (dist <= tol) {
      report.feasibility = FeasStatus::holds;
      report.certain = true;
      report.witness = std::move(probe);
      report.note = "feasible policy found by greedy probe";
    } else {
      report.feasibility = FeasStatus::unknown;
      report.certain = false;
      report.note = "policy tree exceeds the search budget";
    }
  }
  return report;
}

}  // namespace varic
