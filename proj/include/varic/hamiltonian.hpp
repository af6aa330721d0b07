#pragma once

// Pointwise Hamiltonian machinery: for an adjoint vector p, each atom scores
// its menu entries by <p, load> - cost. The per-atom maximum is the
// Hamiltonian; the gap between it and the score a policy actually achieves,
// integrated over the space, measures how far the policy is from pointwise
// optimality.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "varic/common.hpp"
#include "varic/scenario.hpp"

namespace varic {

// Entry choice per atom, indexed into the atom's menu.
struct Policy {
  std::vector<std::size_t> choice;

  bool operator==(const Policy& o) const { return choice == o.choice; }
  bool operator!=(const Policy& o) const { return !(*this == o); }
};

struct Adjoint {
  Vec x;
};

struct AtomHamiltonian {
  double value = -kInf;
  std::vector<std::size_t> argmax;  // ascending entry indices within tie band
};

namespace detail {

inline void check_policy(const Scenario& s, const Policy& u,
                         const char* what) {
  if (u.choice.size() != s.space.size()) {
    throw std::invalid_argument(std::string(what) +
                                ": policy length does not match atom count");
  }
  for (std::size_t i = 0; i < u.choice.size(); ++i) {
    if (u.choice[i] >= s.menus[i].entries.size()) {
      throw std::invalid_argument(std::string(what) +
                                  ": policy entry out of range at atom " +
                                  std::to_string(i));
    }
  }
}

inline void check_adjoint(const Scenario& s, const Adjoint& p,
                          const char* what) {
  if (p.x.size() != s.dim) {
    throw std::invalid_argument(std::string(what) +
                                ": adjoint dimension does not match");
  }
  if (!all_finite(p.x)) {
    throw std::invalid_argument(std::string(what) +
                                ": adjoint has a non-finite component");
  }
}

inline double entry_score(const MenuEntry& e, const Vec& p) {
  double s = -e.cost;
  for (std::size_t c = 0; c < p.size(); ++c) s += p[c] * e.load[c];
  return s;
}

}  // namespace detail

// max over the menu of <p, load> - cost, with every entry within the tie
// tolerance of the maximum listed in ascending index order. A negative
// tie_tol asks for the default band 1e-12 * (1 + |max|).
inline AtomHamiltonian hamiltonian_at(const AtomMenu& menu, const Adjoint& p,
                                      double tie_tol = -1.0) {
  if (menu.entries.empty()) {
    throw std::invalid_argument("hamiltonian_at: empty menu");
  }
  AtomHamiltonian out;
  for (const MenuEntry& e : menu.entries) {
    out.value = std::max(out.value, detail::entry_score(e, p.x));
  }
  double band = tie_tol >= 0.0 ? tie_tol : 1e-12 * (1.0 + std::abs(out.value));
  for (std::size_t e = 0; e < menu.entries.size(); ++e) {
    if (detail::entry_score(menu.entries[e], p.x) >= out.value - band) {
      out.argmax.push_back(e);
    }
  }
  return out;
}

struct IntegralPoint {
  double cost = 0.0;
  Vec load;
};

// (integral of cost, integral of load) under the policy, accumulated with
// compensated summation in atom order so reruns are bitwise identical.
inline IntegralPoint integral_point(const Scenario& s, const Policy& u) {
  detail::check_policy(s, u, "integral_point");
  Accumulator cost;
  VecAccumulator load(s.dim);
  for (std::size_t i = 0; i < s.space.size(); ++i) {
    const MenuEntry& e = s.menus[i].entries[u.choice[i]];
    double w = s.space.at(i).w;
    cost.add(w * e.cost);
    load.add_scaled(w, e.load);
  }
  IntegralPoint out;
  out.cost = cost.value();
  out.load = load.value();
  return out;
}

struct MpResidualDetail {
  double integral = 0.0;      // integral of (max score - achieved score)
  double max_per_atom = 0.0;  // worst pointwise gap
};

// How far the policy is from attaining the pointwise maximum, both in
// integral and in sup form. Nonnegative up to rounding; zero exactly when
// the policy selects a maximizer at every atom.
inline MpResidualDetail mp_residual_detail(const Scenario& s, const Policy& u,
                                           const Adjoint& p) {
  detail::check_policy(s, u, "mp_residual");
  detail::check_adjoint(s, p, "mp_residual");
  Accumulator integral;
  MpResidualDetail out;
  for (std::size_t i = 0; i < s.space.size(); ++i) {
    double best = -kInf;
    for (const MenuEntry& e : s.menus[i].entries) {
      best = std::max(best, detail::entry_score(e, p.x));
    }
    double gap =
        best - detail::entry_score(s.menus[i].entries[u.choice[i]], p.x);
    if (gap < 0.0) gap = 0.0;  // rounding guard: max dominates by definition
    integral.add(s.space.at(i).w * gap);
    out.max_per_atom = std::max(out.max_per_atom, gap);
  }
  out.integral = integral.value();
  return out;
}

inline double mp_residual(const Scenario& s, const Policy& u,
                          const Adjoint& p) {
  return mp_residual_detail(s, u, p).integral;
}

}  // namespace varic
