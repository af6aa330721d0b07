#pragma once

// Exhaustive reference solver: enumerates every policy in lexicographic
// (atom, entry) order, keeps the feasible ones, and reports the exact
// discrete optimum with all minimizers. Exponential by design; guarded by an
// explicit budget and meant for cross-checking the dual machinery on small
// instances.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "varic/common.hpp"
#include "varic/hamiltonian.hpp"
#include "varic/scenario.hpp"

namespace varic {

struct ExactSolution {
  bool feasible = false;     // some policy lands in C
  double optimum = kInf;     // +inf when infeasible
  std::vector<Policy> optimal_policies;  // lexicographic order, capped
  std::uint64_t feasible_count = 0;
  std::uint64_t policy_count = 0;
  bool minimizers_complete = true;  // false when the cap truncated the list
};

namespace detail {

constexpr std::size_t kMaxStoredMinimizers = 10000;

inline std::uint64_t policy_product(const Scenario& s, std::uint64_t budget) {
  std::uint64_t product = 1;
  for (const AtomMenu& m : s.menus) {
    std::uint64_t k = m.entries.size();
    if (k == 0) return 0;
    if (product > budget / k) return budget + 1;  // saturating
    product *= k;
  }
  return product;
}

// Walks all policies whose first atom uses entry `head`, in lexicographic
// order, calling visit(choice, cost, load) on each feasible one.
template <typename Visit>
void enumerate_feasible(const Scenario& s, std::size_t head, double tau_feas,
                        Visit visit) {
  std::size_t atoms = s.space.size();
  std::vector<std::size_t> choice(atoms, 0);
  std::vector<double> cost_partial(atoms + 1, 0.0);
  std::vector<Vec> load_partial(atoms + 1, Vec(s.dim, 0.0));

  auto apply = [&](std::size_t i) {
    const MenuEntry& e = s.menus[i].entries[choice[i]];
    double w = s.space.at(i).w;
    cost_partial[i + 1] = cost_partial[i] + w * e.cost;
    load_partial[i + 1] = load_partial[i];
    for (std::size_t c = 0; c < s.dim; ++c) {
      load_partial[i + 1][c] += w * e.load[c];
    }
  };

  choice[0] = head;
  apply(0);
  std::size_t depth = 1;
  for (;;) {
    if (depth == atoms) {
      if (s.constraint.distance(load_partial[atoms]) <= tau_feas) {
        visit(choice, cost_partial[atoms], load_partial[atoms]);
      }
      // Backtrack to the deepest atom with entries left (atom 0 is pinned).
      while (depth > 1 &&
             choice[depth - 1] + 1 >= s.menus[depth - 1].entries.size()) {
        --depth;
      }
      if (depth == 1) return;
      ++choice[depth - 1];
      apply(depth - 1);
      continue;
    }
    choice[depth] = 0;
    apply(depth);
    ++depth;
  }
}

}  // namespace detail

// Exact discrete optimum by full enumeration. Throws budget_error when the
// policy count exceeds the budget. Minimizers are listed in lexicographic
// order within a tolerance band of 1e-12 * (1 + |optimum|).
inline ExactSolution solve_exact(const Scenario& s,
                                 std::uint64_t budget = 10000000,
                                 double tau_feas = -1.0) {
  if (s.space.empty()) {
    throw std::invalid_argument("solve_exact: empty measure space");
  }
  std::uint64_t product = detail::policy_product(s, budget);
  if (product > budget) {
    throw budget_error("solve_exact: policy count exceeds budget of " +
                       std::to_string(budget));
  }
  if (tau_feas < 0.0) tau_feas = 1e-9 * (1.0 + s.constraint.scale());

  std::size_t heads = s.menus.front().entries.size();

  // Pass 1: block minima over the leading atom's entries, merged in order.
  struct BlockMin {
    double best = kInf;
    std::uint64_t feasible = 0;
  };
  auto pass1 = parallel_map<BlockMin>(heads, [&](std::size_t head) {
    BlockMin out;
    detail::enumerate_feasible(
        s, head, tau_feas,
        [&](const std::vector<std::size_t>&, double cost, const Vec&) {
          ++out.feasible;
          if (cost < out.best) out.best = cost;
        });
    return out;
  });

  ExactSolution out;
  out.policy_count = product;
  for (const BlockMin& b : pass1) {
    out.feasible_count += b.feasible;
    if (b.best < out.optimum) out.optimum = b.best;
  }
  out.feasible = out.feasible_count > 0;
  if (!out.feasible) {
    out.optimum = kInf;
    return out;
  }

  // Pass 2: collect minimizers within the tie band.
  double band = 1e-12 * (1.0 + std::abs(out.optimum));
  auto pass2 = parallel_map<std::vector<Policy>>(heads, [&](std::size_t head) {
    std::vector<Policy> mins;
    detail::enumerate_feasible(
        s, head, tau_feas,
        [&](const std::vector<std::size_t>& choice, double cost, const Vec&) {
          if (cost <= out.optimum + band &&
              mins.size() < detail::kMaxStoredMinimizers) {
            mins.push_back(Policy{choice});
          }
        });
    return mins;
  });
  for (auto& block : pass2) {
    for (auto& u : block) {
      if (out.optimal_policies.size() >= detail::kMaxStoredMinimizers) {
        out.minimizers_complete = false;
        break;
      }
      out.optimal_policies.push_back(std::move(u));
    }
  }
  return out;
}

// Exact optimum of the perturbed problem (target set C + x).
inline ExactSolution value_exact(const Scenario& s, const Vec& x,
                                 std::uint64_t budget = 10000000) {
  return solve_exact(perturb_constraint(s, x), budget);
}

}  // namespace varic
