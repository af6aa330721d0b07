#pragma once

// Lagrangian dual of the constrained integral problem. For an adjoint p the
// dual value is
//
//   G(p) = -(integral of the pointwise max score) - sup_{y in C} <-p, y>,
//
// a concave, piecewise-affine function of p whose every value lower-bounds
// the primal optimum. A supergradient at p is c* - (integral of the argmax
// load), where c* attains the support of C at -p. The solver runs projected
// supergradient ascent with a Polyak step once a feasible cost is known and
// a diminishing step before that, then recovers a primal policy from the
// final argmax by greedy repair.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "varic/common.hpp"
#include "varic/constraint.hpp"
#include "varic/hamiltonian.hpp"
#include "varic/scenario.hpp"

namespace varic {

struct DualEval {
  double value = 0.0;
  Vec supergradient;
  Policy argmax;          // lowest-index maximizer per atom
  IntegralPoint argmax_integral;
  SupportResult support;  // support of C at -p
};

// One pass over the atoms: Hamiltonian values, their integral, the
// tie-broken argmax policy, and its load integral. Compensated sums in atom
// order keep the result independent of the worker count.
inline DualEval dual_eval(const Scenario& s, const Adjoint& p) {
  detail::check_adjoint(s, p, "dual_eval");
  DualEval out;
  Accumulator ham;
  Accumulator cost;
  VecAccumulator load(s.dim);
  out.argmax.choice.resize(s.space.size());
  for (std::size_t i = 0; i < s.space.size(); ++i) {
    const AtomMenu& menu = s.menus[i];
    double best = -kInf;
    std::size_t arg = 0;
    for (std::size_t e = 0; e < menu.entries.size(); ++e) {
      double score = detail::entry_score(menu.entries[e], p.x);
      if (score > best) {
        best = score;
        arg = e;
      }
    }
    double w = s.space.at(i).w;
    ham.add(w * best);
    out.argmax.choice[i] = arg;
    cost.add(w * menu.entries[arg].cost);
    load.add_scaled(w, menu.entries[arg].load);
  }
  out.argmax_integral.cost = cost.value();
  out.argmax_integral.load = load.value();
  out.support = s.constraint.support(scaled(p.x, -1.0));
  out.value = -ham.value() - out.support.value;
  out.supergradient = sub(out.support.maximizer, out.argmax_integral.load);
  return out;
}

inline double dual_value(const Scenario& s, const Adjoint& p) {
  return dual_eval(s, p).value;
}

inline Vec dual_supergradient(const Scenario& s, const Adjoint& p) {
  return dual_eval(s, p).supergradient;
}

// ---------------------------------------------------------------------------
// Primal recovery

struct Recovered {
  Policy policy;
  bool feasible = false;
  double cost = kInf;
  double feas_residual = kInf;  // distance of the load integral from C
};

// Starts from the tie-broken Hamiltonian argmax at p and repairs
// feasibility by single-atom exchanges, each chosen to minimize the
// resulting distance to C, ties by smallest cost increase, then lowest atom
// and entry index. The distance strictly decreases, so the loop terminates.
inline Recovered recover_primal(const Scenario& s, const Adjoint& p,
                                double tau_feas = -1.0) {
  detail::check_adjoint(s, p, "recover_primal");
  if (tau_feas < 0.0) tau_feas = 1e-9 * (1.0 + s.constraint.scale());

  Recovered out;
  out.policy = dual_eval(s, p).argmax;
  IntegralPoint point = integral_point(s, out.policy);
  double dist = s.constraint.distance(point.load);

  std::size_t atoms = s.space.size();
  std::size_t max_rounds = 0;
  for (const AtomMenu& m : s.menus) max_rounds += m.entries.size();
  max_rounds += 16;

  for (std::size_t round = 0; round < max_rounds && dist > tau_feas; ++round) {
    std::size_t best_atom = atoms, best_entry = 0;
    double best_dist = dist;
    double best_dcost = kInf;
    double dist_tie = 1e-12 * (1.0 + dist);
    for (std::size_t i = 0; i < atoms; ++i) {
      double w = s.space.at(i).w;
      const MenuEntry& cur = s.menus[i].entries[out.policy.choice[i]];
      for (std::size_t e = 0; e < s.menus[i].entries.size(); ++e) {
        if (e == out.policy.choice[i]) continue;
        const MenuEntry& cand = s.menus[i].entries[e];
        Vec trial = point.load;
        for (std::size_t c = 0; c < s.dim; ++c) {
          trial[c] += w * (cand.load[c] - cur.load[c]);
        }
        double d = s.constraint.distance(trial);
        double dcost = w * (cand.cost - cur.cost);
        bool better = false;
        if (d < best_dist - dist_tie) {
          better = true;
        } else if (d <= best_dist + dist_tie && best_atom != atoms) {
          double cost_tie = 1e-12 * (1.0 + std::abs(best_dcost));
          if (dcost < best_dcost - cost_tie) better = true;
          // equal on both keys: keep the earlier (atom, entry) pair
        }
        if (better) {
          best_dist = d;
          best_dcost = dcost;
          best_atom = i;
          best_entry = e;
        }
      }
    }
    if (best_atom == atoms || best_dist >= dist - 1e-15 * (1.0 + dist)) break;
    out.policy.choice[best_atom] = best_entry;
    point = integral_point(s, out.policy);
    dist = s.constraint.distance(point.load);
  }

  out.cost = point.cost;
  out.feas_residual = dist;
  out.feasible = dist <= tau_feas;
  return out;
}

// ---------------------------------------------------------------------------
// Supergradient ascent

enum class StepRule { automatic, polyak, diminishing };

struct AscendParams {
  std::size_t max_iter = 2000;
  double grad_tol = 1e-10;   // stop when the supergradient norm drops here
  double gap_tol = 1e-11;    // stop when best feasible cost - best dual <= this
  double step_tol = 1e-15;   // stop when the step length collapses
  double solved_tol = 1e-9;  // relative gap for reporting the solve as closed
  StepRule rule = StepRule::automatic;
  std::size_t stall_limit = 12;  // non-improving iterations before halving
  bool keep_history = true;
};

struct AscendHistoryEntry {
  Vec x;
  double dual_value = 0.0;
  double supergrad_norm = 0.0;
  double step = 0.0;
};

enum class SolveStatus { solved, gap_open, infeasible };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::solved:
      return "solved";
    case SolveStatus::gap_open:
      return "gapOpen";
    case SolveStatus::infeasible:
      return "infeasible";
  }
  return "unknown";
}

struct DualReport {
  Adjoint adjoint;           // best iterate found
  double dual_value = -kInf;
  std::size_t iterations = 0;
  std::vector<AscendHistoryEntry> history;
  Policy primal;             // best feasible policy (empty if none)
  bool primal_feasible = false;
  double primal_cost = kInf;
  double gap = kInf;         // primal_cost - dual_value, +inf if infeasible
  SolveStatus status = SolveStatus::infeasible;
};

// Supergradient ascent on G. With a feasible incumbent the step is Polyak's
// (incumbent - G(p)) / |g|^2; before that it is a diminishing
// (1 + |x0|) / (k + 10) along g / |g|. Because the Polyak target can sit
// above the dual maximum when a duality gap is present, a stall counter
// halves the step scale after stall_limit non-improving iterations, which
// turns the oscillation into convergence. Every accept/reject is
// deterministic, so a rerun reproduces the trace bitwise.
inline DualReport ascend(const Scenario& s, const Adjoint& x0,
                         AscendParams params = {}) {
  detail::check_adjoint(s, x0, "ascend");
  DualReport report;
  Vec x = x0.x;
  double diminish_a = 1.0 + norm(x0.x);
  double scale = 1.0;
  std::size_t stall = 0;

  double best_value = -kInf;
  Vec best_x = x;
  double best_feas_cost = kInf;

  auto consider_primal = [&](const Recovered& rec) {
    if (rec.feasible && rec.cost < best_feas_cost) {
      best_feas_cost = rec.cost;
      report.primal = rec.policy;
      report.primal_feasible = true;
      report.primal_cost = rec.cost;
    }
  };

  std::size_t k = 0;
  for (; k < params.max_iter; ++k) {
    DualEval eval = dual_eval(s, Adjoint{x});
    bool improved = eval.value > best_value;
    if (improved) {
      best_value = eval.value;
      best_x = x;
    }
    consider_primal(recover_primal(s, Adjoint{x}));

    double gn = norm(eval.supergradient);
    if (params.keep_history) {
      report.history.push_back(AscendHistoryEntry{x, eval.value, gn, 0.0});
    }
    if (gn <= params.grad_tol) {
      ++k;
      break;
    }
    if (best_feas_cost < kInf &&
        best_feas_cost - best_value <=
            params.gap_tol * (1.0 + std::abs(best_feas_cost))) {
      ++k;
      break;
    }

    if (improved) {
      stall = 0;
    } else if (++stall >= params.stall_limit) {
      scale *= 0.5;
      stall = 0;
    }

    bool use_polyak = params.rule == StepRule::polyak ||
                      (params.rule == StepRule::automatic &&
                       best_feas_cost < kInf);
    double step;  // multiplies the raw supergradient
    if (use_polyak) {
      double target_gap = best_feas_cost - eval.value;
      if (target_gap <= 0.0) {
        ++k;
        break;  // the incumbent certifies this iterate is dual-optimal
      }
      step = scale * target_gap / (gn * gn);
    } else {
      step = scale * diminish_a /
             (static_cast<double>(k) + 10.0) / gn;
    }
    if (params.keep_history) report.history.back().step = step;
    if (step * gn <= params.step_tol * (1.0 + norm(x))) {
      ++k;
      break;
    }
    axpy(step, eval.supergradient, x);
  }

  report.iterations = k;
  report.adjoint = Adjoint{best_x};
  report.dual_value = best_value;
  // One more recovery at the reported adjoint so the primal matches it when
  // the best iterate was not the last one visited.
  consider_primal(recover_primal(s, Adjoint{best_x}));

  if (report.primal_feasible) {
    report.gap = report.primal_cost - report.dual_value;
    double solved_tol =
        params.solved_tol * (1.0 + std::abs(report.primal_cost));
    report.status = report.gap <= solved_tol ? SolveStatus::solved
                                             : SolveStatus::gap_open;
  } else {
    report.gap = kInf;
    report.status = SolveStatus::infeasible;
  }
  return report;
}

}  // namespace varic
