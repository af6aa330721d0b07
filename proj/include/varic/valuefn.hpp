#pragma once

// Value-function experiments: sweep the perturbed problems (target set C + x
// for x on a grid), bracket each optimal value between the best dual bound
// and the best feasible cost, and test the brackets for convexity and for
// the subgradient inequality of a reported adjoint.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "varic/bruteforce.hpp"
#include "varic/common.hpp"
#include "varic/detail/json17.hpp"
#include "varic/dual.hpp"
#include "varic/scenario.hpp"

namespace varic {

enum class SampleStatus { solved, infeasible, gap_open };

inline const char* to_string(SampleStatus s) {
  switch (s) {
    case SampleStatus::solved:
      return "solved";
    case SampleStatus::infeasible:
      return "infeasible";
    case SampleStatus::gap_open:
      return "gapOpen";
  }
  return "unknown";
}

struct ValueSample {
  Vec x;
  double lower = -kInf;  // best dual value
  double upper = kInf;   // best feasible cost, +inf when none is known
  SampleStatus status = SampleStatus::gap_open;
};

struct SweepOptions {
  AscendParams ascend;
  bool use_oracle = true;           // sharpen the upper bound by enumeration
  std::uint64_t oracle_budget = 1000000;  // skip the oracle above this
  double solved_tol = 1e-9;         // relative bracket width to call solved
};

// One perturbed solve per grid point. The lower bound always comes from the
// dual ascent; the upper bound is the enumerated optimum when the policy
// tree fits the oracle budget, else the recovered feasible cost. A sample is
// infeasible only when that verdict is exact (enumeration or an exhaustive
// feasibility search); otherwise a missing feasible policy leaves the
// bracket open on top.
inline std::vector<ValueSample> value_sweep(const Scenario& s,
                                            const std::vector<Vec>& grid,
                                            SweepOptions opts = {}) {
  std::vector<ValueSample> samples;
  samples.reserve(grid.size());
  for (const Vec& x : grid) {
    if (x.size() != s.dim) {
      throw std::invalid_argument("value_sweep: grid point dimension");
    }
    Scenario sx = perturb_constraint(s, x);
    ValueSample sample;
    sample.x = x;

    Adjoint zero{Vec(s.dim, 0.0)};
    DualReport dual = ascend(sx, zero, opts.ascend);
    sample.lower = dual.dual_value;
    bool infeasible_exact = false;
    if (dual.primal_feasible) sample.upper = dual.primal_cost;

    if (opts.use_oracle &&
        detail::policy_product(sx, opts.oracle_budget) <= opts.oracle_budget) {
      ExactSolution exact = solve_exact(sx, opts.oracle_budget);
      if (exact.feasible) {
        if (exact.optimum < sample.upper) sample.upper = exact.optimum;
      } else {
        infeasible_exact = true;
      }
    } else if (!dual.primal_feasible) {
      HypothesesReport hyp = validate_hypotheses(sx);
      if (hyp.feasibility == FeasStatus::fails && hyp.certain) {
        infeasible_exact = true;
      }
    }

    if (infeasible_exact) {
      sample.status = SampleStatus::infeasible;
      sample.upper = kInf;
    } else if (sample.upper < kInf &&
               sample.upper - sample.lower <=
                   opts.solved_tol * (1.0 + std::abs(sample.upper))) {
      sample.status = SampleStatus::solved;
    } else {
      sample.status = SampleStatus::gap_open;
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

struct CheckReport {
  bool pass = false;
  std::size_t checked = 0;           // comparisons actually performed
  double worst_margin = kInf;        // most negative slack seen
  std::vector<std::string> violations;
};

namespace detail {

// Writes x as a compact tuple for check messages.
inline std::string point_label(const Vec& x) {
  std::string out = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out += ", ";
    out += fmt17(x[i]);
  }
  out += ")";
  return out;
}

}  // namespace detail

// Convexity of the value function, tested on the brackets: for every
// collinear triple x = lam*y + (1-lam)*z with lam in (0,1), solved samples
// must satisfy upper(x) <= lam*upper(y) + (1-lam)*upper(z) + tol plus the
// bracket widths involved. Throws insufficient_data_error below 3 solved
// samples.
inline CheckReport convexity_check(const std::vector<ValueSample>& samples,
                                   double tol = 1e-9) {
  std::vector<const ValueSample*> solved;
  for (const ValueSample& s : samples) {
    if (s.status == SampleStatus::solved) solved.push_back(&s);
  }
  if (solved.size() < 3) {
    throw insufficient_data_error(
        "convexity_check: needs at least 3 solved samples, got " +
        std::to_string(solved.size()));
  }
  CheckReport report;
  report.pass = true;
  for (std::size_t j = 0; j < solved.size(); ++j) {
    for (std::size_t k = j + 1; k < solved.size(); ++k) {
      const Vec& y = solved[j]->x;
      const Vec& z = solved[k]->x;
      Vec seg = sub(z, y);
      double seg2 = norm2(seg);
      if (seg2 <= 0.0) continue;
      for (std::size_t i = 0; i < solved.size(); ++i) {
        if (i == j || i == k) continue;
        const Vec& x = solved[i]->x;
        double lam = dot(sub(x, y), seg) / seg2;
        if (lam <= 1e-12 || lam >= 1.0 - 1e-12) continue;
        Vec residual = sub(sub(x, y), scaled(seg, lam));
        if (norm(residual) > 1e-10 * (1.0 + norm(seg))) continue;

        double width_x = solved[i]->upper - solved[i]->lower;
        double width_y = solved[j]->upper - solved[j]->lower;
        double width_z = solved[k]->upper - solved[k]->lower;
        double rhs = (1.0 - lam) * solved[j]->upper + lam * solved[k]->upper;
        double slack = tol + width_x + (1.0 - lam) * width_y + lam * width_z;
        double margin = rhs + slack - solved[i]->upper;
        ++report.checked;
        report.worst_margin = std::min(report.worst_margin, margin);
        if (margin < 0.0) {
          report.pass = false;
          report.violations.push_back(
              "convexity violated at " + detail::point_label(x) + " between " +
              detail::point_label(y) + " and " + detail::point_label(z) +
              " by " + detail::fmt17(-margin));
        }
      }
    }
  }
  return report;
}

// Subgradient inequality for an adjoint reported at x = 0: every solved
// sample must satisfy V(x) >= V(0) + <p, x> - tol, tested with the sound
// bracket sides (upper at x against lower at 0). Requires a solved sample
// at the origin.
inline CheckReport subgradient_check(const std::vector<ValueSample>& samples,
                                     const Adjoint& p, double tol = 1e-9) {
  const ValueSample* origin = nullptr;
  for (const ValueSample& s : samples) {
    if (s.status != SampleStatus::solved) continue;
    if (norm(s.x) <= 1e-15) {
      origin = &s;
      break;
    }
  }
  if (origin == nullptr) {
    throw std::invalid_argument(
        "subgradient_check: needs a solved sample at x = 0");
  }
  CheckReport report;
  report.pass = true;
  for (const ValueSample& s : samples) {
    if (s.status == SampleStatus::solved) {
      if (&s == origin) continue;
      double margin = s.upper - origin->lower - dot(p.x, s.x) + tol;
      ++report.checked;
      report.worst_margin = std::min(report.worst_margin, margin);
      if (margin < 0.0) {
        report.pass = false;
        report.violations.push_back(
            "subgradient inequality violated at " + detail::point_label(s.x) +
            " by " + detail::fmt17(-margin));
      }
    }
    // infeasible samples have V = +inf: the inequality holds trivially
  }
  return report;
}

// CSV export: x components, bracket, status. 17-digit fields, "inf" for an
// open upper bound; byte-identical across reruns.
inline void write_value_csv(std::ostream& out,
                            const std::vector<ValueSample>& samples,
                            std::size_t dim) {
  for (std::size_t c = 0; c < dim; ++c) out << "x" << c + 1 << ",";
  out << "lower,upper,status\n";
  for (const ValueSample& s : samples) {
    for (double xc : s.x) out << detail::fmt17(xc) << ",";
    out << detail::fmt17(s.lower) << ",";
    if (s.upper < kInf) {
      out << detail::fmt17(s.upper);
    } else {
      out << "inf";
    }
    out << "," << to_string(s.status) << "\n";
  }
}

inline void write_value_csv(const std::string& path,
                            const std::vector<ValueSample>& samples,
                            std::size_t dim) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("value sweep: cannot write \"" + path + "\"");
  }
  write_value_csv(out, samples, dim);
}

}  // namespace varic
