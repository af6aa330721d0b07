#pragma once

// Laboratory for the convexity phenomena behind the saturation results:
//
//   range_cloud       all subset integrals of a vector density (atom on/off),
//   convexity_deficit how far a finite cloud is from convex (the largest
//                     distance from a hull point to the cloud),
//   aumann_sum        all policy integrals of (cost, load),
//   filippov_select   a policy hitting a prescribed integral, or a certified
//                     nearest miss,
//   sf_round          purification of a relaxed (mixing) policy onto
//                     sub-atoms without moving the integral.
//
// On atomic spaces these sets are genuinely non-convex; the deficit decays
// as atoms shrink, which is the quantitative face of the splitting argument.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "varic/common.hpp"
#include "varic/detail/geometry.hpp"
#include "varic/detail/json17.hpp"
#include "varic/hamiltonian.hpp"
#include "varic/measure.hpp"
#include "varic/scenario.hpp"

namespace varic {

struct RangeCloud {
  std::size_t dim = 0;
  std::size_t atom_count = 0;
  std::vector<Vec> points;  // deduplicated, lexicographically sorted
};

namespace detail {

inline double cloud_scale(const std::vector<Vec>& points) {
  double s = 0.0;
  for (const Vec& p : points) {
    for (double c : p) s = std::max(s, std::abs(c));
  }
  return s;
}

inline void sort_points(std::vector<Vec>& points) {
  std::sort(points.begin(), points.end());
}

// Removes points equal within tol in every coordinate. Assumes sorted
// input; scans back through the first-coordinate window, so exact
// duplicates always merge and near-duplicates merge when lex-adjacent-ish.
inline void dedup_points(std::vector<Vec>& points, double tol) {
  std::vector<Vec> kept;
  kept.reserve(points.size());
  for (const Vec& p : points) {
    bool dup = false;
    for (std::size_t k = kept.size(); k-- > 0;) {
      if (p[0] - kept[k][0] > tol) break;
      bool same = true;
      for (std::size_t c = 0; c < p.size(); ++c) {
        if (std::abs(p[c] - kept[k][c]) > tol) {
          same = false;
          break;
        }
      }
      if (same) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(p);
  }
  points = std::move(kept);
}

}  // namespace detail

// All subset integrals of the weighted density values[i] = f(t_i): the
// finite-space image of the set-valued integral over measurable subsets.
// 2^N points before deduplication; guarded because the count is exponential.
inline RangeCloud range_cloud(const MeasureSpace& space,
                              const std::vector<Vec>& values,
                              std::size_t guard = 20) {
  if (values.size() != space.size()) {
    throw std::invalid_argument("range_cloud: one value per atom required");
  }
  if (space.empty()) {
    throw std::invalid_argument("range_cloud: empty measure space");
  }
  std::size_t dim = values.front().size();
  for (const Vec& v : values) {
    if (v.size() != dim || !all_finite(v)) {
      throw std::invalid_argument("range_cloud: values must share one finite"
                                  " dimension");
    }
  }
  std::size_t n = space.size();
  if (n > guard) {
    throw budget_error("range_cloud: 2^" + std::to_string(n) +
                       " subset sums exceed the guard of 2^" +
                       std::to_string(guard));
  }

  std::vector<Vec> weighted(n);
  for (std::size_t i = 0; i < n; ++i) {
    weighted[i] = scaled(values[i], space.at(i).w);
  }

  RangeCloud cloud;
  cloud.dim = dim;
  cloud.atom_count = n;
  std::size_t total = std::size_t{1} << n;
  cloud.points.assign(total, Vec());
  cloud.points[0].assign(dim, 0.0);
  // points[m] = points[m without lowest bit] + weighted[lowest bit]: every
  // point is a sum of at most n terms along its bit chain.
  for (std::size_t m = 1; m < total; ++m) {
    std::size_t low = static_cast<std::size_t>(std::countr_zero(m));
    cloud.points[m] = add(cloud.points[m & (m - 1)], weighted[low]);
  }

  detail::sort_points(cloud.points);
  double tol = 1e-12 * (1.0 + detail::cloud_scale(cloud.points));
  detail::dedup_points(cloud.points, tol);
  return cloud;
}

// ---------------------------------------------------------------------------
// Convexity deficit

struct DeficitOptions {
  double tol = -1.0;              // enclosure width; default 1e-9 * scale
  std::uint64_t max_nodes = 400000;  // branch-and-bound node cap
  std::uint64_t samples = 200000;    // Monte Carlo draws above dimension 3
  std::uint64_t seed = 1;
};

struct DeficitResult {
  double value = 0.0;   // midpoint of the enclosure (or the estimate)
  double lower = 0.0;   // certified achievable deficit
  double upper = kInf;  // certified bound, +inf for sampled estimates
  bool exact = false;   // enclosure closed to within tol
  std::uint64_t sample_count = 0;  // Monte Carlo draws used (0 when exact)
  std::uint64_t nodes = 0;         // branch-and-bound nodes expanded
};

namespace detail {

inline double nearest_distance(const std::vector<Vec>& pts, const Vec& x) {
  double best = kInf;
  for (const Vec& p : pts) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      double d = x[c] - p[c];
      d2 += d * d;
      if (d2 >= best) break;
    }
    best = std::min(best, d2);
  }
  return std::sqrt(best);
}

// Exact one-dimensional deficit: half the largest gap between consecutive
// coordinates.
inline DeficitResult deficit_1d(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  double best = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    best = std::max(best, (xs[i] - xs[i - 1]) / 2.0);
  }
  DeficitResult out;
  out.value = out.lower = out.upper = best;
  out.exact = true;
  return out;
}

// Certified branch-and-bound for the deficit in dimensions 2 and 3:
// max over the hull of the nearest-cloud-point distance. Boxes are scored
// by d(center) + half-diagonal (d is 1-Lipschitz); boxes provably disjoint
// from the hull are discarded via an exact separating-direction test, and
// lower bounds come from evaluating d at points certified to lie in the
// hull (box centers inside it, else their hull projections).
inline DeficitResult deficit_branch_bound(const std::vector<Vec>& pts,
                                          std::size_t dim, double tol,
                                          std::uint64_t max_nodes) {
  struct Box {
    Vec lo, hi;
    double ub;
    bool operator<(const Box& o) const { return ub < o.ub; }
  };

  double scale = cloud_scale(pts);
  double proj_tol = 1e-10 * (1.0 + scale);

  auto center_of = [&](const Box& b) {
    Vec c(dim);
    for (std::size_t j = 0; j < dim; ++j) c[j] = 0.5 * (b.lo[j] + b.hi[j]);
    return c;
  };
  auto radius_of = [&](const Box& b) {
    double r2 = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      double h = 0.5 * (b.hi[j] - b.lo[j]);
      r2 += h * h;
    }
    return std::sqrt(r2);
  };

  Box root;
  root.lo.assign(dim, kInf);
  root.hi.assign(dim, -kInf);
  for (const Vec& p : pts) {
    for (std::size_t j = 0; j < dim; ++j) {
      root.lo[j] = std::min(root.lo[j], p[j]);
      root.hi[j] = std::max(root.hi[j], p[j]);
    }
  }
  root.ub = nearest_distance(pts, center_of(root)) + radius_of(root);

  double lb = 0.0;
  std::priority_queue<Box> queue;
  queue.push(root);

  DeficitResult out;
  double ub_final = root.ub;
  while (!queue.empty()) {
    Box box = queue.top();
    queue.pop();
    if (box.ub <= lb + tol) {
      // Highest-scored box first: nothing left can beat lb by more than tol.
      ub_final = std::max(lb, box.ub);
      out.exact = true;
      break;
    }
    if (++out.nodes > max_nodes) {
      ub_final = box.ub;  // honest enclosure from the open frontier
      break;
    }

    Vec center = center_of(box);
    HullProjection proj = project_hull(pts, center);
    if (proj.distance <= proj_tol) {
      lb = std::max(lb, nearest_distance(pts, center));
    } else {
      lb = std::max(lb, nearest_distance(pts, proj.point));
      // Separating test along u = center - projection: the box lies outside
      // the hull iff min over the box of <u, z> exceeds the cloud support.
      Vec u = sub(center, proj.point);
      double box_min = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        box_min += u[j] * (u[j] >= 0.0 ? box.lo[j] : box.hi[j]);
      }
      double support = -kInf;
      for (const Vec& p : pts) {
        double v = 0.0;
        for (std::size_t j = 0; j < dim; ++j) v += u[j] * p[j];
        support = std::max(support, v);
      }
      if (box_min > support + 1e-12 * (1.0 + std::abs(support))) {
        continue;  // certified disjoint from the hull
      }
    }

    // Split the longest axis.
    std::size_t axis = 0;
    double len = -1.0;
    for (std::size_t j = 0; j < dim; ++j) {
      double l = box.hi[j] - box.lo[j];
      if (l > len) {
        len = l;
        axis = j;
      }
    }
    double mid = 0.5 * (box.lo[axis] + box.hi[axis]);
    for (int half = 0; half < 2; ++half) {
      Box child;
      child.lo = box.lo;
      child.hi = box.hi;
      if (half == 0) {
        child.hi[axis] = mid;
      } else {
        child.lo[axis] = mid;
      }
      child.ub = nearest_distance(pts, center_of(child)) + radius_of(child);
      queue.push(child);
    }
  }
  if (queue.empty() && !out.exact) {
    ub_final = lb;
    out.exact = true;
  }

  out.lower = lb;
  out.upper = std::max(ub_final, lb);
  out.value = 0.5 * (out.lower + out.upper);
  return out;
}

// Monte Carlo estimate above dimension 3: max of d over random convex
// combinations of dim+1 cloud points. A lower estimate only.
inline DeficitResult deficit_monte_carlo(const std::vector<Vec>& pts,
                                         std::size_t dim,
                                         std::uint64_t samples,
                                         std::uint64_t seed) {
  Rng rng(seed);
  DeficitResult out;
  out.sample_count = samples;
  Vec x(dim), lambda(dim + 1);
  for (std::uint64_t k = 0; k < samples; ++k) {
    double lsum = 0.0;
    for (std::size_t j = 0; j <= dim; ++j) {
      lambda[j] = -std::log(1.0 - rng.uniform());
      lsum += lambda[j];
    }
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t j = 0; j <= dim; ++j) {
      const Vec& p = pts[rng.index(pts.size())];
      double w = lambda[j] / lsum;
      for (std::size_t c = 0; c < dim; ++c) x[c] += w * p[c];
    }
    out.lower = std::max(out.lower, nearest_distance(pts, x));
  }
  out.value = out.lower;
  out.upper = kInf;
  out.exact = false;
  return out;
}

// Orthonormal basis of the affine span; returns the rank and fills coords
// with the basis coordinates of (p - p0).
inline std::size_t affine_coordinates(const std::vector<Vec>& pts,
                                      std::vector<Vec>& coords) {
  std::size_t dim = pts.front().size();
  double scale = cloud_scale(pts);
  double tol = 1e-10 * (1.0 + scale);
  std::vector<Vec> basis;
  for (const Vec& p : pts) {
    Vec r = sub(p, pts.front());
    for (const Vec& b : basis) {
      axpy(-dot(r, b), b, r);
    }
    double rn = norm(r);
    if (rn > tol && basis.size() < dim) {
      basis.push_back(scaled(r, 1.0 / rn));
    }
  }
  coords.assign(pts.size(), Vec(basis.size(), 0.0));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Vec r = sub(pts[i], pts.front());
    for (std::size_t b = 0; b < basis.size(); ++b) {
      coords[i][b] = dot(r, basis[b]);
    }
  }
  return basis.size();
}

}  // namespace detail

// Largest distance from a point of the convex hull to the cloud: zero
// exactly when the cloud is convex (as a finite set, when it covers its own
// hull to resolution zero). Exact in one dimension, a certified enclosure
// via branch-and-bound in dimensions 2 and 3 (after affine-rank reduction),
// and a seeded Monte Carlo lower estimate above.
inline DeficitResult convexity_deficit(const std::vector<Vec>& points,
                                       std::size_t dim,
                                       DeficitOptions opts = {}) {
  if (points.empty()) {
    throw std::invalid_argument("convexity_deficit: empty cloud");
  }
  for (const Vec& p : points) {
    if (p.size() != dim) {
      throw std::invalid_argument("convexity_deficit: mixed dimensions");
    }
  }
  std::vector<Vec> pts = points;
  detail::sort_points(pts);
  double scale = detail::cloud_scale(pts);
  detail::dedup_points(pts, 1e-12 * (1.0 + scale));
  double tol = opts.tol >= 0.0 ? opts.tol : 1e-9 * (1.0 + scale);

  // Work in the affine span so flat clouds stay exactly solvable.
  std::vector<Vec> coords;
  std::size_t rank = detail::affine_coordinates(pts, coords);

  if (rank == 0) {
    DeficitResult out;
    out.exact = true;
    return out;
  }
  if (rank == 1) {
    std::vector<double> xs(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) xs[i] = coords[i][0];
    return detail::deficit_1d(std::move(xs));
  }
  if (rank <= 3) {
    return detail::deficit_branch_bound(coords, rank, tol, opts.max_nodes);
  }
  return detail::deficit_monte_carlo(coords, rank, opts.samples, opts.seed);
}

inline DeficitResult convexity_deficit(const RangeCloud& cloud,
                                       DeficitOptions opts = {}) {
  return convexity_deficit(cloud.points, cloud.dim, opts);
}

// ---------------------------------------------------------------------------
// Aumann sum

struct AumannSum {
  std::size_t dim = 0;       // 1 + constraint dimension: (cost, load)
  std::vector<Vec> points;   // one per policy, lexicographic, no dedup
  DeficitResult deficit;
};

// Every policy's (cost integral, load integral), one point per policy in
// lexicographic policy order, duplicates kept: two policies sharing an
// integral remain two points. The deficit is computed on the deduplicated
// geometry (duplicates cannot change it).
inline AumannSum aumann_sum(const Scenario& s,
                            std::uint64_t budget = 10000000,
                            DeficitOptions opts = {}) {
  if (s.space.empty()) {
    throw std::invalid_argument("aumann_sum: empty measure space");
  }
  std::uint64_t product = 1;
  for (const AtomMenu& m : s.menus) {
    std::uint64_t k = m.entries.size();
    if (product > budget / k) {
      throw budget_error("aumann_sum: policy count exceeds budget of " +
                         std::to_string(budget));
    }
    product *= k;
  }

  AumannSum out;
  out.dim = 1 + s.dim;
  out.points.reserve(static_cast<std::size_t>(product));

  std::size_t atoms = s.space.size();
  std::vector<std::size_t> choice(atoms, 0);
  std::vector<Vec> partial(atoms + 1, Vec(out.dim, 0.0));
  auto apply = [&](std::size_t i) {
    const MenuEntry& e = s.menus[i].entries[choice[i]];
    double w = s.space.at(i).w;
    partial[i + 1] = partial[i];
    partial[i + 1][0] += w * e.cost;
    for (std::size_t c = 0; c < s.dim; ++c) {
      partial[i + 1][c + 1] += w * e.load[c];
    }
  };
  std::size_t depth = 0;
  for (;;) {
    if (depth == atoms) {
      out.points.push_back(partial[atoms]);
      while (depth > 0 &&
             choice[depth - 1] + 1 >= s.menus[depth - 1].entries.size()) {
        --depth;
      }
      if (depth == 0) break;
      ++choice[depth - 1];
      apply(depth - 1);
      continue;
    }
    choice[depth] = 0;
    apply(depth);
    ++depth;
  }

  out.deficit = convexity_deficit(out.points, out.dim, opts);
  return out;
}

// ---------------------------------------------------------------------------
// Filippov selection

struct SelectResult {
  bool found = false;
  Policy policy;           // hit when found, else the nearest policy
  double distance = kInf;  // achieved distance to the target
  std::uint64_t nodes = 0;
};

// Searches for a policy whose (cost, load) integral lands within tol of the
// target, depth-first in lexicographic order with interval pruning per
// coordinate, so the returned hit is the lexicographically first one. When
// no policy qualifies, the search still certifies the nearest achievable
// distance (pruning keeps every branch that could beat the incumbent).
// Throws budget_error when the node budget is exhausted.
inline SelectResult filippov_select(const Scenario& s, const Vec& target,
                                    double tol,
                                    std::uint64_t budget = 10000000) {
  if (target.size() != 1 + s.dim) {
    throw std::invalid_argument(
        "filippov_select: target must be a (cost, load) point");
  }
  if (!(tol >= 0.0)) {
    throw std::invalid_argument("filippov_select: tolerance must be >= 0");
  }
  std::size_t atoms = s.space.size();
  std::size_t dim = 1 + s.dim;

  // Weighted per-coordinate entry ranges, accumulated from the back.
  std::vector<Vec> suffix_min(atoms + 1, Vec(dim, 0.0));
  std::vector<Vec> suffix_max(atoms + 1, Vec(dim, 0.0));
  auto entry_coord = [&](std::size_t i, std::size_t e, std::size_t c) {
    const MenuEntry& me = s.menus[i].entries[e];
    return s.space.at(i).w * (c == 0 ? me.cost : me.load[c - 1]);
  };
  for (std::size_t i = atoms; i-- > 0;) {
    for (std::size_t c = 0; c < dim; ++c) {
      double lo = kInf, hi = -kInf;
      for (std::size_t e = 0; e < s.menus[i].entries.size(); ++e) {
        double v = entry_coord(i, e, c);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      suffix_min[i][c] = lo + suffix_min[i + 1][c];
      suffix_max[i][c] = hi + suffix_max[i + 1][c];
    }
  }

  SelectResult out;
  std::vector<std::size_t> choice(atoms, 0);
  Vec partial(dim, 0.0);
  std::uint64_t nodes = 0;
  bool done = false;

  auto reach_bound = [&](std::size_t atom) {
    // Distance from the target to the box of reachable integrals.
    double d2 = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      double lo = partial[c] + suffix_min[atom][c];
      double hi = partial[c] + suffix_max[atom][c];
      double gap = 0.0;
      if (target[c] < lo) {
        gap = lo - target[c];
      } else if (target[c] > hi) {
        gap = target[c] - hi;
      }
      d2 += gap * gap;
    }
    return std::sqrt(d2);
  };

  std::function<void(std::size_t)> dfs = [&](std::size_t atom) {
    if (done) return;
    if (++nodes > budget) {
      throw budget_error("filippov_select: node budget of " +
                         std::to_string(budget) + " exhausted");
    }
    double bound = reach_bound(atom);
    if (bound > tol && bound >= out.distance) return;
    if (atom == atoms) {
      double d = varic::distance(partial, target);
      if (d < out.distance) {
        out.distance = d;
        out.policy.choice = choice;
      }
      if (d <= tol) {
        out.found = true;
        out.policy.choice = choice;
        out.distance = d;
        done = true;
      }
      return;
    }
    for (std::size_t e = 0; e < s.menus[atom].entries.size() && !done; ++e) {
      choice[atom] = e;
      for (std::size_t c = 0; c < dim; ++c) partial[c] += entry_coord(atom, e, c);
      dfs(atom + 1);
      for (std::size_t c = 0; c < dim; ++c) partial[c] -= entry_coord(atom, e, c);
    }
  };
  dfs(0);
  out.nodes = nodes;
  return out;
}

// ---------------------------------------------------------------------------
// Purification (rounding a relaxed policy)

// Per-atom mixing weights over the menu entries.
struct RelaxedPolicy {
  std::vector<Vec> weights;
};

// Integral of a relaxed policy: per atom the menu average under its weights.
inline IntegralPoint relaxed_integral(const Scenario& s,
                                      const RelaxedPolicy& rp) {
  if (rp.weights.size() != s.space.size()) {
    throw std::invalid_argument(
        "relaxed policy: one weight row per atom required");
  }
  Accumulator cost;
  VecAccumulator load(s.dim);
  for (std::size_t i = 0; i < s.space.size(); ++i) {
    const AtomMenu& menu = s.menus[i];
    if (rp.weights[i].size() != menu.entries.size()) {
      throw std::invalid_argument("relaxed policy: weight row at atom " +
                                  std::to_string(i) +
                                  " does not match the menu");
    }
    double w = s.space.at(i).w;
    for (std::size_t e = 0; e < menu.entries.size(); ++e) {
      double lam = rp.weights[i][e];
      cost.add(w * lam * menu.entries[e].cost);
      load.add_scaled(w * lam, menu.entries[e].load);
    }
  }
  IntegralPoint out;
  out.cost = cost.value();
  out.load = load.value();
  return out;
}

struct RoundResult {
  Scenario scenario;  // sub-atom split of the input space, tabular menus
  Policy policy;      // pure choice on the split scenario
  IntegralPoint relaxed;  // integral of the input relaxed policy
  IntegralPoint rounded;  // integral of the returned pure policy
  std::size_t split_count = 0;  // atoms split in the output (at most n+1)
  std::size_t pivot_count = 0;  // exchange pivots used to prune the support
};

// Rounds a relaxed policy to a pure policy on a finer space without moving
// the (cost, load) integral. Stage 1 prunes mixing supports: while more
// than n+1 atoms mix, a null vector of the per-atom exchange directions
// w_i * (gamma_first - gamma_second) yields a mass shift with zero integral
// effect; pushed to the first vanishing weight it removes a support entry.
// Stage 2 splits each still-mixing atom into sub-atoms with weights w_i *
// lambda_e placed inside the parent's cell, each sub-atom committing to one
// entry. Menus transfer to the sub-atoms as tables (piecewise constant in
// t), so the integral is preserved up to rounding dust.
inline RoundResult sf_round(const Scenario& s, const RelaxedPolicy& rp) {
  if (rp.weights.size() != s.space.size()) {
    throw std::invalid_argument(
        "sf_round: one weight row per atom required");
  }
  std::size_t atoms = s.space.size();
  std::size_t d = 1 + s.dim;  // augmented (cost, load) dimension

  // Validated working copy of the mixing weights.
  struct Share {
    std::size_t entry;
    double mass;
  };
  std::vector<std::vector<Share>> mix(atoms);
  for (std::size_t i = 0; i < atoms; ++i) {
    const Vec& row = rp.weights[i];
    if (row.size() != s.menus[i].entries.size()) {
      throw std::invalid_argument("sf_round: weight row at atom " +
                                  std::to_string(i) +
                                  " does not match the menu");
    }
    double sum = 0.0;
    for (double lam : row) {
      if (!(lam >= -1e-12) || !std::isfinite(lam)) {
        throw std::invalid_argument("sf_round: negative weight at atom " +
                                    std::to_string(i));
      }
      sum += lam;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("sf_round: weights at atom " +
                                  std::to_string(i) + " sum to " +
                                  detail::fmt17(sum) + ", expected 1");
    }
    for (std::size_t e = 0; e < row.size(); ++e) {
      if (row[e] > 1e-15) mix[i].push_back(Share{e, row[e] / sum});
    }
    if (mix[i].empty()) mix[i].push_back(Share{0, 1.0});
  }

  RoundResult out;
  out.relaxed = relaxed_integral(s, rp);

  auto gamma = [&](std::size_t i, std::size_t e, std::size_t c) {
    const MenuEntry& me = s.menus[i].entries[e];
    return c == 0 ? me.cost : me.load[c - 1];
  };

  auto fractional = [&]() {
    std::vector<std::size_t> f;
    for (std::size_t i = 0; i < atoms; ++i) {
      if (mix[i].size() >= 2) f.push_back(i);
    }
    return f;
  };

  // Stage 1: prune mixing supports down to at most d atoms.
  std::size_t max_pivots = 8;
  for (const auto& m : mix) max_pivots += m.size();
  for (;;) {
    std::vector<std::size_t> frac = fractional();
    if (frac.size() <= d) break;
    if (out.pivot_count++ > max_pivots) {
      throw std::runtime_error("sf_round: pivoting failed to make progress");
    }
    std::vector<std::size_t> sel(frac.begin(), frac.begin() +
                                 static_cast<long>(d + 1));
    std::vector<Vec> cols;
    cols.reserve(d + 1);
    for (std::size_t i : sel) {
      Vec v(d);
      for (std::size_t c = 0; c < d; ++c) {
        v[c] = s.space.at(i).w *
               (gamma(i, mix[i][0].entry, c) - gamma(i, mix[i][1].entry, c));
      }
      cols.push_back(std::move(v));
    }
    Vec alpha = detail::null_vector(cols, d);

    // Largest theta >= 0 keeping every touched mass nonnegative; moving
    // theta*alpha_k from the second share to the first.
    double theta = kInf;
    for (std::size_t k = 0; k <= d; ++k) {
      std::size_t i = sel[k];
      if (alpha[k] > 1e-14) {
        theta = std::min(theta, mix[i][1].mass / alpha[k]);
      } else if (alpha[k] < -1e-14) {
        theta = std::min(theta, mix[i][0].mass / (-alpha[k]));
      }
    }
    for (std::size_t k = 0; k <= d; ++k) {
      std::size_t i = sel[k];
      if (std::abs(alpha[k]) <= 1e-14) continue;
      mix[i][0].mass += theta * alpha[k];
      mix[i][1].mass -= theta * alpha[k];
      if (mix[i][0].mass <= 1e-13) mix[i][0].mass = 0.0;
      if (mix[i][1].mass <= 1e-13) mix[i][1].mass = 0.0;
      mix[i].erase(std::remove_if(mix[i].begin(), mix[i].end(),
                                  [](const Share& sh) {
                                    return sh.mass == 0.0;
                                  }),
                   mix[i].end());
      double sum = 0.0;
      for (const Share& sh : mix[i]) sum += sh.mass;
      for (Share& sh : mix[i]) sh.mass /= sum;
    }
  }

  // Stage 2: split the remaining mixing atoms.
  std::vector<double> points, weights;
  std::vector<Vec> phi_rows;
  std::vector<std::vector<Vec>> load_rows(s.dim);
  std::vector<std::size_t> choice;
  double mass = s.space.total_mass();

  for (std::size_t i = 0; i < atoms; ++i) {
    const Atom& atom = s.space.at(i);
    double cell = mass > 0.0 ? atom.w / mass : 0.0;
    // Window of width `cell` around the sample point, shifted (not clamped,
    // which would stack sub-atoms on the boundary) to stay inside [0, 1].
    double lo = atom.t - 0.5 * cell;
    if (lo < 0.0) lo = 0.0;
    if (lo + cell > 1.0) lo = 1.0 - cell;
    bool split = mix[i].size() >= 2;
    if (split) ++out.split_count;
    double cum = 0.0;
    for (const Share& sh : mix[i]) {
      double sub_w = atom.w * sh.mass;
      double sub_t = split ? lo + cell * (cum + 0.5 * sh.mass) : atom.t;
      cum += sh.mass;
      points.push_back(sub_t);
      weights.push_back(sub_w);
      Vec phi_row(s.menus[i].entries.size());
      for (std::size_t e = 0; e < phi_row.size(); ++e) {
        phi_row[e] = s.menus[i].entries[e].cost;
      }
      phi_rows.push_back(std::move(phi_row));
      for (std::size_t c = 0; c < s.dim; ++c) {
        Vec row(s.menus[i].entries.size());
        for (std::size_t e = 0; e < row.size(); ++e) {
          row[e] = s.menus[i].entries[e].load[c];
        }
        load_rows[c].push_back(std::move(row));
      }
      choice.push_back(sh.entry);
    }
  }

  Primitive primitive;
  primitive.grid = s.primitive.grid;
  primitive.phi.kind = ComponentSpec::Kind::table;
  primitive.phi.values = std::move(phi_rows);
  primitive.loads.resize(s.dim);
  for (std::size_t c = 0; c < s.dim; ++c) {
    primitive.loads[c].kind = ComponentSpec::Kind::table;
    primitive.loads[c].values = std::move(load_rows[c]);
  }

  out.scenario = make_scenario(std::move(primitive),
                               MeasureSpace(std::move(points),
                                            std::move(weights)),
                               s.constraint);
  out.policy.choice = std::move(choice);
  out.rounded = integral_point(out.scenario, out.policy);
  return out;
}

// ---------------------------------------------------------------------------
// CSV export

struct DeficitRow {
  std::size_t level = 0;
  std::size_t atoms = 0;
  std::size_t points = 0;
  DeficitResult deficit;
};

// level, atom count, cloud size, deficit enclosure. 17-digit fields,
// byte-identical across reruns for a fixed seed.
inline void write_deficit_csv(std::ostream& out,
                              const std::vector<DeficitRow>& rows) {
  out << "level,atomCount,points,deficit,lower,upper,exact,sampleCount\n";
  for (const DeficitRow& r : rows) {
    out << r.level << "," << r.atoms << "," << r.points << ","
        << detail::fmt17(r.deficit.value) << ","
        << detail::fmt17(r.deficit.lower) << ",";
    if (r.deficit.upper < kInf) {
      out << detail::fmt17(r.deficit.upper);
    } else {
      out << "inf";
    }
    out << "," << (r.deficit.exact ? "true" : "false") << ","
        << r.deficit.sample_count << "\n";
  }
}

inline void write_deficit_csv(const std::string& path,
                              const std::vector<DeficitRow>& rows) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("deficit sweep: cannot write \"" + path + "\"");
  }
  write_deficit_csv(out, rows);
}

}  // namespace varic
