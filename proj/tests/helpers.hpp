#pragma once

// Shared generators and oracles for the unit tests and the acceptance gate.
// Everything here is seeded — two runs with the same Rng produce the same
// instances byte for byte.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "varic/varic.hpp"

namespace varic::testutil {

struct InstanceOptions {
  std::size_t max_atoms = 10;
  std::size_t max_entries = 3;   // per-atom menu size 2..max_entries
  std::size_t max_dim = 2;
  bool force_feasible = true;    // anchor C on an achievable load
};

// Small dense instance with tabular menus: costs and loads uniform in
// [-1, 1], constraint a singleton or box around a random policy's load, so
// feasibility is guaranteed unless force_feasible is off.
inline Scenario random_scenario(Rng& rng, const InstanceOptions& opts = {}) {
  std::size_t atoms = 1 + rng.index(opts.max_atoms);
  std::size_t dim = 1 + rng.index(opts.max_dim);
  std::size_t entries = 2 + rng.index(opts.max_entries - 1);

  MeasureSpace space = [&] {
    if (rng.index(2) == 0) return uniform_space(atoms);
    std::vector<double> points, weights;
    for (std::size_t i = 0; i < atoms; ++i) {
      double lo = static_cast<double>(i) / static_cast<double>(atoms);
      points.push_back(lo + rng.uniform(0.1, 0.9) /
                                static_cast<double>(atoms));
      weights.push_back(rng.uniform(0.5, 1.5) / static_cast<double>(atoms));
    }
    return MeasureSpace(std::move(points), std::move(weights));
  }();

  Primitive primitive;
  for (std::size_t e = 0; e < entries; ++e) {
    primitive.grid.push_back(
        Vec{static_cast<double>(e) / static_cast<double>(entries - 1)});
  }
  primitive.phi.kind = ComponentSpec::Kind::table;
  for (std::size_t i = 0; i < atoms; ++i) {
    Vec row;
    for (std::size_t e = 0; e < entries; ++e) row.push_back(rng.uniform(-1, 1));
    primitive.phi.values.push_back(std::move(row));
  }
  for (std::size_t k = 0; k < dim; ++k) {
    ComponentSpec load;
    load.kind = ComponentSpec::Kind::table;
    for (std::size_t i = 0; i < atoms; ++i) {
      Vec row;
      for (std::size_t e = 0; e < entries; ++e) {
        row.push_back(rng.uniform(-1, 1));
      }
      load.values.push_back(std::move(row));
    }
    primitive.loads.push_back(std::move(load));
  }

  // Anchor the constraint on the load of a random policy so at least one
  // feasible policy exists by construction.
  Vec anchor(dim, 0.0);
  if (opts.force_feasible) {
    VecAccumulator acc(dim);
    for (std::size_t i = 0; i < atoms; ++i) {
      std::size_t e = rng.index(entries);
      Vec entry_load(dim);
      for (std::size_t k = 0; k < dim; ++k) {
        entry_load[k] = primitive.loads[k].values[i][e];
      }
      acc.add_scaled(space.at(i).w, entry_load);
    }
    anchor = acc.value();
  } else {
    for (std::size_t k = 0; k < dim; ++k) anchor[k] = rng.uniform(-1, 1);
  }

  ConstraintSet constraint = [&] {
    if (rng.index(2) == 0) return ConstraintSet::singleton(anchor);
    Vec lo = anchor, hi = anchor;
    for (std::size_t k = 0; k < dim; ++k) {
      lo[k] -= rng.uniform(0.05, 0.4);
      hi[k] += rng.uniform(0.05, 0.4);
    }
    return ConstraintSet::box(std::move(lo), std::move(hi));
  }();

  return make_scenario(std::move(primitive), std::move(space),
                       std::move(constraint));
}

// Random per-atom mixtures; roughly half the atoms come out pure.
inline RelaxedPolicy random_relaxed_policy(Rng& rng, const Scenario& s) {
  RelaxedPolicy rp;
  for (const AtomMenu& menu : s.menus) {
    std::size_t m = menu.entries.size();
    Vec row(m, 0.0);
    if (rng.index(2) == 0) {
      row[rng.index(m)] = 1.0;
    } else {
      double total = 0.0;
      for (double& v : row) {
        v = rng.uniform(0.0, 1.0) + 1e-3;
        total += v;
      }
      for (double& v : row) v /= total;
    }
    rp.weights.push_back(std::move(row));
  }
  return rp;
}

// Exact value-function samples from the enumeration oracle: lower == upper
// at feasible perturbations, infeasible status elsewhere.
inline std::vector<ValueSample> exact_value_samples(
    const Scenario& s, const std::vector<Vec>& xs,
    std::uint64_t budget = 1000000) {
  std::vector<ValueSample> samples;
  for (const Vec& x : xs) {
    ValueSample sample;
    sample.x = x;
    ExactSolution exact = solve_exact(perturb_constraint(s, x), budget);
    if (exact.feasible) {
      sample.lower = exact.optimum;
      sample.upper = exact.optimum;
      sample.status = SampleStatus::solved;
    } else {
      sample.status = SampleStatus::infeasible;
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

// Visits every feasible policy of s (all leading entries, lexicographic).
template <typename Visit>
void for_each_feasible(const Scenario& s, double tau_feas, Visit visit) {
  for (std::size_t head = 0; head < s.menus.front().entries.size(); ++head) {
    detail::enumerate_feasible(s, head, tau_feas, visit);
  }
}

struct CliResult {
  int exit_code = -1;
  std::string out;
};

// Runs the built CLI binary and captures stdout; stderr is dropped.
inline CliResult run_cli(const std::string& args) {
  CliResult result;
  std::string cmd = std::string(VARIC_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return result;
  std::array<char, 4096> buf;
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    result.out.append(buf.data(), got);
  }
  int status = pclose(pipe);
  if (status >= 0 && WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  }
  return result;
}

inline std::string fixture_path(const std::string& name) {
  return std::string(VARIC_FIXTURE_DIR) + "/" + name;
}

}  // namespace varic::testutil
