#pragma once

// Weighted atomic measure spaces on [0,1]: the discretization grid every
// other module integrates against. Atoms carry a sample point t and a
// positive weight w; refinement splits each atom into equal-weight sub-atoms
// whose sample points fan out inside the atom's cell.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "varic/common.hpp"

namespace varic {

struct Atom {
  std::size_t index = 0;  // position in the space, also the tie-break order
  double t = 0.0;         // sample point in [0,1]
  double w = 0.0;         // positive weight
};

class MeasureSpace {
 public:
  MeasureSpace() = default;

  MeasureSpace(std::vector<double> points, std::vector<double> weights) {
    if (points.size() != weights.size()) {
      throw std::invalid_argument(
          "measure space: points and weights differ in length");
    }
    atoms_.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      atoms_.push_back(Atom{i, points[i], weights[i]});
    }
    validate();
  }

  explicit MeasureSpace(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    for (std::size_t i = 0; i < atoms_.size(); ++i) atoms_[i].index = i;
    validate();
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& at(std::size_t i) const { return atoms_.at(i); }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  double total_mass() const { return total_mass_; }

  bool operator==(const MeasureSpace& other) const {
    if (atoms_.size() != other.atoms_.size()) return false;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (atoms_[i].t != other.atoms_[i].t) return false;
      if (atoms_[i].w != other.atoms_[i].w) return false;
    }
    return true;
  }
  bool operator!=(const MeasureSpace& other) const {
    return !(*this == other);
  }

 private:
  void validate() {
    if (atoms_.empty()) {
      throw std::invalid_argument("measure space: needs at least one atom");
    }
    for (const Atom& a : atoms_) {
      if (!(a.w > 0.0) || !std::isfinite(a.w)) {
        throw std::invalid_argument(
            "measure space: atom " + std::to_string(a.index) +
            " has non-positive or non-finite weight");
      }
      if (!(a.t >= 0.0 && a.t <= 1.0)) {
        throw std::invalid_argument(
            "measure space: atom " + std::to_string(a.index) +
            " has sample point outside [0,1]");
      }
    }
    std::vector<double> ts;
    ts.reserve(atoms_.size());
    for (const Atom& a : atoms_) ts.push_back(a.t);
    std::sort(ts.begin(), ts.end());
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (ts[i] == ts[i - 1]) {
        throw std::invalid_argument(
            "measure space: duplicate sample point t=" +
            std::to_string(ts[i]));
      }
    }
    Accumulator mass;
    for (const Atom& a : atoms_) mass.add(a.w);
    total_mass_ = mass.value();
  }

  std::vector<Atom> atoms_;
  double total_mass_ = 0.0;
};

// n atoms at the midpoints (2i+1)/(2n), each of weight 1/n.
inline MeasureSpace uniform_space(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("uniform_space: atom count must be positive");
  }
  std::vector<double> points(n), weights(n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    points[i] = (2.0 * static_cast<double>(i) + 1.0) /
                (2.0 * static_cast<double>(n));
  }
  return MeasureSpace(std::move(points), std::move(weights));
}

// Splits every atom into k equal-weight sub-atoms. Atom i owns a cell of
// width w_i / totalMass centered at t_i; the sub-atom sample points sit at
// the k cell-midpoints of that cell, so refining a uniform space yields the
// finer uniform space exactly.
inline MeasureSpace refine(const MeasureSpace& space, std::size_t k) {
  if (k == 0) {
    throw std::invalid_argument("refine: split factor must be positive");
  }
  if (k == 1) return space;
  std::vector<double> points, weights;
  points.reserve(space.size() * k);
  weights.reserve(space.size() * k);
  double mass = space.total_mass();
  for (const Atom& a : space.atoms()) {
    double cell = mass > 0.0 ? a.w / mass : 0.0;
    double sub_w = a.w / static_cast<double>(k);
    for (std::size_t j = 0; j < k; ++j) {
      double offset = (2.0 * static_cast<double>(j) + 1.0) /
                          (2.0 * static_cast<double>(k)) -
                      0.5;
      points.push_back(a.t + cell * offset);
      weights.push_back(sub_w);
    }
  }
  return MeasureSpace(std::move(points), std::move(weights));
}

inline double max_atom_weight(const MeasureSpace& space) {
  if (space.empty()) {
    throw std::invalid_argument("max_atom_weight: empty measure space");
  }
  double best = 0.0;
  for (const Atom& a : space.atoms()) best = std::max(best, a.w);
  return best;
}

}  // namespace varic
