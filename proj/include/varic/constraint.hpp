#pragma once

// Target sets for the integral constraint: singleton, axis-aligned box,
// Euclidean ball, and V-polytope. Each variant supports exact support-
// function evaluation (value plus a maximizer), projection, distance, and
// translation. Support maximizers break ties deterministically: boxes pick
// the lower corner on zero coefficients, polytopes the lowest vertex index.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "varic/common.hpp"
#include "varic/detail/geometry.hpp"

namespace varic {

enum class ConstraintKind { singleton, box, ball, vpolytope };

struct SupportResult {
  double value = 0.0;
  Vec maximizer;
};

class ConstraintSet {
 public:
  static ConstraintSet singleton(Vec point) {
    require_nonempty(point.size(), "singleton");
    require_finite(point, "singleton point");
    ConstraintSet c;
    c.kind_ = ConstraintKind::singleton;
    c.dim_ = point.size();
    c.point_ = std::move(point);
    return c;
  }

  static ConstraintSet box(Vec lo, Vec hi) {
    require_nonempty(lo.size(), "box");
    if (lo.size() != hi.size()) {
      throw std::invalid_argument("box: bound dimensions differ");
    }
    require_finite(lo, "box lower bound");
    require_finite(hi, "box upper bound");
    for (std::size_t j = 0; j < lo.size(); ++j) {
      if (lo[j] > hi[j]) {
        throw std::invalid_argument(
            "box: lower bound exceeds upper bound in component " +
            std::to_string(j));
      }
    }
    ConstraintSet c;
    c.kind_ = ConstraintKind::box;
    c.dim_ = lo.size();
    c.lo_ = std::move(lo);
    c.hi_ = std::move(hi);
    return c;
  }

  static ConstraintSet ball(Vec center, double radius) {
    require_nonempty(center.size(), "ball");
    require_finite(center, "ball center");
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
      throw std::invalid_argument("ball: radius must be finite and >= 0");
    }
    ConstraintSet c;
    c.kind_ = ConstraintKind::ball;
    c.dim_ = center.size();
    c.center_ = std::move(center);
    c.radius_ = radius;
    return c;
  }

  static ConstraintSet vpolytope(std::vector<Vec> vertices) {
    if (vertices.empty()) {
      throw std::invalid_argument("vpolytope: needs at least one vertex");
    }
    std::size_t d = vertices.front().size();
    require_nonempty(d, "vpolytope");
    for (const Vec& v : vertices) {
      if (v.size() != d) {
        throw std::invalid_argument("vpolytope: mixed vertex dimensions");
      }
      require_finite(v, "vpolytope vertex");
    }
    ConstraintSet c;
    c.kind_ = ConstraintKind::vpolytope;
    c.dim_ = d;
    c.vertices_ = std::move(vertices);
    return c;
  }

  ConstraintKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  const Vec& point() const { return point_; }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }
  const std::vector<Vec>& vertices() const { return vertices_; }

  // sup_{y in C} <p, y> together with an attaining point.
  SupportResult support(const Vec& p) const {
    check_dim(p, "support direction");
    SupportResult out;
    switch (kind_) {
      case ConstraintKind::singleton:
        out.value = dot(p, point_);
        out.maximizer = point_;
        break;
      case ConstraintKind::box: {
        out.maximizer.resize(dim_);
        Accumulator acc;
        for (std::size_t j = 0; j < dim_; ++j) {
          out.maximizer[j] = p[j] > 0.0 ? hi_[j] : lo_[j];
          acc.add(p[j] * out.maximizer[j]);
        }
        out.value = acc.value();
        break;
      }
      case ConstraintKind::ball: {
        double pn = norm(p);
        out.value = dot(p, center_) + radius_ * pn;
        out.maximizer = center_;
        if (pn > 0.0) axpy(radius_ / pn, p, out.maximizer);
        break;
      }
      case ConstraintKind::vpolytope: {
        double best = -kInf;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
          double v = dot(p, vertices_[i]);
          if (v > best) {
            best = v;
            arg = i;
          }
        }
        out.value = best;
        out.maximizer = vertices_[arg];
        break;
      }
    }
    return out;
  }

  // Euclidean projection onto the set.
  Vec project(const Vec& y) const {
    check_dim(y, "projection query");
    switch (kind_) {
      case ConstraintKind::singleton:
        return point_;
      case ConstraintKind::box: {
        Vec out(dim_);
        for (std::size_t j = 0; j < dim_; ++j) {
          out[j] = std::min(std::max(y[j], lo_[j]), hi_[j]);
        }
        return out;
      }
      case ConstraintKind::ball: {
        double d = varic::distance(y, center_);
        if (d <= radius_) return y;
        Vec out = center_;
        axpy(radius_ / d, sub(y, center_), out);
        return out;
      }
      case ConstraintKind::vpolytope:
        return detail::project_hull(vertices_, y).point;
    }
    throw std::logic_error("constraint: unknown kind");
  }

  double distance(const Vec& y) const { return varic::distance(y, project(y)); }

  bool contains(const Vec& y, double tol) const { return distance(y) <= tol; }

  // The set shifted by x (used when sweeping the perturbed problems).
  ConstraintSet translated(const Vec& x) const {
    check_dim(x, "translation");
    ConstraintSet c = *this;
    switch (kind_) {
      case ConstraintKind::singleton:
        c.point_ = add(point_, x);
        break;
      case ConstraintKind::box:
        c.lo_ = add(lo_, x);
        c.hi_ = add(hi_, x);
        break;
      case ConstraintKind::ball:
        c.center_ = add(center_, x);
        break;
      case ConstraintKind::vpolytope:
        for (Vec& v : c.vertices_) v = add(v, x);
        break;
    }
    return c;
  }

  // Magnitude of the set's describing data; tolerance scales hang off this.
  double scale() const {
    double s = 0.0;
    switch (kind_) {
      case ConstraintKind::singleton:
        s = norm(point_);
        break;
      case ConstraintKind::box:
        s = std::max(norm(lo_), norm(hi_));
        break;
      case ConstraintKind::ball:
        s = norm(center_) + radius_;
        break;
      case ConstraintKind::vpolytope:
        for (const Vec& v : vertices_) s = std::max(s, norm(v));
        break;
    }
    return s;
  }

  bool operator==(const ConstraintSet& other) const {
    return kind_ == other.kind_ && dim_ == other.dim_ &&
           point_ == other.point_ && lo_ == other.lo_ && hi_ == other.hi_ &&
           center_ == other.center_ && radius_ == other.radius_ &&
           vertices_ == other.vertices_;
  }
  bool operator!=(const ConstraintSet& other) const {
    return !(*this == other);
  }

 private:
  static void require_nonempty(std::size_t dim, const char* what) {
    if (dim == 0) {
      throw std::invalid_argument(std::string(what) +
                                  ": dimension must be positive");
    }
  }
  static void require_finite(const Vec& v, const char* what) {
    if (!all_finite(v)) {
      throw std::invalid_argument(std::string(what) +
                                  ": non-finite component");
    }
  }
  void check_dim(const Vec& v, const char* what) const {
    if (v.size() != dim_) {
      throw std::invalid_argument(std::string(what) + ": expected dimension " +
                                  std::to_string(dim_) + ", got " +
                                  std::to_string(v.size()));
    }
  }

  ConstraintKind kind_ = ConstraintKind::singleton;
  std::size_t dim_ = 0;
  Vec point_;
  Vec lo_, hi_;
  Vec center_;
  double radius_ = 0.0;
  std::vector<Vec> vertices_;
};

}  // namespace varic
