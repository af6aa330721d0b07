#pragma once

// Optimality certificates. A feasible policy u and an adjoint p are graded
// by two nonnegative residuals:
//
//   mpResidual: integral of (pointwise max score - achieved score),
//   ncResidual: sup_{y in C} <-p, y> - <-p, integral load>,
//
// whose sum equals cost(u) - G(p), hence bounds the true suboptimality of u
// from above by weak duality. Both vanish exactly at a certified optimal
// pair.

#include <cstddef>
#include <string>

#include "varic/common.hpp"
#include "varic/constraint.hpp"
#include "varic/dual.hpp"
#include "varic/hamiltonian.hpp"
#include "varic/scenario.hpp"

namespace varic {

// sigma_C(-p) - <-p, y> for y in C (within tau_feas, checked). Nonnegative
// by the support inequality; zero exactly when -p is normal to C at y.
// Rounding can leave a tiny negative when y sits within tolerance of the
// boundary, so the result is clamped at zero.
inline double normal_cone_residual(const ConstraintSet& C, const Vec& y,
                                   const Adjoint& p, double tau_feas = -1.0) {
  if (y.size() != C.dim() || p.x.size() != C.dim()) {
    throw std::invalid_argument("normal_cone_residual: dimension mismatch");
  }
  if (tau_feas < 0.0) tau_feas = 1e-9 * (1.0 + C.scale());
  double dist = C.distance(y);
  if (dist > tau_feas) {
    throw infeasible_error(
        "normal_cone_residual: point lies outside the target set (distance " +
        std::to_string(dist) + ")",
        dist);
  }
  Vec minus_p = scaled(p.x, -1.0);
  double r = C.support(minus_p).value - dot(minus_p, y);
  return r > 0.0 ? r : 0.0;
}

enum class Verdict { optimal, eps_optimal, rejected };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::optimal:
      return "optimal";
    case Verdict::eps_optimal:
      return "epsOptimal";
    case Verdict::rejected:
      return "rejected";
  }
  return "unknown";
}

struct CertifyOptions {
  // Negative values select the default scale-aware tolerances.
  double tau_feas = -1.0;  // feasibility:   1e-9 * (1 + |C|)
  double tau_res = -1.0;   // residuals:     1e-7 * (1 + max |menu cost|)
  double epsilon = -1.0;   // eps-optimality: 1e-6 * (1 + max |menu cost|)
};

struct Certificate {
  double mp_residual = 0.0;
  double nc_residual = 0.0;
  double feas_residual = 0.0;
  double duality_gap = 0.0;         // cost(u) - G(p)
  double suboptimality_bound = 0.0;  // mp_residual + nc_residual
  Verdict verdict = Verdict::rejected;
};

namespace detail {

inline double cost_scale(const Scenario& s) {
  double m = 0.0;
  for (const AtomMenu& menu : s.menus) {
    for (const MenuEntry& e : menu.entries) {
      m = std::max(m, std::abs(e.cost));
    }
  }
  return m;
}

}  // namespace detail

// Grades the pair (u, p). Throws infeasible_error when u's load integral
// lies further than tau_feas from C; the certificate's residual calculus is
// only meaningful for feasible policies.
inline Certificate certificate(const Scenario& s, const Policy& u,
                               const Adjoint& p, CertifyOptions opts = {}) {
  detail::check_policy(s, u, "certificate");
  detail::check_adjoint(s, p, "certificate");
  double tau_feas = opts.tau_feas >= 0.0
                        ? opts.tau_feas
                        : 1e-9 * (1.0 + s.constraint.scale());
  double cost_mag = detail::cost_scale(s);
  double tau_res =
      opts.tau_res >= 0.0 ? opts.tau_res : 1e-7 * (1.0 + cost_mag);
  double epsilon =
      opts.epsilon >= 0.0 ? opts.epsilon : 1e-6 * (1.0 + cost_mag);

  IntegralPoint point = integral_point(s, u);
  double feas = s.constraint.distance(point.load);
  if (feas > tau_feas) {
    throw infeasible_error(
        "certificate: policy load integral lies outside the target set "
        "(distance " +
            std::to_string(feas) + ")",
        feas);
  }

  Certificate cert;
  cert.feas_residual = feas;
  cert.mp_residual = mp_residual(s, u, p);
  cert.nc_residual =
      normal_cone_residual(s.constraint, point.load, p, tau_feas);
  cert.duality_gap = point.cost - dual_value(s, p);
  cert.suboptimality_bound = cert.mp_residual + cert.nc_residual;

  if (cert.mp_residual <= tau_res && cert.nc_residual <= tau_res) {
    cert.verdict = Verdict::optimal;
  } else if (cert.suboptimality_bound <= epsilon) {
    cert.verdict = Verdict::eps_optimal;
  } else {
    cert.verdict = Verdict::rejected;
  }
  return cert;
}

}  // namespace varic
