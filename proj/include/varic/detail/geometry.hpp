#pragma once

// Small-dimension geometry kernels: dense Gaussian elimination, null vectors
// of wide matrices, and Wolfe's minimum-norm-point algorithm for projecting
// onto the convex hull of a finite point set.

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "varic/common.hpp"

namespace varic::detail {

// Solves A x = b in place by Gaussian elimination with partial pivoting.
// Returns false when the matrix is numerically singular.
inline bool solve_dense(std::vector<Vec>& A, Vec& b) {
  std::size_t n = A.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(A[col][col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double v = std::abs(A[r][col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (!(best > 1e-14)) return false;
    if (pivot != col) {
      std::swap(A[pivot], A[col]);
      std::swap(b[pivot], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = A[r][col] / A[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= A[i][c] * b[c];
    b[i] = s / A[i][i];
  }
  return true;
}

// Nontrivial alpha with sum_j alpha_j * cols[j] = 0, for m > rank columns in
// R^dim. Row-reduces the dim x m matrix, picks the first free column, and
// back-substitutes. The returned vector is scaled to max |alpha_j| = 1.
inline Vec null_vector(const std::vector<Vec>& cols, std::size_t dim) {
  std::size_t m = cols.size();
  std::vector<Vec> R(dim, Vec(m, 0.0));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < dim; ++i) R[i][j] = cols[j][i];
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < m; ++j) scale = std::max(scale, std::abs(R[i][j]));
  }
  double tol = 1e-12 * (1.0 + scale);

  std::vector<std::size_t> pivot_col;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m && row < dim; ++col) {
    std::size_t pr = row;
    double best = std::abs(R[row][col]);
    for (std::size_t r = row + 1; r < dim; ++r) {
      double v = std::abs(R[r][col]);
      if (v > best) {
        best = v;
        pr = r;
      }
    }
    if (best <= tol) continue;  // free column
    std::swap(R[pr], R[row]);
    for (std::size_t r = 0; r < dim; ++r) {
      if (r == row) continue;
      double f = R[r][col] / R[row][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < m; ++c) R[r][c] -= f * R[row][c];
    }
    pivot_col.push_back(col);
    ++row;
  }

  // First column that did not become a pivot is free; it exists when m
  // exceeds the rank.
  std::size_t free_col = m;
  {
    std::size_t k = 0;
    for (std::size_t col = 0; col < m; ++col) {
      if (k < pivot_col.size() && pivot_col[k] == col) {
        ++k;
        continue;
      }
      free_col = col;
      break;
    }
  }
  if (free_col == m) {
    throw std::invalid_argument("null_vector: columns are independent");
  }

  Vec alpha(m, 0.0);
  alpha[free_col] = 1.0;
  for (std::size_t k = 0; k < pivot_col.size(); ++k) {
    std::size_t col = pivot_col[k];
    alpha[col] = -R[k][free_col] / R[k][col];
  }
  double amax = 0.0;
  for (double a : alpha) amax = std::max(amax, std::abs(a));
  for (double& a : alpha) a /= amax;
  return alpha;
}

// ---------------------------------------------------------------------------
// Wolfe minimum-norm point

struct HullProjection {
  Vec point;          // nearest point of conv(points) to the query
  double distance = 0.0;
  // support of the nearest point: (point index, convex coefficient)
  std::vector<std::pair<std::size_t, double>> coeffs;
};

// Projects query onto conv(points) with Wolfe's minimum-norm-point
// algorithm. Points live in R^dim with dim small; the corral never grows
// past dim+1 affinely independent points, so the per-step linear solves stay
// tiny. Deterministic: vertex searches break ties by lowest index.
inline HullProjection project_hull(const std::vector<Vec>& points,
                                   const Vec& query) {
  if (points.empty()) {
    throw std::invalid_argument("project_hull: empty point set");
  }
  std::size_t dim = query.size();
  std::size_t n = points.size();

  // Shift so the query is the origin.
  auto shifted = [&](std::size_t i, std::size_t j) {
    return points[i][j] - query[j];
  };
  double scale2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) s += shifted(i, j) * shifted(i, j);
    scale2 = std::max(scale2, s);
  }
  double eps = 1e-12 * (1.0 + scale2);

  // Start from the point nearest the query.
  std::size_t start = 0;
  double best = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) s += shifted(i, j) * shifted(i, j);
    if (s < best) {
      best = s;
      start = i;
    }
  }

  std::vector<std::size_t> corral{start};
  Vec lambda{1.0};
  Vec x(dim);
  for (std::size_t j = 0; j < dim; ++j) x[j] = shifted(start, j);

  auto rebuild_x = [&]() {
    for (std::size_t j = 0; j < dim; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < corral.size(); ++k) {
        s += lambda[k] * shifted(corral[k], j);
      }
      x[j] = s;
    }
  };

  const int max_major = 16 * static_cast<int>(n + dim + 4);
  for (int major = 0; major < max_major; ++major) {
    // Most violating vertex: minimizes <x, p_i>.
    double xx = 0.0;
    for (std::size_t j = 0; j < dim; ++j) xx += x[j] * x[j];
    std::size_t jbest = n;
    double vbest = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      for (std::size_t j = 0; j < dim; ++j) v += x[j] * shifted(i, j);
      if (v < vbest) {
        vbest = v;
        jbest = i;
      }
    }
    if (xx - vbest <= eps) break;  // optimality: <x, x - p_i> <= 0 for all i
    bool already = false;
    for (std::size_t idx : corral) {
      if (idx == jbest) {
        already = true;
        break;
      }
    }
    if (already) break;  // numerically stuck; current x is as good as it gets
    corral.push_back(jbest);
    lambda.push_back(0.0);

    // Minor cycle: pull the affine minimizer into the simplex.
    for (int minor = 0; minor < 64; ++minor) {
      std::size_t m = corral.size();
      // Affine minimizer: [2 G  1; 1^T 0] [mu; nu] = [0; 1] where
      // G_ab = <p_a, p_b>.
      std::vector<Vec> A(m + 1, Vec(m + 1, 0.0));
      Vec rhs(m + 1, 0.0);
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
          double g = 0.0;
          for (std::size_t j = 0; j < dim; ++j) {
            g += shifted(corral[a], j) * shifted(corral[b], j);
          }
          A[a][b] = 2.0 * g;
        }
        A[a][m] = 1.0;
        A[m][a] = 1.0;
      }
      rhs[m] = 1.0;
      Vec mu;
      if (solve_dense(A, rhs)) {
        mu.assign(rhs.begin(), rhs.begin() + static_cast<long>(m));
      } else {
        // Degenerate corral: drop the smallest-coefficient member.
        std::size_t drop = 0;
        for (std::size_t k = 1; k < m; ++k) {
          if (lambda[k] < lambda[drop]) drop = k;
        }
        corral.erase(corral.begin() + static_cast<long>(drop));
        lambda.erase(lambda.begin() + static_cast<long>(drop));
        double lsum = 0.0;
        for (double l : lambda) lsum += l;
        for (double& l : lambda) l /= lsum;
        rebuild_x();
        continue;
      }

      double mu_min = kInf;
      for (double v : mu) mu_min = std::min(mu_min, v);
      if (mu_min > 1e-12) {
        lambda = mu;
        rebuild_x();
        break;  // interior of the simplex: accept and go find a new vertex
      }
      // Step from lambda toward mu until the first coefficient dies.
      double theta = 1.0;
      for (std::size_t k = 0; k < m; ++k) {
        if (mu[k] < 1e-12) {
          double denom = lambda[k] - mu[k];
          if (denom > 0.0) theta = std::min(theta, lambda[k] / denom);
        }
      }
      for (std::size_t k = 0; k < m; ++k) {
        lambda[k] = (1.0 - theta) * lambda[k] + theta * mu[k];
      }
      // Remove dead coefficients (keep at least one member).
      for (std::size_t k = m; k-- > 0 && corral.size() > 1;) {
        if (lambda[k] <= 1e-12) {
          corral.erase(corral.begin() + static_cast<long>(k));
          lambda.erase(lambda.begin() + static_cast<long>(k));
        }
      }
      double lsum = 0.0;
      for (double l : lambda) lsum += l;
      for (double& l : lambda) l /= lsum;
      rebuild_x();
    }
  }

  HullProjection out;
  out.point.assign(dim, 0.0);
  for (std::size_t k = 0; k < corral.size(); ++k) {
    for (std::size_t j = 0; j < dim; ++j) {
      out.point[j] += lambda[k] * points[corral[k]][j];
    }
    out.coeffs.emplace_back(corral[k], lambda[k]);
  }
  out.distance = varic::distance(out.point, query);
  return out;
}

}  // namespace varic::detail
