#pragma once

// Shared numeric plumbing: dense vectors as std::vector<double>, compensated
// summation, error types, and the worker-count hook used by the parallel
// enumeration helpers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace varic {

using Vec = std::vector<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Error types

// Malformed or incomplete input document; the message names the field.
class schema_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A primitive evaluated to a non-finite value; the message names the atom.
class evaluation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An enumeration would exceed its guard.
class budget_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Too few usable samples for a statistical check.
class insufficient_data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition requiring a feasible policy failed; carries the distance
// from the constraint set for diagnostics.
class infeasible_error : public std::runtime_error {
 public:
  infeasible_error(const std::string& msg, double feas_residual)
      : std::runtime_error(msg), feas_residual_(feas_residual) {}
  double feas_residual() const { return feas_residual_; }

 private:
  double feas_residual_;
};

// ---------------------------------------------------------------------------
// Compensated summation (Neumaier variant)

class Accumulator {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class VecAccumulator {
 public:
  explicit VecAccumulator(std::size_t dim) : acc_(dim) {}
  void add_scaled(double w, const Vec& v) {
    for (std::size_t j = 0; j < acc_.size(); ++j) acc_[j].add(w * v[j]);
  }
  Vec value() const {
    Vec out(acc_.size());
    for (std::size_t j = 0; j < acc_.size(); ++j) out[j] = acc_[j].value();
    return out;
  }

 private:
  std::vector<Accumulator> acc_;
};

// ---------------------------------------------------------------------------
// Small vector algebra

inline double dot(const Vec& a, const Vec& b) {
  Accumulator acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

inline double norm2(const Vec& a) {
  Accumulator acc;
  for (double x : a) acc.add(x * x);
  return acc.value();
}

inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline double distance(const Vec& a, const Vec& b) {
  Accumulator acc;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc.add(d * d);
  }
  return std::sqrt(acc.value());
}

inline Vec add(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vec scaled(const Vec& a, double s) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}

inline void axpy(double s, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

inline bool all_finite(const Vec& a) {
  return std::all_of(a.begin(), a.end(),
                     [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------------------
// Deterministic sampling

// mt19937_64 with hand-rolled mappings: the standard distributions are
// implementation-defined, so sampled estimators go through this wrapper to
// stay reproducible for a given seed on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) %
           (n == 0 ? 1 : n);
  }

 private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Workers

// Worker count for parallelizable enumerations. Defaults to 1; the
// VARIC_WORKERS environment variable opts into more. Results are merged in
// index order, so the answer does not depend on the schedule.
inline unsigned worker_count() {
  const char* env = std::getenv("VARIC_WORKERS");
  if (env == nullptr) return 1;
  long v = std::strtol(env, nullptr, 10);
  if (v <= 1) return 1;
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  return static_cast<unsigned>(std::min<long>(v, 4L * hw));
}

// Applies fn(i) for i in [0, n) on worker_count() threads, storing results by
// index. Deterministic content regardless of scheduling.
template <typename R, typename F>
std::vector<R> parallel_map(std::size_t n, F fn) {
  std::vector<R> out(n);
  unsigned workers = worker_count();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      out[i] = fn(i);
    }
  };
  std::vector<std::thread> pool;
  unsigned spawn = static_cast<unsigned>(
      std::min<std::size_t>(workers, n));
  pool.reserve(spawn);
  for (unsigned w = 0; w < spawn; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace varic
