#pragma once

// Projective cone scheduling policy: sign function, backlog normalization,
// triangular scoring, the argmax policy, and the matrix-form equivalent.
//
// Queue indices are 0-based throughout. Triangular entries (i, j), i <= j,
// are stored row-major: (0,0), (0,1), ..., (0,n-1), (1,1), ..., (n-1,n-1).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcsemu/error.hpp"

namespace pcsemu {

using Config = std::vector<std::int64_t>;

inline std::size_t triangular_size(std::size_t n) { return n * (n + 1) / 2; }

inline std::string to_string(std::span<const std::int64_t> v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out + ")";
}

// Customers waiting in each queue at the start of a slot.
class Backlog {
 public:
  Backlog() = default;
  explicit Backlog(std::vector<std::int64_t> x) : x_(std::move(x)) {
    if (x_.empty()) throw ValidationError("backlog must have at least one queue");
    for (auto v : x_)
      if (v < 0) throw ValidationError("backlog entries must be nonnegative, got " + to_string(x_));
  }

  std::size_t size() const { return x_.size(); }
  std::int64_t operator[](std::size_t i) const { return x_[i]; }
  const std::vector<std::int64_t>& values() const { return x_; }
  std::int64_t l1() const { return std::accumulate(x_.begin(), x_.end(), std::int64_t{0}); }

  friend bool operator==(const Backlog&, const Backlog&) = default;

 private:
  std::vector<std::int64_t> x_;
};

// Backlog scaled to unit 1-norm, or the zero vector.
class NormalizedBacklog {
 public:
  NormalizedBacklog() = default;

  // Accepts an already-normalized vector (e.g. from a trace); checks the
  // sum is 0 exactly or 1 within 1e-9.
  explicit NormalizedBacklog(std::vector<double> y) : y_(std::move(y)) {
    if (y_.empty()) throw ValidationError("normalized backlog must have at least one queue");
    double sum = 0.0;
    for (double v : y_) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ValidationError("normalized backlog entries must be finite and nonnegative");
      sum += v;
    }
    if (sum != 0.0 && std::abs(sum - 1.0) > 1e-9)
      throw ValidationError("normalized backlog must sum to 0 or 1");
  }

  std::size_t size() const { return y_.size(); }
  double operator[](std::size_t i) const { return y_[i]; }
  std::span<const double> values() const { return y_; }

  friend bool operator==(const NormalizedBacklog&, const NormalizedBacklog&) = default;

 private:
  friend NormalizedBacklog normalize(const Backlog& x);
  struct Unchecked {};
  NormalizedBacklog(std::vector<double> y, Unchecked) : y_(std::move(y)) {}

  std::vector<double> y_;
};

inline NormalizedBacklog normalize(const Backlog& x) {
  std::vector<double> y(x.values().begin(), x.values().end());
  const std::int64_t norm = x.l1();
  if (norm != 0) {
    const double d = static_cast<double>(norm);
    for (double& v : y) v /= d;
  }
  return NormalizedBacklog(std::move(y), NormalizedBacklog::Unchecked{});
}

// Ordered finite set of service configurations. List order is the
// tie-break rule of the argmax policy.
class ScheduleSet {
 public:
  ScheduleSet() = default;
  explicit ScheduleSet(std::vector<Config> configs) : configs_(std::move(configs)) {
    if (configs_.empty()) throw ValidationError("schedule set must contain at least one configuration");
    n_ = configs_.front().size();
    if (n_ == 0) throw ValidationError("configurations must have at least one queue");
    for (std::size_t k = 0; k < configs_.size(); ++k) {
      const auto& c = configs_[k];
      if (c.size() != n_)
        throw ValidationError("configuration " + std::to_string(k) + " has length " +
                              std::to_string(c.size()) + ", expected " + std::to_string(n_));
      for (auto v : c)
        if (v < 0) throw ValidationError("configuration " + to_string(c) + " has a negative entry");
      for (std::size_t prev = 0; prev < k; ++prev)
        if (configs_[prev] == c) throw ValidationError("duplicate configuration " + to_string(c));
    }
  }

  std::size_t n() const { return n_; }
  std::size_t size() const { return configs_.size(); }
  const Config& operator[](std::size_t k) const { return configs_[k]; }
  const std::vector<Config>& configs() const { return configs_; }
  auto begin() const { return configs_.begin(); }
  auto end() const { return configs_.end(); }

  std::optional<std::size_t> index_of(std::span<const std::int64_t> s) const {
    for (std::size_t k = 0; k < configs_.size(); ++k)
      if (std::ranges::equal(configs_[k], s)) return k;
    return std::nullopt;
  }
  bool contains(std::span<const std::int64_t> s) const { return index_of(s).has_value(); }

  friend bool operator==(const ScheduleSet&, const ScheduleSet&) = default;

 private:
  std::vector<Config> configs_;
  std::size_t n_ = 0;
};

// Upper-triangular array of p = n(n+1)/2 nonnegative reals. Houses the
// expert's parameters, normalized estimates, and raw MWU weights.
class TriangularParams {
 public:
  TriangularParams() = default;
  TriangularParams(std::size_t n, std::vector<double> entries) : n_(n), entries_(std::move(entries)) {
    if (n_ == 0) throw ValidationError("triangular params need n >= 1");
    if (entries_.size() != triangular_size(n_))
      throw ValidationError("expected " + std::to_string(triangular_size(n_)) +
                            " triangular entries for n=" + std::to_string(n_) + ", got " +
                            std::to_string(entries_.size()));
    for (double v : entries_)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ValidationError("triangular entries must be finite and nonnegative");
  }

  static TriangularParams filled(std::size_t n, double value) {
    return TriangularParams(n, std::vector<double>(triangular_size(n), value));
  }

  static std::size_t index(std::size_t n, std::size_t i, std::size_t j) {
    return i * n - i * (i - 1) / 2 + (j - i);
  }

  std::size_t n() const { return n_; }
  std::size_t size() const { return entries_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return entries_[index(n_, i, j)]; }
  double& at(std::size_t i, std::size_t j) { return entries_[index(n_, i, j)]; }
  std::span<const double> entries() const { return entries_; }

  double sum() const {
    double s = 0.0;
    for (double v : entries_) s += v;
    return s;
  }

  TriangularParams scaled(double c) const {
    auto e = entries_;
    for (double& v : e) v *= c;
    return TriangularParams(n_, std::move(e));
  }

  friend bool operator==(const TriangularParams&, const TriangularParams&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> entries_;
};

struct ExpertSpec {
  TriangularParams params;
  ScheduleSet schedule_set;
};

// Dense symmetric n x n matrix, row-major.
struct Matrix {
  std::size_t n = 0;
  std::vector<double> data;

  double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
  friend bool operator==(const Matrix&, const Matrix&) = default;
};

inline int sigma(std::size_t i, std::size_t j, std::size_t n) {
  if (i > j || j >= n) throw ValidationError("sigma index out of range");
  return i == j ? 1 : -1;
}

namespace detail {
inline void check_dims(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw ValidationError(std::string("dimension mismatch in ") + what + ": " + std::to_string(a) +
                          " vs " + std::to_string(b));
}
}  // namespace detail

// sum_{i<=j} sigma(i,j) b(i,j) (s(i) y(j) + s(j) y(i)), summed in (i,j)
// lexicographic order so every candidate is scored identically.
inline double pcs_score(std::span<const std::int64_t> s, std::span<const double> y,
                        const TriangularParams& b) {
  const std::size_t n = b.n();
  detail::check_dims(s.size(), n, "pcs_score (configuration)");
  detail::check_dims(y.size(), n, "pcs_score (backlog)");
  const auto w = b.entries();
  double acc = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j, ++k) {
      const double term =
          w[k] * (static_cast<double>(s[i]) * y[j] + static_cast<double>(s[j]) * y[i]);
      acc += (i == j) ? term : -term;
    }
  }
  return acc;
}

inline double pcs_score(std::span<const std::int64_t> s, const NormalizedBacklog& y,
                        const TriangularParams& b) {
  return pcs_score(s, y.values(), b);
}

// Index in S of the first configuration attaining the maximum score.
inline std::size_t mu_index(std::span<const double> y, const TriangularParams& b, const ScheduleSet& S) {
  if (S.size() == 0) throw ValidationError("mu requires a non-empty schedule set");
  detail::check_dims(S.n(), b.n(), "mu (schedule set vs params)");
  std::size_t best = 0;
  double best_score = pcs_score(S[0], y, b);
  for (std::size_t k = 1; k < S.size(); ++k) {
    const double score = pcs_score(S[k], y, b);
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  return best;
}

inline const Config& mu(const NormalizedBacklog& y, const TriangularParams& b, const ScheduleSet& S) {
  return S[mu_index(y.values(), b, S)];
}

// Canonical symmetric matrix whose quadratic form reproduces pcs_score:
// B(i,i) = 2 b(i,i) because the compact score counts each diagonal term
// twice; B(i,j) = B(j,i) = -b(i,j).
inline Matrix reconstruct_matrix(const TriangularParams& b) {
  const std::size_t n = b.n();
  Matrix B{n, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    B(i, i) = 2.0 * b(i, i);
    for (std::size_t j = i + 1; j < n; ++j) {
      B(i, j) = -b(i, j);
      B(j, i) = -b(i, j);
    }
  }
  return B;
}

// <s, B x> = sum_{i,j} s(i) B(i,j) x(j).
inline double matrix_score(std::span<const std::int64_t> s, std::span<const double> x, const Matrix& B) {
  detail::check_dims(s.size(), B.n, "matrix_score (configuration)");
  detail::check_dims(x.size(), B.n, "matrix_score (backlog)");
  double acc = 0.0;
  for (std::size_t i = 0; i < B.n; ++i)
    for (std::size_t j = 0; j < B.n; ++j) acc += static_cast<double>(s[i]) * B(i, j) * x[j];
  return acc;
}

// Max over ordered pairs (u, v) in S^2 of ||u - v||_inf.
inline std::int64_t compute_D(const ScheduleSet& S) {
  std::int64_t D = 0;
  for (const auto& u : S)
    for (const auto& v : S)
      for (std::size_t i = 0; i < u.size(); ++i) D = std::max(D, std::abs(u[i] - v[i]));
  return D;
}

// Cholesky-based positive-definiteness test; pivots must exceed tol.
inline bool is_positive_definite(const Matrix& B, double tol = 1e-12) {
  const std::size_t n = B.n;
  std::vector<double> L(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = B(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= L[j * n + k] * L[j * n + k];
    if (!(d > tol)) return false;
    const double ljj = std::sqrt(d);
    L[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = B(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= L[i * n + k] * L[j * n + k];
      L[i * n + j] = v / ljj;
    }
  }
  return true;
}

// Empty result means the expert is usable.
inline std::vector<std::string> validate_expert(const ExpertSpec& expert) {
  std::vector<std::string> violations;
  const auto& b = expert.params;
  const std::size_t n = b.n();
  if (n == 0) return {"expert parameters are empty"};
  if (expert.schedule_set.n() != n)
    violations.push_back("schedule set has " + std::to_string(expert.schedule_set.n()) +
                         " queues but parameters have " + std::to_string(n));
  for (double v : b.entries())
    if (!(v >= 0.0)) {
      violations.push_back("negative entry");
      break;
    }
  for (std::size_t i = 0; i < n; ++i)
    if (!(b(i, i) > 0.0)) {
      violations.push_back("diagonal entry not positive at (" + std::to_string(i + 1) + "," +
                           std::to_string(i + 1) + ")");
    }
  if (std::abs(b.sum() - 1.0) > 1e-9) violations.push_back("entries do not sum to 1");
  if (!is_positive_definite(reconstruct_matrix(b))) violations.push_back("not positive-definite");
  return violations;
}

}  // namespace pcsemu
