#pragma once

// Fixtures, random instance generators and independent oracles shared by the
// unit and acceptance suites. Oracles here never call the library's scoring
// or argmax code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "pcsemu/pcsemu.hpp"

namespace pcsemu::testing {

inline TriangularParams demo_b() { return TriangularParams(2, {0.5, 0.3, 0.2}); }
inline ScheduleSet demo_S() { return ScheduleSet({{0, 0}, {1, 0}, {2, 1}, {0, 2}}); }
inline ExpertSpec demo_expert() { return {demo_b(), demo_S()}; }

using PairMap = std::map<std::pair<std::size_t, std::size_t>, double>;

inline PairMap as_pair_map(const TriangularParams& b) {
  PairMap m;
  for (std::size_t i = 0; i < b.n(); ++i)
    for (std::size_t j = i; j < b.n(); ++j) m[{i, j}] = b(i, j);
  return m;
}

// Explicit form: sum_i 2 b(i,i) s(i) y(i) - sum_{i<j} b(i,j) (s(i) y(j) + s(j) y(i)).
inline double oracle_score(const Config& s, const std::vector<double>& y, const PairMap& b) {
  double diag = 0.0, off = 0.0;
  for (const auto& [ij, v] : b) {
    const auto [i, j] = ij;
    if (i == j)
      diag += 2.0 * v * static_cast<double>(s[i]) * y[i];
    else
      off += v * (static_cast<double>(s[i]) * y[j] + static_cast<double>(s[j]) * y[i]);
  }
  return diag - off;
}

// Brute-force argmax over S of <s, B x> with B(i,i) = 2 b(i,i),
// B(i,j) = B(j,i) = -b(i,j), evaluated in long double on the raw backlog;
// ties go to the earliest configuration.
inline std::size_t oracle_argmax(const std::vector<Config>& S, const std::vector<double>& x, const PairMap& b) {
  const std::size_t n = x.size();
  std::vector<std::vector<long double>> B(n, std::vector<long double>(n, 0.0L));
  for (const auto& [ij, v] : b) {
    const auto [i, j] = ij;
    if (i == j) {
      B[i][i] = 2.0L * v;
    } else {
      B[i][j] = -static_cast<long double>(v);
      B[j][i] = -static_cast<long double>(v);
    }
  }
  std::size_t best = 0;
  long double best_v = 0.0L;
  for (std::size_t k = 0; k < S.size(); ++k) {
    long double v = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) v += static_cast<long double>(S[k][i]) * B[i][j] * x[j];
    if (k == 0 || v > best_v) {
      best_v = v;
      best = k;
    }
  }
  return best;
}

// Leading principal minors by Gaussian elimination without pivoting.
inline std::vector<double> leading_minors(std::vector<std::vector<double>> A) {
  const std::size_t n = A.size();
  std::vector<double> minors;
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    det *= A[k][k];
    minors.push_back(det);
    if (A[k][k] == 0.0) break;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = A[i][k] / A[k][k];
      for (std::size_t j = k; j < n; ++j) A[i][j] -= f * A[k][j];
    }
  }
  return minors;
}

// ---------------------------------------------------------------------------
// Random instance generators.

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

inline ScheduleSet random_schedule_set(Rng& rng, std::size_t n, std::size_t m, std::int64_t max_entry = 3) {
  std::vector<Config> configs;
  while (configs.size() < m) {
    Config c(n);
    for (auto& v : c) v = uniform_int(rng, 0, max_entry);
    if (std::find(configs.begin(), configs.end(), c) == configs.end()) configs.push_back(std::move(c));
  }
  return ScheduleSet(std::move(configs));
}

// Normalized positive parameters; off-diagonals are drawn small enough that
// the canonical matrix is usually positive-definite, and rejection handles
// the rest. `diagonal_only` zeroes the off-diagonal entries.
inline TriangularParams random_valid_expert(Rng& rng, const ScheduleSet& S, bool diagonal_only = false) {
  const std::size_t n = S.n();
  while (true) {
    std::vector<double> e(triangular_size(n));
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j, ++k)
        e[k] = (i == j) ? uniform(rng, 0.2, 1.0) : (diagonal_only ? 0.0 : uniform(rng, 0.0, 0.6 / static_cast<double>(n)));
    double total = 0.0;
    for (double v : e) total += v;
    for (double& v : e) v /= total;
    TriangularParams b(n, std::move(e));
    if (validate_expert({b, S}).empty()) return b;
  }
}

inline Config random_backlog(Rng& rng, std::size_t n, std::int64_t max_value = 30) {
  Config x(n);
  for (auto& v : x) v = uniform_int(rng, 0, max_value);
  return x;
}

}  // namespace pcsemu::testing
