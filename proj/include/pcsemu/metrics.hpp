#pragma once

// Emulation loss, average-loss bounds, and tail-fraction bounds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pcsemu/core.hpp"
#include "pcsemu/learner.hpp"
#include "pcsemu/queue_sim.hpp"

namespace pcsemu {

struct LossRecord {
  std::int64_t t = 0;
  std::optional<double> loss;  // absent without ground truth
  bool mismatch = false;
  std::int64_t delta_inf = 0;
  double eta_used = 0.0;
  int epoch = -1;
};

struct BoundParams {
  std::int64_t D = 0;
  std::size_t p_eff = 0;
  std::int64_t T0 = 0;
};

// sum_{i<=j} sigma(i,j) (b_hat(i,j) - b(i,j)) (delta(i) y(j) + delta(j) y(i)),
// delta = s_hat - s. Evaluated as
//   [score_bhat(s_hat) - score_bhat(s)] + [score_b(s) - score_b(s_hat)]
// so that each bracket is a rounded difference of two scores computed exactly
// as the argmax computes them; when s_hat and s are the respective argmaxes
// both brackets are >= 0 in floating point, not just in exact arithmetic.
inline double instant_loss(const TriangularParams& b, const TriangularParams& b_hat, std::span<const double> y,
                           std::span<const std::int64_t> s, std::span<const std::int64_t> s_hat) {
  const std::size_t n = b.n();
  detail::check_dims(b_hat.n(), n, "instant_loss (estimate)");
  detail::check_dims(y.size(), n, "instant_loss (backlog)");
  detail::check_dims(s.size(), n, "instant_loss (expert decision)");
  detail::check_dims(s_hat.size(), n, "instant_loss (predicted decision)");
  if (std::ranges::equal(s, s_hat)) return 0.0;
  const double learner_gap = pcs_score(s_hat, y, b_hat) - pcs_score(s, y, b_hat);
  const double expert_gap = pcs_score(s, y, b) - pcs_score(s_hat, y, b);
  return learner_gap + expert_gap;
}

inline std::int64_t delta_inf(std::span<const std::int64_t> s_hat, std::span<const std::int64_t> s) {
  std::int64_t d = 0;
  for (std::size_t i = 0; i < s.size(); ++i) d = std::max(d, std::abs(s_hat[i] - s[i]));
  return d;
}

// ceil(log2(num / den)) for integers num >= den >= 1, computed exactly.
inline int lg_ratio(std::int64_t num, std::int64_t den) {
  if (den < 1 || num < den) throw ValidationError("lg needs num >= den >= 1");
  int k = 0;
  while ((static_cast<__int128>(den) << k) < num) ++k;
  return k;
}

// 2 D sqrt(ln p / T); requires T > 4 ln p.
inline double finite_bound(std::int64_t D, std::size_t p_eff, std::int64_t T) {
  const double lp = std::log(static_cast<double>(p_eff));
  if (!(static_cast<double>(T) > 4.0 * lp))
    throw HorizonError("finite bound needs T > 4 ln p (T=" + std::to_string(T) + ")");
  return 2.0 * static_cast<double>(D) * std::sqrt(lp / static_cast<double>(T));
}

// 2 sqrt(2) D lg(2T / T0) sqrt(ln p / T), lg = ceil(log2); requires T >= T0.
inline double infinite_bound(std::int64_t D, std::size_t p_eff, std::int64_t T, std::int64_t T0) {
  if (T0 < 1 || T < T0) throw HorizonError("infinite bound needs T >= T0 >= 1");
  const double lp = std::log(static_cast<double>(p_eff));
  return 2.0 * std::sqrt(2.0) * static_cast<double>(D) * lg_ratio(2 * T, T0) *
         std::sqrt(lp / static_cast<double>(T));
}

inline double infinite_bound(const BoundParams& bp, std::int64_t T) { return infinite_bound(bp.D, bp.p_eff, T, bp.T0); }

inline BoundParams bound_params(const ScheduleSet& S, std::size_t p_eff) {
  return {compute_D(S), p_eff, p_eff >= 2 ? epoch_boundary(p_eff, 0) : 1};
}

// Fraction of losses strictly above bound_at_T + epsilon.
inline double tail_fraction_empirical(std::span<const double> losses, double epsilon, double bound_at_T) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (losses.empty()) return 0.0;
  std::size_t count = 0;
  for (double l : losses)
    if (l > bound_at_T + epsilon) ++count;
  return static_cast<double>(count) / static_cast<double>(losses.size());
}

// Markov bound: 1 - eps / (bound + eps).
inline double tail_fraction_bound(double epsilon, double bound_at_T) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  return bound_at_T / (bound_at_T + epsilon);
}

// Fraction of states where the estimate picks the same configuration as the expert.
inline double decision_agreement(const TriangularParams& b_hat, const ExpertSpec& expert,
                                 std::span<const Backlog> states) {
  if (states.empty()) return 1.0;
  std::size_t agree = 0;
  for (const auto& x : states) {
    const auto y = normalize(x);
    if (mu_index(y.values(), b_hat, expert.schedule_set) == mu_index(y.values(), expert.params, expert.schedule_set))
      ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(states.size());
}

// All backlogs in {0..max_value}^n when that has at most `cap` points;
// otherwise `cap` points sampled uniformly from the grid.
inline std::vector<Backlog> backlog_grid(std::size_t n, std::int64_t max_value = 20, std::size_t cap = 10000,
                                         std::uint64_t seed = 0) {
  const auto side = static_cast<std::size_t>(max_value + 1);
  double total = 1.0;
  for (std::size_t i = 0; i < n; ++i) total *= static_cast<double>(side);
  std::vector<Backlog> out;
  if (total <= static_cast<double>(cap)) {
    const auto count = static_cast<std::size_t>(total);
    out.reserve(count);
    for (std::size_t code = 0; code < count; ++code) {
      Config x(n);
      auto c = code;
      for (std::size_t i = n; i-- > 0;) {
        x[i] = static_cast<std::int64_t>(c % side);
        c /= side;
      }
      out.emplace_back(std::move(x));
    }
    return out;
  }
  StreamRng rng(seed, 0x6772696400ULL);
  out.reserve(cap);
  for (std::size_t k = 0; k < cap; ++k) {
    Config x(n);
    for (auto& v : x) v = static_cast<std::int64_t>(rng.next_u64() % side);
    out.emplace_back(std::move(x));
  }
  return out;
}

}  // namespace pcsemu
