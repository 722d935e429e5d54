#pragma once

// Online multiplicative-weights learners that estimate an expert's
// triangular parameters from (normalized backlog, expert decision) pairs.
//
// Fixed horizon: eta = sqrt(ln p / T), requires T > 4 ln p.
// Unknown horizon: epochs T_k = ceil(2^k * 4 ln p); slots in (T_k, T_{k+1}]
// use eta = sqrt(ln p / T_k), slots 1..T_0 use T_0. Weights carry over.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pcsemu/core.hpp"

namespace pcsemu {

enum class Variant { multiplicative, hedge };
enum class ParamMode { full, diagonal };
enum class HorizonMode { finite, infinite };

inline std::string_view to_string(Variant v) { return v == Variant::hedge ? "hedge" : "multiplicative"; }
inline std::string_view to_string(ParamMode m) { return m == ParamMode::diagonal ? "diagonal" : "full"; }
inline std::string_view to_string(HorizonMode h) { return h == HorizonMode::infinite ? "infinite" : "finite"; }

inline Variant parse_variant(std::string_view s) {
  if (s == "multiplicative") return Variant::multiplicative;
  if (s == "hedge") return Variant::hedge;
  throw ValidationError("unknown variant '" + std::string(s) + "' (expected multiplicative or hedge)");
}
inline ParamMode parse_param_mode(std::string_view s) {
  if (s == "full") return ParamMode::full;
  if (s == "diagonal") return ParamMode::diagonal;
  throw ValidationError("unknown params mode '" + std::string(s) + "' (expected full or diagonal)");
}
inline HorizonMode parse_horizon_mode(std::string_view s) {
  if (s == "finite") return HorizonMode::finite;
  if (s == "infinite") return HorizonMode::infinite;
  throw ValidationError("unknown horizon mode '" + std::string(s) + "' (expected finite or infinite)");
}

inline std::size_t param_count(std::size_t n, ParamMode mode) {
  return mode == ParamMode::diagonal ? n : triangular_size(n);
}

// T_{-1} = 0, T_k = ceil(2^k * 4 ln p_eff).
inline std::int64_t epoch_boundary(std::size_t p_eff, int k) {
  if (k < -1) throw ValidationError("epoch index must be >= -1");
  if (k == -1) return 0;
  if (p_eff < 2) throw ValidationError("epoch schedule needs at least two parameters");
  if (k > 60) throw ValidationError("epoch index too large");
  return static_cast<std::int64_t>(std::ceil(std::ldexp(4.0 * std::log(static_cast<double>(p_eff)), k)));
}

struct Observation {
  NormalizedBacklog y;
  Config s;
};

struct LearnerState {
  std::size_t n = 0;
  Variant variant = Variant::multiplicative;
  ParamMode param_mode = ParamMode::full;
  HorizonMode horizon_mode = HorizonMode::finite;
  std::int64_t horizon = 0;     // T in finite mode, 0 otherwise
  std::vector<double> weights;  // p_eff raw weights, all > 0
  double eta = 0.0;             // learning rate for slot t
  std::int64_t t = 1;           // next slot to process
  int epoch = -1;               // infinite mode: k with T_k < t <= T_{k+1}

  std::size_t p_eff() const { return weights.size(); }
  friend bool operator==(const LearnerState&, const LearnerState&) = default;
};

struct Prediction {
  TriangularParams b_hat;
  std::size_t s_index = 0;
  Config s_hat;
};

namespace detail {

inline double infinite_eta(std::size_t p_eff, int epoch) {
  if (p_eff < 2) return 0.0;
  const auto governing = epoch_boundary(p_eff, epoch < 0 ? 0 : epoch);
  return std::sqrt(std::log(static_cast<double>(p_eff)) / static_cast<double>(governing));
}

inline void advance_epoch(LearnerState& st) {
  if (st.p_eff() < 2) return;
  while (st.t > epoch_boundary(st.p_eff(), st.epoch + 1)) ++st.epoch;
  st.eta = infinite_eta(st.p_eff(), st.epoch);
}

// Rescale by a power of two so weights never drift toward under/overflow.
// Power-of-two scaling is exact and leaves the normalized estimate unchanged.
inline void rebalance(std::vector<double>& w) {
  double hi = 0.0;
  for (double v : w) hi = std::max(hi, v);
  int e = 0;
  std::frexp(hi, &e);
  if (e < -256 || e > 256)
    for (double& v : w) v = std::ldexp(v, -e);
}

}  // namespace detail

inline LearnerState init_finite(std::size_t n, std::int64_t T, Variant variant = Variant::multiplicative,
                                ParamMode mode = ParamMode::full) {
  if (n == 0) throw ValidationError("learner needs n >= 1");
  const std::size_t p = param_count(n, mode);
  const double threshold = 4.0 * std::log(static_cast<double>(p));
  if (!(static_cast<double>(T) > threshold))
    throw HorizonError("horizon T=" + std::to_string(T) + " must exceed 4 ln(p) = " + std::to_string(threshold));
  LearnerState st;
  st.n = n;
  st.variant = variant;
  st.param_mode = mode;
  st.horizon_mode = HorizonMode::finite;
  st.horizon = T;
  st.weights.assign(p, 1.0);
  st.eta = std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(T));
  return st;
}

inline LearnerState init_infinite(std::size_t n, Variant variant = Variant::multiplicative,
                                  ParamMode mode = ParamMode::full) {
  if (n == 0) throw ValidationError("learner needs n >= 1");
  LearnerState st;
  st.n = n;
  st.variant = variant;
  st.param_mode = mode;
  st.horizon_mode = HorizonMode::infinite;
  st.weights.assign(param_count(n, mode), 1.0);
  st.epoch = -1;
  detail::advance_epoch(st);
  return st;
}

// Normalized estimate as a full triangular array; diagonal mode fills
// off-diagonal entries with zero.
inline TriangularParams estimate(const LearnerState& st) {
  double total = 0.0;
  for (double w : st.weights) total += w;
  std::vector<double> e(triangular_size(st.n), 0.0);
  if (st.param_mode == ParamMode::full) {
    for (std::size_t k = 0; k < e.size(); ++k) e[k] = st.weights[k] / total;
  } else {
    for (std::size_t i = 0; i < st.n; ++i) e[TriangularParams::index(st.n, i, i)] = st.weights[i] / total;
  }
  return TriangularParams(st.n, std::move(e));
}

inline Prediction predict(const LearnerState& st, const NormalizedBacklog& y, const ScheduleSet& S) {
  detail::check_dims(y.size(), st.n, "predict");
  Prediction p{estimate(st), 0, {}};
  p.s_index = mu_index(y.values(), p.b_hat, S);
  p.s_hat = S[p.s_index];
  return p;
}

// Gain array m_t for a mismatched slot (zero when s_hat == s_expert).
// Full mode: m(i,j) = sigma(i,j) (z(i) y(j) + z(j) y(i)), z = delta/||delta||_inf.
// Diagonal mode: m(i) = z(i) y(i).
inline std::vector<double> gain(std::span<const double> y, std::span<const std::int64_t> s_hat,
                                std::span<const std::int64_t> s_expert, ParamMode mode) {
  const std::size_t n = y.size();
  detail::check_dims(s_hat.size(), n, "gain (prediction)");
  detail::check_dims(s_expert.size(), n, "gain (expert)");
  std::vector<double> m(param_count(n, mode), 0.0);
  std::int64_t dmax = 0;
  for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, std::abs(s_hat[i] - s_expert[i]));
  if (dmax == 0) return m;
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i)
    z[i] = static_cast<double>(s_hat[i] - s_expert[i]) / static_cast<double>(dmax);
  if (mode == ParamMode::diagonal) {
    for (std::size_t i = 0; i < n; ++i) m[i] = z[i] * y[i];
    return m;
  }
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j, ++k) {
      const double v = z[i] * y[j] + z[j] * y[i];
      m[k] = (i == j) ? v : -v;
    }
  return m;
}

// One learning step for slot st.t. The state is taken by value so callers
// can move it through: st = update(std::move(st), ...).
inline LearnerState update(LearnerState st, const NormalizedBacklog& y, std::span<const std::int64_t> s_expert,
                           std::span<const std::int64_t> s_hat, const ScheduleSet& S) {
  if (!S.contains(s_expert))
    throw ValidationError("expert decision " + to_string(s_expert) + " is not in the schedule set");
  if (!std::ranges::equal(s_hat, s_expert)) {
    const auto m = gain(y.values(), s_hat, s_expert, st.param_mode);
    if (st.variant == Variant::multiplicative) {
      for (std::size_t k = 0; k < m.size(); ++k) st.weights[k] *= 1.0 - st.eta * m[k];
    } else {
      for (std::size_t k = 0; k < m.size(); ++k) st.weights[k] *= std::exp(-st.eta * m[k]);
    }
    detail::rebalance(st.weights);
  }
  ++st.t;
  if (st.horizon_mode == HorizonMode::infinite) detail::advance_epoch(st);
  return st;
}

struct StepView {
  std::int64_t t;
  const Observation& obs;
  const Prediction& prediction;
  bool mismatch;
  double eta_used;
  int epoch;  // epoch of this slot (infinite mode), -1 otherwise
  const LearnerState& after;
};

// Predict-then-update over a range of observations, calling on_step after
// each slot.
template <class Range, class Visitor>
LearnerState run(LearnerState st, const Range& observations, const ScheduleSet& S, Visitor&& on_step) {
  for (const Observation& obs : observations) {
    const auto pred = predict(st, obs.y, S);
    const double eta = st.eta;
    const int epoch = st.horizon_mode == HorizonMode::infinite ? st.epoch : -1;
    const std::int64_t t = st.t;
    const bool mismatch = pred.s_hat != obs.s;
    st = update(std::move(st), obs.y, obs.s, pred.s_hat, S);
    on_step(StepView{t, obs, pred, mismatch, eta, epoch, st});
  }
  return st;
}

template <class Visitor>
LearnerState run_finite(std::span<const Observation> observations, std::size_t n, const ScheduleSet& S,
                        Variant variant, ParamMode mode, Visitor&& on_step) {
  auto st = init_finite(n, static_cast<std::int64_t>(observations.size()), variant, mode);
  return run(std::move(st), observations, S, std::forward<Visitor>(on_step));
}

template <class Visitor>
LearnerState run_infinite(std::span<const Observation> observations, std::size_t n, const ScheduleSet& S,
                          Variant variant, ParamMode mode, Visitor&& on_step) {
  auto st = init_infinite(n, variant, mode);
  return run(std::move(st), observations, S, std::forward<Visitor>(on_step));
}

}  // namespace pcsemu
