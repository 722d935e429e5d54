#pragma once

// Discrete-time queueing world driven by an expert scheduler:
// d_t = min(s_t, x_t), x_{t+1} = x_t - d_t + a_t.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "pcsemu/core.hpp"
#include "pcsemu/learner.hpp"

namespace pcsemu {

// One independent stream per (seed, stream id). The engine is
// std::mt19937_64, whose output sequence is fixed by the standard; its seed
// is the SplitMix64 hash of seed and stream id. Uniforms use the top 53 bits.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream) : engine_(mix(seed, stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  static std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x8bb84b93962eacc9ULL));
  }

  std::mt19937_64 engine_;
};

// P(X = k) = (1 - q) q^k with q = mean / (1 + mean), by inverse CDF.
inline std::int64_t sample_geometric(double mean, StreamRng& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw ValidationError("geometric mean must be finite and >= 0");
  const double u = rng.uniform_open();
  if (mean == 0.0) return 0;
  const double q = mean / (1.0 + mean);
  return static_cast<std::int64_t>(std::floor(std::log(u) / std::log(q)));
}

struct GeometricArrivals {
  std::vector<double> means;
};

struct DeterministicArrivals {
  Config per_slot;
};

// Bursty non-ergodic fixture: the horizon is split into n equal phases and
// during phase i only queue i receives `burst` customers every `period` slots.
struct AdversarialArrivals {
  std::int64_t burst = 3;
  std::int64_t period = 1;
};

// Externally supplied arrivals, one vector per slot.
struct SequenceArrivals {
  std::vector<Config> sequence;
};

using ArrivalModel = std::variant<GeometricArrivals, DeterministicArrivals, AdversarialArrivals, SequenceArrivals>;

inline void validate_arrivals(const ArrivalModel& model, std::size_t n, std::int64_t horizon) {
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, GeometricArrivals>) {
          detail::check_dims(m.means.size(), n, "geometric arrival means");
          for (double v : m.means)
            if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("geometric means must be finite and >= 0");
        } else if constexpr (std::is_same_v<M, DeterministicArrivals>) {
          detail::check_dims(m.per_slot.size(), n, "deterministic arrivals");
          for (auto v : m.per_slot)
            if (v < 0) throw ValidationError("deterministic arrivals must be nonnegative");
        } else if constexpr (std::is_same_v<M, AdversarialArrivals>) {
          if (m.burst < 0 || m.period < 1) throw ValidationError("adversarial arrivals need burst >= 0, period >= 1");
        } else {
          if (static_cast<std::int64_t>(m.sequence.size()) < horizon)
            throw ValidationError("arrival sequence has " + std::to_string(m.sequence.size()) +
                                  " entries, horizon needs " + std::to_string(horizon));
          for (const auto& a : m.sequence) {
            detail::check_dims(a.size(), n, "arrival sequence");
            for (auto v : a)
              if (v < 0) throw ValidationError("arrival sequence entries must be nonnegative");
          }
        }
      },
      model);
}

// Produces a_t for slot index t = 0, 1, ... (must be called in order).
class ArrivalProcess {
 public:
  ArrivalProcess(ArrivalModel model, std::size_t n, std::int64_t horizon, std::uint64_t seed)
      : model_(std::move(model)), n_(n), horizon_(horizon) {
    validate_arrivals(model_, n_, horizon_);
    for (std::size_t i = 0; i < n_; ++i) streams_.emplace_back(seed, i);
  }

  Config next(std::int64_t t) {
    Config a(n_, 0);
    std::visit(
        [&](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, GeometricArrivals>) {
            for (std::size_t i = 0; i < n_; ++i) a[i] = sample_geometric(m.means[i], streams_[i]);
          } else if constexpr (std::is_same_v<M, DeterministicArrivals>) {
            a = m.per_slot;
          } else if constexpr (std::is_same_v<M, AdversarialArrivals>) {
            const auto phase = static_cast<std::size_t>((t * static_cast<std::int64_t>(n_)) / horizon_);
            if (t % m.period == 0) a[std::min(phase, n_ - 1)] = m.burst;
          } else {
            a = m.sequence[static_cast<std::size_t>(t)];
          }
        },
        model_);
    return a;
  }

 private:
  ArrivalModel model_;
  std::size_t n_;
  std::int64_t horizon_;
  std::vector<StreamRng> streams_;
};

struct Departure {
  Config d;
  Config x_next;
};

inline Departure step_dynamics(std::span<const std::int64_t> x, std::span<const std::int64_t> s,
                               std::span<const std::int64_t> a) {
  detail::check_dims(s.size(), x.size(), "step_dynamics (configuration)");
  detail::check_dims(a.size(), x.size(), "step_dynamics (arrivals)");
  Departure out{Config(x.size()), Config(x.size())};
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.d[i] = std::min(s[i], x[i]);
    out.x_next[i] = x[i] - out.d[i] + a[i];
  }
  return out;
}

struct SimConfig {
  ExpertSpec expert;
  ArrivalModel arrivals = GeometricArrivals{};
  std::int64_t horizon = 1;
  Config x0;
  std::uint64_t seed = 0;

  std::size_t n() const { return expert.params.n(); }
};

struct TraceRecord {
  std::int64_t t = 0;
  Backlog x;
  NormalizedBacklog y;
  Config s;
  Config a;
  Config d;

  Observation observation() const { return {y, s}; }
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

inline void validate_sim_config(const SimConfig& cfg) {
  const auto violations = validate_expert(cfg.expert);
  if (!violations.empty()) {
    std::string msg = "invalid expert:";
    for (const auto& v : violations) msg += " " + v + ";";
    throw ValidationError(msg);
  }
  if (cfg.horizon < 1) throw ValidationError("horizon must be >= 1");
  detail::check_dims(cfg.x0.size(), cfg.n(), "x0");
  validate_arrivals(cfg.arrivals, cfg.n(), cfg.horizon);
}

// Streams trace records one slot at a time; slots are labelled 0..T-1.
class ExpertSimulator {
 public:
  explicit ExpertSimulator(const SimConfig& cfg)
      : cfg_((validate_sim_config(cfg), cfg)),
        arrivals_(cfg_.arrivals, cfg_.n(), cfg_.horizon, cfg_.seed),
        x_(cfg_.x0) {}

  bool done() const { return t_ >= cfg_.horizon; }
  std::int64_t slot() const { return t_; }

  TraceRecord next() {
    TraceRecord r;
    r.t = t_;
    r.x = x_;
    r.y = normalize(r.x);
    r.s = mu(r.y, cfg_.expert.params, cfg_.expert.schedule_set);
    r.a = arrivals_.next(t_);
    auto step = step_dynamics(r.x.values(), r.s, r.a);
    r.d = std::move(step.d);
    x_ = Backlog(std::move(step.x_next));
    ++t_;
    return r;
  }

 private:
  SimConfig cfg_;
  ArrivalProcess arrivals_;
  Backlog x_;
  std::int64_t t_ = 0;
};

inline std::vector<TraceRecord> run_expert_sim(const SimConfig& cfg) {
  ExpertSimulator sim(cfg);
  std::vector<TraceRecord> out;
  out.reserve(static_cast<std::size_t>(cfg.horizon));
  while (!sim.done()) out.push_back(sim.next());
  return out;
}

// A record as read from an external trace: raw or pre-normalized backlog
// plus the observed decision. The timestamp is an opaque label.
struct ObservedRecord {
  std::size_t line = 0;
  std::int64_t t = 0;
  std::optional<Config> x;
  std::optional<std::vector<double>> y;
  Config s;
  std::optional<Config> a;
  std::optional<Config> d;
};

inline std::vector<Observation> replay_trace(const std::vector<ObservedRecord>& records, const ScheduleSet& S) {
  std::vector<Observation> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const std::string where = "line " + std::to_string(r.line) + ": ";
    try {
      NormalizedBacklog y;
      if (r.x) {
        detail::check_dims(r.x->size(), S.n(), "backlog");
        y = normalize(Backlog(*r.x));
      } else if (r.y) {
        detail::check_dims(r.y->size(), S.n(), "normalized backlog");
        y = NormalizedBacklog(*r.y);
      } else {
        throw ValidationError("record has neither x nor y");
      }
      detail::check_dims(r.s.size(), S.n(), "decision");
      if (!S.contains(r.s)) throw ValidationError("decision " + to_string(r.s) + " is not in the schedule set");
      out.push_back({std::move(y), r.s});
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return out;
}

}  // namespace pcsemu
