#pragma once

// End-to-end runs: simulate an expert, learn from a trace or a live
// simulation, evaluate a fixed estimate, and the two-queue demo preset.

#include <array>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "pcsemu/core.hpp"
#include "pcsemu/io.hpp"
#include "pcsemu/learner.hpp"
#include "pcsemu/metrics.hpp"
#include "pcsemu/queue_sim.hpp"

namespace pcsemu {

using ObservationSource = std::function<std::optional<Observation>()>;

inline ObservationSource observations_from(const std::vector<Observation>& obs) {
  return [&obs, k = std::size_t{0}]() mutable -> std::optional<Observation> {
    if (k >= obs.size()) return std::nullopt;
    return obs[k++];
  };
}

inline ObservationSource observations_from(ExpertSimulator& sim) {
  return [&sim]() -> std::optional<Observation> {
    if (sim.done()) return std::nullopt;
    return sim.next().observation();
  };
}

// Writes the header (including the expert's parameters) and T records.
inline void simulate(const SimConfig& cfg, std::ostream& out) {
  ExpertSimulator sim(cfg);
  io::write_trace_header(out, {cfg.n(), cfg.expert.schedule_set, cfg.expert.params});
  while (!sim.done()) io::write_trace_record(out, sim.next());
}

struct LearnSettings {
  io::LearnerOptions learner;
  std::int64_t horizon = 0;  // finite mode: T (observations beyond T are ignored)
  std::int64_t every = 1;    // metric row cadence; the final slot is always written
  std::int64_t checkpoint_every = 0;
  std::int64_t stop_after = 0;  // stop once this slot is processed (0: run to the end)
};

struct LearnHooks {
  std::ostream* metrics = nullptr;
  std::function<void(const io::Checkpoint&)> on_checkpoint;
  std::function<void(const StepView&, std::optional<double> loss)> on_step;
};

struct LearnResult {
  LearnerState state;
  io::RunningTotals totals;
  BoundParams bounds;
  bool completed = false;  // source exhausted (or finite horizon reached)
};

inline LearnResult learn(const ScheduleSet& S, const std::optional<TriangularParams>& expert,
                         const ObservationSource& next, const LearnSettings& settings,
                         const std::optional<io::Checkpoint>& resume = std::nullopt, const LearnHooks& hooks = {}) {
  if (settings.every < 1) throw ValidationError("metric cadence must be >= 1");
  if (expert) detail::check_dims(expert->n(), S.n(), "expert parameters vs schedule set");
  const auto& opts = settings.learner;
  const std::string hash = io::schedule_set_hash(S);

  LearnResult res;
  if (resume) {
    const auto& st = resume->state;
    if (resume->schedule_hash != hash) throw ValidationError("checkpoint was written for a different schedule set");
    if (st.n != S.n() || st.variant != opts.variant || st.param_mode != opts.params ||
        st.horizon_mode != opts.horizon_mode)
      throw ValidationError("checkpoint learner settings do not match the requested run");
    if (st.horizon_mode == HorizonMode::finite && st.horizon != settings.horizon)
      throw ValidationError("checkpoint horizon does not match the requested run");
    res.state = st;
    res.totals = resume->totals;
    for (std::int64_t k = 1; k < st.t; ++k)
      if (!next()) throw ValidationError("observation stream ended before the checkpoint slot");
  } else if (opts.horizon_mode == HorizonMode::finite) {
    res.state = init_finite(S.n(), settings.horizon, opts.variant, opts.params);
  } else {
    res.state = init_infinite(S.n(), opts.variant, opts.params);
  }
  res.bounds = bound_params(S, res.state.p_eff());
  const auto& bp = res.bounds;
  const double lnp = std::log(static_cast<double>(bp.p_eff));
  const bool finite = opts.horizon_mode == HorizonMode::finite;

  std::optional<io::MetricsWriter> writer;
  if (hooks.metrics) {
    writer.emplace(*hooks.metrics, expert.has_value());
    writer->header();
  }
  std::optional<io::MetricRow> pending;
  auto& tot = res.totals;

  while (true) {
    if (finite && res.state.t > settings.horizon) {
      res.completed = true;
      break;
    }
    auto obs = next();
    if (!obs) {
      res.completed = true;
      break;
    }
    std::optional<double> loss;
    std::int64_t dinf = 0;
    auto on_step = [&](const StepView& v) {
      dinf = delta_inf(v.prediction.s_hat, v.obs.s);
      if (expert) loss = instant_loss(*expert, v.prediction.b_hat, v.obs.y.values(), v.obs.s, v.prediction.s_hat);
      ++tot.slots;
      if (v.mismatch) {
        ++tot.mismatches;
        tot.last_mismatch = v.t;
      }
      if (loss) {
        tot.loss_sum += *loss;
        tot.max_loss = tot.slots == 1 ? *loss : std::max(tot.max_loss, *loss);
        tot.min_loss = tot.slots == 1 ? *loss : std::min(tot.min_loss, *loss);
      }
      io::MetricRow row;
      row.t = v.t;
      row.loss = loss;
      if (loss) row.cum_avg_loss = tot.loss_sum / static_cast<double>(v.t);
      if (static_cast<double>(v.t) > 4.0 * lnp) row.bound_finite = finite_bound(bp.D, bp.p_eff, v.t);
      if (v.t >= bp.T0) row.bound_infinite = infinite_bound(bp, v.t);
      row.mismatch = v.mismatch;
      row.delta_inf = dinf;
      row.eta = v.eta_used;
      if (!finite) row.epoch = v.epoch;

      if (loss && !finite && row.bound_infinite) {
        const double avg = *row.cum_avg_loss;
        if (avg > *row.bound_infinite) ++tot.bound_violations;
        if (avg > 2.0 * *row.bound_infinite) ++tot.margined_bound_violations;
        if (tot.max_loss > *row.bound_infinite) ++tot.tail_exceedances;
      }
      if (loss && finite && v.t == settings.horizon) {
        const double b = finite_bound(bp.D, bp.p_eff, settings.horizon);
        const double avg = *row.cum_avg_loss;
        if (avg > b) ++tot.bound_violations;
        if (avg > 2.0 * b) ++tot.margined_bound_violations;
      }

      if (hooks.on_step) hooks.on_step(v, loss);
      if (writer) {
        if (v.t % settings.every == 0) {
          writer->row(row);
          pending.reset();
        } else {
          pending = row;
        }
      }
    };
    const std::array<Observation, 1> one{std::move(*obs)};
    res.state = run(std::move(res.state), one, S, on_step);

    const std::int64_t done_t = res.state.t - 1;
    if (hooks.on_checkpoint && settings.checkpoint_every > 0 && done_t % settings.checkpoint_every == 0)
      hooks.on_checkpoint(io::Checkpoint{res.state, hash, tot});
    if (settings.stop_after > 0 && done_t >= settings.stop_after) break;
  }
  if (writer && pending) writer->row(*pending);
  return res;
}

// ---------------------------------------------------------------------------

struct EvaluateSummary {
  std::int64_t slots = 0;
  std::int64_t mismatches = 0;
  std::int64_t max_delta_inf = 0;
  double trace_agreement = 1.0;  // fraction of slots where the estimate reproduces the recorded decision
  std::optional<double> average_loss;
  std::optional<double> grid_agreement;
};

// Scores a fixed estimate against recorded decisions. With ground truth the
// loss columns and grid agreement are reported; without it only
// decision-level diagnostics are available.
inline EvaluateSummary evaluate(const ScheduleSet& S, const TriangularParams& b_hat, const std::vector<Observation>& obs,
                                const std::optional<TriangularParams>& expert, std::ostream* csv = nullptr,
                                std::int64_t every = 1) {
  detail::check_dims(b_hat.n(), S.n(), "estimate vs schedule set");
  if (expert) detail::check_dims(expert->n(), S.n(), "expert vs schedule set");
  if (every < 1) throw ValidationError("metric cadence must be >= 1");
  if (csv) *csv << (expert ? "t,loss,cum_avg_loss,mismatch,delta_inf,cum_agreement\n" : "t,mismatch,delta_inf,cum_agreement\n");
  EvaluateSummary sum;
  double loss_sum = 0.0;
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const auto& o = obs[k];
    const auto t = static_cast<std::int64_t>(k) + 1;
    const auto& s_hat = S[mu_index(o.y.values(), b_hat, S)];
    const bool mismatch = s_hat != o.s;
    const auto d = delta_inf(s_hat, o.s);
    std::optional<double> loss;
    if (expert) {
      loss = instant_loss(*expert, b_hat, o.y.values(), o.s, s_hat);
      loss_sum += *loss;
    }
    ++sum.slots;
    if (mismatch) ++sum.mismatches;
    sum.max_delta_inf = std::max(sum.max_delta_inf, d);
    if (csv && (t % every == 0 || k + 1 == obs.size())) {
      *csv << t << ',';
      if (loss) *csv << io::format_double(*loss) << ',' << io::format_double(loss_sum / static_cast<double>(t)) << ',';
      *csv << (mismatch ? 1 : 0) << ',' << d << ','
           << io::format_double(1.0 - static_cast<double>(sum.mismatches) / static_cast<double>(t)) << '\n';
    }
  }
  if (sum.slots > 0) {
    sum.trace_agreement = 1.0 - static_cast<double>(sum.mismatches) / static_cast<double>(sum.slots);
    if (expert) sum.average_loss = loss_sum / static_cast<double>(sum.slots);
  }
  if (expert) {
    const auto grid = backlog_grid(S.n());
    sum.grid_agreement = decision_agreement(b_hat, ExpertSpec{*expert, S}, grid);
  }
  return sum;
}

// ---------------------------------------------------------------------------

struct DemoReport {
  struct EstimateSample {
    std::int64_t t;
    std::vector<double> b_hat;
  };
  struct LossSample {
    std::int64_t t;
    double cum_avg_loss;
    double bound_infinite;
  };
  struct TailCheck {
    double epsilon;
    double empirical;
    double bound;
  };

  LearnResult result;
  TriangularParams final_estimate;
  double grid_agreement = 0.0;
  std::int64_t final_half_mismatches = 0;
  std::int64_t losses_above_prefix_bound = 0;  // slots t >= T0 with loss above the bound at t
  std::vector<EstimateSample> trajectory;
  std::vector<std::int64_t> mismatches_per_window;  // ten equal windows
  std::vector<LossSample> loss_vs_bound;
  std::vector<TailCheck> tail;
  double average_loss = 0.0;
  double bound_at_T = 0.0;
};

inline bool is_sample_point(std::int64_t t) {
  // 1, 2, 5, 10, 20, 50, ...
  while (t >= 10 && t % 10 == 0) t /= 10;
  return t == 1 || t == 2 || t == 5;
}

inline DemoReport run_demo(const io::RunConfig& cfg, std::ostream* metrics = nullptr) {
  io::validate_run_config(cfg);
  const auto& S = cfg.sim.expert.schedule_set;
  const auto& b = cfg.sim.expert.params;
  const std::int64_t T = cfg.sim.horizon;

  DemoReport rep;
  rep.mismatches_per_window.assign(10, 0);
  std::vector<double> losses;
  losses.reserve(static_cast<std::size_t>(T));

  ExpertSimulator sim(cfg.sim);
  LearnSettings settings{cfg.learner, T, cfg.every, 0, 0};
  LearnHooks hooks;
  hooks.metrics = metrics;
  BoundParams bp = bound_params(S, param_count(S.n(), cfg.learner.params));
  double loss_sum = 0.0;
  hooks.on_step = [&](const StepView& v, std::optional<double> loss) {
    losses.push_back(*loss);
    loss_sum += *loss;
    if (v.t >= bp.T0 && *loss > infinite_bound(bp, v.t)) ++rep.losses_above_prefix_bound;
    if (v.mismatch) {
      if (2 * v.t > T) ++rep.final_half_mismatches;
      const auto w = std::min<std::int64_t>(9, ((v.t - 1) * 10) / T);
      ++rep.mismatches_per_window[static_cast<std::size_t>(w)];
    }
    if (is_sample_point(v.t) || v.t == T) {
      const auto e = v.prediction.b_hat.entries();
      rep.trajectory.push_back({v.t, std::vector<double>(e.begin(), e.end())});
      if (v.t >= bp.T0) rep.loss_vs_bound.push_back({v.t, loss_sum / static_cast<double>(v.t), infinite_bound(bp, v.t)});
    }
  };
  rep.result = learn(S, b, observations_from(sim), settings, std::nullopt, hooks);
  rep.final_estimate = estimate(rep.result.state);
  rep.grid_agreement = decision_agreement(rep.final_estimate, cfg.sim.expert, backlog_grid(S.n()));
  const auto slots = rep.result.totals.slots;
  rep.average_loss = slots ? rep.result.totals.loss_sum / static_cast<double>(slots) : 0.0;
  if (slots >= bp.T0) {
    rep.bound_at_T = infinite_bound(bp, slots);
    for (double eps : {0.001, 0.01, 0.1, 1.0})
      rep.tail.push_back({eps, tail_fraction_empirical(losses, eps, rep.bound_at_T), tail_fraction_bound(eps, rep.bound_at_T)});
  }
  return rep;
}

inline io::ordered_json demo_report_to_json(const DemoReport& rep) {
  io::ordered_json j;
  const auto e = rep.final_estimate.entries();
  j["final_estimate"] = std::vector<double>(e.begin(), e.end());
  j["slots"] = rep.result.totals.slots;
  j["mismatches"] = rep.result.totals.mismatches;
  j["last_mismatch"] = rep.result.totals.last_mismatch;
  j["final_half_mismatches"] = rep.final_half_mismatches;
  j["losses_above_prefix_bound"] = rep.losses_above_prefix_bound;
  j["grid_agreement"] = rep.grid_agreement;
  j["average_loss"] = rep.average_loss;
  j["bound_at_T"] = rep.bound_at_T;
  j["min_loss"] = rep.result.totals.min_loss;
  j["max_loss"] = rep.result.totals.max_loss;
  j["prefix_bound_violations"] = rep.result.totals.bound_violations;
  j["prefix_tail_exceedances"] = rep.result.totals.tail_exceedances;
  j["mismatches_per_window"] = rep.mismatches_per_window;
  io::ordered_json traj = io::ordered_json::array();
  for (const auto& s : rep.trajectory) traj.push_back({{"t", s.t}, {"b_hat", s.b_hat}});
  j["estimate_trajectory"] = traj;
  io::ordered_json lb = io::ordered_json::array();
  for (const auto& s : rep.loss_vs_bound)
    lb.push_back({{"t", s.t}, {"cum_avg_loss", s.cum_avg_loss}, {"bound_infinite", s.bound_infinite}});
  j["loss_vs_bound"] = lb;
  io::ordered_json tail = io::ordered_json::array();
  for (const auto& s : rep.tail) tail.push_back({{"epsilon", s.epsilon}, {"empirical", s.empirical}, {"bound", s.bound}});
  j["tail_fraction"] = tail;
  return j;
}

}  // namespace pcsemu
