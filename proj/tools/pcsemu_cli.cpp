// pcsemu: simulate an expert projective cone scheduler, learn to emulate it,
// and evaluate learned estimates.
//
//   pcsemu simulate --config run.json --trace trace.jsonl
//   pcsemu learn    --trace trace.jsonl --metrics m.csv --estimate est.json
//   pcsemu evaluate --trace trace.jsonl --estimate est.json
//   pcsemu demo     [--seed 42]
//
// Exit codes: 0 success, 1 validation error, 2 runtime error.

#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcsemu/pcsemu.hpp"

namespace {

using namespace pcsemu;

struct Overrides {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> horizon;
  std::string variant;
  std::string params;
  std::string horizon_mode;
  std::optional<std::int64_t> every;
  std::string trace;
  std::string metrics;
  std::string checkpoint;
  std::optional<std::int64_t> checkpoint_every;
  std::string estimate;
  std::string report;
  std::string resume;
  std::string expert;
  bool no_expert = false;
  std::int64_t stop_after = 0;
  int replications = 1;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration");
  cmd->add_option("--preset", o.preset, "Built-in configuration")->check(CLI::IsMember({"paper-demo"}));
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--horizon", o.horizon, "Number of time slots");
}

void add_learner(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--variant", o.variant, "Weight update rule")->check(CLI::IsMember({"multiplicative", "hedge"}));
  cmd->add_option("--params", o.params, "Parameterization")->check(CLI::IsMember({"full", "diagonal"}));
  cmd->add_option("--horizon-mode", o.horizon_mode, "Known (finite) or unknown (infinite) horizon")
      ->check(CLI::IsMember({"finite", "infinite"}));
  cmd->add_option("--every", o.every, "Write a metrics row every N slots");
}

std::optional<io::RunConfig> load_config(const Overrides& o, bool required) {
  std::optional<io::RunConfig> cfg;
  if (!o.preset.empty() && !o.config_path.empty()) throw ValidationError("--config and --preset are mutually exclusive");
  if (o.preset == "paper-demo") cfg = io::demo_config();
  if (!o.config_path.empty()) cfg = io::config_from_json(io::read_json_file(o.config_path));
  if (!cfg && required) throw ValidationError("a --config file or --preset is required");
  if (!cfg) return cfg;
  if (o.seed) cfg->sim.seed = *o.seed;
  if (o.horizon) cfg->sim.horizon = *o.horizon;
  if (!o.variant.empty()) cfg->learner.variant = parse_variant(o.variant);
  if (!o.params.empty()) cfg->learner.params = parse_param_mode(o.params);
  if (!o.horizon_mode.empty()) cfg->learner.horizon_mode = parse_horizon_mode(o.horizon_mode);
  if (o.every) cfg->every = *o.every;
  if (o.checkpoint_every) cfg->checkpoint_every = *o.checkpoint_every;
  if (!o.trace.empty()) cfg->output.trace = o.trace;
  if (!o.metrics.empty()) cfg->output.metrics = o.metrics;
  if (!o.checkpoint.empty()) cfg->output.checkpoint = o.checkpoint;
  if (!o.estimate.empty()) cfg->output.estimate = o.estimate;
  if (!o.report.empty()) cfg->output.report = o.report;
  io::validate_run_config(*cfg);
  return cfg;
}

// "out.csv" -> "out.rep3.csv" when running replications.
std::string replica_path(const std::string& path, int rep, int total) {
  if (path.empty() || total <= 1) return path;
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  const std::string tag = ".rep" + std::to_string(rep);
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + tag;
  return path.substr(0, dot) + tag + path.substr(dot);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeError("cannot write '" + path + "'");
  return out;
}

// Runs `job(replica_index)` for each replication concurrently; output is
// printed only after every replication finished.
template <class Job>
int replicate(int count, Job job) {
  if (count < 1) throw ValidationError("--replications must be >= 1");
  std::vector<std::future<std::string>> futures;
  for (int r = 0; r < count; ++r) futures.push_back(std::async(std::launch::async, job, r));
  std::vector<std::string> outputs;
  for (auto& f : futures) outputs.push_back(f.get());
  for (const auto& s : outputs) std::cout << s;
  return 0;
}

int cmd_simulate(const Overrides& o) {
  auto cfg = *load_config(o, true);
  if (cfg.output.trace.empty()) throw ValidationError("simulate needs --trace (output path)");
  return replicate(o.replications, [&](int r) {
    auto c = cfg;
    c.sim.seed += static_cast<std::uint64_t>(r);
    const auto path = replica_path(cfg.output.trace, r, o.replications);
    auto out = open_out(path);
    simulate(c.sim, out);
    if (!out) throw RuntimeError("write failed for '" + path + "'");
    return "wrote " + std::to_string(c.sim.horizon) + " records to " + path + " (seed " + std::to_string(c.sim.seed) + ")\n";
  });
}

std::string learn_summary(const LearnResult& res, const std::optional<TriangularParams>& expert) {
  std::string s;
  const auto b = estimate(res.state);
  s += "slots: " + std::to_string(res.totals.slots) + "\n";
  s += "mismatches: " + std::to_string(res.totals.mismatches) + " (last at t=" + std::to_string(res.totals.last_mismatch) + ")\n";
  s += "estimate:";
  for (double v : b.entries()) s += " " + io::format_double(v);
  s += "\n";
  if (expert && res.totals.slots > 0) {
    s += "average loss: " + io::format_double(res.totals.loss_sum / static_cast<double>(res.totals.slots)) + "\n";
    s += "bound violations (unmargined / margined): " + std::to_string(res.totals.bound_violations) + " / " +
         std::to_string(res.totals.margined_bound_violations) + "\n";
  }
  if (!res.completed) s += "stopped early at t=" + std::to_string(res.state.t - 1) + "\n";
  return s;
}

int cmd_learn(const Overrides& o) {
  if (!o.trace.empty() && (!o.config_path.empty() || !o.preset.empty()))
    throw ValidationError("learn takes either --trace or --config/--preset, not both");
  auto cfg_opt = load_config(o, false);
  std::optional<io::Checkpoint> resume;
  if (!o.resume.empty()) resume = io::checkpoint_from_json(io::read_json_file(o.resume));

  auto run_one = [&](const ScheduleSet& S, const std::optional<TriangularParams>& expert, const ObservationSource& src,
                     LearnSettings settings, const io::OutputPaths& out) {
    std::optional<std::ofstream> metrics;
    if (!out.metrics.empty()) metrics = open_out(out.metrics);
    LearnHooks hooks;
    if (metrics) hooks.metrics = &*metrics;
    if (!out.checkpoint.empty())
      hooks.on_checkpoint = [&](const io::Checkpoint& c) { io::write_json_file(out.checkpoint, io::to_json(c)); };
    auto res = learn(S, expert, src, settings, resume, hooks);
    if (!out.checkpoint.empty()) io::write_json_file(out.checkpoint, io::to_json(io::Checkpoint{res.state, io::schedule_set_hash(S), res.totals}));
    if (!out.estimate.empty()) io::write_json_file(out.estimate, io::estimate_to_json(estimate(res.state)));
    return learn_summary(res, expert);
  };

  if (!o.trace.empty() && !cfg_opt) {
    // Learn from a recorded trace.
    if (o.replications != 1) throw ValidationError("--replications applies to live simulation only");
    const auto trace = io::read_trace_file(o.trace);
    const auto obs = replay_trace(trace.records, trace.header.schedule_set);
    LearnSettings settings;
    if (!o.variant.empty()) settings.learner.variant = parse_variant(o.variant);
    if (!o.params.empty()) settings.learner.params = parse_param_mode(o.params);
    if (!o.horizon_mode.empty()) settings.learner.horizon_mode = parse_horizon_mode(o.horizon_mode);
    settings.horizon = o.horizon ? *o.horizon : static_cast<std::int64_t>(obs.size());
    if (settings.learner.horizon_mode == HorizonMode::finite && settings.horizon > static_cast<std::int64_t>(obs.size()))
      throw ValidationError("--horizon exceeds the number of trace records");
    settings.every = o.every.value_or(1);
    settings.checkpoint_every = o.checkpoint_every.value_or(0);
    settings.stop_after = o.stop_after;
    std::optional<TriangularParams> expert = o.no_expert ? std::nullopt : trace.header.expert;
    io::OutputPaths out{"", o.metrics, o.checkpoint, o.estimate, ""};
    std::cout << run_one(trace.header.schedule_set, expert, observations_from(obs), settings, out);
    return 0;
  }

  if (!cfg_opt) throw ValidationError("learn needs --trace, --config or --preset");
  const auto cfg = *cfg_opt;
  return replicate(o.replications, [&](int r) {
    auto c = cfg;
    c.sim.seed += static_cast<std::uint64_t>(r);
    ExpertSimulator sim(c.sim);
    LearnSettings settings{c.learner, c.sim.horizon, c.every, c.checkpoint_every, o.stop_after};
    io::OutputPaths out{"", replica_path(c.output.metrics, r, o.replications), replica_path(c.output.checkpoint, r, o.replications),
                        replica_path(c.output.estimate, r, o.replications), ""};
    std::optional<TriangularParams> expert;
    if (!o.no_expert) expert = c.sim.expert.params;
    return run_one(c.sim.expert.schedule_set, expert, observations_from(sim), settings, out);
  });
}

int cmd_evaluate(const Overrides& o) {
  if (o.trace.empty() || o.estimate.empty()) throw ValidationError("evaluate needs --trace and --estimate");
  const auto trace = io::read_trace_file(o.trace);
  const auto obs = replay_trace(trace.records, trace.header.schedule_set);
  const auto b_hat = io::estimate_from_json(io::read_json_file(o.estimate));
  std::optional<TriangularParams> expert;
  if (!o.expert.empty()) expert = io::estimate_from_json(io::read_json_file(o.expert));
  else if (!o.no_expert) expert = trace.header.expert;

  std::optional<std::ofstream> csv;
  if (!o.metrics.empty()) csv = open_out(o.metrics);
  const auto sum = evaluate(trace.header.schedule_set, b_hat, obs, expert, csv ? &*csv : nullptr, o.every.value_or(1));
  std::cout << "slots: " << sum.slots << "\n"
            << "mismatches: " << sum.mismatches << "\n"
            << "max |delta|_inf: " << sum.max_delta_inf << "\n"
            << "trace agreement: " << io::format_double(sum.trace_agreement) << "\n";
  if (sum.average_loss) std::cout << "average loss: " << io::format_double(*sum.average_loss) << "\n";
  if (sum.grid_agreement) std::cout << "grid agreement: " << io::format_double(*sum.grid_agreement) << "\n";
  return 0;
}

std::string demo_text(const DemoReport& rep, std::int64_t T) {
  std::string s;
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  auto sci = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return std::string(buf);
  };
  s += "estimate trajectory (b11, b12, b22):\n";
  for (const auto& e : rep.trajectory) {
    s += "  t=" + std::to_string(e.t) + ":";
    for (double v : e.b_hat) s += " " + fmt(v);
    s += "\n";
  }
  s += "scheduling mismatches per tenth of the horizon:";
  for (auto c : rep.mismatches_per_window) s += " " + std::to_string(c);
  s += "\n";
  s += "running average loss vs unknown-horizon bound:\n";
  for (const auto& l : rep.loss_vs_bound) s += "  t=" + std::to_string(l.t) + ": " + sci(l.cum_avg_loss) + " <= " + sci(l.bound_infinite) + "\n";
  s += "final estimate:";
  for (double v : rep.final_estimate.entries()) s += " " + fmt(v);
  s += "\n";
  s += "mismatches in final half: " + std::to_string(rep.final_half_mismatches) + " (of " + std::to_string(T / 2) + " slots)\n";
  s += "grid agreement on {0..20}^2: " + fmt(rep.grid_agreement) + "\n";
  s += "losses above the bound at their own slot: " + std::to_string(rep.losses_above_prefix_bound) + "\n";
  s += "tail fraction at T (eps: empirical <= bound):\n";
  for (const auto& t : rep.tail) s += "  " + sci(t.epsilon) + ": " + sci(t.empirical) + " <= " + sci(t.bound) + "\n";
  return s;
}

int cmd_demo(const Overrides& o) {
  Overrides with_preset = o;
  if (with_preset.config_path.empty()) with_preset.preset = "paper-demo";
  const auto cfg = *load_config(with_preset, true);
  return replicate(o.replications, [&](int r) {
    auto c = cfg;
    c.sim.seed += static_cast<std::uint64_t>(r);
    std::optional<std::ofstream> metrics;
    const auto mpath = replica_path(c.output.metrics, r, o.replications);
    if (!mpath.empty()) metrics = open_out(mpath);
    const auto rep = run_demo(c, metrics ? &*metrics : nullptr);
    const auto rpath = replica_path(c.output.report, r, o.replications);
    if (!rpath.empty()) io::write_json_file(rpath, demo_report_to_json(rep));
    std::string header = "demo seed " + std::to_string(c.sim.seed) + ", T=" + std::to_string(c.sim.horizon) + "\n";
    return header + demo_text(rep, c.sim.horizon);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn to emulate an expert projective cone scheduler"};
  app.require_subcommand(1);
  Overrides o;

  auto* sim = app.add_subcommand("simulate", "Run the expert scheduler and write a trace");
  add_common(sim, o);
  sim->add_option("--trace", o.trace, "Output trace path (JSON lines)");
  sim->add_option("--replications", o.replications, "Independent seeds to run concurrently");

  auto* learn = app.add_subcommand("learn", "Learn from a trace or a live simulation");
  add_common(learn, o);
  add_learner(learn, o);
  learn->add_option("--trace", o.trace, "Input trace (JSON lines)");
  learn->add_option("--metrics", o.metrics, "Per-slot metrics CSV");
  learn->add_option("--checkpoint", o.checkpoint, "Checkpoint path");
  learn->add_option("--checkpoint-every", o.checkpoint_every, "Checkpoint cadence in slots");
  learn->add_option("--resume", o.resume, "Resume from a checkpoint");
  learn->add_option("--stop-after", o.stop_after, "Stop after this slot");
  learn->add_option("--estimate", o.estimate, "Final estimate output (JSON)");
  learn->add_flag("--no-expert", o.no_expert, "Ignore ground truth even when available");
  learn->add_option("--replications", o.replications, "Independent seeds to run concurrently (live simulation)");

  auto* eval = app.add_subcommand("evaluate", "Score a fixed estimate against a trace");
  eval->add_option("--trace", o.trace, "Input trace (JSON lines)");
  eval->add_option("--estimate", o.estimate, "Estimate to evaluate (JSON)");
  eval->add_option("--expert", o.expert, "Ground-truth parameters (estimate format); defaults to the trace header");
  eval->add_flag("--no-expert", o.no_expert, "Ignore ground truth even when available");
  eval->add_option("--metrics", o.metrics, "Per-slot metrics CSV");
  eval->add_option("--every", o.every, "Write a metrics row every N slots");

  auto* demo = app.add_subcommand("demo", "Two-queue reproduction preset");
  add_common(demo, o);
  add_learner(demo, o);
  demo->add_option("--metrics", o.metrics, "Metrics CSV path");
  demo->add_option("--report", o.report, "Report JSON path");
  demo->add_option("--replications", o.replications, "Independent seeds to run concurrently");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*learn) return cmd_learn(o);
    if (*eval) return cmd_evaluate(o);
    if (*demo) return cmd_demo(o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
