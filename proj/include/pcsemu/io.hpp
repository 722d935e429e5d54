#pragma once

// File formats: JSON-lines traces, CSV metrics, JSON checkpoints, estimates
// and run configs. Floating-point text uses 17 significant digits.

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcsemu/core.hpp"
#include "pcsemu/learner.hpp"
#include "pcsemu/queue_sim.hpp"

namespace pcsemu::io {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// FNV-1a over the canonical text "c0,c1;c0,c1;..." of the ordered set.
inline std::string schedule_set_hash(const ScheduleSet& S) {
  std::string text;
  for (const auto& c : S) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) text += ',';
      text += std::to_string(c[i]);
    }
    text += ';';
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// JSON field helpers with path-qualified error messages.

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  if (!obj.is_object()) throw ValidationError(path + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ValidationError(path + ": unknown key '" + key + "'");
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(path + ": missing required key '" + key + "'");
  return *it;
}

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline std::int64_t as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ValidationError(path + ": expected an integer");
  return v.get<std::int64_t>();
}

inline std::uint64_t as_uint(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ValidationError(path + ": expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

inline double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path + ": expected a number");
  return v.get<double>();
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ValidationError(path + ": expected a string");
  return v.get<std::string>();
}

inline Config as_config(const json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path + ": expected an integer array");
  Config out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_int(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<double> as_doubles(const json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path + ": expected a number array");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_double(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline ScheduleSet as_schedule_set(const json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path + ": expected an array of configurations");
  std::vector<Config> configs;
  for (std::size_t k = 0; k < v.size(); ++k) configs.push_back(as_config(v[k], path + "[" + std::to_string(k) + "]"));
  try {
    return ScheduleSet(std::move(configs));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

// Triangular parameters as a flat row-major list or as nested rows
// [[b11, b12, ...], [b22, ...], ...].
inline TriangularParams as_triangular(const json& v, std::size_t n, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path + ": expected an array");
  std::vector<double> flat;
  if (!v.empty() && v[0].is_array()) {
    if (v.size() != n) throw ValidationError(path + ": expected " + std::to_string(n) + " rows");
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = as_doubles(v[i], path + "[" + std::to_string(i) + "]");
      if (row.size() != n - i)
        throw ValidationError(path + "[" + std::to_string(i) + "]: expected " + std::to_string(n - i) + " entries");
      flat.insert(flat.end(), row.begin(), row.end());
    }
  } else {
    flat = as_doubles(v, path);
  }
  try {
    return TriangularParams(n, std::move(flat));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline ordered_json to_json(std::span<const std::int64_t> c) { return ordered_json(std::vector<std::int64_t>(c.begin(), c.end())); }

inline ordered_json to_json(const ScheduleSet& S) {
  ordered_json out = ordered_json::array();
  for (const auto& c : S) out.push_back(to_json(c));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trace files: a header line followed by one record per line.
//   {"format":"pcs-trace","version":1,"n":2,"schedule_set":[[0,0],...],"expert":[...]}
//   {"t":0,"x":[0,0],"s":[0,0],"a":[1,3],"d":[0,0]}
// Records may carry "y" (normalized backlog) instead of "x".

struct TraceHeader {
  std::size_t n = 0;
  ScheduleSet schedule_set;
  std::optional<TriangularParams> expert;
};

struct Trace {
  TraceHeader header;
  std::vector<ObservedRecord> records;
};

inline void write_trace_header(std::ostream& os, const TraceHeader& h) {
  ordered_json j;
  j["format"] = "pcs-trace";
  j["version"] = kSchemaVersion;
  j["n"] = h.n;
  j["schedule_set"] = detail::to_json(h.schedule_set);
  if (h.expert) j["expert"] = std::vector<double>(h.expert->entries().begin(), h.expert->entries().end());
  os << j.dump() << '\n';
}

inline void write_trace_record(std::ostream& os, const TraceRecord& r) {
  ordered_json j;
  j["t"] = r.t;
  j["x"] = detail::to_json(r.x.values());
  j["s"] = detail::to_json(r.s);
  j["a"] = detail::to_json(r.a);
  j["d"] = detail::to_json(r.d);
  os << j.dump() << '\n';
}

inline Trace read_trace(std::istream& is) {
  Trace trace;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(where + ": malformed record: " + e.what());
    }
    if (!have_header) {
      detail::reject_unknown_keys(j, {"format", "version", "n", "schedule_set", "expert"}, where);
      if (detail::as_string(detail::require(j, "format", where), where + ".format") != "pcs-trace")
        throw ValidationError(where + ": not a pcs-trace file");
      if (detail::as_int(detail::require(j, "version", where), where + ".version") != kSchemaVersion)
        throw ValidationError(where + ": unsupported trace version");
      const auto n = detail::as_int(detail::require(j, "n", where), where + ".n");
      if (n < 1) throw ValidationError(where + ".n: must be >= 1");
      trace.header.n = static_cast<std::size_t>(n);
      trace.header.schedule_set = detail::as_schedule_set(detail::require(j, "schedule_set", where), where + ".schedule_set");
      if (trace.header.schedule_set.n() != trace.header.n)
        throw ValidationError(where + ": schedule set dimension does not match n");
      if (j.contains("expert"))
        trace.header.expert = detail::as_triangular(j["expert"], trace.header.n, where + ".expert");
      have_header = true;
      continue;
    }
    detail::reject_unknown_keys(j, {"t", "x", "y", "s", "a", "d"}, where);
    ObservedRecord r;
    r.line = lineno;
    r.t = detail::as_int(detail::require(j, "t", where), where + ".t");
    if (j.contains("x")) r.x = detail::as_config(j["x"], where + ".x");
    if (j.contains("y")) r.y = detail::as_doubles(j["y"], where + ".y");
    if (!r.x && !r.y) throw ValidationError(where + ": record needs x or y");
    r.s = detail::as_config(detail::require(j, "s", where), where + ".s");
    if (j.contains("a")) r.a = detail::as_config(j["a"], where + ".a");
    if (j.contains("d")) r.d = detail::as_config(j["d"], where + ".d");
    trace.records.push_back(std::move(r));
  }
  if (!have_header) throw ValidationError("trace is empty (missing header line)");
  return trace;
}

inline Trace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open trace file '" + path + "'");
  return read_trace(in);
}

// ---------------------------------------------------------------------------
// Metrics CSV.

struct MetricRow {
  std::int64_t t = 0;
  std::optional<double> loss;
  std::optional<double> cum_avg_loss;
  std::optional<double> bound_finite;
  std::optional<double> bound_infinite;
  bool mismatch = false;
  std::int64_t delta_inf = 0;
  double eta = 0.0;
  std::optional<int> epoch;
};

// Columns t,loss,cum_avg_loss,bound_finite,bound_infinite,mismatch,delta_inf,eta,epoch.
// Without ground truth the two loss columns are omitted.
class MetricsWriter {
 public:
  MetricsWriter(std::ostream& os, bool with_loss) : os_(os), with_loss_(with_loss) {}

  void header() {
    os_ << "t,";
    if (with_loss_) os_ << "loss,cum_avg_loss,";
    os_ << "bound_finite,bound_infinite,mismatch,delta_inf,eta,epoch\n";
  }

  void row(const MetricRow& r) {
    os_ << r.t << ',';
    if (with_loss_) os_ << opt(r.loss) << ',' << opt(r.cum_avg_loss) << ',';
    os_ << opt(r.bound_finite) << ',' << opt(r.bound_infinite) << ',' << (r.mismatch ? 1 : 0) << ',' << r.delta_inf
        << ',' << format_double(r.eta) << ',' << (r.epoch ? std::to_string(*r.epoch) : std::string()) << '\n';
  }

 private:
  static std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

  std::ostream& os_;
  bool with_loss_;
};

// ---------------------------------------------------------------------------
// Learner checkpoints and estimates.

struct RunningTotals {
  std::int64_t slots = 0;
  std::int64_t mismatches = 0;
  std::int64_t last_mismatch = 0;
  double loss_sum = 0.0;
  double max_loss = 0.0;
  double min_loss = 0.0;
  std::int64_t bound_violations = 0;           // prefixes with average above the unmargined bound
  std::int64_t margined_bound_violations = 0;  // ... above twice the bound
  std::int64_t tail_exceedances = 0;           // prefixes where some loss so far exceeds the bound

  friend bool operator==(const RunningTotals&, const RunningTotals&) = default;
};

struct Checkpoint {
  LearnerState state;
  std::string schedule_hash;
  RunningTotals totals;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline ordered_json to_json(const Checkpoint& c) {
  ordered_json j;
  j["format"] = "pcs-checkpoint";
  j["version"] = kSchemaVersion;
  j["n"] = c.state.n;
  j["variant"] = std::string(to_string(c.state.variant));
  j["params"] = std::string(to_string(c.state.param_mode));
  j["horizon_mode"] = std::string(to_string(c.state.horizon_mode));
  j["horizon"] = c.state.horizon;
  j["t"] = c.state.t;
  j["epoch"] = c.state.epoch;
  j["eta"] = c.state.eta;
  j["weights"] = c.state.weights;
  j["schedule_set_hash"] = c.schedule_hash;
  ordered_json m;
  m["slots"] = c.totals.slots;
  m["mismatches"] = c.totals.mismatches;
  m["last_mismatch"] = c.totals.last_mismatch;
  m["loss_sum"] = c.totals.loss_sum;
  m["max_loss"] = c.totals.max_loss;
  m["min_loss"] = c.totals.min_loss;
  m["bound_violations"] = c.totals.bound_violations;
  m["margined_bound_violations"] = c.totals.margined_bound_violations;
  m["tail_exceedances"] = c.totals.tail_exceedances;
  j["totals"] = m;
  return j;
}

inline Checkpoint checkpoint_from_json(const json& j) {
  const std::string p = "checkpoint";
  detail::reject_unknown_keys(j, {"format", "version", "n", "variant", "params", "horizon_mode", "horizon", "t", "epoch",
                                  "eta", "weights", "schedule_set_hash", "totals"},
                              p);
  if (detail::as_string(detail::require(j, "format", p), p + ".format") != "pcs-checkpoint")
    throw ValidationError(p + ": not a pcs-checkpoint document");
  if (detail::as_int(detail::require(j, "version", p), p + ".version") != kSchemaVersion)
    throw ValidationError(p + ": unsupported version");
  Checkpoint c;
  auto& st = c.state;
  st.n = static_cast<std::size_t>(detail::as_int(detail::require(j, "n", p), p + ".n"));
  st.variant = parse_variant(detail::as_string(detail::require(j, "variant", p), p + ".variant"));
  st.param_mode = parse_param_mode(detail::as_string(detail::require(j, "params", p), p + ".params"));
  st.horizon_mode = parse_horizon_mode(detail::as_string(detail::require(j, "horizon_mode", p), p + ".horizon_mode"));
  st.horizon = detail::as_int(detail::require(j, "horizon", p), p + ".horizon");
  st.t = detail::as_int(detail::require(j, "t", p), p + ".t");
  st.epoch = static_cast<int>(detail::as_int(detail::require(j, "epoch", p), p + ".epoch"));
  st.eta = detail::as_double(detail::require(j, "eta", p), p + ".eta");
  st.weights = detail::as_doubles(detail::require(j, "weights", p), p + ".weights");
  if (st.weights.size() != param_count(st.n, st.param_mode)) throw ValidationError(p + ".weights: wrong length");
  for (double w : st.weights)
    if (!(w > 0.0)) throw ValidationError(p + ".weights: entries must be positive");
  c.schedule_hash = detail::as_string(detail::require(j, "schedule_set_hash", p), p + ".schedule_set_hash");
  const auto& m = detail::require(j, "totals", p);
  const std::string mp = p + ".totals";
  detail::reject_unknown_keys(m, {"slots", "mismatches", "last_mismatch", "loss_sum", "max_loss", "min_loss",
                                  "bound_violations", "margined_bound_violations", "tail_exceedances"},
                              mp);
  c.totals.slots = detail::as_int(detail::require(m, "slots", mp), mp + ".slots");
  c.totals.mismatches = detail::as_int(detail::require(m, "mismatches", mp), mp + ".mismatches");
  c.totals.last_mismatch = detail::as_int(detail::require(m, "last_mismatch", mp), mp + ".last_mismatch");
  c.totals.loss_sum = detail::as_double(detail::require(m, "loss_sum", mp), mp + ".loss_sum");
  c.totals.max_loss = detail::as_double(detail::require(m, "max_loss", mp), mp + ".max_loss");
  c.totals.min_loss = detail::as_double(detail::require(m, "min_loss", mp), mp + ".min_loss");
  c.totals.bound_violations = detail::as_int(detail::require(m, "bound_violations", mp), mp + ".bound_violations");
  c.totals.margined_bound_violations =
      detail::as_int(detail::require(m, "margined_bound_violations", mp), mp + ".margined_bound_violations");
  c.totals.tail_exceedances = detail::as_int(detail::require(m, "tail_exceedances", mp), mp + ".tail_exceedances");
  return c;
}

inline void write_json_file(const std::string& path, const ordered_json& j) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot write '" + tmp + "'");
    out << j.dump(2) << '\n';
    if (!out) throw RuntimeError("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw RuntimeError("cannot rename '" + tmp + "' to '" + path + "'");
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  }
}

inline ordered_json estimate_to_json(const TriangularParams& b) {
  ordered_json j;
  j["format"] = "pcs-estimate";
  j["version"] = kSchemaVersion;
  j["n"] = b.n();
  j["b"] = std::vector<double>(b.entries().begin(), b.entries().end());
  return j;
}

inline TriangularParams estimate_from_json(const json& j) {
  const std::string p = "estimate";
  detail::reject_unknown_keys(j, {"format", "version", "n", "b"}, p);
  if (detail::as_string(detail::require(j, "format", p), p + ".format") != "pcs-estimate")
    throw ValidationError(p + ": not a pcs-estimate document");
  const auto n = detail::as_int(detail::require(j, "n", p), p + ".n");
  if (n < 1) throw ValidationError(p + ".n: must be >= 1");
  return detail::as_triangular(detail::require(j, "b", p), static_cast<std::size_t>(n), p + ".b");
}

// ---------------------------------------------------------------------------
// Run configuration.

struct LearnerOptions {
  Variant variant = Variant::multiplicative;
  ParamMode params = ParamMode::full;
  HorizonMode horizon_mode = HorizonMode::infinite;
};

struct OutputPaths {
  std::string trace;
  std::string metrics;
  std::string checkpoint;
  std::string estimate;
  std::string report;
};

struct RunConfig {
  std::string mode;  // simulate | learn | evaluate | demo, optional
  SimConfig sim;
  LearnerOptions learner;
  std::int64_t every = 1;
  std::int64_t checkpoint_every = 0;
  OutputPaths output;
};

inline ArrivalModel arrivals_from_json(const json& j, const std::string& path) {
  const auto kind = detail::as_string(detail::require(j, "kind", path), path + ".kind");
  if (kind == "geometric") {
    detail::reject_unknown_keys(j, {"kind", "means"}, path);
    return GeometricArrivals{detail::as_doubles(detail::require(j, "means", path), path + ".means")};
  }
  if (kind == "deterministic") {
    detail::reject_unknown_keys(j, {"kind", "per_slot"}, path);
    return DeterministicArrivals{detail::as_config(detail::require(j, "per_slot", path), path + ".per_slot")};
  }
  if (kind == "adversarial") {
    detail::reject_unknown_keys(j, {"kind", "burst", "period"}, path);
    AdversarialArrivals a;
    if (j.contains("burst")) a.burst = detail::as_int(j["burst"], path + ".burst");
    if (j.contains("period")) a.period = detail::as_int(j["period"], path + ".period");
    return a;
  }
  if (kind == "sequence") {
    detail::reject_unknown_keys(j, {"kind", "sequence"}, path);
    const auto& seq = detail::require(j, "sequence", path);
    if (!seq.is_array()) throw ValidationError(path + ".sequence: expected an array");
    SequenceArrivals s;
    for (std::size_t k = 0; k < seq.size(); ++k)
      s.sequence.push_back(detail::as_config(seq[k], path + ".sequence[" + std::to_string(k) + "]"));
    return s;
  }
  throw ValidationError(path + ".kind: unknown arrival kind '" + kind + "'");
}

inline ordered_json arrivals_to_json(const ArrivalModel& model) {
  ordered_json j;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, GeometricArrivals>) {
          j["kind"] = "geometric";
          j["means"] = m.means;
        } else if constexpr (std::is_same_v<M, DeterministicArrivals>) {
          j["kind"] = "deterministic";
          j["per_slot"] = m.per_slot;
        } else if constexpr (std::is_same_v<M, AdversarialArrivals>) {
          j["kind"] = "adversarial";
          j["burst"] = m.burst;
          j["period"] = m.period;
        } else {
          j["kind"] = "sequence";
          j["sequence"] = m.sequence;
        }
      },
      model);
  return j;
}

// Parses and cross-validates a config document. Unknown keys are errors.
inline RunConfig config_from_json(const json& j) {
  const std::string p = "config";
  detail::reject_unknown_keys(
      j, {"schema_version", "mode", "n", "schedule_set", "expert", "arrivals", "horizon", "x0", "seed", "learner", "output"}, p);
  if (detail::as_int(detail::require(j, "schema_version", p), p + ".schema_version") != kSchemaVersion)
    throw ValidationError(p + ".schema_version: unsupported (expected " + std::to_string(kSchemaVersion) + ")");
  RunConfig cfg;
  if (j.contains("mode")) {
    cfg.mode = detail::as_string(j["mode"], p + ".mode");
    if (cfg.mode != "simulate" && cfg.mode != "learn" && cfg.mode != "evaluate" && cfg.mode != "demo")
      throw ValidationError(p + ".mode: unknown mode '" + cfg.mode + "'");
  }
  const auto n_raw = detail::as_int(detail::require(j, "n", p), p + ".n");
  if (n_raw < 1) throw ValidationError(p + ".n: must be >= 1");
  const auto n = static_cast<std::size_t>(n_raw);
  auto S = detail::as_schedule_set(detail::require(j, "schedule_set", p), p + ".schedule_set");
  if (S.n() != n) throw ValidationError(p + ".schedule_set: configurations must have length n=" + std::to_string(n));
  auto b = detail::as_triangular(detail::require(j, "expert", p), n, p + ".expert");
  cfg.sim.expert = ExpertSpec{std::move(b), std::move(S)};
  cfg.sim.arrivals = arrivals_from_json(detail::require(j, "arrivals", p), p + ".arrivals");
  cfg.sim.horizon = detail::as_int(detail::require(j, "horizon", p), p + ".horizon");
  cfg.sim.x0 = j.contains("x0") ? detail::as_config(j["x0"], p + ".x0") : Config(n, 0);
  cfg.sim.seed = j.contains("seed") ? detail::as_uint(j["seed"], p + ".seed") : 0;
  if (j.contains("learner")) {
    const auto& l = j["learner"];
    const std::string lp = p + ".learner";
    detail::reject_unknown_keys(l, {"variant", "params", "horizon_mode"}, lp);
    if (l.contains("variant")) cfg.learner.variant = parse_variant(detail::as_string(l["variant"], lp + ".variant"));
    if (l.contains("params")) cfg.learner.params = parse_param_mode(detail::as_string(l["params"], lp + ".params"));
    if (l.contains("horizon_mode"))
      cfg.learner.horizon_mode = parse_horizon_mode(detail::as_string(l["horizon_mode"], lp + ".horizon_mode"));
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    const std::string op = p + ".output";
    detail::reject_unknown_keys(o, {"trace", "metrics", "checkpoint", "estimate", "report", "every", "checkpoint_every"}, op);
    auto str = [&](const char* key, std::string& dst) {
      if (o.contains(key)) dst = detail::as_string(o[key], op + "." + key);
    };
    str("trace", cfg.output.trace);
    str("metrics", cfg.output.metrics);
    str("checkpoint", cfg.output.checkpoint);
    str("estimate", cfg.output.estimate);
    str("report", cfg.output.report);
    if (o.contains("every")) cfg.every = detail::as_int(o["every"], op + ".every");
    if (o.contains("checkpoint_every")) cfg.checkpoint_every = detail::as_int(o["checkpoint_every"], op + ".checkpoint_every");
  }
  return cfg;
}

inline ordered_json config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  if (!cfg.mode.empty()) j["mode"] = cfg.mode;
  j["n"] = cfg.sim.n();
  j["schedule_set"] = detail::to_json(cfg.sim.expert.schedule_set);
  const auto e = cfg.sim.expert.params.entries();
  j["expert"] = std::vector<double>(e.begin(), e.end());
  j["arrivals"] = arrivals_to_json(cfg.sim.arrivals);
  j["horizon"] = cfg.sim.horizon;
  j["x0"] = cfg.sim.x0;
  j["seed"] = cfg.sim.seed;
  j["learner"] = {{"variant", std::string(to_string(cfg.learner.variant))},
                  {"params", std::string(to_string(cfg.learner.params))},
                  {"horizon_mode", std::string(to_string(cfg.learner.horizon_mode))}};
  ordered_json o;
  if (!cfg.output.trace.empty()) o["trace"] = cfg.output.trace;
  if (!cfg.output.metrics.empty()) o["metrics"] = cfg.output.metrics;
  if (!cfg.output.checkpoint.empty()) o["checkpoint"] = cfg.output.checkpoint;
  if (!cfg.output.estimate.empty()) o["estimate"] = cfg.output.estimate;
  if (!cfg.output.report.empty()) o["report"] = cfg.output.report;
  o["every"] = cfg.every;
  o["checkpoint_every"] = cfg.checkpoint_every;
  j["output"] = o;
  return j;
}

// Cross-field checks that must pass before any run starts.
inline void validate_run_config(const RunConfig& cfg) {
  validate_sim_config(cfg.sim);
  if (cfg.every < 1) throw ValidationError("config.output.every: must be >= 1");
  if (cfg.checkpoint_every < 0) throw ValidationError("config.output.checkpoint_every: must be >= 0");
  if (cfg.learner.horizon_mode == HorizonMode::finite) {
    const auto p = param_count(cfg.sim.n(), cfg.learner.params);
    if (!(static_cast<double>(cfg.sim.horizon) > 4.0 * std::log(static_cast<double>(p))))
      throw HorizonError("config.horizon: finite-horizon learning needs horizon > 4 ln p");
  }
}

inline constexpr std::uint64_t kDemoSeed = 42;

// Two queues, b = (0.5, 0.3, 0.2), S = {(0,0),(1,0),(2,1),(0,2)}, geometric
// arrivals with means (1, 2), T = 10^6, x0 = (0,0).
inline RunConfig demo_config() {
  RunConfig cfg;
  cfg.mode = "demo";
  cfg.sim.expert = ExpertSpec{TriangularParams(2, {0.5, 0.3, 0.2}), ScheduleSet({{0, 0}, {1, 0}, {2, 1}, {0, 2}})};
  cfg.sim.arrivals = GeometricArrivals{{1.0, 2.0}};
  cfg.sim.horizon = 1000000;
  cfg.sim.x0 = {0, 0};
  cfg.sim.seed = kDemoSeed;
  cfg.learner = {Variant::multiplicative, ParamMode::full, HorizonMode::infinite};
  cfg.every = 1000;
  cfg.output.metrics = "demo_metrics.csv";
  cfg.output.report = "demo_report.json";
  return cfg;
}

}  // namespace pcsemu::io
