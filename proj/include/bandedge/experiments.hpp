// Copyright 2026 The bandedge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment runners behind the command-line tool. Each runner writes its
// traces and a JSON summary into an output directory and returns the summary.

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bandedge/config.hpp"
#include "bandedge/control.hpp"
#include "bandedge/dynamics.hpp"
#include "bandedge/io.hpp"
#include "bandedge/spectra.hpp"
#include "bandedge/stablestate.hpp"
#include "bandedge/weakcoupling.hpp"

namespace bandedge {

namespace fs = std::filesystem;

struct RunOptions {
  // Off: the summary also carries wall-clock run information.
  bool deterministic = true;
  // Concurrent runs for sweeps and figures.
  std::size_t threads = 1;
};

namespace detail {

struct Setup {
  ExperimentConfig config;
  SpectrumModel model;
  DiscretizedContinuum continuum;
  PropagationSettings settings;
  SystemState init;
  double g = 1.0;
};

inline Setup make_setup(const ExperimentConfig& c) {
  Setup s{c, build_spectrum(c), {}, build_settings(c), {}, c.spectrum.gamma_c};
  s.continuum = discretize(s.model, c.spectrum.n_modes);
  s.init = build_initial_state(c, s.continuum.n_modes());
  return s;
}

inline void write_trace(const fs::path& path, const Trace& trace, double g, bool target = false) {
  auto os = open_output(path);
  write_trace_csv(os, trace, {g, target});
}

inline Trace run_schedule(const Setup& s, const DetuningSchedule& schedule) {
  PropagationOptions opt;
  opt.reference = s.init;
  return propagate(s.init, schedule, s.continuum, s.settings, opt);
}

inline double plateau_mean(const Trace& trace) {
  const auto p = trace.populations();
  const std::size_t from = p.size() * 4 / 5;
  double sum = 0.0;
  for (std::size_t i = from; i < p.size(); ++i) sum += p[i];
  return sum / static_cast<double>(p.size() - from);
}

// Pole offset from the edge and weight; nulls without a bound state.
inline json stable_prediction(const Setup& s, double delta) {
  try {
    const auto& dm = s.config.initial_state;
    const double w0 = find_pole(s.model, delta, dm.kappa_d * s.g, s.model.omega_U + dm.omega_d * s.g);
    const double c = stable_weight(s.model, w0, dm.kappa_d * s.g, s.model.omega_U + dm.omega_d * s.g);
    return {{"omega_0", (w0 - s.model.omega_U) / s.g}, {"C", c}, {"plateau", c * c}};
  } catch (const NoBoundState&) {
    return {{"omega_0", nullptr}, {"C", nullptr}, {"plateau", nullptr}};
  }
}

// Fills untuned dwells in place; returns the tuning record or null.
inline json resolve_dwells(Setup& s) {
  auto& sc = s.config.schedule;
  json record = nullptr;
  if (sc.needs_tuning()) {
    auto spec = build_sequence_spec(s.config, s.model.omega_U);
    spec.rise = SuddenRise{};
    TuningOptions opt;
    opt.min_periods = sc.tuning.min_periods;
    opt.reversed_tolerance = sc.tuning.reversed_tolerance;
    auto grid = build_dwell_grid(s.config);
    if (sc.tau_A) grid.tau_A = {*sc.tau_A / s.g};
    if (sc.tau_B) grid.tau_B = {*sc.tau_B / s.g};
    auto settings = s.settings;
    if (sc.tuning.horizon) settings.horizon = *sc.tuning.horizon / s.g;
    const auto r = tune_dwells(spec, s.init, s.continuum, sc.tuning.objective, grid, settings, opt);
    sc.tau_A = r.best.tau_A * s.g;
    sc.tau_B = r.best.tau_B * s.g;
    record = {{"objective", to_string(sc.tuning.objective)},
              {"score", std::isfinite(r.best_score) ? json(r.best_score) : json(nullptr)},
              {"evaluated", r.evaluated}};
  }
  if (sc.rise == "super_gaussian" && !sc.rise_tau) sc.rise_tau = 0.25 * *sc.tau_A;
  return record;
}

inline json period_json(const std::vector<PeriodExcess>& periods, double g) {
  json out = json::array();
  for (const auto& p : periods)
    out.push_back({{"start", p.start * g}, {"end", p.end * g}, {"peak_excess", p.peak_excess},
                   {"peak_time", p.peak_time * g}});
  return out;
}

inline json protection_json(const ProtectionReport& r, double g) {
  auto finite = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  return {{"exceedance_fraction", r.exceedance_fraction},
          {"peak_excess", r.peak_excess},
          {"peak_time", r.peak_time * g},
          {"periods", r.population_periods.size()},
          {"periods_exceeding", r.periods_exceeding()},
          {"worst_period_excess", finite(r.worst_period_excess())},
          {"fidelity_ratio_A", finite(r.fidelity_ratio_A)},
          {"fidelity_ratio_B", finite(r.fidelity_ratio_B)},
          {"period_excess", period_json(r.population_periods, g)}};
}

inline double sup_difference(const Trace& a, const Trace& b) {
  if (a.samples.size() != b.samples.size()) throw MisalignedGrids("traces have different sample counts");
  double m = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    m = std::max(m, std::abs(a.samples[i].pop_e() - b.samples[i].pop_e()));
  return m;
}

inline std::string stem(const ExperimentConfig& c, const std::string& suffix = "") {
  return c.output_name + suffix;
}

inline json finish(json summary, const Setup& s, const std::string& experiment, const fs::path& out,
                   const RunOptions& opt, std::chrono::steady_clock::time_point started) {
  summary["experiment"] = experiment;
  summary["config"] = to_json(s.config);
  if (!opt.deterministic) {
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    summary["run_info"] = {{"wall_time_s", elapsed},
                           {"finished_at", static_cast<long long>(std::time(nullptr))}};
  }
  auto os = open_output(out / (stem(s.config) + ".json"));
  os << summary.dump(2) << '\n';
  return summary;
}

}  // namespace detail

/// Static runs at Delta_A and Delta_B with the predicted plateaus.
inline json run_static(const ExperimentConfig& config, const fs::path& out, const RunOptions& opt = {}) {
  const auto started = std::chrono::steady_clock::now();
  auto s = detail::make_setup(config);
  const auto spec = build_sequence_spec(s.config, s.model.omega_U);
  json summary;
  for (const auto& [label, delta] : {std::pair{"A", spec.delta_A}, std::pair{"B", spec.delta_B}}) {
    const auto trace = detail::run_schedule(s, static_schedule(spec, delta));
    detail::write_trace(out / (detail::stem(s.config, std::string("_") + label) + ".csv"), trace, s.g);
    summary[std::string("static_") + label] = {{"delta", delta / s.g},
                                               {"final_pop_e", trace.samples.back().pop_e()},
                                               {"plateau", detail::plateau_mean(trace)},
                                               {"max_norm_drift", trace.max_norm_drift()},
                                               {"predicted", detail::stable_prediction(s, delta)}};
  }
  return detail::finish(summary, s, "static", out, opt, started);
}

/// Alternating sequence against both static references and the reversed order.
inline json run_sequence(const ExperimentConfig& config, const fs::path& out, const RunOptions& opt = {}) {
  const auto started = std::chrono::steady_clock::now();
  auto s = detail::make_setup(config);
  json summary;
  summary["tuning"] = detail::resolve_dwells(s);
  const auto spec = covering(build_sequence_spec(s.config, s.model.omega_U), s.settings.horizon);

  const auto dyn = detail::run_schedule(s, build_sequence(spec));
  const auto static_A = detail::run_schedule(s, static_schedule(spec, spec.delta_A));
  const auto static_B = detail::run_schedule(s, static_schedule(spec, spec.delta_B));
  auto rev_spec = spec;
  rev_spec.order = spec.order == SequenceOrder::CounterIntuitive ? SequenceOrder::Intuitive
                                                                 : SequenceOrder::CounterIntuitive;
  const auto reversed = detail::run_schedule(s, build_sequence(rev_spec));

  detail::write_trace(out / (detail::stem(s.config) + ".csv"), dyn, s.g);
  detail::write_trace(out / (detail::stem(s.config, "_static_A") + ".csv"), static_A, s.g);
  detail::write_trace(out / (detail::stem(s.config, "_static_B") + ".csv"), static_B, s.g);
  detail::write_trace(out / (detail::stem(s.config, "_reversed") + ".csv"), reversed, s.g);

  const auto windows = period_windows(spec, s.init.t);
  summary["protection"] = detail::protection_json(protection_report(static_A, static_B, dyn, windows), s.g);
  summary["reversed"] = {{"order", to_string(rev_spec.order)},
                         {"protection", detail::protection_json(
                                            protection_report(static_A, static_B, reversed, period_windows(rev_spec, s.init.t)), s.g)}};
  double drift = std::max({dyn.max_norm_drift(), static_A.max_norm_drift(), static_B.max_norm_drift(),
                           reversed.max_norm_drift()});
  if (std::holds_alternative<SuperGaussianRise>(spec.rise)) {
    auto sudden = spec;
    sudden.rise = SuddenRise{};
    const auto ref = detail::run_schedule(s, build_sequence(sudden));
    detail::write_trace(out / (detail::stem(s.config, "_sudden") + ".csv"), ref, s.g);
    summary["sudden_sup_difference"] = detail::sup_difference(dyn, ref);
    drift = std::max(drift, ref.max_norm_drift());
  }
  summary["max_norm_drift"] = drift;
  summary["predicted"] = {{"static_A", detail::stable_prediction(s, spec.delta_A)},
                          {"static_B", detail::stable_prediction(s, spec.delta_B)}};
  return detail::finish(summary, s, "sequence", out, opt, started);
}

/// Gradual gate on the sequence, with the single-kick protocol, the ungated
/// sequence and the static Delta_A run for comparison.
inline json run_gate_experiment(const ExperimentConfig& config, const fs::path& out, const RunOptions& opt = {}) {
  const auto started = std::chrono::steady_clock::now();
  if (!config.gate) throw ConfigError("gate", "required block missing");
  auto s = detail::make_setup(config);
  json summary;
  summary["tuning"] = detail::resolve_dwells(s);
  const auto spec = covering(build_sequence_spec(s.config, s.model.omega_U), s.settings.horizon);
  const GateProtocol protocol{config.gate->n_steps, config.gate->interleave};
  const GateProtocol single{1, config.gate->interleave};

  const auto gated = run_gate(protocol, spec, s.init, s.continuum, s.settings);
  const auto kick = run_gate(single, spec, s.init, s.continuum, s.settings);
  const auto ungated = detail::run_schedule(s, build_sequence(spec));
  const auto static_A = detail::run_schedule(s, static_schedule(spec, spec.delta_A));
  const auto static_B = detail::run_schedule(s, static_schedule(spec, spec.delta_B));

  detail::write_trace(out / (detail::stem(s.config) + ".csv"), gated.trace, s.g, true);
  detail::write_trace(out / (detail::stem(s.config, "_single_kick") + ".csv"), kick.trace, s.g, true);
  detail::write_trace(out / (detail::stem(s.config, "_ungated") + ".csv"), ungated, s.g);
  detail::write_trace(out / (detail::stem(s.config, "_static_A") + ".csv"), static_A, s.g);

  json kicks = json::array();
  for (double t : gated.kick_times) kicks.push_back(t * s.g);
  const auto report = protection_report(static_A, static_B, ungated, period_windows(spec, s.init.t));
  std::size_t fid_periods = 0;
  for (const auto& p : report.fidelity_periods_vs_A) fid_periods += p.peak_excess > 0.0 ? 1 : 0;
  summary["gate_fidelity"] = gated.gate_fidelity;
  summary["start_time"] = gated.start_time * s.g;
  summary["end_time"] = gated.end_time * s.g;
  summary["n_steps"] = protocol.n_steps;
  summary["interleave"] = protocol.interleave;
  summary["kick_times"] = kicks;
  summary["single_kick"] = {
      {"gate_fidelity", kick.gate_fidelity},
      {"end_time", kick.end_time * s.g},
      {"target_fidelity_at_gate_end", sample_at(kick.trace, gated.end_time, &TraceSample::target_fidelity)}};
  summary["exceedance"] = {{"fidelity_periods", report.fidelity_periods_vs_A.size()},
                           {"fidelity_periods_exceeding_static_A", fid_periods},
                           {"fidelity_ratio_A", report.fidelity_ratio_A},
                           {"population", detail::protection_json(report, s.g)}};
  summary["max_norm_drift"] = std::max({gated.trace.max_norm_drift(), kick.trace.max_norm_drift(),
                                        ungated.max_norm_drift(), static_A.max_norm_drift()});
  return detail::finish(summary, s, "gate", out, opt, started);
}

/// (Delta, omega_0, C, 1 - C) per requested detuning; omega_0 is measured from
/// the edge. Detunings without a bound state give NaN rows.
inline json run_stable_state(const ExperimentConfig& config, const fs::path& out, const RunOptions& opt = {}) {
  const auto started = std::chrono::steady_clock::now();
  auto s = detail::make_setup(config);
  CsvTable table{{"delta", "omega_0", "C", "one_minus_C"}, {}};
  json rows = json::array();
  for (double d : s.config.stable_state.detunings) {
    const auto p = detail::stable_prediction(s, d * s.g);
    if (p["C"].is_null()) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      table.add({d, nan, nan, nan});
    } else {
      const double c = p["C"].get<double>();
      table.add({d, p["omega_0"].get<double>(), c, 1.0 - c});
    }
    rows.push_back({{"delta", d}, {"omega_0", p["omega_0"]}, {"C", p["C"]}});
  }
  auto os = open_output(out / (detail::stem(s.config) + ".csv"));
  write_table_csv(os, table);
  return detail::finish({{"rows", rows}}, s, "stable-state", out, opt, started);
}

/// Convolution-formula rate against the rate fitted to the simulated decay, for
/// a qubit placed inside the band at each distance above the edge.
inline json run_weak_coupling(const ExperimentConfig& config, const fs::path& out, const RunOptions& opt = {}) {
  const auto started = std::chrono::steady_clock::now();
  auto s = detail::make_setup(config);
  CsvTable table{{"delta", "rate_formula", "rate_fit", "rel_error", "plateau", "disagrees"}, {}};
  json rows = json::array();
  for (double d : s.config.weak_coupling.distances) {
    const auto r = compare_regimes(s.model, s.continuum, d * s.g, s.settings, s.config.weak_coupling.peak_width);
    const double fit = r.fitted_rate ? *r.fitted_rate / s.g : std::numeric_limits<double>::quiet_NaN();
    table.add({d, r.formula_rate / s.g, fit, r.relative_error, r.plateau, r.disagrees ? 1.0 : 0.0});
    rows.push_back({{"delta", d},
                    {"rate_formula", r.formula_rate / s.g},
                    {"rate_fit", r.fitted_rate ? json(fit) : json(nullptr)},
                    {"rel_error", std::isfinite(r.relative_error) ? json(r.relative_error) : json(nullptr)},
                    {"plateau", r.plateau},
                    {"disagrees", r.disagrees}});
  }
  auto os = open_output(out / (detail::stem(s.config) + ".csv"));
  write_table_csv(os, table);
  return detail::finish({{"rows", rows}}, s, "weak-coupling", out, opt, started);
}

using Runner = std::function<json(const ExperimentConfig&, const fs::path&, const RunOptions&)>;

inline Runner runner_for(const std::string& experiment) {
  if (experiment == "static") return run_static;
  if (experiment == "sequence") return run_sequence;
  if (experiment == "gate") return run_gate_experiment;
  if (experiment == "stable-state") return run_stable_state;
  if (experiment == "weak-coupling") return run_weak_coupling;
  throw InvalidArgument("unknown experiment '" + experiment + "'");
}

/// Runs jobs on up to `threads` workers; rethrows the first failure in job order.
inline void run_parallel(std::size_t n_jobs, std::size_t threads, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(n_jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n_jobs;) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(threads, n_jobs));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// One run of sweep.experiment per value of sweep.parameter, each in its own
/// directory <name>_NNN.
inline json run_sweep(const ExperimentConfig& config, const fs::path& out, const RunOptions& opt = {}) {
  if (!config.sweep) throw ConfigError("sweep", "required block missing");
  const auto& sw = *config.sweep;
  const auto runner = runner_for(sw.experiment);
  std::vector<ExperimentConfig> configs;
  for (std::size_t i = 0; i < sw.values.size(); ++i) {
    json tree = to_json(config);
    tree.erase("sweep");
    const json::json_pointer ptr(sw.parameter);
    if (!tree.contains(ptr)) throw ConfigError("sweep.parameter", "no field at " + sw.parameter);
    tree[ptr] = sw.values[i];
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "_%03zu", i);
    tree["output"]["name"] = config.output_name + suffix;
    configs.push_back(parse_config(tree, config.base_dir));
  }
  std::vector<json> results(configs.size());
  run_parallel(configs.size(), opt.threads, [&](std::size_t i) {
    results[i] = runner(configs[i], out / configs[i].output_name, opt);
  });
  json runs = json::array();
  for (std::size_t i = 0; i < configs.size(); ++i)
    runs.push_back({{"value", sw.values[i]}, {"directory", configs[i].output_name}, {"summary", results[i]}});
  json summary{{"experiment", "sweep"}, {"config", to_json(config)}, {"runs", runs}};
  auto os = open_output(out / (config.output_name + ".json"));
  os << summary.dump(2) << '\n';
  return summary;
}

struct FigureSpec {
  const char* config_file;
  const char* experiment;
};

/// The pinned figure configurations, fig1.json ... fig4.json.
inline constexpr FigureSpec kFigures[] = {
    {"fig1.json", "sequence"},
    {"fig2.json", "gate"},
    {"fig3.json", "sequence"},
    {"fig4.json", "sequence"},
};

/// Runs the four pinned figure configurations found in `config_dir`.
inline json run_figures(const fs::path& config_dir, const fs::path& out, const RunOptions& opt = {}) {
  std::vector<ExperimentConfig> configs;
  for (const auto& f : kFigures) configs.push_back(load_config(config_dir / f.config_file));
  std::vector<json> results(configs.size());
  run_parallel(configs.size(), opt.threads, [&](std::size_t i) {
    results[i] = runner_for(kFigures[i].experiment)(configs[i], out, opt);
  });
  json index = json::array();
  for (std::size_t i = 0; i < configs.size(); ++i)
    index.push_back({{"figure", configs[i].output_name},
                     {"experiment", kFigures[i].experiment},
                     {"trace", configs[i].output_name + ".csv"},
                     {"summary", configs[i].output_name + ".json"}});
  json summary{{"experiment", "figures"}, {"figures", index}};
  auto os = open_output(out / "figures.json");
  os << summary.dump(2) << '\n';
  return summary;
}

}  // namespace bandedge
