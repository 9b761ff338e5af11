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

// Periodic detuning sequences, dwell tuning, the interleaved phase-kick gate and
// protection statistics against static references.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "bandedge/dynamics.hpp"
#include "bandedge/error.hpp"
#include "bandedge/spectra.hpp"

namespace bandedge {

enum class SequenceOrder {
  // Start at Delta_A, first switch toward the edge.
  CounterIntuitive,
  // Start at Delta_B.
  Intuitive,
};

inline const char* to_string(SequenceOrder order) {
  return order == SequenceOrder::CounterIntuitive ? "counterintuitive" : "intuitive";
}

struct SequenceSpec {
  double delta_A = 0.5;
  double delta_B = 0.25;
  double tau_A = 1.0;
  double tau_B = 1.0;
  SequenceOrder order = SequenceOrder::CounterIntuitive;
  std::size_t n_periods = 0;
  DiscreteMode discrete_mode;
  RiseProfile rise = SuddenRise{};

  double period() const { return tau_A + tau_B; }
  double starting_detuning() const {
    return order == SequenceOrder::CounterIntuitive ? delta_A : delta_B;
  }
  double first_dwell() const { return order == SequenceOrder::CounterIntuitive ? tau_A : tau_B; }
};

/// Equal detunings are rejected unless explicitly allowed (test setups only).
enum class DetuningCheck { Strict, AllowEqual };

inline void validate(const SequenceSpec& spec, DetuningCheck check = DetuningCheck::Strict) {
  if (!std::isfinite(spec.delta_A) || !std::isfinite(spec.delta_B))
    throw InvalidArgument("sequence: detunings must be finite");
  if (check == DetuningCheck::Strict ? !(spec.delta_A > spec.delta_B) : !(spec.delta_A >= spec.delta_B))
    throw InvalidArgument("sequence: Delta_A must exceed Delta_B");
  if (!(spec.tau_A > 0.0) || !(spec.tau_B > 0.0) || !std::isfinite(spec.tau_A) || !std::isfinite(spec.tau_B))
    throw InvalidArgument("sequence: dwell times must be positive");
}

/// Alternating schedule with n_periods (tau_A, tau_B) pairs in the requested
/// order; the last segment's detuning holds afterwards. n_periods = 0 gives the
/// static schedule at the starting detuning.
inline DetuningSchedule build_sequence(const SequenceSpec& spec,
                                       DetuningCheck check = DetuningCheck::Strict) {
  validate(spec, check);
  DetuningSchedule s;
  s.discrete_mode = spec.discrete_mode;
  s.rise = spec.rise;
  if (spec.n_periods == 0) {
    s.segments = {{spec.period(), spec.starting_detuning()}};
    s.rise = SuddenRise{};
    return s;
  }
  const Segment a{spec.tau_A, spec.delta_A};
  const Segment b{spec.tau_B, spec.delta_B};
  for (std::size_t p = 0; p < spec.n_periods; ++p) {
    if (spec.order == SequenceOrder::CounterIntuitive) {
      s.segments.push_back(a);
      s.segments.push_back(b);
    } else {
      s.segments.push_back(b);
      s.segments.push_back(a);
    }
  }
  s.validate();
  return s;
}

/// Smallest period count whose program runs past `horizon`.
inline std::size_t periods_to_cover(const SequenceSpec& spec, double horizon) {
  return static_cast<std::size_t>(std::ceil(horizon / spec.period())) + 1;
}

/// A copy of `spec` with the given order and enough periods for `horizon`.
inline SequenceSpec covering(SequenceSpec spec, double horizon) {
  spec.n_periods = periods_to_cover(spec, horizon);
  return spec;
}

/// Static schedule at one detuning with the discrete mode of `spec`.
inline DetuningSchedule static_schedule(const SequenceSpec& spec, double detuning) {
  return DetuningSchedule::constant(detuning, spec.discrete_mode);
}

// ---------------------------------------------------------------------------
// Comparisons against static references

namespace detail {

inline void require_aligned(const Trace& a, const Trace& b) {
  if (a.samples.size() != b.samples.size())
    throw MisalignedGrids("traces have different sample counts");
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    if (std::abs(a.samples[i].t - b.samples[i].t) > 1e-9)
      throw MisalignedGrids("trace sample times differ");
  }
}

}  // namespace detail

/// Peak of (value - reference) inside one period window [start, end).
struct PeriodExcess {
  double start = 0.0;
  double end = 0.0;
  double peak_excess = -std::numeric_limits<double>::infinity();
  double peak_time = 0.0;
};

/// Per-period peak of value[i] - reference[i] over complete windows
/// [t0 + k period, t0 + (k + 1) period) inside the sampled range.
inline std::vector<PeriodExcess> per_period_excess(const std::vector<double>& times,
                                                   const std::vector<double>& value,
                                                   const std::vector<double>& reference, double period,
                                                   double t0 = 0.0) {
  if (times.size() != value.size() || times.size() != reference.size())
    throw MisalignedGrids("per_period_excess: series lengths differ");
  if (!(period > 0.0)) throw InvalidArgument("per_period_excess: period must be positive");
  std::vector<PeriodExcess> out;
  if (times.empty()) return out;
  const double last = times.back();
  for (double start = t0; start + period <= last + 1e-9; start += period) {
    PeriodExcess p;
    p.start = start;
    p.end = start + period;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] < start - 1e-9 || times[i] >= p.end - 1e-9) continue;
      const double d = value[i] - reference[i];
      if (d > p.peak_excess) {
        p.peak_excess = d;
        p.peak_time = times[i];
      }
    }
    out.push_back(p);
  }
  return out;
}

/// Period windows [start + k period, start + (k + 1) period).
struct PeriodWindows {
  double period = 1.0;
  double start = 0.0;
};

/// Windows of a sequence, anchored at its first switch; before it the run
/// coincides with the static run at the starting detuning.
inline PeriodWindows period_windows(const SequenceSpec& spec, double t0 = 0.0) {
  return {spec.period(), t0 + spec.first_dwell()};
}

struct ProtectionReport {
  // Fraction of samples with P_dyn > max(P_A, P_B).
  double exceedance_fraction = 0.0;
  // max_t [P_dyn - max(P_A, P_B)]; negative when never exceeded.
  double peak_excess = 0.0;
  double peak_time = 0.0;
  // Time-averaged fidelity of the dynamic trace over that of each static trace;
  // NaN when the traces carry no fidelity.
  double fidelity_ratio_A = std::numeric_limits<double>::quiet_NaN();
  double fidelity_ratio_B = std::numeric_limits<double>::quiet_NaN();
  // Filled when period windows are given.
  std::vector<PeriodExcess> population_periods;
  std::vector<PeriodExcess> fidelity_periods_vs_A;

  std::size_t periods_exceeding(double threshold = 0.0) const {
    return static_cast<std::size_t>(std::count_if(population_periods.begin(), population_periods.end(),
                                                  [&](const auto& p) { return p.peak_excess > threshold; }));
  }
  double worst_period_excess() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : population_periods) m = std::min(m, p.peak_excess);
    return population_periods.empty() ? -std::numeric_limits<double>::infinity() : m;
  }
};

inline ProtectionReport protection_report(const Trace& static_A, const Trace& static_B, const Trace& dynamic,
                                          std::optional<PeriodWindows> windows = std::nullopt) {
  detail::require_aligned(static_A, dynamic);
  detail::require_aligned(static_B, dynamic);
  ProtectionReport r;
  const std::size_t n = dynamic.samples.size();
  if (n == 0) return r;
  std::vector<double> upper(n);
  std::size_t above = 0;
  r.peak_excess = -std::numeric_limits<double>::infinity();
  double fa = 0.0, fb = 0.0, fd = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    upper[i] = std::max(static_A.samples[i].pop_e(), static_B.samples[i].pop_e());
    const double d = dynamic.samples[i].pop_e() - upper[i];
    if (d > 0.0) ++above;
    if (d > r.peak_excess) {
      r.peak_excess = d;
      r.peak_time = dynamic.samples[i].t;
    }
    fa += static_A.samples[i].fidelity;
    fb += static_B.samples[i].fidelity;
    fd += dynamic.samples[i].fidelity;
  }
  r.exceedance_fraction = static_cast<double>(above) / static_cast<double>(n);
  if (std::isfinite(fd) && std::isfinite(fa) && std::isfinite(fb)) {
    r.fidelity_ratio_A = fd / fa;
    r.fidelity_ratio_B = fd / fb;
  }
  if (windows) {
    const auto t = dynamic.times();
    r.population_periods = per_period_excess(t, dynamic.populations(), upper, windows->period, windows->start);
    if (std::isfinite(fd) && std::isfinite(fa))
      r.fidelity_periods_vs_A = per_period_excess(t, dynamic.fidelities(), static_A.fidelities(),
                                                  windows->period, windows->start);
  }
  return r;
}

/// How far a trace leaves the band spanned by two static traces after `after`.
/// The band is [min, max] of both static populations over t > after.
struct SandwichReport {
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  // Positive values are violations.
  double below_by = 0.0;
  double above_by = 0.0;
};

inline SandwichReport sandwich_report(const Trace& static_A, const Trace& static_B, const Trace& dynamic,
                                      double after) {
  detail::require_aligned(static_A, dynamic);
  detail::require_aligned(static_B, dynamic);
  SandwichReport r;
  r.lower_bound = std::numeric_limits<double>::infinity();
  r.upper_bound = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dynamic.samples.size(); ++i) {
    if (!(dynamic.samples[i].t > after)) continue;
    const double a = static_A.samples[i].pop_e();
    const double b = static_B.samples[i].pop_e();
    r.lower_bound = std::min({r.lower_bound, a, b});
    r.upper_bound = std::max({r.upper_bound, a, b});
    lo = std::min(lo, dynamic.samples[i].pop_e());
    hi = std::max(hi, dynamic.samples[i].pop_e());
  }
  r.below_by = r.lower_bound - lo;
  r.above_by = hi - r.upper_bound;
  return r;
}

// ---------------------------------------------------------------------------
// Dwell tuning

enum class TuningObjective {
  // max over dwells of min_t P_dyn(t).
  MaxMinPopulation,
  // max of the time-averaged fidelity against the initial state.
  MaxTimeAvgFidelity,
  // max of the smallest per-period peak of P_dyn - max(P_A, P_B).
  MaxRecurringExcess,
  // MaxRecurringExcess, restricted to dwells where the reversed order stays
  // below max(P_A, P_B) + reversed_tolerance.
  MaxOrderingContrast,
};

inline const char* to_string(TuningObjective o) {
  switch (o) {
    case TuningObjective::MaxMinPopulation: return "max_min_population";
    case TuningObjective::MaxTimeAvgFidelity: return "max_time_avg_fidelity";
    case TuningObjective::MaxRecurringExcess: return "max_recurring_excess";
    case TuningObjective::MaxOrderingContrast: return "max_ordering_contrast";
  }
  return "unknown";
}

struct DwellGrid {
  std::vector<double> tau_A;
  std::vector<double> tau_B;

  /// lo, lo + step, ... up to hi inclusive, for both dwells.
  static DwellGrid uniform(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw InvalidArgument("dwell grid: bad range");
    DwellGrid g;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) g.tau_A.push_back(lo + static_cast<double>(i) * step);
    g.tau_B = g.tau_A;
    return g;
  }
};

/// Default search grid: dwells 0.5 ... 3 in steps of 0.25 (units of 1/gamma_c).
inline DwellGrid default_dwell_grid(double gamma_c = 1.0) {
  auto g = DwellGrid::uniform(0.5, 3.0, 0.25);
  for (auto* v : {&g.tau_A, &g.tau_B})
    for (auto& x : *v) x /= gamma_c;
  return g;
}

struct TuningOptions {
  // Scores closer than this to the best count as ties.
  double tie_tolerance = 1e-9;
  // Allowed excess of the reversed order (MaxOrderingContrast).
  double reversed_tolerance = 1e-3;
  // Recurring objectives reject dwells with fewer complete period windows.
  std::size_t min_periods = 0;
  DetuningCheck check = DetuningCheck::Strict;
};

struct TuningResult {
  SequenceSpec best;
  double best_score = -std::numeric_limits<double>::infinity();
  std::size_t evaluated = 0;
};

/// max(P_A, P_B) of the static runs at the two detunings of `spec`.
inline std::vector<double> static_upper_envelope(const SequenceSpec& spec, const SystemState& init,
                                                 const DiscretizedContinuum& continuum,
                                                 const PropagationSettings& settings) {
  const auto a = propagate(init, static_schedule(spec, spec.delta_A), continuum, settings);
  const auto b = propagate(init, static_schedule(spec, spec.delta_B), continuum, settings);
  std::vector<double> upper(a.samples.size());
  for (std::size_t i = 0; i < upper.size(); ++i) upper[i] = std::max(a.samples[i].pop_e(), b.samples[i].pop_e());
  return upper;
}

/// Number of complete period windows of `spec` that end by `horizon`.
inline std::size_t complete_periods(const SequenceSpec& spec, double t0, double horizon) {
  const auto w = period_windows(spec, t0);
  if (horizon + 1e-9 < w.start + w.period) return 0;
  return static_cast<std::size_t>(std::floor((horizon - w.start) / w.period + 1e-9));
}

namespace detail {

inline double recurring_score(const Trace& trace, const SequenceSpec& spec, const SystemState& init,
                              const std::vector<double>& upper, std::size_t min_periods) {
  if (upper.size() != trace.samples.size()) throw MisalignedGrids("dwell score: static reference misaligned");
  const auto w = period_windows(spec, init.t);
  const auto periods = per_period_excess(trace.times(), trace.populations(), upper, w.period, w.start);
  if (periods.empty() || periods.size() < min_periods) return -std::numeric_limits<double>::infinity();
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : periods) m = std::min(m, p.peak_excess);
  return m;
}

inline double peak_over(const Trace& trace, const std::vector<double>& upper) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trace.samples.size(); ++i) m = std::max(m, trace.samples[i].pop_e() - upper[i]);
  return m;
}

}  // namespace detail

/// True when the sequence with the opposite order never exceeds `upper` by more
/// than options.reversed_tolerance.
inline bool reversed_order_within(const SequenceSpec& spec, const SystemState& init,
                                  const DiscretizedContinuum& continuum, const PropagationSettings& settings,
                                  const std::vector<double>& upper, const TuningOptions& options) {
  auto reversed = covering(spec, settings.horizon);
  reversed.order = spec.order == SequenceOrder::CounterIntuitive ? SequenceOrder::Intuitive
                                                                 : SequenceOrder::CounterIntuitive;
  const auto other = propagate(init, build_sequence(reversed, options.check), continuum, settings);
  return detail::peak_over(other, upper) <= options.reversed_tolerance;
}

/// Scores one dwell pair on the given initial state. `static_upper` is required
/// by the recurring objectives.
inline double dwell_score(const SequenceSpec& spec, const SystemState& init, const DiscretizedContinuum& continuum,
                          TuningObjective objective, const PropagationSettings& settings,
                          const std::vector<double>* static_upper = nullptr, const TuningOptions& options = {}) {
  const bool recurring = objective == TuningObjective::MaxRecurringExcess ||
                         objective == TuningObjective::MaxOrderingContrast;
  if (recurring && static_upper == nullptr) throw InvalidArgument("dwell_score: static reference missing");
  if (recurring && complete_periods(spec, init.t, settings.horizon) < std::max<std::size_t>(1, options.min_periods))
    return -std::numeric_limits<double>::infinity();
  const auto s = covering(spec, settings.horizon);
  PropagationOptions opt;
  if (objective == TuningObjective::MaxTimeAvgFidelity) opt.reference = init;
  const auto trace = propagate(init, build_sequence(s, options.check), continuum, settings, opt);
  switch (objective) {
    case TuningObjective::MaxMinPopulation: {
      double m = std::numeric_limits<double>::infinity();
      for (const auto& x : trace.samples) m = std::min(m, x.pop_e());
      return m;
    }
    case TuningObjective::MaxTimeAvgFidelity: {
      double sum = 0.0;
      for (const auto& x : trace.samples) sum += x.fidelity;
      return sum / static_cast<double>(trace.samples.size());
    }
    case TuningObjective::MaxRecurringExcess:
      return detail::recurring_score(trace, spec, init, *static_upper, options.min_periods);
    case TuningObjective::MaxOrderingContrast: {
      const double score = detail::recurring_score(trace, spec, init, *static_upper, options.min_periods);
      if (!std::isfinite(score) || !reversed_order_within(spec, init, continuum, settings, *static_upper, options))
        return -std::numeric_limits<double>::infinity();
      return score;
    }
  }
  return -std::numeric_limits<double>::infinity();
}

/// Exhaustive search over the dwell grid. Ties resolve toward smaller tau_A,
/// then smaller tau_B.
inline TuningResult tune_dwells(const SequenceSpec& spec_template, const SystemState& init,
                                const DiscretizedContinuum& continuum, TuningObjective objective,
                                const DwellGrid& grid, const PropagationSettings& settings,
                                const TuningOptions& options = {}) {
  if (grid.tau_A.empty() || grid.tau_B.empty()) throw InvalidArgument("tune_dwells: empty grid");
  std::vector<double> upper;
  if (objective == TuningObjective::MaxRecurringExcess || objective == TuningObjective::MaxOrderingContrast)
    upper = static_upper_envelope(spec_template, init, continuum, settings);
  auto ta = grid.tau_A;
  auto tb = grid.tau_B;
  std::sort(ta.begin(), ta.end());
  std::sort(tb.begin(), tb.end());
  TuningResult result;
  result.best = spec_template;
  result.best.tau_A = ta.front();
  result.best.tau_B = tb.front();
  bool have = false;
  for (double a : ta) {
    for (double b : tb) {
      SequenceSpec s = spec_template;
      s.tau_A = a;
      s.tau_B = b;
      const bool contrast = objective == TuningObjective::MaxOrderingContrast;
      double score = dwell_score(s, init, continuum, contrast ? TuningObjective::MaxRecurringExcess : objective,
                                 settings, &upper, options);
      // The reversed order is only checked for candidates that would win.
      if (contrast && std::isfinite(score) && (!have || score > result.best_score + options.tie_tolerance) &&
          !reversed_order_within(s, init, continuum, settings, upper, options))
        score = -std::numeric_limits<double>::infinity();
      ++result.evaluated;
      if (!have || score > result.best_score + options.tie_tolerance) {
        have = true;
        result.best_score = score;
        result.best = s;
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Gate

/// n_steps conditional phase kicks of pi / n_steps on the excited amplitude, one
/// after every `interleave` detuning switches.
struct GateProtocol {
  std::size_t n_steps = 10;
  std::size_t interleave = 2;

  double phase_per_step() const { return std::numbers::pi / static_cast<double>(n_steps); }
  double total_phase() const { return phase_per_step() * static_cast<double>(n_steps); }
  std::size_t switches_needed() const { return n_steps * interleave; }

  void validate() const {
    if (n_steps == 0) throw InvalidArgument("gate: n_steps must be positive");
    if (interleave == 0) throw InvalidArgument("gate: interleave must be positive");
  }
};

struct GateResult {
  Trace trace;
  // Target fidelity at the first sample at or after end_time.
  double gate_fidelity = 0.0;
  double start_time = 0.0;
  double end_time = 0.0;
  std::vector<double> kick_times;
};

/// Kick instants: right after every `interleave`-th switch of the schedule. A
/// super-Gaussian switch is taken as complete two rise times past its centre.
inline std::vector<double> gate_kick_times(const GateProtocol& protocol, const DetuningSchedule& schedule) {
  protocol.validate();
  const auto switches = schedule.switch_times();
  if (switches.size() < protocol.switches_needed())
    throw ScheduleExhausted("gate needs " + std::to_string(protocol.switches_needed()) +
                            " switches, schedule has " + std::to_string(switches.size()));
  double settle = 0.0;
  if (const auto* sg = std::get_if<SuperGaussianRise>(&schedule.rise)) settle = 2.0 * sg->tau;
  std::vector<double> out;
  for (std::size_t k = 1; k <= protocol.n_steps; ++k) out.push_back(switches[k * protocol.interleave - 1] + settle);
  return out;
}

/// Propagates `init` under build_sequence(spec) with the gate's kicks. The trace
/// carries fidelity against `init` and against the phase-advanced target.
inline GateResult run_gate(const GateProtocol& protocol, const SequenceSpec& spec, const SystemState& init,
                           const DiscretizedContinuum& continuum, const PropagationSettings& settings) {
  const auto schedule = build_sequence(spec);
  GateResult r;
  r.kick_times = gate_kick_times(protocol, schedule);
  r.start_time = r.kick_times.front();
  r.end_time = r.kick_times.back();
  if (r.end_time > settings.horizon)
    throw ScheduleExhausted("gate ends after the propagation horizon");
  PropagationOptions opt;
  opt.reference = init;
  for (double t : r.kick_times) opt.kicks.push_back({t, protocol.phase_per_step()});
  r.trace = propagate(init, schedule, continuum, settings, opt);
  const double end_grid =
      static_cast<double>(detail::to_steps(r.end_time, settings.dt)) * settings.dt;
  for (const auto& s : r.trace.samples) {
    if (s.t >= end_grid - 1e-9) {
      r.gate_fidelity = s.target_fidelity;
      break;
    }
  }
  return r;
}

/// Value of a sampled series at the first sample at or after `t`.
inline double sample_at(const Trace& trace, double t, double TraceSample::*field) {
  for (const auto& s : trace.samples)
    if (s.t >= t - 1e-9) return s.*field;
  throw InvalidArgument("sample_at: time beyond the trace");
}

}  // namespace bandedge
