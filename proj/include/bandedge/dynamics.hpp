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

// Single-excitation dynamics of a qubit coupled to a discrete mode and a
// discretized continuum, under a piecewise (or smoothly switched) program of
// the qubit transition frequency.
//
// Amplitudes live in the frame rotating at the continuum edge omega_U, so every
// frequency enters as an offset from the edge. The equations of motion are
//
//   d alpha/dt   = -i (w_at alpha + kappa_d beta_d + sum_j g_j beta_j)
//   d beta_d/dt  = -i (w_d beta_d + conj(kappa_d) alpha)
//   d beta_j/dt  = -i (w_j beta_j + g_j alpha)
//
// with every w measured from omega_U.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bandedge/error.hpp"
#include "bandedge/spectra.hpp"

namespace bandedge {

using cplx = std::complex<double>;

/// Amplitudes (alpha, beta_d, {beta_j}) of the single-excitation state at time t.
class SystemState {
 public:
  SystemState() : amps_(2) {}
  explicit SystemState(std::size_t n_modes, double time = 0.0) : t(time), amps_(n_modes + 2) {}

  /// |e, {0}>: the excited qubit with an empty field.
  static SystemState excited(std::size_t n_modes) {
    SystemState s(n_modes);
    s.alpha() = 1.0;
    return s;
  }

  /// alpha |e, {0}> + beta_d |g, 1_d>. The pair must be normalized.
  static SystemState superposition(std::size_t n_modes, cplx alpha, cplx beta_d) {
    const double n = std::norm(alpha) + std::norm(beta_d);
    if (std::abs(n - 1.0) > 1e-12)
      throw InvalidArgument("superposition: |alpha|^2 + |beta_d|^2 must equal 1");
    SystemState s(n_modes);
    s.alpha() = alpha;
    s.beta_d() = beta_d;
    return s;
  }

  double t = 0.0;

  cplx& alpha() { return amps_[0]; }
  const cplx& alpha() const { return amps_[0]; }
  cplx& beta_d() { return amps_[1]; }
  const cplx& beta_d() const { return amps_[1]; }
  std::span<cplx> beta() { return std::span<cplx>(amps_).subspan(2); }
  std::span<const cplx> beta() const { return std::span<const cplx>(amps_).subspan(2); }

  /// Layout [alpha, beta_d, beta_0, ..., beta_{n-1}].
  std::span<cplx> amplitudes() { return amps_; }
  std::span<const cplx> amplitudes() const { return amps_; }

  std::size_t n_modes() const { return amps_.size() - 2; }

  /// Squared norm N = |alpha|^2 + |beta_d|^2 + sum_j |beta_j|^2.
  double norm() const {
    double n = 0.0;
    for (const auto& a : amps_) n += std::norm(a);
    return n;
  }

  double continuum_population() const {
    double n = 0.0;
    for (const auto& b : beta()) n += std::norm(b);
    return n;
  }

 private:
  std::vector<cplx> amps_;
};

/// <a|b> over the full amplitude vector.
inline cplx inner_product(const SystemState& a, const SystemState& b) {
  if (a.n_modes() != b.n_modes()) throw InvalidArgument("inner_product: dimension mismatch");
  cplx sum = 0.0;
  const auto x = a.amplitudes();
  const auto y = b.amplitudes();
  for (std::size_t i = 0; i < x.size(); ++i) sum += std::conj(x[i]) * y[i];
  return sum;
}

struct DiscreteMode {
  double omega_d = 0.0;
  cplx kappa_d = 0.0;
};

struct Segment {
  double duration = 0.0;
  // Delta = omega_U - omega_at held during the segment.
  double detuning = 0.0;
};

struct SuddenRise {};

/// Switches shaped by exp[-((t - t_n)/tau)^exponent] around each switch t_n.
struct SuperGaussianRise {
  double tau = 0.0;
  int exponent = 8;
};

using RiseProfile = std::variant<SuddenRise, SuperGaussianRise>;

/// Piecewise program of the detuning. The last segment's detuning is held
/// past the end of the program.
struct DetuningSchedule {
  std::vector<Segment> segments;
  RiseProfile rise = SuddenRise{};
  DiscreteMode discrete_mode;

  static DetuningSchedule constant(double detuning, DiscreteMode mode = {}) {
    return {{{1.0, detuning}}, SuddenRise{}, mode};
  }

  bool is_sudden() const { return std::holds_alternative<SuddenRise>(rise); }

  double duration() const {
    double sum = 0.0;
    for (const auto& s : segments) sum += s.duration;
    return sum;
  }

  /// Instants at which the detuning changes (segment boundaries, end excluded).
  std::vector<double> switch_times() const {
    std::vector<double> out;
    double t = 0.0;
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
      t += segments[i].duration;
      out.push_back(t);
    }
    return out;
  }

  /// Detuning under sudden switching; a boundary belongs to the later segment.
  double detuning_at(double t) const {
    double end = 0.0;
    for (const auto& s : segments) {
      end += s.duration;
      if (t < end) return s.detuning;
    }
    return segments.back().detuning;
  }

  void validate() const {
    if (segments.empty()) throw InvalidArgument("schedule: at least one segment required");
    for (const auto& s : segments) {
      if (!(s.duration > 0.0) || !std::isfinite(s.duration))
        throw InvalidArgument("schedule: segment durations must be positive");
      if (!std::isfinite(s.detuning)) throw InvalidArgument("schedule: detuning must be finite");
    }
    if (const auto* sg = std::get_if<SuperGaussianRise>(&rise)) {
      if (!(sg->tau > 0.0)) throw InvalidArgument("schedule: rise tau must be positive");
      if (sg->exponent < 2 || sg->exponent % 2 != 0)
        throw InvalidArgument("schedule: rise exponent must be a positive even integer");
      for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
        if (!(sg->tau < 0.5 * segments[i].duration))
          throw InvalidArgument("schedule: rise tau must be below half of every switched segment");
      }
    }
  }
};

namespace detail {

// Smooth step through 1/2 at u = 0, built from the super-Gaussian exp(-u^p).
inline double super_gaussian_step(double u, int exponent) {
  const double tail = 0.5 * std::exp(-std::pow(std::abs(u), exponent));
  return u >= 0.0 ? 1.0 - tail : tail;
}

}  // namespace detail

/// Detuning Delta(t) under super-Gaussian switching. Each switch at t_n moves
/// the detuning from the old to the new segment value through the midpoint at
/// t = t_n, with half-width tau; beyond a few tau the segment value is exact.
inline double pulse_profile(double t, const DetuningSchedule& schedule) {
  const auto* sg = std::get_if<SuperGaussianRise>(&schedule.rise);
  if (sg == nullptr) throw InvalidArgument("pulse_profile: schedule uses sudden switching");
  if (schedule.segments.empty()) throw InvalidArgument("pulse_profile: empty schedule");
  double value = schedule.segments.front().detuning;
  double boundary = 0.0;
  for (std::size_t i = 0; i + 1 < schedule.segments.size(); ++i) {
    boundary += schedule.segments[i].duration;
    const double jump = schedule.segments[i + 1].detuning - schedule.segments[i].detuning;
    value += jump * detail::super_gaussian_step((t - boundary) / sg->tau, sg->exponent);
  }
  return value;
}

/// Time derivative of the amplitude vector, layout as SystemState::amplitudes().
///
/// `omega_at` and `omega_d` are absolute frequencies; the derivative is taken
/// in the frame rotating at the continuum edge of `continuum.model`.
inline std::vector<cplx> derivative(const SystemState& state, double omega_at,
                                    const DiscretizedContinuum& continuum, double omega_d,
                                    cplx kappa_d) {
  const std::size_t n = continuum.n_modes();
  if (state.n_modes() != n) throw InvalidArgument("derivative: state and continuum lengths differ");
  const double edge = continuum.model.omega_U;
  const auto y = state.amplitudes();
  std::vector<cplx> dy(y.size());
  const cplx minus_i(0.0, -1.0);
  cplx acc = (omega_at - edge) * y[0] + kappa_d * y[1];
  for (std::size_t j = 0; j < n; ++j) {
    acc += continuum.coupling[j] * y[j + 2];
    dy[j + 2] = minus_i * ((continuum.omega[j] - edge) * y[j + 2] + continuum.coupling[j] * y[0]);
  }
  dy[0] = minus_i * acc;
  dy[1] = minus_i * ((omega_d - edge) * y[1] + std::conj(kappa_d) * y[0]);
  return dy;
}

/// Fixed-step integration settings. Times are absolute; `horizon` is the end time.
struct PropagationSettings {
  double dt = 2e-3;
  double horizon = 30.0;
  double sampling = 0.01;
  double norm_tolerance = 1e-6;

  /// Defaults expressed in units of 1/gamma_c.
  static PropagationSettings defaults(double gamma_c) {
    return {2e-3 / gamma_c, 30.0 / gamma_c, 0.01 / gamma_c, 1e-6};
  }
};

/// Instantaneous phase kick alpha -> alpha exp(i phase) at `time`.
struct PhaseKick {
  double time = 0.0;
  double phase = 0.0;
};

struct TraceSample {
  double t = 0.0;
  cplx alpha;
  cplx beta_d;
  double pop_continuum = 0.0;
  double norm = 0.0;
  // |<reference|state>|^2; NaN when no reference was supplied.
  double fidelity = std::numeric_limits<double>::quiet_NaN();
  // Fidelity against the reference with alpha advanced by the kick phase
  // applied so far.
  double target_fidelity = std::numeric_limits<double>::quiet_NaN();
  double applied_phase = 0.0;

  double pop_e() const { return std::norm(alpha); }
  double pop_d() const { return std::norm(beta_d); }
};

struct TraceMetadata {
  SpectrumModel spectrum;
  std::size_t n_modes = 0;
  DetuningSchedule schedule;
  PropagationSettings settings;
  std::size_t kicks_applied = 0;
  double total_kick_phase = 0.0;
};

struct Trace {
  std::vector<TraceSample> samples;
  SystemState final_state;
  TraceMetadata metadata;

  std::vector<double> times() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.t);
    return out;
  }
  std::vector<double> populations() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.pop_e());
    return out;
  }
  std::vector<double> fidelities() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.fidelity);
    return out;
  }
  std::vector<double> target_fidelities() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.target_fidelity);
    return out;
  }
  double max_norm_drift() const {
    double drift = 0.0;
    for (const auto& s : samples) drift = std::max(drift, std::abs(s.norm - 1.0));
    return drift;
  }
};

struct PropagationOptions {
  std::optional<SystemState> reference;
  std::vector<PhaseKick> kicks;
  // Called with the state at every sample instant.
  std::function<void(const SystemState&)> observer;
};

namespace detail {

inline std::int64_t to_steps(double time, double dt) {
  return static_cast<std::int64_t>(std::llround(time / dt));
}

// Integrates the amplitude equations with the classical fourth-order
// Runge-Kutta scheme on a fixed grid of absolute times k * dt.
class Rk4Integrator {
 public:
  Rk4Integrator(const DiscretizedContinuum& continuum, const DiscreteMode& mode)
      : n_(continuum.n_modes()),
        coupling_(continuum.coupling),
        kappa_d_(mode.kappa_d),
        mode_offset_(mode.omega_d - continuum.model.omega_U) {
    offset_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) offset_[j] = continuum.omega[j] - continuum.model.omega_U;
    for (auto* buf : {&k1_, &k2_, &k3_, &k4_, &tmp_}) buf->assign(n_ + 2, cplx{});
  }

  // Advances y by dt; the atomic offset w_at - omega_U is sampled at the
  // start, midpoint and end of the step.
  void step(std::span<cplx> y, double dt, double at_start, double at_mid, double at_end) {
    eval(y, k1_, at_start);
    axpy(y, k1_, 0.5 * dt);
    eval(tmp_, k2_, at_mid);
    axpy(y, k2_, 0.5 * dt);
    eval(tmp_, k3_, at_mid);
    axpy(y, k3_, dt);
    eval(tmp_, k4_, at_end);
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] += w * (k1_[i] + 2.0 * (k2_[i] + k3_[i]) + k4_[i]);
  }

 private:
  static cplx times_minus_i(cplx z) { return {z.imag(), -z.real()}; }

  void axpy(std::span<const cplx> y, const std::vector<cplx>& k, double h) {
    for (std::size_t i = 0; i < y.size(); ++i) tmp_[i] = y[i] + h * k[i];
  }

  void eval(std::span<const cplx> y, std::vector<cplx>& dy, double atom_offset) {
    const cplx a = y[0];
    cplx acc = atom_offset * a + kappa_d_ * y[1];
    const double* off = offset_.data();
    const double* g = coupling_.data();
    const cplx* b = y.data() + 2;
    cplx* db = dy.data() + 2;
    for (std::size_t j = 0; j < n_; ++j) {
      acc += g[j] * b[j];
      db[j] = times_minus_i(off[j] * b[j] + g[j] * a);
    }
    dy[0] = times_minus_i(acc);
    dy[1] = times_minus_i(mode_offset_ * y[1] + std::conj(kappa_d_) * a);
  }

  std::size_t n_;
  std::vector<double> offset_;
  std::vector<double> coupling_;
  cplx kappa_d_;
  double mode_offset_;
  std::vector<cplx> k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace detail

/// Integrates from init.t to settings.horizon under the schedule.
///
/// Sudden switches snap to the nearest grid point and the amplitudes carry over
/// continuously across them. Super-Gaussian switches are sampled inside each
/// step. Samples are taken at init.t and every `sampling` thereafter. Throws
/// IntegrationDiverged when the norm drifts by more than 10x norm_tolerance.
inline Trace propagate(const SystemState& init, const DetuningSchedule& schedule,
                       const DiscretizedContinuum& continuum, const PropagationSettings& settings,
                       const PropagationOptions& options = {}) {
  if (!(settings.dt > 0.0)) throw InvalidArgument("propagate: dt must be positive");
  if (settings.dt > settings.sampling * (1.0 + 1e-12))
    throw InvalidArgument("propagate: dt must not exceed the sampling interval");
  if (init.n_modes() != continuum.n_modes())
    throw InvalidArgument("propagate: state and continuum lengths differ");
  if (options.reference && options.reference->n_modes() != init.n_modes())
    throw InvalidArgument("propagate: reference dimension mismatch");
  schedule.validate();

  const double dt = settings.dt;
  const std::int64_t k_start = detail::to_steps(init.t, dt);
  const std::int64_t k_end = detail::to_steps(settings.horizon, dt);
  const std::int64_t every = std::max<std::int64_t>(1, detail::to_steps(settings.sampling, dt));
  if (k_end < k_start) throw InvalidArgument("propagate: horizon precedes the initial time");

  // Segment boundaries in steps, for sudden switching.
  std::vector<std::int64_t> boundary_steps;
  {
    double t = 0.0;
    for (std::size_t i = 0; i + 1 < schedule.segments.size(); ++i) {
      t += schedule.segments[i].duration;
      boundary_steps.push_back(detail::to_steps(t, dt));
    }
  }
  const bool sudden = schedule.is_sudden();
  // Atomic offset w_at - omega_U = -Delta.
  auto smooth_offset = [&](double t) { return -pulse_profile(t, schedule); };

  std::vector<std::pair<std::int64_t, double>> kicks;
  for (const auto& k : options.kicks) kicks.emplace_back(detail::to_steps(k.time, dt), k.phase);
  std::sort(kicks.begin(), kicks.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t next_kick = 0;
  double applied_phase = 0.0;
  std::size_t kicks_applied = 0;

  Trace trace;
  trace.metadata = {continuum.model, continuum.n_modes(), schedule, settings, 0, 0.0};
  trace.samples.reserve(static_cast<std::size_t>((k_end - k_start) / every + 2));

  SystemState state = init;
  state.t = static_cast<double>(k_start) * dt;
  const double norm0 = state.norm();
  const double divergence = 10.0 * settings.norm_tolerance;
  detail::Rk4Integrator rk(continuum, schedule.discrete_mode);

  auto apply_kicks = [&](std::int64_t k) {
    while (next_kick < kicks.size() && kicks[next_kick].first <= k) {
      state.alpha() *= std::polar(1.0, kicks[next_kick].second);
      applied_phase += kicks[next_kick].second;
      ++kicks_applied;
      ++next_kick;
    }
  };

  auto record = [&]() {
    TraceSample s;
    s.t = state.t;
    s.alpha = state.alpha();
    s.beta_d = state.beta_d();
    s.pop_continuum = state.continuum_population();
    s.norm = std::norm(s.alpha) + std::norm(s.beta_d) + s.pop_continuum;
    s.applied_phase = applied_phase;
    if (options.reference) {
      const auto& ref = *options.reference;
      const cplx overlap = inner_product(ref, state);
      s.fidelity = std::norm(overlap);
      const cplx rotated =
          overlap + (std::polar(1.0, -applied_phase) - 1.0) * std::conj(ref.alpha()) * state.alpha();
      s.target_fidelity = std::norm(rotated);
    }
    const double drift = std::abs(s.norm - norm0);
    if (!(drift <= divergence)) throw IntegrationDiverged(state.t, drift);
    trace.samples.push_back(s);
    if (options.observer) options.observer(state);
  };

  std::size_t segment = 0;
  auto sudden_offset = [&](std::int64_t k) {
    while (segment < boundary_steps.size() && k >= boundary_steps[segment]) ++segment;
    return -schedule.segments[segment].detuning;
  };
  // Resynchronize the segment cursor for a late start.
  if (sudden) (void)sudden_offset(k_start);

  apply_kicks(k_start);
  record();
  for (std::int64_t k = k_start; k < k_end; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (sudden) {
      const double off = sudden_offset(k);
      rk.step(state.amplitudes(), dt, off, off, off);
    } else {
      rk.step(state.amplitudes(), dt, smooth_offset(t), smooth_offset(t + 0.5 * dt),
              smooth_offset(t + dt));
    }
    state.t = static_cast<double>(k + 1) * dt;
    apply_kicks(k + 1);
    if ((k + 1 - k_start) % every == 0) record();
  }
  trace.final_state = std::move(state);
  trace.metadata.kicks_applied = kicks_applied;
  trace.metadata.total_kick_phase = applied_phase;
  return trace;
}

struct Observables {
  double population = 0.0;
  // e-g coherence proxy alpha * conj(beta_d).
  cplx coherence;
  double fidelity = 0.0;
};

/// Population, coherence proxy, and |<reference|state>|^2 (rotating frame).
inline Observables observables(const SystemState& state, const SystemState& reference) {
  if (state.n_modes() != reference.n_modes())
    throw InvalidArgument("observables: dimension mismatch");
  return {std::norm(state.alpha()), state.alpha() * std::conj(state.beta_d()),
          std::norm(inner_product(reference, state))};
}

/// Excited amplitude after a single switch A -> B at tau, obtained by restarting
/// the integration from the switched state, and by composing stored static
/// B-evolutions of |e, {0}> with the amplitudes reached at tau:
///
///   alpha(t) = alpha_A(tau) alpha_B(t - tau) + beta_dA(tau) beta_dB(t - tau)
///              + sum_j beta_jA(tau) beta_jB(t - tau).
struct CompositionReport {
  std::vector<double> times;
  std::vector<cplx> restart_alpha;
  std::vector<cplx> composed_alpha;
  double max_discrepancy = 0.0;
  double at_time = 0.0;
};

inline CompositionReport composition_check(double tau, double delta_A, double delta_B,
                                           const DiscretizedContinuum& continuum,
                                           const PropagationSettings& settings,
                                           DiscreteMode mode = {}) {
  if (!(tau > 0.0) || !(tau < settings.horizon))
    throw InvalidArgument("composition_check: tau must lie inside (0, horizon)");
  const std::size_t n = continuum.n_modes();
  const double dt = settings.dt;
  const double tau_grid = static_cast<double>(detail::to_steps(tau, dt)) * dt;

  PropagationSettings to_switch = settings;
  to_switch.horizon = tau_grid;
  to_switch.sampling = std::max(settings.sampling, dt);
  const auto at_switch = propagate(SystemState::excited(n), DetuningSchedule::constant(delta_A, mode),
                                   continuum, to_switch)
                             .final_state;

  CompositionReport report;
  PropagationOptions restart;
  restart.observer = [&](const SystemState& s) {
    report.times.push_back(s.t);
    report.restart_alpha.push_back(s.alpha());
  };
  propagate(at_switch, DetuningSchedule::constant(delta_B, mode), continuum, settings, restart);

  PropagationSettings static_b = settings;
  static_b.horizon = settings.horizon - tau_grid;
  PropagationOptions compose;
  compose.observer = [&](const SystemState& b) {
    cplx sum = at_switch.alpha() * b.alpha() + at_switch.beta_d() * b.beta_d();
    const auto from = at_switch.beta();
    const auto to = b.beta();
    for (std::size_t j = 0; j < n; ++j) sum += from[j] * to[j];
    report.composed_alpha.push_back(sum);
  };
  propagate(SystemState::excited(n), DetuningSchedule::constant(delta_B, mode), continuum, static_b,
            compose);

  const std::size_t m = std::min(report.restart_alpha.size(), report.composed_alpha.size());
  report.times.resize(m);
  report.restart_alpha.resize(m);
  report.composed_alpha.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double d = std::abs(report.restart_alpha[i] - report.composed_alpha[i]);
    if (d > report.max_discrepancy) {
      report.max_discrepancy = d;
      report.at_time = report.times[i];
    }
  }
  return report;
}

}  // namespace bandedge
