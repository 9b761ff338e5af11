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

// Weak-coupling cross-checks: the convolution rate
//
//   R = 2 pi Int F_t(w) G(w) dw,
//
// with F_t the modulation spectrum of the qubit over a window t, against
// rates fitted to propagated traces.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bandedge/dynamics.hpp"
#include "bandedge/error.hpp"
#include "bandedge/spectra.hpp"

namespace bandedge {

/// Spectral intensity F(w) on an ascending frequency grid, linear in between.
struct ModulationSpectrum {
  std::vector<double> omega;
  std::vector<double> intensity;

  /// Normalized Gaussian peak of the given width at `center`, sampled over
  /// +-8 widths.
  static ModulationSpectrum unmodulated(double center, double width, std::size_t n = 801) {
    if (!(width > 0.0) || n < 3) throw InvalidArgument("unmodulated spectrum: bad width or size");
    ModulationSpectrum f;
    const double norm = 1.0 / (width * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t i = 0; i < n; ++i) {
      const double u = -8.0 + 16.0 * static_cast<double>(i) / static_cast<double>(n - 1);
      f.omega.push_back(center + u * width);
      f.intensity.push_back(norm * std::exp(-0.5 * u * u));
    }
    return f;
  }

  /// Trapezoid integral of F over its grid.
  double total_power() const {
    double sum = 0.0;
    for (std::size_t i = 1; i < omega.size(); ++i)
      sum += 0.5 * (intensity[i] + intensity[i - 1]) * (omega[i] - omega[i - 1]);
    return sum;
  }

  double at(double w) const {
    if (omega.empty() || w < omega.front() || w > omega.back()) return 0.0;
    const auto it = std::upper_bound(omega.begin(), omega.end(), w);
    if (it == omega.end()) return intensity.back();
    const auto i = static_cast<std::size_t>(it - omega.begin());
    const double s = (w - omega[i - 1]) / (omega[i] - omega[i - 1]);
    return intensity[i - 1] + s * (intensity[i] - intensity[i - 1]);
  }

  void validate() const {
    if (omega.size() < 2 || omega.size() != intensity.size())
      throw InvalidArgument("modulation spectrum: grid and intensity sizes differ or are too small");
    for (std::size_t i = 0; i < omega.size(); ++i) {
      if (i > 0 && !(omega[i] > omega[i - 1]))
        throw InvalidArgument("modulation spectrum: grid must be strictly ascending");
      if (!(intensity[i] >= 0.0)) throw InvalidArgument("modulation spectrum: intensity must be non-negative");
    }
  }
};

/// F_t(w) = |Int_0^t e(s) e^{i w s} ds|^2 / (2 pi t) of the phase factor
/// e(s) = exp(-i Int_0^s omega_at) of a schedule, on an ascending grid of
/// absolute frequencies. `dt` is the time step of the trapezoid rule.
inline ModulationSpectrum modulation_spectrum(const DetuningSchedule& schedule, double omega_U, double window,
                                              std::vector<double> grid, double dt = 1e-2) {
  schedule.validate();
  if (!(window > 0.0) || !(dt > 0.0)) throw InvalidArgument("modulation_spectrum: window and dt must be positive");
  const auto steps = static_cast<std::size_t>(std::ceil(window / dt));
  const double h = window / static_cast<double>(steps);
  auto omega_at = [&](double t) {
    return omega_U - (schedule.is_sudden() ? schedule.detuning_at(t) : pulse_profile(t, schedule));
  };
  // Phase at the nodes, by the midpoint rule between them.
  std::vector<double> phase(steps + 1, 0.0);
  for (std::size_t k = 1; k <= steps; ++k)
    phase[k] = phase[k - 1] + h * omega_at((static_cast<double>(k) - 0.5) * h);
  ModulationSpectrum f;
  f.omega = std::move(grid);
  f.intensity.resize(f.omega.size());
  for (std::size_t i = 0; i < f.omega.size(); ++i) {
    const double w = f.omega[i];
    std::complex<double> sum = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) {
      const double weight = (k == 0 || k == steps) ? 0.5 : 1.0;
      sum += weight * std::polar(1.0, w * static_cast<double>(k) * h - phase[k]);
    }
    sum *= h;
    f.intensity[i] = std::norm(sum) / (2.0 * std::numbers::pi * window);
  }
  f.validate();
  return f;
}

/// Uniform frequency grid of n points on [lo, hi].
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw InvalidArgument("uniform_grid: bad range");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

namespace detail {

inline std::pair<double, double> band_support(const SpectrumModel& model) {
  if (model.kind == SpectrumKind::Tabulated) return {model.table.front().first, model.table.back().first};
  return {model.omega_U, model.band_top()};
}

}  // namespace detail

/// R = 2 pi Int F(w) G(w) dw, F linear between its nodes and zero outside.
///
/// A spectrum whose grid ends inside the band while F is still non-negligible
/// there does not cover the band; that raises CoverageError.
inline double convolution_rate(const ModulationSpectrum& F, const SpectrumModel& model) {
  model.validate();
  if (F.omega.size() < 2) throw CoverageError("modulation spectrum grid is empty");
  F.validate();
  const auto [lo, hi] = detail::band_support(model);
  const double peak = *std::max_element(F.intensity.begin(), F.intensity.end());
  const double negligible = 1e-10 * peak;
  if (F.omega.front() > lo && F.intensity.front() > negligible)
    throw CoverageError("modulation spectrum grid starts inside the band");
  if (F.omega.back() < hi && F.intensity.back() > negligible)
    throw CoverageError("modulation spectrum grid ends inside the band");

  using boost::math::quadrature::gauss_kronrod;
  double sum = 0.0;
  for (std::size_t i = 1; i < F.omega.size(); ++i) {
    const double a = std::max(F.omega[i - 1], lo);
    const double b = std::min(F.omega[i], hi);
    if (!(b > a)) continue;
    const double w0 = F.omega[i - 1], w1 = F.omega[i];
    const double f0 = F.intensity[i - 1], f1 = F.intensity[i];
    if (f0 == 0.0 && f1 == 0.0) continue;
    auto lin = [=](double w) { return f0 + (f1 - f0) * (w - w0) / (w1 - w0); };
    if (model.is_edge()) {
      // w = omega_U + x^2 removes the edge singularity.
      auto integrand = [&](double x) {
        const double w = model.omega_U + x * x;
        return 2.0 * x * coupling_spectrum(model, w) * lin(w);
      };
      const double xa = std::sqrt(std::max(0.0, a - model.omega_U));
      const double xb = std::sqrt(std::max(0.0, b - model.omega_U));
      sum += gauss_kronrod<double, 15>::integrate(integrand, xa, xb, 0, 1e-12);
    } else {
      auto integrand = [&](double w) { return coupling_spectrum(model, w) * lin(w); };
      sum += gauss_kronrod<double, 15>::integrate(integrand, a, b, 0, 1e-12);
    }
  }
  return 2.0 * std::numbers::pi * sum;
}

/// Decay rate from a least-squares line through log P over the samples where P
/// falls from `upper` to `lower`; nullopt when P never reaches `lower` or the
/// window holds fewer than three samples.
inline std::optional<double> fit_decay_rate(const std::vector<double>& times, const std::vector<double>& pops,
                                            double upper = 0.9, double lower = 0.5) {
  if (times.size() != pops.size()) throw InvalidArgument("fit_decay_rate: series lengths differ");
  std::size_t begin = 0;
  while (begin < pops.size() && pops[begin] > upper) ++begin;
  std::size_t end = begin;
  while (end < pops.size() && pops[end] > lower) ++end;
  if (end >= pops.size() || end - begin < 3) return std::nullopt;
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  const auto n = static_cast<double>(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    const double y = std::log(pops[i]);
    st += times[i];
    sy += y;
    stt += times[i] * times[i];
    sty += times[i] * y;
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  return -slope;
}

struct RegimeComparison {
  // Qubit frequency above the edge; omega_at = omega_U + distance.
  double distance = 0.0;
  double formula_rate = 0.0;
  std::optional<double> fitted_rate;
  // |fitted - formula| / formula; NaN without a fit.
  double relative_error = std::numeric_limits<double>::quiet_NaN();
  // Mean of P over the last 20% of the trace.
  double plateau = 0.0;
  // exp(-formula_rate t_end).
  double predicted_final = 0.0;
  // No fit window, or a plateau well above the exponential prediction.
  bool disagrees = false;
};

/// Propagates |e, {0}> with the qubit `distance` above the edge and compares
/// with the unmodulated convolution rate (a Gaussian peak of width
/// `peak_width` at the qubit frequency).
inline RegimeComparison compare_regimes(const SpectrumModel& model, const DiscretizedContinuum& continuum,
                                        double distance, const PropagationSettings& settings,
                                        double peak_width = 1e-3) {
  RegimeComparison r;
  r.distance = distance;
  const double w_at = model.omega_U + distance;
  r.formula_rate = convolution_rate(ModulationSpectrum::unmodulated(w_at, peak_width * model.gamma_c), model);
  const auto trace = propagate(SystemState::excited(continuum.n_modes()), DetuningSchedule::constant(-distance),
                               continuum, settings);
  const auto t = trace.times();
  const auto p = trace.populations();
  r.fitted_rate = fit_decay_rate(t, p);
  if (r.fitted_rate && r.formula_rate > 0.0)
    r.relative_error = std::abs(*r.fitted_rate - r.formula_rate) / r.formula_rate;
  const std::size_t from = p.size() * 4 / 5;
  for (std::size_t i = from; i < p.size(); ++i) r.plateau += p[i];
  r.plateau /= static_cast<double>(p.size() - from);
  r.predicted_final = std::exp(-r.formula_rate * (t.back() - t.front()));
  r.disagrees = !r.fitted_rate || r.plateau > std::max(0.05, 10.0 * r.predicted_final);
  return r;
}

}  // namespace bandedge
