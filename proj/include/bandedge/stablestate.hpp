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

// The dressed state in the gap: its energy omega_0 below the edge, its weight
// C, and its eigenfunction on a discretized continuum.
//
//   pole:   omega_0 = omega_at + |kappa_d|^2/(omega_0 - omega_d)
//                               + Int G(w)/(omega_0 - w) dw
//   weight: C = [1 + |kappa_d|^2/(omega_0 - omega_d)^2 + Int G(w)/(w - omega_0)^2 dw]^{-1}
//
// The kappa_d terms vanish for an uncoupled discrete mode, which recovers the
// continuum-only form.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "bandedge/dynamics.hpp"
#include "bandedge/error.hpp"
#include "bandedge/spectra.hpp"

namespace bandedge {

/// Depth of the pole bracket below the edge, in units of gamma_c.
inline constexpr double kPoleBracketDepth = 1e3;

namespace detail {

// Lower end of the band support (the edge for analytic kinds).
inline double band_bottom(const SpectrumModel& model) {
  return model.kind == SpectrumKind::Tabulated ? model.table.front().first : model.omega_U;
}

// Level shift Int G(w)/(z - w) dw for z below the band.
inline double level_shift(const SpectrumModel& model, double z) {
  return band_quadrature(model, [z](double w) { return 1.0 / (z - w); });
}

// Int G(w)/(w - z)^2 dw for z below the band.
inline double shift_slope(const SpectrumModel& model, double z) {
  return band_quadrature(model, [z](double w) {
    const double d = w - z;
    return 1.0 / (d * d);
  });
}

inline double pole_residual(const SpectrumModel& model, double omega_at, cplx kappa_d,
                            double omega_d, double z) {
  double r = z - omega_at - level_shift(model, z);
  if (kappa_d != 0.0) r -= std::norm(kappa_d) / (z - omega_d);
  return r;
}

// Bisection on [lo, hi]; nullopt without a sign change.
template <typename F>
std::optional<double> bisect_root(F&& f, double lo, double hi) {
  const double flo = f(lo);
  const double fhi = f(hi);
  if (!(flo < 0.0 && fhi > 0.0)) return std::nullopt;
  std::uintmax_t max_iter = 200;
  const auto [a, b] =
      boost::math::tools::bisect(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), max_iter);
  return 0.5 * (a + b);
}

}  // namespace detail

/// Residual of the pole equation at `omega_0`; increasing in omega_0 on every
/// interval below the band that excludes omega_d.
inline double pole_equation(const SpectrumModel& model, double delta_at, double omega_0,
                            cplx kappa_d = 0.0, double omega_d = 0.0) {
  return detail::pole_residual(model, model.omega_U - delta_at, kappa_d, omega_d, omega_0);
}

/// Coupling-only weight C at a trial energy below the band.
inline double stable_weight(const SpectrumModel& model, double omega_0, cplx kappa_d = 0.0,
                            double omega_d = 0.0) {
  model.validate();
  if (!(omega_0 < detail::band_bottom(model)))
    throw InvalidArgument("stable_weight: omega_0 must lie below the band");
  double denom = 1.0 + detail::shift_slope(model, omega_0);
  if (kappa_d != 0.0) {
    const double d = omega_0 - omega_d;
    denom += std::norm(kappa_d) / (d * d);
  }
  return 1.0 / denom;
}

/// Finds the dressed-state energy omega_0 below the edge by bisection on
/// (omega_U - 1e3 gamma_c, omega_U).
///
/// With kappa_d != 0 and omega_d inside the bracket, the discrete mode splits the
/// bracket and each side may hold a root; the root with the larger weight C is
/// returned. Throws NoBoundState when no bracket changes sign.
inline double find_pole(const SpectrumModel& model, double delta_at, cplx kappa_d = 0.0,
                        double omega_d = 0.0) {
  model.validate();
  if (!std::isfinite(delta_at)) throw InvalidArgument("find_pole: detuning must be finite");
  const double omega_at = model.omega_U - delta_at;
  const double top = detail::band_bottom(model);
  const double lo = top - kPoleBracketDepth * model.gamma_c;
  const double hi = top - 1e-12 * model.gamma_c;
  auto f = [&](double z) { return detail::pole_residual(model, omega_at, kappa_d, omega_d, z); };

  std::vector<std::pair<double, double>> brackets;
  if (kappa_d != 0.0 && omega_d > lo && omega_d < hi) {
    const double gap = 1e-12 * std::max(1.0, std::abs(omega_d));
    brackets = {{lo, omega_d - gap}, {omega_d + gap, hi}};
  } else {
    brackets = {{lo, hi}};
  }
  std::optional<double> best;
  double best_weight = -1.0;
  for (const auto& [a, b] : brackets) {
    if (!(a < b)) continue;
    if (auto root = detail::bisect_root(f, a, b)) {
      const double w = stable_weight(model, *root, kappa_d, omega_d);
      if (w > best_weight) {
        best_weight = w;
        best = root;
      }
    }
  }
  if (!best) throw NoBoundState("no bound state below the band edge for this detuning");
  return *best;
}

/// The normalized dressed state on a discretized continuum.
struct StableStateInfo {
  double omega_0 = 0.0;
  // Weight from the continuum quadrature.
  double C = 1.0;
  // Excited component; C^{1/2} up to grid renormalization.
  double alpha_s = 1.0;
  cplx discrete_amp;
  std::vector<cplx> mode_amps;

  SystemState as_state() const {
    SystemState s(mode_amps.size());
    s.alpha() = alpha_s;
    s.beta_d() = discrete_amp;
    std::copy(mode_amps.begin(), mode_amps.end(), s.beta().begin());
    return s;
  }
};

/// Builds |psi_0> = C^{1/2} (|e> - sum_j g_j/(w_j - omega_0) |g, 1_j> - ...)
/// on the grid, then renormalizes it over the grid.
inline StableStateInfo stable_eigenfunction(const SpectrumModel& model, double omega_0,
                                            const DiscretizedContinuum& continuum,
                                            cplx kappa_d = 0.0, double omega_d = 0.0) {
  StableStateInfo info;
  info.omega_0 = omega_0;
  info.C = stable_weight(model, omega_0, kappa_d, omega_d);
  const double root_c = std::sqrt(info.C);
  info.mode_amps.resize(continuum.n_modes());
  double norm = info.C;
  for (std::size_t j = 0; j < continuum.n_modes(); ++j) {
    const cplx amp = -root_c * continuum.coupling[j] / (continuum.omega[j] - omega_0);
    info.mode_amps[j] = amp;
    norm += std::norm(amp);
  }
  if (kappa_d != 0.0) {
    info.discrete_amp = -root_c * std::conj(kappa_d) / (omega_d - omega_0);
    norm += std::norm(info.discrete_amp);
  }
  const double scale = 1.0 / std::sqrt(norm);
  info.alpha_s = root_c * scale;
  info.discrete_amp *= scale;
  for (auto& a : info.mode_amps) a *= scale;
  return info;
}

/// Pole, weight and eigenfunction in one call.
inline StableStateInfo stable_state(const SpectrumModel& model, double delta_at,
                                    const DiscretizedContinuum& continuum, cplx kappa_d = 0.0,
                                    double omega_d = 0.0) {
  const double omega_0 = find_pole(model, delta_at, kappa_d, omega_d);
  return stable_eigenfunction(model, omega_0, continuum, kappa_d, omega_d);
}

struct Decomposition {
  // <psi_0|state>
  cplx stable_part;
  // || state - stable_part |psi_0> ||^2
  double decaying_part_norm = 0.0;
};

inline Decomposition decompose(const SystemState& state, const StableStateInfo& info) {
  if (state.n_modes() != info.mode_amps.size())
    throw InvalidArgument("decompose: state and stable state use different grids");
  const SystemState psi0 = info.as_state();
  Decomposition out;
  out.stable_part = inner_product(psi0, state);
  const auto x = state.amplitudes();
  const auto p = psi0.amplitudes();
  for (std::size_t i = 0; i < x.size(); ++i) out.decaying_part_norm += std::norm(x[i] - out.stable_part * p[i]);
  return out;
}

}  // namespace bandedge
