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

// Band-edge coupling spectra G(w) = |kappa(w)|^2 rho(w) and their
// discretization into a finite star of continuum modes.
//
// All models place the continuum above the edge omega_U: G(w) = 0 for
// w <= omega_U. The isotropic edge diverges as (w - omega_U)^{-1/2}, the
// anisotropic edge vanishes as (w - omega_U)^{+1/2}; both carry the same total
// coupling over the band so they can be compared at equal strength.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bandedge/error.hpp"

namespace bandedge {

enum class SpectrumKind { IsotropicEdge, AnisotropicEdge, Flat, Tabulated };

inline const char* to_string(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::IsotropicEdge: return "isotropic";
    case SpectrumKind::AnisotropicEdge: return "anisotropic";
    case SpectrumKind::Flat: return "flat";
    case SpectrumKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

/// Default band extent above the edge, in units of gamma_c.
inline constexpr double kDefaultBandwidth = 50.0;
/// Default number of discretized continuum modes.
inline constexpr std::size_t kDefaultModes = 600;

struct SpectrumModel {
  SpectrumKind kind = SpectrumKind::IsotropicEdge;
  double omega_U = 0.0;
  double gamma_c = 1.0;
  double bandwidth = kDefaultBandwidth;
  // Constant G_0 of the Flat kind; unused otherwise.
  double flat_level = 0.0;
  // (w, G(w)) nodes of the Tabulated kind, w strictly ascending.
  std::vector<std::pair<double, double>> table;

  static SpectrumModel isotropic(double gamma_c, double bandwidth,
                                 double omega_U = 0.0) {
    return {SpectrumKind::IsotropicEdge, omega_U, gamma_c, bandwidth, 0.0, {}};
  }

  static SpectrumModel anisotropic(double gamma_c, double bandwidth,
                                   double omega_U = 0.0) {
    return {SpectrumKind::AnisotropicEdge, omega_U, gamma_c, bandwidth, 0.0, {}};
  }

  static SpectrumModel flat(double level, double bandwidth, double omega_U = 0.0,
                            double gamma_c = 1.0) {
    return {SpectrumKind::Flat, omega_U, gamma_c, bandwidth, level, {}};
  }

  /// The band spans the table's frequency range; omega_U is its first node.
  static SpectrumModel tabulated(std::vector<std::pair<double, double>> nodes,
                                 double gamma_c = 1.0) {
    SpectrumModel m{SpectrumKind::Tabulated, 0.0, gamma_c, 0.0, 0.0, std::move(nodes)};
    if (!m.table.empty()) {
      m.omega_U = m.table.front().first;
      m.bandwidth = m.table.back().first - m.table.front().first;
    }
    return m;
  }

  double band_top() const { return omega_U + bandwidth; }

  void validate() const {
    if (!(gamma_c > 0.0) || !std::isfinite(gamma_c))
      throw InvalidModel("gamma_c must be positive");
    if (kind == SpectrumKind::Tabulated) {
      if (table.size() < 2) throw InvalidModel("tabulated spectrum needs at least two nodes");
      for (std::size_t i = 1; i < table.size(); ++i) {
        if (!(table[i].first > table[i - 1].first))
          throw InvalidModel("tabulated spectrum frequencies must be strictly ascending");
      }
      for (const auto& [w, g] : table) {
        if (!std::isfinite(w) || !std::isfinite(g) || g < 0.0)
          throw InvalidModel("tabulated spectrum values must be finite and non-negative");
      }
      return;
    }
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
      throw InvalidModel("bandwidth must be positive");
    if (kind == SpectrumKind::Flat && !(flat_level >= 0.0))
      throw InvalidModel("flat spectrum level must be non-negative");
  }

  bool is_edge() const {
    return kind == SpectrumKind::IsotropicEdge || kind == SpectrumKind::AnisotropicEdge;
  }
};

namespace detail {

// Prefactor of the isotropic law G = iso_prefactor * (w - omega_U)^{-1/2}.
inline double iso_prefactor(const SpectrumModel& m) {
  return std::pow(m.gamma_c, 1.5) / std::numbers::pi;
}

// Anisotropic prefactor N_a, fixed so that both edge laws integrate to
// 2 gamma_c^{3/2} sqrt(W) / pi over the band.
inline double aniso_prefactor(const SpectrumModel& m) {
  return 3.0 * std::pow(m.gamma_c, 1.5) / (std::numbers::pi * m.bandwidth);
}

inline double interpolate_table(const std::vector<std::pair<double, double>>& table,
                                double omega) {
  if (table.empty() || omega < table.front().first || omega > table.back().first) return 0.0;
  auto hi = std::upper_bound(table.begin(), table.end(), omega,
                             [](double w, const auto& node) { return w < node.first; });
  if (hi == table.end()) return table.back().second;
  if (hi == table.begin()) return table.front().second;
  auto lo = std::prev(hi);
  const double u = (omega - lo->first) / (hi->first - lo->first);
  return lo->second + u * (hi->second - lo->second);
}

}  // namespace detail

/// G(w) = |kappa(w)|^2 rho(w); zero outside the band (omega_U, omega_U + W].
inline double coupling_spectrum(const SpectrumModel& model, double omega) {
  if (!std::isfinite(omega)) throw InvalidArgument("coupling_spectrum: omega must be finite");
  if (model.kind == SpectrumKind::Tabulated) {
    if (model.table.empty()) throw InvalidModel("tabulated spectrum is empty");
    model.validate();
    return detail::interpolate_table(model.table, omega);
  }
  const double nu = omega - model.omega_U;
  if (!(nu > 0.0) || nu > model.bandwidth) return 0.0;
  switch (model.kind) {
    case SpectrumKind::IsotropicEdge: return detail::iso_prefactor(model) / std::sqrt(nu);
    case SpectrumKind::AnisotropicEdge: return detail::aniso_prefactor(model) * std::sqrt(nu);
    case SpectrumKind::Flat: return model.flat_level;
    case SpectrumKind::Tabulated: break;
  }
  return 0.0;
}

/// Closed-form integral of G over the band.
inline double band_integral(const SpectrumModel& model) {
  switch (model.kind) {
    case SpectrumKind::IsotropicEdge:
    case SpectrumKind::AnisotropicEdge:
      return 2.0 * std::pow(model.gamma_c, 1.5) * std::sqrt(model.bandwidth) / std::numbers::pi;
    case SpectrumKind::Flat: return model.flat_level * model.bandwidth;
    case SpectrumKind::Tabulated: {
      double sum = 0.0;
      for (std::size_t i = 1; i < model.table.size(); ++i) {
        const auto& [w0, g0] = model.table[i - 1];
        const auto& [w1, g1] = model.table[i];
        sum += 0.5 * (g0 + g1) * (w1 - w0);
      }
      return sum;
    }
  }
  return 0.0;
}

/// Computes the band integral of G(w) f(w) dw by adaptive Gauss-Kronrod.
///
/// The isotropic and anisotropic kinds are integrated in x = sqrt(w - omega_U),
/// which removes the edge singularity (isotropic) or the square-root cusp
/// (anisotropic). For the isotropic edge this is the grid `discretize` uses.
template <typename F>
double band_quadrature(const SpectrumModel& model, F&& f, double tolerance = 1e-13) {
  using boost::math::quadrature::gauss_kronrod;
  constexpr unsigned kDepth = 20;
  switch (model.kind) {
    case SpectrumKind::IsotropicEdge: {
      const double c = 2.0 * detail::iso_prefactor(model);
      auto integrand = [&](double x) { return c * f(model.omega_U + x * x); };
      return gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::sqrt(model.bandwidth),
                                                  kDepth, tolerance);
    }
    case SpectrumKind::AnisotropicEdge: {
      const double c = 2.0 * detail::aniso_prefactor(model);
      auto integrand = [&](double x) { return c * x * x * f(model.omega_U + x * x); };
      return gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::sqrt(model.bandwidth),
                                                  kDepth, tolerance);
    }
    case SpectrumKind::Flat: {
      auto integrand = [&](double w) { return model.flat_level * f(w); };
      return gauss_kronrod<double, 61>::integrate(integrand, model.omega_U, model.band_top(),
                                                  kDepth, tolerance);
    }
    case SpectrumKind::Tabulated: {
      double sum = 0.0;
      for (std::size_t i = 1; i < model.table.size(); ++i) {
        auto integrand = [&](double w) { return detail::interpolate_table(model.table, w) * f(w); };
        sum += gauss_kronrod<double, 61>::integrate(integrand, model.table[i - 1].first,
                                                    model.table[i].first, kDepth, tolerance);
      }
      return sum;
    }
  }
  return 0.0;
}

/// A finite star of continuum modes standing in for rho(w) and kappa(w).
/// coupling[j]^2 is the lumped weight |kappa(w_j)|^2 rho(w_j) dw_j.
struct DiscretizedContinuum {
  std::vector<double> omega;
  std::vector<double> coupling;
  SpectrumModel model;

  std::size_t n_modes() const { return omega.size(); }

  double total_weight() const {
    double sum = 0.0;
    for (double g : coupling) sum += g * g;
    return sum;
  }

  /// A continuum with explicit modes, e.g. a single mode for two-state checks.
  static DiscretizedContinuum explicit_modes(std::vector<double> omega,
                                             std::vector<double> coupling,
                                             SpectrumModel model = {}) {
    if (omega.size() != coupling.size())
      throw InvalidArgument("explicit_modes: omega and coupling lengths differ");
    return {std::move(omega), std::move(coupling), std::move(model)};
  }
};

/// Discretizes the band (omega_U, omega_U + W] into `n_modes` modes.
///
/// The isotropic edge uses midpoints of a grid uniform in x = sqrt(w - omega_U);
/// there G dw = (2 gamma_c^{3/2} / pi) dx, so every mode carries the same weight.
/// Every other kind uses midpoints of a grid uniform in w.
inline DiscretizedContinuum discretize(const SpectrumModel& model,
                                       std::size_t n_modes = kDefaultModes) {
  if (n_modes < 2) throw InvalidArgument("discretize: n_modes must be at least 2");
  model.validate();
  DiscretizedContinuum out;
  out.model = model;
  out.omega.resize(n_modes);
  out.coupling.resize(n_modes);
  const auto n = static_cast<double>(n_modes);
  if (model.kind == SpectrumKind::IsotropicEdge) {
    const double h = std::sqrt(model.bandwidth) / n;
    const double weight = 2.0 * detail::iso_prefactor(model) * h;
    for (std::size_t j = 0; j < n_modes; ++j) {
      const double x = (static_cast<double>(j) + 0.5) * h;
      out.omega[j] = model.omega_U + x * x;
      out.coupling[j] = std::sqrt(weight);
    }
    return out;
  }
  const double h = model.bandwidth / n;
  for (std::size_t j = 0; j < n_modes; ++j) {
    const double w = model.omega_U + (static_cast<double>(j) + 0.5) * h;
    out.omega[j] = w;
    out.coupling[j] = std::sqrt(coupling_spectrum(model, w) * h);
  }
  return out;
}

/// Reads a two-column (w, G) CSV. A non-numeric first line is taken as a header.
inline SpectrumModel load_tabulated_csv(const std::string& path, double gamma_c = 1.0) {
  std::ifstream in(path);
  if (!in) throw InvalidModel("cannot open tabulated spectrum '" + path + "'");
  std::vector<std::pair<double, double>> nodes;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double w = 0.0, g = 0.0;
    if (!(row >> w >> g)) {
      if (first) {
        first = false;
        continue;
      }
      throw InvalidModel("malformed row in '" + path + "': " + line);
    }
    first = false;
    nodes.emplace_back(w, g);
  }
  auto model = SpectrumModel::tabulated(std::move(nodes), gamma_c);
  model.validate();
  return model;
}

}  // namespace bandedge
