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

// Experiment configuration. A versioned JSON tree; every quantity is given in
// units of gamma_c (detunings as Delta / gamma_c, times as gamma_c t).
//
//   {
//     "version": 1,
//     "spectrum":   {"kind": "isotropic", "gamma_c": 1, "bandwidth": 50, "n_modes": 600},
//     "schedule":   {"delta_A": 0.5, "delta_B": 0.25, "tau_A": "tune", "tau_B": "tune",
//                    "order": "counterintuitive", "rise": "sudden",
//                    "tuning": {"objective": "max_ordering_contrast", "grid": [0.5, 3, 0.25]}},
//     "initial_state": {"kind": "excited"},
//     "integrator": {"dt": 0.002, "horizon": 30, "sampling": 0.01},
//     "output":     {"name": "run"}
//   }
//
// Optional blocks: "gate", "stable_state", "weak_coupling", "sweep". Missing
// fields take the defaults below; unknown fields are rejected.

#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "bandedge/control.hpp"
#include "bandedge/dynamics.hpp"
#include "bandedge/error.hpp"
#include "bandedge/spectra.hpp"

namespace bandedge {

using json = nlohmann::json;

inline constexpr int kConfigVersion = 1;

struct SpectrumConfig {
  std::string kind = "isotropic";
  double gamma_c = 1.0;
  double bandwidth = 50.0;
  std::size_t n_modes = kDefaultModes;
  // Flat kind only.
  double level = 0.0;
  // Tabulated kind only; relative paths resolve against the config file.
  std::string table;
};

struct TuningConfig {
  TuningObjective objective = TuningObjective::MaxOrderingContrast;
  double grid_lo = 0.5;
  double grid_hi = 3.0;
  double grid_step = 0.25;
  std::size_t min_periods = 5;
  double reversed_tolerance = 1e-3;
  // Propagation end used while scoring; defaults to integrator.horizon.
  std::optional<double> horizon;
};

struct ScheduleConfig {
  double delta_A = 0.5;
  double delta_B = 0.25;
  // nullopt: tuned.
  std::optional<double> tau_A = 1.0;
  std::optional<double> tau_B = 1.0;
  SequenceOrder order = SequenceOrder::CounterIntuitive;
  std::string rise = "sudden";
  // Super-Gaussian width; defaults to tau_A / 4.
  std::optional<double> rise_tau;
  int rise_exponent = 8;
  TuningConfig tuning;

  bool needs_tuning() const { return !tau_A || !tau_B; }
};

struct InitialStateConfig {
  std::string kind = "excited";
  cplx alpha = 1.0;
  cplx beta_d = 0.0;
  // Discrete mode frequency, measured from the edge.
  double omega_d = 0.0;
  double kappa_d = 0.0;
};

struct GateConfig {
  std::size_t n_steps = 10;
  std::size_t interleave = 2;
};

struct IntegratorConfig {
  double dt = 2e-3;
  double horizon = 30.0;
  double sampling = 0.01;
  double norm_tolerance = 1e-6;
};

struct StableStateConfig {
  std::vector<double> detunings{0.25, 0.5, 5.0};
};

struct WeakCouplingConfig {
  std::vector<double> distances{5.0, 7.0, 10.0};
  double peak_width = 1e-3;
};

struct SweepConfig {
  std::string experiment = "sequence";
  // JSON pointer into the configuration, e.g. "/schedule/delta_A".
  std::string parameter;
  std::vector<json> values;
};

struct ExperimentConfig {
  int version = kConfigVersion;
  SpectrumConfig spectrum;
  ScheduleConfig schedule;
  InitialStateConfig initial_state;
  std::optional<GateConfig> gate;
  IntegratorConfig integrator;
  StableStateConfig stable_state;
  WeakCouplingConfig weak_coupling;
  std::optional<SweepConfig> sweep;
  std::string output_name = "run";
  // Directory of the config file.
  std::filesystem::path base_dir;
};

namespace detail {

inline std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Typed access to one JSON object with field-path diagnostics.
class ConfigReader {
 public:
  ConfigReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  const json& at(const std::string& key) {
    if (!has(key)) throw ConfigError(field(key), "required field missing");
    return node_.at(key);
  }

  std::string field(const std::string& key) const { return join_path(path_, key); }

  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }
  double number(const std::string& key) {
    const auto& v = at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(field(key), "must be finite");
    return x;
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw ConfigError(field(key), "expected a non-negative integer");
    return v.get<std::size_t>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }

  cplx complex(const std::string& key, cplx fallback) {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
      return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(field(key), "expected a number or [re, im]");
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(field(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::optional<ConfigReader> child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return ConfigReader(node_.at(key), field(key));
  }

  void reject_unknown() const {
    for (const auto& [k, v] : node_.items())
      if (!seen_.count(k)) throw ConfigError(field(k), "unknown field");
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

inline TuningObjective parse_objective(const std::string& s, const std::string& path) {
  for (auto o : {TuningObjective::MaxMinPopulation, TuningObjective::MaxTimeAvgFidelity,
                 TuningObjective::MaxRecurringExcess, TuningObjective::MaxOrderingContrast})
    if (s == to_string(o)) return o;
  throw ConfigError(path, "unknown tuning objective '" + s + "'");
}

inline std::optional<double> parse_dwell(ConfigReader& r, const std::string& key, double fallback) {
  if (!r.has(key)) return fallback;
  const auto& v = r.at(key);
  if (v.is_string() && v.get<std::string>() == "tune") return std::nullopt;
  if (!v.is_number()) throw ConfigError(r.field(key), "expected a number or \"tune\"");
  return v.get<double>();
}

inline void require_positive(double x, const std::string& path) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(path, "must be positive");
}

}  // namespace detail

/// Checks ranges and cross-references; throws ConfigError naming the field.
inline void validate(const ExperimentConfig& c) {
  using detail::require_positive;
  if (c.version != kConfigVersion) throw ConfigError("version", "unsupported version");

  const auto& s = c.spectrum;
  if (s.kind != "isotropic" && s.kind != "anisotropic" && s.kind != "flat" && s.kind != "tabulated")
    throw ConfigError("spectrum.kind", "expected isotropic, anisotropic, flat or tabulated");
  require_positive(s.gamma_c, "spectrum.gamma_c");
  if (s.kind != "tabulated") require_positive(s.bandwidth, "spectrum.bandwidth");
  if (s.n_modes < 2) throw ConfigError("spectrum.n_modes", "must be at least 2");
  if (s.kind == "flat") require_positive(s.level, "spectrum.level");
  if (s.kind == "tabulated" && s.table.empty()) throw ConfigError("spectrum.table", "required for tabulated spectra");

  const auto& sc = c.schedule;
  if (!(sc.delta_A > sc.delta_B)) throw ConfigError("schedule.delta_A", "must exceed schedule.delta_B");
  if (sc.tau_A) require_positive(*sc.tau_A, "schedule.tau_A");
  if (sc.tau_B) require_positive(*sc.tau_B, "schedule.tau_B");
  if (sc.rise != "sudden" && sc.rise != "super_gaussian")
    throw ConfigError("schedule.rise", "expected sudden or super_gaussian");
  if (sc.rise_tau) require_positive(*sc.rise_tau, "schedule.rise_tau");
  if (sc.rise_exponent < 2 || sc.rise_exponent % 2 != 0)
    throw ConfigError("schedule.rise_exponent", "must be a positive even integer");
  const auto& t = sc.tuning;
  require_positive(t.grid_lo, "schedule.tuning.grid");
  require_positive(t.grid_step, "schedule.tuning.grid");
  if (!(t.grid_hi >= t.grid_lo)) throw ConfigError("schedule.tuning.grid", "upper end below lower end");
  require_positive(t.reversed_tolerance, "schedule.tuning.reversed_tolerance");
  if (t.horizon) require_positive(*t.horizon, "schedule.tuning.horizon");

  const auto& is = c.initial_state;
  if (is.kind != "excited" && is.kind != "superposition")
    throw ConfigError("initial_state.kind", "expected excited or superposition");
  if (is.kind == "superposition" && std::abs(std::norm(is.alpha) + std::norm(is.beta_d) - 1.0) > 1e-9)
    throw ConfigError("initial_state.alpha", "|alpha|^2 + |beta_d|^2 must equal 1");
  if (!std::isfinite(is.omega_d)) throw ConfigError("initial_state.omega_d", "must be finite");
  if (!(is.kappa_d >= 0.0) || !std::isfinite(is.kappa_d))
    throw ConfigError("initial_state.kappa_d", "must be non-negative");

  if (c.gate) {
    if (is.kind != "superposition")
      throw ConfigError("gate", "requires a superposition initial state");
    if (c.gate->n_steps == 0) throw ConfigError("gate.n_steps", "must be positive");
    if (c.gate->interleave == 0) throw ConfigError("gate.interleave", "must be positive");
  }

  const auto& in = c.integrator;
  require_positive(in.dt, "integrator.dt");
  require_positive(in.horizon, "integrator.horizon");
  require_positive(in.sampling, "integrator.sampling");
  require_positive(in.norm_tolerance, "integrator.norm_tolerance");
  if (in.sampling < in.dt) throw ConfigError("integrator.sampling", "must not be below integrator.dt");

  for (double d : c.stable_state.detunings)
    if (!std::isfinite(d)) throw ConfigError("stable_state.detunings", "must be finite");
  for (double d : c.weak_coupling.distances) require_positive(d, "weak_coupling.distances");
  require_positive(c.weak_coupling.peak_width, "weak_coupling.peak_width");

  if (c.sweep) {
    if (c.sweep->parameter.empty() || c.sweep->parameter.front() != '/')
      throw ConfigError("sweep.parameter", "expected a JSON pointer such as /schedule/delta_A");
    if (c.sweep->values.empty()) throw ConfigError("sweep.values", "at least one value required");
    if (c.sweep->experiment == "sweep" || c.sweep->experiment == "figures")
      throw ConfigError("sweep.experiment", "cannot nest " + c.sweep->experiment);
  }
  if (c.output_name.empty() || c.output_name.find('/') != std::string::npos)
    throw ConfigError("output.name", "must be a plain file stem");
}

/// Parses and validates a configuration tree.
inline ExperimentConfig parse_config(const json& root, std::filesystem::path base_dir = {}) {
  using detail::ConfigReader;
  ExperimentConfig c;
  c.base_dir = std::move(base_dir);
  ConfigReader r(root, "");

  const auto& version = r.at("version");
  if (!version.is_number_integer()) throw ConfigError("version", "expected an integer");
  c.version = version.get<int>();
  if (c.version != kConfigVersion)
    throw ConfigError("version", "unsupported version " + std::to_string(c.version));

  {
    auto s = r.child("spectrum");
    if (!s) throw ConfigError("spectrum", "required block missing");
    c.spectrum.kind = s->text("kind", c.spectrum.kind);
    c.spectrum.gamma_c = s->number("gamma_c");
    c.spectrum.bandwidth = s->number("bandwidth", c.spectrum.bandwidth);
    c.spectrum.n_modes = s->count("n_modes", c.spectrum.n_modes);
    c.spectrum.level = s->number("level", c.spectrum.level);
    c.spectrum.table = s->text("table", c.spectrum.table);
    s->reject_unknown();
  }
  if (auto s = r.child("schedule")) {
    auto& sc = c.schedule;
    sc.delta_A = s->number("delta_A", sc.delta_A);
    sc.delta_B = s->number("delta_B", sc.delta_B);
    sc.tau_A = detail::parse_dwell(*s, "tau_A", 1.0);
    sc.tau_B = detail::parse_dwell(*s, "tau_B", 1.0);
    const auto order = s->text("order", to_string(sc.order));
    if (order == "counterintuitive") sc.order = SequenceOrder::CounterIntuitive;
    else if (order == "intuitive") sc.order = SequenceOrder::Intuitive;
    else throw ConfigError("schedule.order", "expected counterintuitive or intuitive");
    sc.rise = s->text("rise", sc.rise);
    if (s->has("rise_tau")) sc.rise_tau = s->number("rise_tau");
    if (s->has("rise_exponent")) {
      const auto& v = s->at("rise_exponent");
      if (!v.is_number_integer()) throw ConfigError("schedule.rise_exponent", "expected an integer");
      sc.rise_exponent = v.get<int>();
    }
    if (auto t = s->child("tuning")) {
      auto& tc = sc.tuning;
      tc.objective = detail::parse_objective(t->text("objective", to_string(tc.objective)),
                                             "schedule.tuning.objective");
      const auto grid = t->numbers("grid", {tc.grid_lo, tc.grid_hi, tc.grid_step});
      if (grid.size() != 3) throw ConfigError("schedule.tuning.grid", "expected [lo, hi, step]");
      tc.grid_lo = grid[0];
      tc.grid_hi = grid[1];
      tc.grid_step = grid[2];
      tc.min_periods = t->count("min_periods", tc.min_periods);
      tc.reversed_tolerance = t->number("reversed_tolerance", tc.reversed_tolerance);
      if (t->has("horizon")) tc.horizon = t->number("horizon");
      t->reject_unknown();
    }
    s->reject_unknown();
  }
  if (auto s = r.child("initial_state")) {
    auto& is = c.initial_state;
    is.kind = s->text("kind", is.kind);
    if (is.kind == "superposition") {
      const double h = 1.0 / std::sqrt(2.0);
      is.alpha = h;
      is.beta_d = h;
    }
    is.alpha = s->complex("alpha", is.alpha);
    is.beta_d = s->complex("beta_d", is.beta_d);
    is.omega_d = s->number("omega_d", is.omega_d);
    is.kappa_d = s->number("kappa_d", is.kappa_d);
    s->reject_unknown();
  }
  if (auto s = r.child("gate")) {
    GateConfig g;
    g.n_steps = s->count("n_steps", g.n_steps);
    g.interleave = s->count("interleave", g.interleave);
    s->reject_unknown();
    c.gate = g;
  }
  if (auto s = r.child("integrator")) {
    auto& in = c.integrator;
    in.dt = s->number("dt", in.dt);
    in.horizon = s->number("horizon", in.horizon);
    in.sampling = s->number("sampling", in.sampling);
    in.norm_tolerance = s->number("norm_tolerance", in.norm_tolerance);
    s->reject_unknown();
  }
  if (auto s = r.child("stable_state")) {
    c.stable_state.detunings = s->numbers("detunings", c.stable_state.detunings);
    s->reject_unknown();
  }
  if (auto s = r.child("weak_coupling")) {
    c.weak_coupling.distances = s->numbers("distances", c.weak_coupling.distances);
    c.weak_coupling.peak_width = s->number("peak_width", c.weak_coupling.peak_width);
    s->reject_unknown();
  }
  if (auto s = r.child("sweep")) {
    SweepConfig sw;
    sw.experiment = s->text("experiment", sw.experiment);
    sw.parameter = s->text("parameter", sw.parameter);
    const auto& v = s->at("values");
    if (!v.is_array()) throw ConfigError("sweep.values", "expected an array");
    sw.values.assign(v.begin(), v.end());
    s->reject_unknown();
    c.sweep = sw;
  }
  if (auto s = r.child("output")) {
    c.output_name = s->text("name", c.output_name);
    s->reject_unknown();
  }
  r.reject_unknown();
  validate(c);
  return c;
}

/// Reads a configuration file. Syntax errors are reported against "<file>".
inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", e.what());
  }
  return parse_config(root, path.parent_path());
}

inline json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

/// The fully resolved configuration, defaults filled in.
inline json to_json(const ExperimentConfig& c) {
  const auto& sc = c.schedule;
  auto dwell = [](const std::optional<double>& t) -> json { return t ? json(*t) : json("tune"); };
  json j;
  j["version"] = c.version;
  j["spectrum"] = {{"kind", c.spectrum.kind}, {"gamma_c", c.spectrum.gamma_c},
                   {"bandwidth", c.spectrum.bandwidth}, {"n_modes", c.spectrum.n_modes}};
  if (c.spectrum.kind == "flat") j["spectrum"]["level"] = c.spectrum.level;
  if (c.spectrum.kind == "tabulated") j["spectrum"]["table"] = c.spectrum.table;
  j["schedule"] = {{"delta_A", sc.delta_A},
                   {"delta_B", sc.delta_B},
                   {"tau_A", dwell(sc.tau_A)},
                   {"tau_B", dwell(sc.tau_B)},
                   {"order", to_string(sc.order)},
                   {"rise", sc.rise},
                   {"rise_exponent", sc.rise_exponent},
                   {"tuning",
                    {{"objective", to_string(sc.tuning.objective)},
                     {"grid", {sc.tuning.grid_lo, sc.tuning.grid_hi, sc.tuning.grid_step}},
                     {"min_periods", sc.tuning.min_periods},
                     {"reversed_tolerance", sc.tuning.reversed_tolerance}}}};
  if (sc.rise_tau) j["schedule"]["rise_tau"] = *sc.rise_tau;
  if (sc.tuning.horizon) j["schedule"]["tuning"]["horizon"] = *sc.tuning.horizon;
  j["initial_state"] = {{"kind", c.initial_state.kind},
                        {"alpha", complex_to_json(c.initial_state.alpha)},
                        {"beta_d", complex_to_json(c.initial_state.beta_d)},
                        {"omega_d", c.initial_state.omega_d},
                        {"kappa_d", c.initial_state.kappa_d}};
  if (c.gate) j["gate"] = {{"n_steps", c.gate->n_steps}, {"interleave", c.gate->interleave}};
  j["integrator"] = {{"dt", c.integrator.dt},
                     {"horizon", c.integrator.horizon},
                     {"sampling", c.integrator.sampling},
                     {"norm_tolerance", c.integrator.norm_tolerance}};
  j["stable_state"] = {{"detunings", c.stable_state.detunings}};
  j["weak_coupling"] = {{"distances", c.weak_coupling.distances},
                        {"peak_width", c.weak_coupling.peak_width}};
  if (c.sweep)
    j["sweep"] = {{"experiment", c.sweep->experiment},
                  {"parameter", c.sweep->parameter},
                  {"values", c.sweep->values}};
  j["output"] = {{"name", c.output_name}};
  return j;
}

// ---------------------------------------------------------------------------
// From dimensionless configuration to model objects

inline SpectrumModel build_spectrum(const ExperimentConfig& c) {
  const auto& s = c.spectrum;
  const double g = s.gamma_c;
  if (s.kind == "isotropic") return SpectrumModel::isotropic(g, s.bandwidth * g);
  if (s.kind == "anisotropic") return SpectrumModel::anisotropic(g, s.bandwidth * g);
  if (s.kind == "flat") return SpectrumModel::flat(s.level * g, s.bandwidth * g, 0.0, g);
  std::filesystem::path p(s.table);
  if (p.is_relative()) p = c.base_dir / p;
  auto m = load_tabulated_csv(p.string(), g);
  for (auto& [w, v] : m.table) {
    w *= g;
    v *= g;
  }
  return SpectrumModel::tabulated(std::move(m.table), g);
}

inline PropagationSettings build_settings(const ExperimentConfig& c) {
  const double g = c.spectrum.gamma_c;
  return {c.integrator.dt / g, c.integrator.horizon / g, c.integrator.sampling / g,
          c.integrator.norm_tolerance};
}

inline SystemState build_initial_state(const ExperimentConfig& c, std::size_t n_modes) {
  if (c.initial_state.kind == "superposition")
    return SystemState::superposition(n_modes, c.initial_state.alpha, c.initial_state.beta_d);
  return SystemState::excited(n_modes);
}

/// Sequence in physical units. Untuned dwells are left at 1 / gamma_c.
inline SequenceSpec build_sequence_spec(const ExperimentConfig& c, double omega_U = 0.0) {
  const double g = c.spectrum.gamma_c;
  const auto& sc = c.schedule;
  SequenceSpec spec;
  spec.delta_A = sc.delta_A * g;
  spec.delta_B = sc.delta_B * g;
  spec.tau_A = sc.tau_A.value_or(1.0) / g;
  spec.tau_B = sc.tau_B.value_or(1.0) / g;
  spec.order = sc.order;
  spec.discrete_mode = {omega_U + c.initial_state.omega_d * g, c.initial_state.kappa_d * g};
  if (sc.rise == "super_gaussian") {
    const double tau = sc.rise_tau ? *sc.rise_tau / g : 0.25 * spec.tau_A;
    spec.rise = SuperGaussianRise{tau, sc.rise_exponent};
  }
  return spec;
}

inline DwellGrid build_dwell_grid(const ExperimentConfig& c) {
  const double g = c.spectrum.gamma_c;
  const auto& t = c.schedule.tuning;
  auto grid = DwellGrid::uniform(t.grid_lo, t.grid_hi, t.grid_step);
  for (auto* v : {&grid.tau_A, &grid.tau_B})
    for (auto& x : *v) x /= g;
  return grid;
}

}  // namespace bandedge
