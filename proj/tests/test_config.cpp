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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "bandedge/config.hpp"
#include "bandedge/experiments.hpp"
#include "bandedge/io.hpp"

namespace {

namespace fs = std::filesystem;
using bandedge::ConfigError;
using bandedge::json;

json minimal() {
  return json::parse(R"({"version": 1, "spectrum": {"gamma_c": 1}})");
}

json small_run() {
  return json::parse(R"({
    "version": 1,
    "spectrum": {"kind": "isotropic", "gamma_c": 1, "bandwidth": 50, "n_modes": 120},
    "schedule": {"delta_A": 0.5, "delta_B": 0.25, "tau_A": 1.0, "tau_B": 1.5},
    "integrator": {"dt": 0.004, "horizon": 6, "sampling": 0.05},
    "output": {"name": "small"}
  })");
}

std::string field_of(const json& j) {
  try {
    bandedge::parse_config(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("bandedge_test_" + name);
  fs::remove_all(p);
  return p;
}

TEST(Config, DefaultsFillIn) {
  const auto c = bandedge::parse_config(minimal());
  EXPECT_EQ(c.spectrum.kind, "isotropic");
  EXPECT_EQ(c.spectrum.n_modes, 600u);
  EXPECT_DOUBLE_EQ(c.spectrum.bandwidth, 50.0);
  EXPECT_DOUBLE_EQ(c.integrator.dt, 2e-3);
  EXPECT_DOUBLE_EQ(c.integrator.horizon, 30.0);
  EXPECT_EQ(c.initial_state.kind, "excited");
  EXPECT_FALSE(c.gate.has_value());
}

TEST(Config, MissingGammaNamesField) {
  auto j = minimal();
  j["spectrum"].erase("gamma_c");
  EXPECT_EQ(field_of(j), "spectrum.gamma_c");
}

TEST(Config, FieldPathDiagnostics) {
  auto j = minimal();
  j["spectrum"]["gamma_c"] = -1.0;
  EXPECT_EQ(field_of(j), "spectrum.gamma_c");

  j = minimal();
  j["integrator"] = {{"dt", 0.0}};
  EXPECT_EQ(field_of(j), "integrator.dt");

  j = minimal();
  j["schedule"] = {{"tau_B", "soon"}};
  EXPECT_EQ(field_of(j), "schedule.tau_B");

  j = minimal();
  j["schedule"] = {{"delta_A", 0.2}, {"delta_B", 0.3}};
  EXPECT_EQ(field_of(j), "schedule.delta_A");

  j = minimal();
  j["spectrum"]["colour"] = "blue";
  EXPECT_EQ(field_of(j), "spectrum.colour");

  j = minimal();
  j["schedule"] = {{"tuning", {{"objective", "fastest"}}}};
  EXPECT_EQ(field_of(j), "schedule.tuning.objective");
}

TEST(Config, VersionIsMandatory) {
  auto j = minimal();
  j.erase("version");
  EXPECT_EQ(field_of(j), "version");
  j["version"] = 2;
  EXPECT_EQ(field_of(j), "version");
}

TEST(Config, GateRequiresSuperposition) {
  auto j = minimal();
  j["gate"] = {{"n_steps", 10}};
  EXPECT_EQ(field_of(j), "gate");
  j["initial_state"] = {{"kind", "superposition"}};
  EXPECT_EQ(field_of(j), "");
}

TEST(Config, SuperpositionMustBeNormalized) {
  auto j = minimal();
  j["initial_state"] = {{"kind", "superposition"}, {"alpha", 1.0}, {"beta_d", 0.5}};
  EXPECT_EQ(field_of(j), "initial_state.alpha");
}

TEST(Config, TuneKeyword) {
  auto j = minimal();
  j["schedule"] = {{"tau_A", "tune"}, {"tau_B", 2.0}};
  const auto c = bandedge::parse_config(j);
  EXPECT_FALSE(c.schedule.tau_A.has_value());
  EXPECT_DOUBLE_EQ(*c.schedule.tau_B, 2.0);
  EXPECT_TRUE(c.schedule.needs_tuning());
}

TEST(Config, ResolvedTreeRoundTrips) {
  auto j = small_run();
  j["initial_state"] = {{"kind", "superposition"}, {"omega_d", -0.25}, {"kappa_d", 0.05}};
  j["gate"] = json::object();
  const auto first = bandedge::to_json(bandedge::parse_config(j));
  const auto second = bandedge::to_json(bandedge::parse_config(first));
  EXPECT_EQ(first, second);
  EXPECT_EQ(first["gate"]["n_steps"], 10);
}

TEST(Config, UnitsScaleWithGamma) {
  auto j = small_run();
  j["spectrum"]["gamma_c"] = 2.0;
  const auto c = bandedge::parse_config(j);
  const auto s = bandedge::build_settings(c);
  EXPECT_DOUBLE_EQ(s.horizon, 3.0);
  EXPECT_DOUBLE_EQ(s.dt, 0.002);
  const auto spec = bandedge::build_sequence_spec(c);
  EXPECT_DOUBLE_EQ(spec.delta_A, 1.0);
  EXPECT_DOUBLE_EQ(spec.tau_B, 0.75);
  EXPECT_DOUBLE_EQ(bandedge::build_spectrum(c).bandwidth, 100.0);
}

TEST(TraceCsv, HeaderAndFormatting) {
  bandedge::Trace t;
  bandedge::TraceSample s;
  s.t = 0.5;
  s.alpha = {0.6, -0.8};
  s.fidelity = 1.0;
  t.samples.push_back(s);
  std::ostringstream os;
  bandedge::write_trace_csv(os, t, {2.0, false});
  EXPECT_EQ(os.str(),
            "gamma_c_t,pop_e,pop_d,pop_continuum,re_alpha,im_alpha,re_beta_d,im_beta_d,fidelity\n"
            "1.00000000000e+00,1.00000000000e+00,0.00000000000e+00,0.00000000000e+00,"
            "6.00000000000e-01,-8.00000000000e-01,0.00000000000e+00,0.00000000000e+00,"
            "1.00000000000e+00\n");
  std::ostringstream gate;
  bandedge::write_trace_csv(gate, t, {1.0, true});
  EXPECT_NE(gate.str().find("fidelity,target_fidelity\n"), std::string::npos);
  EXPECT_NE(gate.str().find(",nan\n"), std::string::npos);
}

TEST(Runner, StableStateRowsMatchClosedForm) {
  auto j = minimal();
  j["output"] = {{"name", "ss"}};
  const auto dir = scratch("ss");
  bandedge::run_stable_state(bandedge::parse_config(j), dir);
  std::ifstream in(dir / "ss.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "delta,omega_0,C,one_minus_C");
  const std::vector<double> deltas{0.25, 0.5, 5.0};
  const double W = 50.0;
  for (double delta : deltas) {
    ASSERT_TRUE(std::getline(in, line));
    double d, w0, c, rest;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &d, &w0, &c, &rest), 4);
    EXPECT_DOUBLE_EQ(d, delta);
    const double e = -w0;
    const double shift = -2.0 / (std::numbers::pi * std::sqrt(e)) * std::atan(std::sqrt(W / e));
    EXPECT_NEAR(w0 + delta - shift, 0.0, 1e-9);
    const double slope =
        (std::pow(e, -1.5) * std::atan(std::sqrt(W / e)) + std::sqrt(W) / (e * (e + W))) / std::numbers::pi;
    EXPECT_NEAR(c, 1.0 / (1.0 + slope), 1e-6);
    EXPECT_NEAR(c + rest, 1.0, 1e-10);
  }
  EXPECT_FALSE(std::getline(in, line));
}

TEST(Runner, SequenceArtifactsAreByteIdentical) {
  const auto c = bandedge::parse_config(small_run());
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const auto summary = bandedge::run_sequence(c, a);
  bandedge::run_sequence(c, b);
  for (const char* f : {"small.csv", "small_static_A.csv", "small_static_B.csv", "small_reversed.csv", "small.json"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_EQ(summary["config"], bandedge::to_json(c));
  EXPECT_FALSE(summary.contains("run_info"));
  EXPECT_TRUE(bandedge::run_sequence(c, b, {false, 1}).contains("run_info"));
}

TEST(Runner, TunedDwellsAreEchoed) {
  auto j = small_run();
  j["schedule"]["tau_A"] = "tune";
  j["schedule"]["tuning"] = {{"objective", "max_min_population"}, {"grid", {0.5, 1.0, 0.5}}};
  const auto summary = bandedge::run_sequence(bandedge::parse_config(j), scratch("tuned"));
  EXPECT_TRUE(summary["config"]["schedule"]["tau_A"].is_number());
  EXPECT_EQ(summary["config"]["schedule"]["tau_B"], 1.5);
  EXPECT_EQ(summary["tuning"]["evaluated"], 2);
}

TEST(Runner, SweepIsThreadIndependent) {
  auto j = small_run();
  j["sweep"] = {{"experiment", "sequence"}, {"parameter", "/schedule/delta_A"}, {"values", {0.4, 0.6, 0.8}}};
  const auto c = bandedge::parse_config(j);
  const auto serial = scratch("sweep1");
  const auto threaded = scratch("sweep3");
  bandedge::run_sweep(c, serial, {true, 1});
  bandedge::run_sweep(c, threaded, {true, 3});
  EXPECT_EQ(slurp(serial / "small.json"), slurp(threaded / "small.json"));
  for (const char* d : {"small_000", "small_001", "small_002"})
    EXPECT_EQ(slurp(serial / d / (std::string(d) + ".csv")), slurp(threaded / d / (std::string(d) + ".csv")));
}

TEST(Runner, SweepRejectsUnknownField) {
  auto j = small_run();
  j["sweep"] = {{"parameter", "/schedule/nothing"}, {"values", {1}}};
  EXPECT_THROW(bandedge::run_sweep(bandedge::parse_config(j), scratch("bad")), ConfigError);
}

TEST(Runner, DivergenceSurfaces) {
  auto j = small_run();
  j["integrator"]["dt"] = 0.05;
  j["integrator"]["sampling"] = 0.05;
  EXPECT_THROW(bandedge::run_sequence(bandedge::parse_config(j), scratch("div")), bandedge::IntegrationDiverged);
}

}  // namespace
