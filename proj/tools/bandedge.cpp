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

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "bandedge/config.hpp"
#include "bandedge/error.hpp"
#include "bandedge/experiments.hpp"

#ifndef BANDEDGE_CONFIG_DIR
#define BANDEDGE_CONFIG_DIR "configs"
#endif

namespace {

struct Flags {
  std::string config;
  std::string out = ".";
  std::string config_dir = BANDEDGE_CONFIG_DIR;
  bool deterministic = true;
  std::size_t threads = 1;
};

void common_flags(CLI::App* cmd, Flags& f, bool needs_config) {
  auto* c = cmd->add_option("--config", f.config, "experiment configuration (JSON)");
  if (needs_config) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_flag("--seedless-deterministic,!--no-seedless-deterministic", f.deterministic,
                "byte-identical artifacts (default on); off adds wall-clock run info to summaries");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Band-edge qubit protection: static, sequence and gate experiments"};
  app.require_subcommand(1);
  Flags f;

  const char* single[][2] = {
      {"static", "static runs at both detunings"},
      {"sequence", "alternating detuning sequence against static references"},
      {"gate", "gradual phase gate on a sequence"},
      {"stable-state", "pole, weight and decay budget per detuning"},
      {"weak-coupling", "convolution-formula rate against simulated decay"},
  };
  for (const auto& [name, help] : single) common_flags(app.add_subcommand(name, help), f, true);

  auto* sweep = app.add_subcommand("sweep", "one experiment per value of a configuration field");
  common_flags(sweep, f, true);
  sweep->add_option("--threads", f.threads, "concurrent runs")->check(CLI::PositiveNumber);

  auto* figures = app.add_subcommand("figures", "the four pinned figure configurations");
  common_flags(figures, f, false);
  figures->add_option("--config-dir", f.config_dir, "directory holding fig1.json ... fig4.json")
      ->capture_default_str();
  figures->add_option("--threads", f.threads, "concurrent runs")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  const bandedge::RunOptions opt{f.deterministic, f.threads};
  const std::filesystem::path out(f.out);
  try {
    const auto* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    if (name == "figures") {
      bandedge::run_figures(f.config_dir, out, opt);
    } else {
      const auto config = bandedge::load_config(f.config);
      if (name == "sweep")
        bandedge::run_sweep(config, out, opt);
      else
        bandedge::runner_for(name)(config, out, opt);
    }
  } catch (const bandedge::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const bandedge::IntegrationDiverged& e) {
    std::fprintf(stderr, "dynamics error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
