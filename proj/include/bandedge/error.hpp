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

#pragma once

#include <stdexcept>
#include <string>

namespace bandedge {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A spectrum model is malformed (empty or unsorted table, non-positive scales).
class InvalidModel : public Error {
 public:
  using Error::Error;
};

/// The pole equation has no sign change in its bracket.
class NoBoundState : public Error {
 public:
  using Error::Error;
};

/// Norm drift exceeded the divergence threshold during propagation.
class IntegrationDiverged : public Error {
 public:
  IntegrationDiverged(double time, double drift)
      : Error("integration diverged at t = " + std::to_string(time) +
              " (norm drift " + std::to_string(drift) + ")"),
        time_(time),
        drift_(drift) {}

  double time() const noexcept { return time_; }
  double drift() const noexcept { return drift_; }

 private:
  double time_;
  double drift_;
};

/// A gate protocol needs more detuning switches than the schedule provides.
class ScheduleExhausted : public Error {
 public:
  using Error::Error;
};

/// Sampling grids of traces that must be compared do not line up.
class MisalignedGrids : public Error {
 public:
  using Error::Error;
};

/// A modulation spectrum grid does not cover the band it is convolved with.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// Configuration failed validation. `path()` names the offending field, e.g.
/// "spectrum.gamma_c".
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace bandedge
