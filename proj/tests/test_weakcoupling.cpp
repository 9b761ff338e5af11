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
#include <numbers>

#include <gtest/gtest.h>

#include "bandedge/weakcoupling.hpp"

namespace {

using bandedge::DetuningSchedule;
using bandedge::ModulationSpectrum;
using bandedge::SpectrumModel;

TEST(ModulationSpectrum, UnmodulatedPeakIsNormalized) {
  const auto f = ModulationSpectrum::unmodulated(3.0, 0.01);
  EXPECT_NEAR(f.total_power(), 1.0, 1e-6);
  EXPECT_GT(f.at(3.0), f.at(3.02));
  EXPECT_EQ(f.at(5.0), 0.0);
}

TEST(ModulationSpectrum, WindowedSpectrumCarriesUnitPower) {
  const auto f = bandedge::modulation_spectrum(DetuningSchedule::constant(-5.0), 0.0, 30.0,
                                               bandedge::uniform_grid(-45.0, 55.0, 20001));
  for (double x : f.intensity) EXPECT_GE(x, 0.0);
  EXPECT_NEAR(f.total_power(), 1.0, 2e-3);
  // Peak at the qubit frequency, height t / (2 pi).
  EXPECT_NEAR(f.at(5.0), 30.0 / (2.0 * std::numbers::pi), 1e-3);
}

TEST(ModulationSpectrum, SwitchedScheduleSplitsPower) {
  DetuningSchedule s;
  s.segments = {{10.0, -4.0}, {10.0, -8.0}};
  const auto f = bandedge::modulation_spectrum(s, 0.0, 20.0, bandedge::uniform_grid(-30.0, 40.0, 14001));
  EXPECT_NEAR(f.total_power(), 1.0, 5e-3);
  EXPECT_NEAR(f.at(4.0), f.at(8.0), 0.05 * f.at(4.0));
  EXPECT_LT(f.at(6.0), 0.05 * f.at(4.0));
}

TEST(ConvolutionRate, GoldenRuleOnFlatBand) {
  const auto m = SpectrumModel::flat(0.02, 10.0);
  const double r = bandedge::convolution_rate(ModulationSpectrum::unmodulated(5.0, 0.05), m);
  EXPECT_NEAR(r / (2.0 * std::numbers::pi * 0.02), 1.0, 0.01);
}

TEST(ConvolutionRate, NarrowPeakSamplesEdgeCoupling) {
  const auto m = SpectrumModel::isotropic(1.0, 50.0);
  for (double d : {5.0, 10.0}) {
    const double r = bandedge::convolution_rate(ModulationSpectrum::unmodulated(d, 1e-3), m);
    EXPECT_NEAR(r / (2.0 * std::numbers::pi * bandedge::coupling_spectrum(m, d)), 1.0, 1e-4);
  }
}

TEST(ConvolutionRate, GapQubitDoesNotDecay) {
  const auto m = SpectrumModel::isotropic(1.0, 50.0);
  EXPECT_EQ(bandedge::convolution_rate(ModulationSpectrum::unmodulated(-0.5, 1e-3), m), 0.0);
}

TEST(ConvolutionRate, PositiveForAnySpectrum) {
  const auto m = SpectrumModel::anisotropic(1.0, 50.0);
  DetuningSchedule s;
  s.segments = {{1.0, 0.5}, {1.0, -2.0}, {1.0, 0.25}};
  const auto f = bandedge::modulation_spectrum(s, 0.0, 10.0, bandedge::uniform_grid(-20.0, 70.0, 3001));
  EXPECT_GE(bandedge::convolution_rate(f, m), 0.0);
}

TEST(ConvolutionRate, CoverageError) {
  const auto m = SpectrumModel::isotropic(1.0, 50.0);
  const auto truncated = bandedge::modulation_spectrum(DetuningSchedule::constant(-20.0), 0.0, 5.0,
                                                       bandedge::uniform_grid(10.0, 30.0, 401));
  EXPECT_THROW(bandedge::convolution_rate(truncated, m), bandedge::CoverageError);
  EXPECT_THROW(bandedge::convolution_rate(ModulationSpectrum{}, m), bandedge::CoverageError);
}

TEST(FitDecayRate, ExactExponential) {
  std::vector<double> t, p;
  for (int i = 0; i <= 1000; ++i) {
    t.push_back(0.01 * i);
    p.push_back(std::exp(-0.7 * t.back()));
  }
  const auto r = bandedge::fit_decay_rate(t, p);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r, 0.7, 1e-12);
}

TEST(FitDecayRate, NoWindowWithoutDecay) {
  std::vector<double> t{0.0, 1.0, 2.0, 3.0}, p{1.0, 0.8, 0.7, 0.6};
  EXPECT_FALSE(bandedge::fit_decay_rate(t, p).has_value());
}

TEST(CompareRegimes, WeakCouplingAgreesDeepInBand) {
  const auto m = SpectrumModel::isotropic(1.0, 50.0);
  const auto c = bandedge::discretize(m);
  const auto r = bandedge::compare_regimes(m, c, 10.0, bandedge::PropagationSettings{});
  ASSERT_TRUE(r.fitted_rate.has_value());
  EXPECT_LT(r.relative_error, 0.15);
  EXPECT_FALSE(r.disagrees);
}

TEST(CompareRegimes, StrongCouplingDisagrees) {
  const auto m = SpectrumModel::isotropic(1.0, 50.0);
  const auto c = bandedge::discretize(m);
  const auto r = bandedge::compare_regimes(m, c, 0.5, bandedge::PropagationSettings{});
  EXPECT_TRUE(r.disagrees);
  EXPECT_GT(r.plateau, 0.05);
}

}  // namespace
