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

#include "bandedge/stablestate.hpp"

namespace {

using bandedge::cplx;
using bandedge::DetuningSchedule;
using bandedge::SpectrumModel;
using bandedge::SystemState;

// Isotropic edge at omega_U = 0 with depth e = -omega_0 > 0:
//   Int G/(omega_0 - w) dw = -(2 g^{3/2} / (pi sqrt(e))) atan(sqrt(W / e))
//   Int G/(w - omega_0)^2 dw = (g^{3/2} / pi) (e^{-3/2} atan(sqrt(W / e)) + sqrt(W) / (e (e + W)))
double oracle_shift(double gamma, double W, double e) {
  return -2.0 * std::pow(gamma, 1.5) / (std::numbers::pi * std::sqrt(e)) * std::atan(std::sqrt(W / e));
}

double oracle_slope(double gamma, double W, double e) {
  return std::pow(gamma, 1.5) / std::numbers::pi *
         (std::pow(e, -1.5) * std::atan(std::sqrt(W / e)) + std::sqrt(W) / (e * (e + W)));
}

// Plain bisection on the closed-form pole equation.
double oracle_pole(double gamma, double W, double delta) {
  auto f = [&](double e) { return -e + delta - oracle_shift(gamma, W, e); };
  double lo = 1e-14, hi = 1e3;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return -0.5 * (lo + hi);
}

// Residual || H psi - omega_0 psi || on the discretized model.
double eigen_residual(const bandedge::StableStateInfo& info, const bandedge::DiscretizedContinuum& c,
                      double omega_at, double omega_d, cplx kappa_d) {
  const auto psi = info.as_state();
  cplx row0 = (omega_at - info.omega_0) * psi.alpha() + kappa_d * psi.beta_d();
  for (std::size_t j = 0; j < c.n_modes(); ++j) row0 += c.coupling[j] * psi.beta()[j];
  double r = std::norm(row0);
  r += std::norm((omega_d - info.omega_0) * psi.beta_d() + std::conj(kappa_d) * psi.alpha());
  for (std::size_t j = 0; j < c.n_modes(); ++j)
    r += std::norm((c.omega[j] - info.omega_0) * psi.beta()[j] + c.coupling[j] * psi.alpha());
  return std::sqrt(r);
}

TEST(FindPole, UncoupledLimit) {
  const auto m = SpectrumModel::flat(0.0, 10.0);
  EXPECT_NEAR(bandedge::find_pole(m, 0.7), -0.7, 1e-12);
}

TEST(FindPole, NoBoundStateInsideBand) {
  const auto m = SpectrumModel::flat(0.0, 10.0);
  EXPECT_THROW(bandedge::find_pole(m, -2.0), bandedge::NoBoundState);
}

TEST(FindPole, IsotropicAgainstClosedFormOracle) {
  const auto m = SpectrumModel::isotropic(1.0, 50.0);
  for (double delta : {0.25, 0.5, 5.0}) {
    EXPECT_NEAR(bandedge::find_pole(m, delta), oracle_pole(1.0, 50.0, delta), 1e-6) << delta;
  }
}

TEST(FindPole, ScalesWithGamma) {
  const auto m = SpectrumModel::isotropic(2.0, 100.0, 1.5);
  EXPECT_NEAR(bandedge::find_pole(m, 1.0) - 1.5, 2.0 * oracle_pole(1.0, 50.0, 0.5), 1e-6);
}

TEST(FindPole, EdgeResonanceBindsBelowEdge) {
  for (auto m : {SpectrumModel::isotropic(1.0, 50.0, 2.0), SpectrumModel::anisotropic(1.0, 50.0, 2.0)}) {
    EXPECT_LT(bandedge::find_pole(m, 0.0), 2.0);
  }
}

TEST(FindPole, ResidualMonotoneOnBracket) {
  const auto m = SpectrumModel::isotropic(1.0, 50.0);
  double prev = -INFINITY;
  for (double z = -1e3; z < 0.0; z += (z < -10.0 ? 10.0 : 0.01)) {
    const double r = bandedge::pole_equation(m, 0.5, z);
    EXPECT_GT(r, prev) << z;
    prev = r;
  }
}

TEST(StableWeight, UncoupledIsOne) {
  EXPECT_DOUBLE_EQ(bandedge::stable_weight(SpectrumModel::flat(0.0, 10.0), -0.5), 1.0);
}

TEST(StableWeight, IsotropicAgainstClosedForm) {
  const auto m = SpectrumModel::isotropic(1.0, 50.0);
  for (double delta : {0.25, 0.5, 5.0}) {
    const double w0 = bandedge::find_pole(m, delta);
    const double want = 1.0 / (1.0 + oracle_slope(1.0, 50.0, -w0));
    EXPECT_NEAR(bandedge::stable_weight(m, w0) / want, 1.0, 1e-6) << delta;
  }
}

TEST(StableWeight, DeeperDetuningBindsMore) {
  const auto m = SpectrumModel::isotropic(1.0, 50.0);
  EXPECT_GT(bandedge::stable_weight(m, bandedge::find_pole(m, 5.0)),
            bandedge::stable_weight(m, bandedge::find_pole(m, 0.5)));
}

TEST(StableWeight, InsideBandRejected) {
  EXPECT_THROW(bandedge::stable_weight(SpectrumModel::isotropic(1.0, 50.0), 0.5), bandedge::InvalidArgument);
}

TEST(StableWeight, DecayProbabilityPositive) {
  for (auto m : {SpectrumModel::isotropic(0.2, 50.0), SpectrumModel::anisotropic(3.0, 20.0),
                 SpectrumModel::flat(0.01, 10.0)}) {
    for (double delta : {0.1, 1.0, 10.0}) {
      const double c = bandedge::stable_weight(m, bandedge::find_pole(m, delta * m.gamma_c));
      EXPECT_GT(c, 0.0);
      EXPECT_LT(c, 1.0);
    }
  }
}

TEST(StableEigenfunction, UncoupledIsExcitedState) {
  const auto m = SpectrumModel::flat(0.0, 10.0);
  const auto c = bandedge::discretize(m, 20);
  const auto info = bandedge::stable_state(m, 0.5, c);
  EXPECT_DOUBLE_EQ(info.alpha_s, 1.0);
  for (const auto& a : info.mode_amps) EXPECT_EQ(a, cplx(0.0));
}

TEST(StableEigenfunction, NormalizedEigenvector) {
  const auto m = SpectrumModel::isotropic(1.0, 50.0);
  const auto c = bandedge::discretize(m);
  const auto info = bandedge::stable_state(m, 0.5, c);
  EXPECT_NEAR(info.as_state().norm(), 1.0, 1e-8);
  EXPECT_LT(info.omega_0, 0.0);
  EXPECT_NEAR(info.alpha_s * info.alpha_s, info.C, 1e-4);
  EXPECT_LT(eigen_residual(info, c, -0.5, 0.0, 0.0), 1e-4);
}

TEST(StableEigenfunction, ComponentsShareCouplingPhase) {
  const auto m = SpectrumModel::isotropic(1.0, 50.0);
  const auto c = bandedge::discretize(m, 100);
  const auto info = bandedge::stable_state(m, 0.5, c);
  for (std::size_t j = 0; j < c.n_modes(); ++j) {
    const cplx expected_dir = -c.coupling[j] / (c.omega[j] - info.omega_0);
    EXPECT_NEAR(std::arg(info.mode_amps[j]), std::arg(expected_dir), 1e-12);
    EXPECT_LT(info.mode_amps[j].real(), 0.0);
  }
}

TEST(StableEigenfunction, DiscreteModeExtension) {
  const auto m = SpectrumModel::isotropic(1.0, 50.0);
  const auto c = bandedge::discretize(m);
  const cplx kd(0.1, 0.0);
  const double wd = -0.25;
  const double w0 = bandedge::find_pole(m, 0.5, kd, wd);
  EXPECT_NEAR(bandedge::pole_equation(m, 0.5, w0, kd, wd), 0.0, 1e-9);
  const auto info = bandedge::stable_eigenfunction(m, w0, c, kd, wd);
  EXPECT_NEAR(info.as_state().norm(), 1.0, 1e-8);
  EXPECT_LT(eigen_residual(info, c, -0.5, wd, kd), 1e-4);
  // The other root, if any, carries less excited weight.
  const double gap = 1e-9;
  const double lo = -1e3, hi = -gap;
  for (auto [a, b] : {std::pair{lo, wd - gap}, std::pair{wd + gap, hi}}) {
    const double fa = bandedge::pole_equation(m, 0.5, a, kd, wd);
    const double fb = bandedge::pole_equation(m, 0.5, b, kd, wd);
    if (fa < 0.0 && fb > 0.0) {
      double x = a, y = b;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (x + y);
        (bandedge::pole_equation(m, 0.5, mid, kd, wd) < 0.0 ? x : y) = mid;
      }
      EXPECT_GE(info.C, bandedge::stable_weight(m, 0.5 * (x + y), kd, wd) - 1e-12);
    }
  }
}

TEST(Decompose, EigenstateAndExcitedState) {
  const auto m = SpectrumModel::isotropic(1.0, 50.0);
  const auto c = bandedge::discretize(m);
  const auto info = bandedge::stable_state(m, 0.5, c);
  const auto self = bandedge::decompose(info.as_state(), info);
  EXPECT_NEAR(std::abs(self.stable_part - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(self.decaying_part_norm, 0.0, 1e-12);
  const auto e = bandedge::decompose(SystemState::excited(c.n_modes()), info);
  EXPECT_NEAR(e.decaying_part_norm, 1.0 - info.C, 1e-4);
  EXPECT_NEAR(std::abs(e.stable_part), std::sqrt(info.C), 1e-4);
  EXPECT_THROW(bandedge::decompose(SystemState::excited(3), info), bandedge::InvalidArgument);
}

TEST(Decompose, StableOverlapConservedUnderStaticEvolution) {
  const auto m = SpectrumModel::isotropic(1.0, 50.0);
  const auto c = bandedge::discretize(m);
  const auto info = bandedge::stable_state(m, 0.5, c);
  double lo = INFINITY, hi = -INFINITY;
  bandedge::PropagationOptions opt;
  opt.observer = [&](const SystemState& s) {
    const double a = std::abs(bandedge::decompose(s, info).stable_part);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  };
  bandedge::PropagationSettings st;
  st.horizon = 30.0;
  st.sampling = 0.5;
  bandedge::propagate(SystemState::excited(c.n_modes()), DetuningSchedule::constant(0.5), c, st, opt);
  EXPECT_LT(hi - lo, 1e-4);
}

TEST(PlateauLaw, LongTimePopulationIsWeightSquared) {
  const auto m = SpectrumModel::isotropic(1.0, 50.0);
  const auto c = bandedge::discretize(m);
  for (double delta : {0.5, 0.25}) {
    const double C = bandedge::stable_weight(m, bandedge::find_pole(m, delta));
    const auto pop = bandedge::propagate(SystemState::excited(c.n_modes()), DetuningSchedule::constant(delta),
                                         c, bandedge::PropagationSettings{})
                         .populations();
    const std::size_t from = pop.size() * 4 / 5;
    double mean = 0.0;
    for (std::size_t i = from; i < pop.size(); ++i) mean += pop[i];
    mean /= static_cast<double>(pop.size() - from);
    EXPECT_LT(std::abs(mean - C * C) / (C * C), 0.02) << delta;
  }
}

}  // namespace
