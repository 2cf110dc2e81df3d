// Copyright 2026 The gkpfloquet Authors
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

#include "gkpfloquet/fock_space.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "gkpfloquet/errors.hpp"

using namespace gkp;

TEST(FockSpace, RejectsTinyDimension) {
  EXPECT_THROW(FockSpace(1), Error);
}

TEST(FockSpace, LadderAlgebraBelowCutoff) {
  FockSpace s(40);
  const CMatrix comm = s.annihilation() * s.creation() - s.creation() * s.annihilation();
  // [a, a^dag] = 1 except at the truncation edge.
  EXPECT_LT((comm.topLeftCorner(39, 39) - CMatrix::Identity(39, 39)).norm(), 1e-12);
  EXPECT_LT((s.creation() * s.annihilation() - s.number()).norm(), 1e-12);
}

TEST(Displacement, ZeroIsIdentity) {
  FockSpace s(60);
  EXPECT_LT((s.displacement(0.0) - CMatrix::Identity(60, 60)).norm(), 1e-15);
}

TEST(Displacement, VacuumElementAtStabilizerAmplitude) {
  FockSpace s(250);
  const cplx v = s.displacement(cplx{kSqrt2Pi, 0.0})(0, 0);
  EXPECT_NEAR(v.real(), std::exp(-kPi), 1e-14);
  EXPECT_NEAR(v.imag(), 0.0, 1e-14);
}

TEST(Displacement, InverseOnLowerHalf) {
  FockSpace s(250);
  const cplx alpha{1.1, -0.7};
  const CMatrix prod = s.displacement(alpha) * s.displacement(-alpha);
  EXPECT_LT(s.lower_half_distance(prod, CMatrix::Identity(250, 250)), 1e-10);
}

TEST(Displacement, ClosedFormMatchesGenerator) {
  FockSpace s(80);
  for (cplx alpha : {cplx{0.3, 0.0}, cplx{0.0, kSqrt2Pi}, cplx{-1.2, 0.8}, cplx{kSqrt2Pi, 0.0}}) {
    const CMatrix a = s.displacement(alpha);
    const CMatrix b = s.displacement_by_generator(alpha);
    EXPECT_LT(s.lower_half_distance(a, b), 1e-8) << "alpha = " << alpha;
  }
}

TEST(Displacement, CoherentStateColumn) {
  // D(alpha)|0> has Poisson amplitudes e^{-|a|^2/2} a^n / sqrt(n!).
  FockSpace s(60);
  const cplx alpha{0.8, 0.5};
  const CVector col = s.displacement(alpha).col(0);
  cplx expected = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n < 20; ++n) {
    EXPECT_LT(std::abs(col(n) - expected), 1e-13) << n;
    expected *= alpha / std::sqrt(n + 1.0);
  }
}

TEST(Displacement, WarnsOnLargeAmplitude) {
  int count = 0;
  set_warning_sink([](const char*, void* user) { ++*static_cast<int*>(user); }, &count);
  FockSpace s(20);
  s.displacement(cplx{3.0, 0.0});
  set_warning_sink([](const char*, void*) {}, nullptr);
  EXPECT_EQ(count, 1);
}

TEST(Displacement, RejectsNonFinite) {
  FockSpace s(10);
  EXPECT_THROW(s.displacement(cplx{std::numeric_limits<double>::quiet_NaN(), 0.0}), Error);
}

TEST(Rotation, ZeroAndFullTurn) {
  FockSpace s(50);
  EXPECT_LT((s.rotation(0.0) - CMatrix::Identity(50, 50)).norm(), 1e-15);
  const CMatrix r = s.rotation(kPi / 2);
  EXPECT_LT((r * r * r * r - CMatrix::Identity(50, 50)).norm(), 1e-12);
}

TEST(Rotation, RotatesQuadratures) {
  // R(t) x R(-t) = x cos t + p sin t.
  FockSpace s(60);
  const double t = 0.7;
  const CMatrix lhs = s.rotation(t) * s.position() * s.rotation(-t);
  const CMatrix rhs = s.position() * std::cos(t) + s.momentum() * std::sin(t);
  EXPECT_LT(s.lower_half_distance(lhs, rhs), 1e-12);
}

TEST(Hermite, Orthonormal) {
  const std::vector<double> grid = linspace(-20.0, 20.0, 4001);
  const RMatrix h = hermite_functions(60, grid);
  const double dx = grid[1] - grid[0];
  const RMatrix gram = h * h.transpose() * dx;
  EXPECT_LT((gram - RMatrix::Identity(60, 60)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Hermite, MomentumOfVacuumIsGaussian) {
  FockSpace s(10);
  const std::vector<double> grid = {-1.0, 0.0, 0.5, 2.0};
  const CVector psi = momentum_wavefunction(s.fock_state(0), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(psi(static_cast<Eigen::Index>(i)).real(), std::pow(kPi, -0.25) * std::exp(-0.5 * grid[i] * grid[i]),
                1e-15);
  }
}

TEST(Leakage, TopTenPercent) {
  FockSpace s(100);
  StateVector v = StateVector::Zero(100);
  v(0) = 1.0;
  v(95) = 1.0;
  EXPECT_NEAR(s.leakage(v), 0.5, 1e-15);
  EXPECT_EQ(s.leakage_threshold_index(), 90);
}
