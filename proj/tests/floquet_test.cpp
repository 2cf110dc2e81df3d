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

#include "gkpfloquet/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "gkpfloquet/errors.hpp"

using namespace gkp;

namespace {

const FockSpace& space250() {
  static const FockSpace s(250);
  return s;
}

// exp(-i t H) for real symmetric H, through its eigendecomposition.
CMatrix symmetric_exponential(const RMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
  const CVector ph = (-t * es.eigenvalues()).unaryExpr([](double a) { return std::polar(1.0, a); });
  const CMatrix v = es.eigenvectors().cast<cplx>();
  return v * ph.asDiagonal() * v.adjoint();
}

// Resonant N = 4 model at the reference coupling, propagated once.
struct Reference {
  ModelParams params;
  PropagatorResult prop;
  FloquetSolution solution;
  GkpPair pair;
  RVector squeezing;
};

const Reference& reference() {
  static const Reference r = [] {
    Reference out;
    const DrivenModel model(space250(), out.params);
    out.prop = harmonic_propagator(model);
    out.solution = floquet_states(out.prop.u);
    const GkpMetrics metrics(space250());
    out.pair = select_gkp_states(out.solution, metrics);
    out.squeezing = floquet_squeezing(out.solution, metrics);
    return out;
  }();
  return r;
}

}  // namespace

TEST(IntegratorConfig, StepFloor) {
  IntegratorConfig cfg;
  EXPECT_EQ(cfg.resolve(4, default_floquet_steps(4)), 512);
  cfg.steps_per_period = 63;
  EXPECT_THROW(cfg.resolve(4, 512), Error);
  cfg.steps_per_period = 64;
  EXPECT_EQ(cfg.resolve(4, 512), 64);
}

TEST(KickedPropagator, ZeroCouplingIsIdentity) {
  const FockSpace s(40);
  ModelParams p;
  p.j_over_omega0 = 0.0;
  const CMatrix u = kicked_propagator(DrivenModel(s, p));
  EXPECT_LT((u - CMatrix::Identity(40, 40)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KickedPropagator, EqualsGkpHamiltonianExponential) {
  const FockSpace& s = space250();
  ModelParams p;
  const CMatrix u = kicked_propagator(DrivenModel(s, p));
  const CMatrix expected = symmetric_exponential(gkp_hamiltonian(s, p), kPeriod);
  EXPECT_LT(s.lower_half_distance(u, expected), 1e-6);
}

TEST(HarmonicPropagator, ZeroCouplingIsIdentity) {
  const FockSpace s(60);
  ModelParams p;
  p.j_over_omega0 = 0.0;
  const PropagatorResult r = harmonic_propagator(DrivenModel(s, p));
  EXPECT_LT((r.u - CMatrix::Identity(60, 60)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HarmonicPropagator, UnitaryAndConverged) {
  const Reference& r = reference();
  const auto d = r.prop.u.rows();
  EXPECT_LT((r.prop.u.adjoint() * r.prop.u - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(r.prop.convergence_error, 1e-7);
}

TEST(HarmonicPropagator, NonConvergenceIsReported) {
  const FockSpace s(60);
  ModelParams p;
  p.j_over_omega0 = 0.2;
  PropagatorOptions opts;
  opts.convergence_tol = 1e-15;
  try {
    harmonic_propagator(DrivenModel(s, p), {}, opts);
    FAIL() << "expected an integrator failure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIntegratorFailure);
  }
}

TEST(HarmonicPropagator, CommutatorFreeAgreesWithSplitStep) {
  const FockSpace& s = space250();
  const DrivenModel model(s, ModelParams{});
  const CMatrix fine = harmonic_propagator_fixed(model, IntegratorScheme::kSplitStep, 2048);
  const CMatrix c128 = harmonic_propagator_fixed(model, IntegratorScheme::kCommutatorFree4, 128);
  const CMatrix c256 = harmonic_propagator_fixed(model, IntegratorScheme::kCommutatorFree4, 256);
  const double e128 = s.lower_half_distance(c128, fine);
  const double e256 = s.lower_half_distance(c256, fine);
  EXPECT_LT(e256, 1e-6);
  // fourth order: halving the step gains well over the second-order factor 4
  EXPECT_GT(e128 / e256, 8.0);
}

TEST(HarmonicPropagator, EffectiveHamiltonianDeviationScalesAsJSquared) {
  const FockSpace& s = space250();
  std::vector<double> dev;
  for (double j : {1.25e-3, 2.5e-3, 5e-3}) {
    ModelParams p;
    p.j_over_omega0 = j;
    const PropagatorResult r = harmonic_propagator(DrivenModel(s, p));
    const CMatrix hn = truncated_gkp_hamiltonian(s, p).cast<cplx>();
    dev.push_back(low_energy_deviation(effective_hamiltonian(floquet_states(r.u)), hn));
    // O(J^2 / w0) with w0 = 1
    EXPECT_LT(dev.back(), 2.0 * j * j) << j;
  }
  EXPECT_NEAR(dev[1] / dev[0], 4.0, 0.4);
  EXPECT_NEAR(dev[2] / dev[1], 4.0, 0.4);
}

TEST(FloquetStates, Identity) {
  const FloquetSolution sol = floquet_states(CMatrix::Identity(12, 12));
  EXPECT_LT(sol.quasienergies.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((sol.states.adjoint() * sol.states - CMatrix::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FloquetStates, DiagonalPhasesGiveFockStates) {
  const int d = 12;
  const double theta = 0.7;
  CVector diag(d);
  for (int n = 0; n < d; ++n) diag(n) = std::polar(1.0, -theta * n);
  const FloquetSolution sol = floquet_states(CMatrix(diag.asDiagonal()));
  std::vector<int> seen(d, 0);
  for (int k = 0; k < d; ++k) {
    Eigen::Index n = 0;
    const double peak = sol.states.col(k).cwiseAbs().maxCoeff(&n);
    EXPECT_NEAR(peak, 1.0, 1e-12);
    ++seen[static_cast<std::size_t>(n)];
    double expected = theta * static_cast<double>(n) / kPeriod;
    const double zone = 2.0 * kPi / kPeriod;
    expected = std::remainder(expected, zone);
    if (expected <= -0.5 * zone) expected += zone;
    EXPECT_NEAR(sol.quasienergies(k), expected, 1e-12) << n;
  }
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

TEST(FloquetStates, RejectsNonUnitary) {
  CMatrix u = CMatrix::Identity(6, 6);
  u(2, 2) = 1.01;
  EXPECT_THROW(floquet_states(u), Error);
}

TEST(FloquetPair, ReferenceSqueezingAndInfidelity) {
  const GkpPair& p = reference().pair;
  EXPECT_NEAR(p.plus.squeezing.db(), 11.9, 0.2);
  EXPECT_NEAR(p.minus.squeezing.db(), 11.2, 0.2);
  EXPECT_NEAR(1.0 - p.plus.fidelity, 3.7e-3, 0.3 * 3.7e-3);
  EXPECT_NEAR(1.0 - p.minus.fidelity, 5.5e-3, 0.3 * 5.5e-3);
}

TEST(FloquetPair, OrthogonalWithOppositeRotationCharacter) {
  const GkpPair& p = reference().pair;
  EXPECT_NE(p.plus.index, p.minus.index);
  EXPECT_LT(p.overlap, 1e-8);
  EXPECT_GT(p.plus.rotation.real(), 0.99);
  EXPECT_LT(p.minus.rotation.real(), -0.99);
}

TEST(FloquetPair, SymmetricSqueezing) {
  const GkpPair& p = reference().pair;
  EXPECT_NEAR(p.plus.squeezing.db_x, p.plus.squeezing.db_p, 0.05);
  EXPECT_NEAR(p.minus.squeezing.db_x, p.minus.squeezing.db_p, 0.05);
}

// The cosine spectrum is symmetric under a half-lattice shift, so the top of
// the quasienergy band holds a mirror pair of displaced grid states. Exactly
// two states above 10 dB sit at each band edge and nowhere else.
TEST(FloquetPair, HighlySqueezedStatesSitAtTheBandEdges) {
  const Reference& r = reference();
  const auto d = r.squeezing.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return r.solution.quasienergies(a) < r.solution.quasienergies(b); });
  int bottom = 0, top = 0, elsewhere = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (!(r.squeezing(order[k]) > 10.0)) continue;
    if (k < 2) {
      ++bottom;
    } else if (k + 2 >= order.size()) {
      ++top;
    } else {
      ++elsewhere;
    }
  }
  EXPECT_EQ(bottom, 2);
  EXPECT_EQ(top, 2);
  EXPECT_EQ(elsewhere, 0);
  // the bottom pair is the selected GKP pair
  EXPECT_TRUE(order[0] == r.pair.plus.index || order[1] == r.pair.plus.index);
  EXPECT_TRUE(order[0] == r.pair.minus.index || order[1] == r.pair.minus.index);
}

TEST(FloquetStates, DetunedDriveGivesFockLikeStates) {
  const FockSpace& s = space250();
  const double w = 1.0 / (1.0 - kPi * 1e-2);
  // off resonance the splitting error no longer cancels over a period, so a
  // fixed fine grid is used; overlaps need far less than 1e-7 accuracy
  const CMatrix u = harmonic_propagator_fixed(DrivenModel(s, ModelParams{}), IntegratorScheme::kSplitStep, 2048, w);
  const FloquetSolution sol = floquet_states(u, kPeriod / w);
  double worst = 1.0;
  for (Eigen::Index k = 0; k < sol.states.cols(); ++k) worst = std::min(worst, sol.states.col(k).cwiseAbs2().maxCoeff());
  EXPECT_GT(worst, 0.99);
}

TEST(CanonicalPhase, LargestComponentRealPositive) {
  StateVector v(3);
  v << cplx{0.1, 0.2}, cplx{0.0, -0.9}, cplx{0.3, 0.0};
  const StateVector c = canonical_phase(v);
  EXPECT_NEAR(c(1).real(), std::abs(v(1)), 1e-14);
  EXPECT_NEAR(c(1).imag(), 0.0, 1e-14);
  EXPECT_NEAR(c.norm(), v.norm(), 1e-14);
}
