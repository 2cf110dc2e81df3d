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

#ifndef GKPFLOQUET_FLOQUET_HPP
#define GKPFLOQUET_FLOQUET_HPP

#include "gkpfloquet/hamiltonians.hpp"
#include "gkpfloquet/metrics.hpp"

namespace gkp {

enum class IntegratorScheme {
  /// Strang splitting of a^dag a against the x-diagonal drive terms.
  kSplitStep,
  /// Fourth-order commutator-free exponential integrator on the full
  /// generator; slower, used as a cross-check.
  kCommutatorFree4,
};

struct IntegratorConfig {
  IntegratorScheme scheme = IntegratorScheme::kSplitStep;
  /// Steps per drive period; 0 selects the default for the caller.
  int steps_per_period = 0;

  /// Returns the step count to use, `fallback` when unset. Throws
  /// kInvalidArgument below 16 N (fewer than four steps per cycle of the
  /// fastest harmonic).
  int resolve(int n_harmonics, int fallback) const;
};

/// 128 N steps per period for one-period propagators.
int default_floquet_steps(int n_harmonics);

/// (R(-w0 T/4) exp(i J (T/2) cos(2 sqrt(pi) eta x)))^4, each factor exact.
/// `quarter_angle` is w0 T / 4 (pi/2 at resonance).
CMatrix kicked_propagator(const DrivenModel& model, double quarter_angle = kPi / 2);

struct PropagatorOptions {
  /// Drive frequency w / w0; the propagator spans one drive period 2 pi / w.
  double drive_frequency = 1.0;
  /// Repeat with doubled step counts until successive results agree.
  bool check_convergence = true;
  double convergence_tol = 1e-7;
};

struct PropagatorResult {
  CMatrix u;
  int steps_per_period = 0;
  /// Lower-half max-abs change under the last step doubling (0 if unchecked).
  double convergence_error = 0.0;
};

/// One-period propagator of the harmonically driven model. Throws
/// kIntegratorFailure if the result still moves by more than the tolerance
/// after doubling to 4x the initial step count.
PropagatorResult harmonic_propagator(const DrivenModel& model, const IntegratorConfig& cfg = {},
                                     const PropagatorOptions& opts = {});

/// Single pass without convergence control.
CMatrix harmonic_propagator_fixed(const DrivenModel& model, IntegratorScheme scheme, int steps_per_period,
                                  double drive_frequency = 1.0);

struct FloquetSolution {
  /// Period in units of 1/w0.
  double period = kPeriod;
  CVector eigenvalues;
  /// Orthonormal Floquet states as columns.
  CMatrix states;
  /// -arg(lambda) / period, folded into (-pi/period, pi/period].
  RVector quasienergies;
};

/// Eigendecomposition of a one-period propagator (complex Schur form, which
/// is diagonal with orthonormal vectors for unitary input). Throws
/// kNumerical if U is not unitary within 1e-8 or an eigenpair residual
/// exceeds 1e-8.
FloquetSolution floquet_states(const CMatrix& u, double period = kPeriod);

/// Q diag(quasienergies) Q^dag.
CMatrix effective_hamiltonian(const FloquetSolution& solution);

/// Spectral norm of (A - B) restricted to the lowest `fraction` of Fock levels.
double low_energy_deviation(const CMatrix& a, const CMatrix& b, double fraction = 0.6);

struct GkpStateInfo {
  int index = -1;
  double fidelity = 0.0;
  SqueezingReport squeezing;
  double quasienergy = 0.0;
  /// <R(pi/2)>.
  cplx rotation{0.0, 0.0};
};

struct GkpPair {
  GkpStateInfo plus;
  GkpStateInfo minus;
  /// |<psi+|psi->|.
  double overlap = 0.0;
};

/// Picks the Floquet states with maximal decoded fidelity to |H+> and |H->,
/// ties broken by squeezing.
GkpPair select_gkp_states(const FloquetSolution& solution, const GkpMetrics& metrics);

/// Squeezing (mean dB) of every Floquet state; NaN where undefined.
RVector floquet_squeezing(const FloquetSolution& solution, const GkpMetrics& metrics);

/// Rephases v so that its largest-magnitude component is real positive.
StateVector canonical_phase(const StateVector& v);

}  // namespace gkp

#endif  // GKPFLOQUET_FLOQUET_HPP
