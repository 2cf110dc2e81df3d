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

#ifndef GKPFLOQUET_HAMILTONIANS_HPP
#define GKPFLOQUET_HAMILTONIANS_HPP

#include <optional>

#include "gkpfloquet/fock_space.hpp"

namespace gkp {

// Units: hbar = 1, frequencies in units of the oscillator frequency w0,
// times in units of 1/w0 internally. Public time arguments named *_periods
// are in units of the drive period T = 2 pi / w0.

inline constexpr double kPeriod = 2.0 * kPi;

/// Dimensionless parameters of the driven oscillator.
struct ModelParams {
  double j_over_omega0 = 2.5e-3;
  int n_harmonics = 4;
  /// eta^2 = Z / (2 R_Q).
  double impedance_ratio = 1.0;
  /// d = Delta E_J / E_J.
  double ej_asymmetry = 0.0;
  /// epsilon = hbar J / E_J; fixes E_J / (hbar w0) = J / (epsilon w0).
  double drive_epsilon = 1.25e-3;

  /// Throws kInvalidArgument on out-of-range values.
  void validate() const;
  double eta() const;
  double ej_over_omega0() const { return j_over_omega0 / drive_epsilon; }
};

struct CircuitParams {
  double ej_over_h_ghz = 2.0;
  double omega0_over_2pi_ghz = 1.0;
  double epsilon = 1.25e-3;
  int n_harmonics = 4;
  std::optional<double> inductance_nh;
  std::optional<double> capacitance_ff;
  std::optional<double> junction_capacitance_ff;
};

struct CircuitMapping {
  ModelParams params;
  double max_modulation_ghz = 0.0;
  /// epsilon (2 + 4N), peak excursion of the flux drive in units of phi_0.
  double peak_flux_excursion = 0.0;
  std::optional<double> impedance_ohm;
  /// 1/sqrt(L C_sigma) / 2 pi when L and capacitances are given.
  std::optional<double> lc_frequency_ghz;
};

/// Resistance quantum h / (2e)^2 in ohm.
inline constexpr double kResistanceQuantum = 6453.2074098;

CircuitMapping circuit_map(const CircuitParams& circuit);

enum class DriveKind { kDeltaKick, kHarmonic };

/// Periodic modulation f(t). The delta-kick drive is a tag consumed by the
/// kicked propagator; it has no pointwise values.
struct DriveFunction {
  DriveKind kind = DriveKind::kHarmonic;
  int n_harmonics = 4;

  /// f at time t (units of T) for drive frequency w0. Throws
  /// kContractViolation for the delta-kick drive.
  double value(double t_periods) const;
  /// f as a function of the accumulated drive phase theta = integral w dt.
  double value_at_phase(double theta) const;
};

/// cos(2 sqrt(pi) eta x), built from displacement operators.
RMatrix cos_x_operator(const FockSpace& space, double eta = 1.0);
/// sin(2 sqrt(pi) eta x), built from displacement operators.
RMatrix sin_x_operator(const FockSpace& space, double eta = 1.0);
/// cos(2 sqrt(pi) p / eta), built from displacement operators.
RMatrix cos_p_operator(const FockSpace& space, double eta = 1.0);

/// -J (cos(2 sqrt(pi) eta x) + cos(2 sqrt(pi) p / eta)).
RMatrix gkp_hamiltonian(const FockSpace& space, const ModelParams& params);
/// gkp_hamiltonian with every |m - n| > 4N entry removed.
RMatrix truncated_gkp_hamiltonian(const FockSpace& space, const ModelParams& params);
RMatrix band_limit(const RMatrix& h, int half_width);

/// Operator content of the driven Hamiltonian
///   H(t) = w0 n + c_cos(t) cos(2 sqrt(pi) eta x) + c_sin(t) sin(2 sqrt(pi) eta x)
/// with
///   c_cos = -J f(t) + (E_J/hbar) dphi(t)
///   c_sin = -d (E_J/hbar) cos((epsilon f(t) - dphi(t)) / 2)
/// where dphi is the flux-noise deviation of the SQUID loop phase (radians).
/// The sin term is the asymmetric-SQUID contribution, present only for
/// d != 0: junction energies E_J -+ d E_J / 2 differ by d E_J.
class DrivenModel {
 public:
  DrivenModel(const FockSpace& space, const ModelParams& params);

  const FockSpace& space() const { return *space_; }
  const ModelParams& params() const { return params_; }
  const RMatrix& cos_operator() const { return cos_x_; }
  const RMatrix& sin_operator() const { return sin_x_; }
  bool has_asymmetry() const { return params_.ej_asymmetry != 0.0; }

  struct Coefficients {
    double cos_term = 0.0;
    double sin_term = 0.0;
  };
  Coefficients coefficients(double drive_value, double flux_phase_deviation = 0.0) const;

  /// Dense H at time t (units of T), harmonic drive at frequency w0.
  CMatrix hamiltonian(const DriveFunction& drive, double t_periods) const;
  CMatrix hamiltonian_from_coefficients(const Coefficients& c) const;

 private:
  const FockSpace* space_;
  ModelParams params_;
  RMatrix cos_x_;
  RMatrix sin_x_;
};

}  // namespace gkp

#endif  // GKPFLOQUET_HAMILTONIANS_HPP
