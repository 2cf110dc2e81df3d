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

#include "gkpfloquet/hamiltonians.hpp"

#include <cmath>
#include <sstream>

#include "gkpfloquet/errors.hpp"

namespace gkp {

namespace {

constexpr cplx kI{0.0, 1.0};

}  // namespace

void ModelParams::validate() const {
  std::ostringstream msg;
  if (!(j_over_omega0 >= 0.0) || !std::isfinite(j_over_omega0)) {
    msg << "j_over_omega0 must be finite and >= 0 (got " << j_over_omega0 << ")";
  } else if (n_harmonics < 1) {
    msg << "n_harmonics must be >= 1 (got " << n_harmonics << ")";
  } else if (!(impedance_ratio > 0.5 && impedance_ratio < 1.5)) {
    msg << "impedance_ratio must lie in (0.5, 1.5) (got " << impedance_ratio << ")";
  } else if (!(std::abs(ej_asymmetry) < 1.0)) {
    msg << "ej_asymmetry must satisfy |d| < 1 (got " << ej_asymmetry << ")";
  } else if (!(drive_epsilon > 0.0) || !std::isfinite(drive_epsilon)) {
    msg << "drive_epsilon must be > 0 (got " << drive_epsilon << ")";
  } else {
    return;
  }
  fail(ErrorCode::kInvalidArgument, msg.str());
}

double ModelParams::eta() const { return std::sqrt(impedance_ratio); }

CircuitMapping circuit_map(const CircuitParams& c) {
  if (!(c.ej_over_h_ghz > 0.0) || !(c.omega0_over_2pi_ghz > 0.0) || !(c.epsilon >= 0.0) || c.n_harmonics < 1) {
    fail(ErrorCode::kInvalidArgument, "circuit_map: E_J, w0 and N must be positive and epsilon >= 0");
  }
  CircuitMapping out;
  out.params.n_harmonics = c.n_harmonics;
  out.params.j_over_omega0 = c.epsilon * c.ej_over_h_ghz / c.omega0_over_2pi_ghz;
  // epsilon = 0 leaves E_J/(hbar J) undefined; keep the default so that the
  // asymmetry coefficient stays finite.
  if (c.epsilon > 0.0) out.params.drive_epsilon = c.epsilon;
  out.max_modulation_ghz = 4.0 * c.n_harmonics * c.omega0_over_2pi_ghz;
  out.peak_flux_excursion = c.epsilon * (2.0 + 4.0 * c.n_harmonics);
  if (out.peak_flux_excursion > 0.1) {
    std::ostringstream msg;
    msg << "weak-drive condition violated: epsilon (2 + 4N) = " << out.peak_flux_excursion << " > 0.1";
    warn(msg.str());
  }
  if (c.inductance_nh && c.capacitance_ff && c.junction_capacitance_ff) {
    const double l = *c.inductance_nh * 1e-9;
    const double c_sigma = (2.0 * *c.junction_capacitance_ff + *c.capacitance_ff) * 1e-15;
    if (!(l > 0.0) || !(c_sigma > 0.0)) fail(ErrorCode::kInvalidArgument, "circuit_map: L and C must be positive");
    const double z = std::sqrt(l / c_sigma);
    out.impedance_ohm = z;
    out.lc_frequency_ghz = 1.0 / std::sqrt(l * c_sigma) / (2.0 * kPi) * 1e-9;
    out.params.impedance_ratio = z / (2.0 * kResistanceQuantum);
    if (!(out.params.impedance_ratio > 0.5 && out.params.impedance_ratio < 1.5)) {
      std::ostringstream msg;
      msg << "circuit impedance " << z << " ohm gives Z/(2 R_Q) = " << out.params.impedance_ratio
          << ", outside (0.5, 1.5)";
      fail(ErrorCode::kInvalidArgument, msg.str());
    }
  }
  return out;
}

double DriveFunction::value(double t_periods) const {
  if (kind == DriveKind::kDeltaKick) {
    fail(ErrorCode::kContractViolation, "delta-kick drive has no pointwise values");
  }
  return value_at_phase(kPeriod * t_periods);
}

double DriveFunction::value_at_phase(double theta) const {
  if (kind == DriveKind::kDeltaKick) {
    fail(ErrorCode::kContractViolation, "delta-kick drive has no pointwise values");
  }
  double f = 2.0;
  for (int n = 1; n <= n_harmonics; ++n) f += 4.0 * std::cos(4.0 * n * theta);
  return f;
}

namespace {

// (D(i b) + s D(-i b)) / norm for b real, i.e. the x-type cosine/sine.
RMatrix x_type(const FockSpace& space, double beta, bool sine) {
  const CMatrix plus = space.displacement(cplx{0.0, beta});
  const CMatrix minus = space.displacement(cplx{0.0, -beta});
  const CMatrix m = sine ? CMatrix((plus - minus) / (2.0 * kI)) : CMatrix((plus + minus) / 2.0);
  return m.real();
}

}  // namespace

RMatrix cos_x_operator(const FockSpace& space, double eta) { return x_type(space, kSqrt2Pi * eta, false); }

RMatrix sin_x_operator(const FockSpace& space, double eta) { return x_type(space, kSqrt2Pi * eta, true); }

RMatrix cos_p_operator(const FockSpace& space, double eta) {
  const double beta = kSqrt2Pi / eta;
  const CMatrix m = (space.displacement(cplx{beta, 0.0}) + space.displacement(cplx{-beta, 0.0})) / 2.0;
  return m.real();
}

RMatrix gkp_hamiltonian(const FockSpace& space, const ModelParams& params) {
  params.validate();
  const double eta = params.eta();
  return -params.j_over_omega0 * (cos_x_operator(space, eta) + cos_p_operator(space, eta));
}

RMatrix band_limit(const RMatrix& h, int half_width) {
  RMatrix out = h;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      if (std::abs(i - j) > half_width) out(i, j) = 0.0;
    }
  }
  return out;
}

RMatrix truncated_gkp_hamiltonian(const FockSpace& space, const ModelParams& params) {
  return band_limit(gkp_hamiltonian(space, params), 4 * params.n_harmonics);
}

DrivenModel::DrivenModel(const FockSpace& space, const ModelParams& params) : space_(&space), params_(params) {
  params_.validate();
  cos_x_ = cos_x_operator(space, params_.eta());
  if (has_asymmetry()) sin_x_ = sin_x_operator(space, params_.eta());
}

DrivenModel::Coefficients DrivenModel::coefficients(double drive_value, double flux_phase_deviation) const {
  Coefficients c;
  const double ej = params_.ej_over_omega0();
  c.cos_term = -params_.j_over_omega0 * drive_value + ej * flux_phase_deviation;
  if (has_asymmetry()) {
    c.sin_term = -params_.ej_asymmetry * ej *
                 std::cos(0.5 * (params_.drive_epsilon * drive_value - flux_phase_deviation));
  }
  return c;
}

CMatrix DrivenModel::hamiltonian_from_coefficients(const Coefficients& c) const {
  CMatrix h = (c.cos_term * cos_x_).cast<cplx>();
  if (has_asymmetry()) h += (c.sin_term * sin_x_).cast<cplx>();
  h.diagonal() += space_->number_diagonal().cast<cplx>();
  return h;
}

CMatrix DrivenModel::hamiltonian(const DriveFunction& drive, double t_periods) const {
  return hamiltonian_from_coefficients(coefficients(drive.value(t_periods)));
}

}  // namespace gkp
