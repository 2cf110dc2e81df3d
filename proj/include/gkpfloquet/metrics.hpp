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

#ifndef GKPFLOQUET_METRICS_HPP
#define GKPFLOQUET_METRICS_HPP

#include <iosfwd>
#include <span>

#include "gkpfloquet/fock_space.hpp"

namespace gkp {

/// kX is D(sqrt(2 pi)) (a translation along x), kP is D(i sqrt(2 pi)).
enum class StabilizerKind { kX, kP };

enum class LogicalTarget { kHPlus, kHMinus };

struct SqueezingReport {
  double delta_x = 0.0;
  double delta_p = 0.0;
  double db_x = 0.0;
  double db_p = 0.0;

  /// Mean of the two dB values; the headline number for symmetric states.
  double db() const { return 0.5 * (db_x + db_p); }
};

/// Squeezing parameter from a stabilizer expectation value. Throws
/// kNumerical when |s| = 0 (undefined) or |s| > 1 + 1e-8.
double squeezing_delta(cplx stabilizer_value);
double delta_to_db(double delta);

/// Decoded two-level state, rho = (I + x X + y Y + z Z) / 2.
struct LogicalState {
  Eigen::Matrix2cd rho;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static LogicalState from_bloch(double x, double y, double z);
  double fidelity(LogicalTarget target) const;
  double fidelity(const Eigen::Vector2cd& target) const;
  double bloch_length() const;
};

/// Hadamard eigenvector; |H+> = cos(pi/8)|0> + sin(pi/8)|1>.
Eigen::Vector2cd hadamard_eigenvector(LogicalTarget target);

/// Ideal subsystem decoder. The logical Paulis of the stabilizer subsystem
/// decomposition are
///   Z = sgn cos(sqrt(pi) x),  X = R Z R^dag = sgn cos(sqrt(pi) p),
///   Y = (i/2) [X, Z],
/// with R = R(pi/2). Their Fock matrices are built once by Gauss-Legendre
/// quadrature over each sqrt(pi) bin; decoding is then a trace with each.
class Decoder {
 public:
  explicit Decoder(const FockSpace& space);

  int dim() const { return dim_; }
  const CMatrix& pauli_x() const { return x_; }
  const CMatrix& pauli_y() const { return y_; }
  const CMatrix& pauli_z() const { return z_; }

  /// Throws kDecoderConsistency when the Bloch vector leaves the unit ball by
  /// more than 1e-6 (Fock truncation or a non-normalizable input).
  LogicalState decode(const StateVector& state) const;
  LogicalState decode(const DensityMatrix& rho) const;
  double logical_fidelity(const StateVector& state, LogicalTarget target) const;
  double logical_fidelity(const DensityMatrix& rho, LogicalTarget target) const;

 private:
  LogicalState finish(double x, double y, double z) const;
  int dim_;
  CMatrix x_;
  CMatrix y_;
  CMatrix z_;
};

/// Grid route for states given directly as wavefunctions on a uniform grid:
/// Z from the binned position density and X from the binned momentum
/// density. Y is not accessible from the two marginals and is set to 0.
LogicalState decode_marginals(std::span<const double> grid, std::span<const cplx> psi_x,
                              std::span<const cplx> psi_p);

/// Stabilizers, squeezing and decoder for one Fock space.
class GkpMetrics {
 public:
  explicit GkpMetrics(const FockSpace& space);

  const FockSpace& space() const { return *space_; }
  const Decoder& decoder() const { return decoder_; }
  const CMatrix& stabilizer(StabilizerKind kind) const { return kind == StabilizerKind::kX ? dx_ : dp_; }

  /// Normalized expectation values (the state or rho need not be normalized).
  cplx stabilizer_expectation(const StateVector& state, StabilizerKind kind) const;
  cplx stabilizer_expectation(const DensityMatrix& rho, StabilizerKind kind) const;
  SqueezingReport squeezing(const StateVector& state) const;
  SqueezingReport squeezing(const DensityMatrix& rho) const;

 private:
  const FockSpace* space_;
  CMatrix dx_;
  CMatrix dp_;
  Decoder decoder_;
};

SqueezingReport squeezing_from_stabilizers(cplx sx, cplx sp);

/// Wigner function on the grid, W(i, j) = W(x_i, p_j), from the displaced
/// parity (1/pi) <D(alpha) P D(alpha)^dag>, alpha = (x + i p)/sqrt2, normalized
/// so that the integral over dx dp is 1.
RMatrix wigner(const FockSpace& space, const StateVector& state, std::span<const double> xs,
               std::span<const double> ps);
RMatrix wigner(const FockSpace& space, const DensityMatrix& rho, std::span<const double> xs,
               std::span<const double> ps);

struct Marginals {
  RVector position;
  RVector momentum;
};
Marginals marginals(const StateVector& state, std::span<const double> xs, std::span<const double> ps);
Marginals marginals(const DensityMatrix& rho, std::span<const double> xs, std::span<const double> ps);

/// CSV writers (header line, then x,p,W rows / x,P(x) rows).
void write_wigner_csv(std::ostream& out, std::span<const double> xs, std::span<const double> ps, const RMatrix& w);
void write_marginal_csv(std::ostream& out, const char* column, std::span<const double> grid, const RVector& values);

}  // namespace gkp

#endif  // GKPFLOQUET_METRICS_HPP
