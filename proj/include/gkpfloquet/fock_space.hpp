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

#ifndef GKPFLOQUET_FOCK_SPACE_HPP
#define GKPFLOQUET_FOCK_SPACE_HPP

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gkp {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Single-mode state vector in the Fock basis. Kept as a plain Eigen vector:
/// every unitary step in the library renormalizes or reports the norm.
using StateVector = CVector;
/// Density matrix in the Fock basis.
using DensityMatrix = CMatrix;

inline constexpr double kPi = 3.14159265358979323846;
/// sqrt(2 pi): displacement amplitude of the square GKP stabilizers.
inline constexpr double kSqrt2Pi = 2.50662827463100050242;
inline constexpr double kSqrtPi = 1.77245385090551602730;

/// Truncated Fock space of one bosonic mode. Operators use dimensionless
/// quadratures x = (a^dag + a)/sqrt2, p = i(a^dag - a)/sqrt2. All cached
/// matrices are built once in the constructor and never mutated, so a
/// FockSpace can be shared freely between threads.
class FockSpace {
 public:
  explicit FockSpace(int dim);

  int dim() const { return dim_; }

  const CMatrix& annihilation() const { return a_; }
  const CMatrix& creation() const { return adag_; }
  /// Diagonal of a^dag a (entries 0..dim-1).
  const RVector& number_diagonal() const { return n_; }
  CMatrix number() const;
  const CMatrix& position() const { return x_; }
  const CMatrix& momentum() const { return p_; }

  /// D(alpha) = exp(alpha a^dag - conj(alpha) a), exact matrix elements of the
  /// infinite-dimensional operator restricted to the truncated space
  /// (Laguerre closed form). Warns when |alpha|^2 > dim/4 unless `quiet`.
  CMatrix displacement(cplx alpha, bool quiet = false) const;

  /// Same operator obtained by exponentiating the generator on a space padded
  /// by `padding` levels and truncating back. Used as an independent route.
  CMatrix displacement_by_generator(cplx alpha, int padding = 120) const;

  /// Diagonal of R(theta) = exp(i theta a^dag a).
  CVector rotation_diagonal(double theta) const;
  CMatrix rotation(double theta) const;

  StateVector fock_state(int n) const;

  /// Population in the top 10% of Fock levels.
  double leakage(const StateVector& state) const;
  double leakage(const DensityMatrix& rho) const;

  /// Index of the first level counted as "top" for leakage monitoring.
  int leakage_threshold_index() const;

  /// Projector-restricted comparison used throughout the tests: max-abs
  /// entry of (A - B) on Fock levels < dim/2.
  double lower_half_distance(const CMatrix& a, const CMatrix& b) const;

 private:
  int dim_;
  CMatrix a_;
  CMatrix adag_;
  RVector n_;
  CMatrix x_;
  CMatrix p_;
};

/// Normalized Hermite functions h_0..h_{count-1} evaluated at x, via the
/// three-term recurrence. Returns a count x grid.size() matrix. Throws
/// kNumerical naming the Fock index if the recurrence leaves the finite range.
RMatrix hermite_functions(int count, std::span<const double> grid);

/// psi(x) = sum_n c_n h_n(x).
CVector position_wavefunction(const StateVector& state, std::span<const double> grid);

/// Momentum-space wavefunction, psi~(p) = sum_n (-i)^n c_n h_n(p).
CVector momentum_wavefunction(const StateVector& state, std::span<const double> grid);

/// Uniformly spaced grid helper, inclusive of both ends.
std::vector<double> linspace(double lo, double hi, int count);

}  // namespace gkp

#endif  // GKPFLOQUET_FOCK_SPACE_HPP
