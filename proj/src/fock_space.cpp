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
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "gkpfloquet/errors.hpp"

namespace gkp {

namespace {

constexpr cplx kI{0.0, 1.0};

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

FockSpace::FockSpace(int dim) : dim_(dim) {
  if (dim < 2) fail(ErrorCode::kInvalidArgument, "Fock dimension must be >= 2");
  a_ = CMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a_(n - 1, n) = std::sqrt(static_cast<double>(n));
  adag_ = a_.adjoint();
  n_ = RVector::LinSpaced(dim, 0.0, dim - 1.0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  x_ = (adag_ + a_) * inv_sqrt2;
  p_ = kI * (adag_ - a_) * inv_sqrt2;
}

CMatrix FockSpace::number() const { return n_.cast<cplx>().asDiagonal(); }

CMatrix FockSpace::displacement(cplx alpha, bool quiet) const {
  if (!finite(alpha)) fail(ErrorCode::kInvalidArgument, "displacement: non-finite alpha");
  const double x = std::norm(alpha);
  if (!quiet && x > dim_ / 4.0) {
    std::ostringstream msg;
    msg << "displacement |alpha|^2 = " << x << " exceeds dim/4 = " << dim_ / 4.0
        << "; truncation artifacts dominate";
    warn(msg.str());
  }
  if (x == 0.0) return CMatrix::Identity(dim_, dim_);

  // Along the k-th diagonal the normalized functions
  //   h_n^(k) = sqrt(n!/(n+k)!) x^(k/2) e^(-x/2) L_n^(k)(x)
  // obey a three-term recurrence in n that is stable in the forward
  // direction and never forms factorials.
  const cplx phase = alpha / std::sqrt(x);
  const cplx lower_step = phase;             // <n+k|D|n> picks up phase^k
  const cplx upper_step = -std::conj(phase);  // <n|D|n+k> picks up (-phase*)^k
  CMatrix out = CMatrix::Zero(dim_, dim_);
  std::vector<double> h(dim_);
  cplx lower_phase{1.0, 0.0};
  cplx upper_phase{1.0, 0.0};
  for (int k = 0; k < dim_; ++k) {
    const int len = dim_ - k;
    h[0] = std::exp(0.5 * k * std::log(x) - 0.5 * x - 0.5 * std::lgamma(k + 1.0));
    if (len > 1) h[1] = (1.0 + k - x) * h[0] / std::sqrt(1.0 + k);
    for (int n = 1; n + 1 < len; ++n) {
      h[n + 1] = ((2.0 * n + 1.0 + k - x) * h[n] - std::sqrt(n * (n + static_cast<double>(k))) * h[n - 1]) /
                 std::sqrt((n + 1.0) * (n + 1.0 + k));
    }
    for (int n = 0; n < len; ++n) {
      out(n + k, n) = h[n] * lower_phase;
      if (k > 0) out(n, n + k) = h[n] * upper_phase;
    }
    lower_phase *= lower_step;
    upper_phase *= upper_step;
  }
  return out;
}

CMatrix FockSpace::displacement_by_generator(cplx alpha, int padding) const {
  if (!finite(alpha)) fail(ErrorCode::kInvalidArgument, "displacement: non-finite alpha");
  const FockSpace big(dim_ + padding);
  const CMatrix gen = alpha * big.creation() - std::conj(alpha) * big.annihilation();
  const CMatrix full = gen.exp();
  return full.topLeftCorner(dim_, dim_);
}

CVector FockSpace::rotation_diagonal(double theta) const {
  CVector d(dim_);
  for (int n = 0; n < dim_; ++n) d(n) = std::exp(kI * (theta * n));
  return d;
}

CMatrix FockSpace::rotation(double theta) const { return rotation_diagonal(theta).asDiagonal(); }

StateVector FockSpace::fock_state(int n) const {
  if (n < 0 || n >= dim_) fail(ErrorCode::kInvalidArgument, "Fock index out of range");
  StateVector s = StateVector::Zero(dim_);
  s(n) = 1.0;
  return s;
}

int FockSpace::leakage_threshold_index() const { return dim_ - (dim_ + 9) / 10; }

double FockSpace::leakage(const StateVector& state) const {
  const int start = leakage_threshold_index();
  return state.tail(dim_ - start).squaredNorm() / state.squaredNorm();
}

double FockSpace::leakage(const DensityMatrix& rho) const {
  const int start = leakage_threshold_index();
  return rho.diagonal().tail(dim_ - start).real().sum() / rho.trace().real();
}

double FockSpace::lower_half_distance(const CMatrix& a, const CMatrix& b) const {
  const int h = dim_ / 2;
  return (a.topLeftCorner(h, h) - b.topLeftCorner(h, h)).cwiseAbs().maxCoeff();
}

RMatrix hermite_functions(int count, std::span<const double> grid) {
  const auto npts = static_cast<Eigen::Index>(grid.size());
  RMatrix h(count, npts);
  const double norm0 = std::pow(kPi, -0.25);
  for (Eigen::Index j = 0; j < npts; ++j) {
    const double x = grid[static_cast<std::size_t>(j)];
    if (!std::isfinite(x)) fail(ErrorCode::kInvalidArgument, "hermite_functions: non-finite grid value");
    h(0, j) = norm0 * std::exp(-0.5 * x * x);
    if (count > 1) h(1, j) = std::sqrt(2.0) * x * h(0, j);
    for (int n = 2; n < count; ++n) {
      h(n, j) = std::sqrt(2.0 / n) * x * h(n - 1, j) - std::sqrt((n - 1.0) / n) * h(n - 2, j);
      if (!std::isfinite(h(n, j))) {
        std::ostringstream msg;
        msg << "Hermite recurrence overflow at Fock index " << n << " (x = " << x << ")";
        fail(ErrorCode::kNumerical, msg.str());
      }
    }
  }
  return h;
}

CVector position_wavefunction(const StateVector& state, std::span<const double> grid) {
  const RMatrix h = hermite_functions(static_cast<int>(state.size()), grid);
  return h.transpose().cast<cplx>() * state;
}

CVector momentum_wavefunction(const StateVector& state, std::span<const double> grid) {
  CVector rotated(state.size());
  cplx ph{1.0, 0.0};
  for (Eigen::Index n = 0; n < state.size(); ++n) {
    rotated(n) = ph * state(n);
    ph *= -kI;
  }
  return position_wavefunction(rotated, grid);
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
  return out;
}

}  // namespace gkp
