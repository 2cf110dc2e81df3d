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

#ifndef GKPFLOQUET_PROPAGATION_HPP
#define GKPFLOQUET_PROPAGATION_HPP

#include <functional>
#include <span>
#include <vector>

#include "gkpfloquet/fock_space.hpp"
#include "gkpfloquet/hamiltonians.hpp"

namespace gkp {

/// Split-operator kernel for generators of the form
///   G(t) = n - (i/2) kappa n + sum_j g_j(t) O_j
/// where the O_j are real symmetric and mutually commuting (functions of x).
///
/// One step of length dt is
///   F(dt/2) K(dt) F(dt/2),  F(s) = exp(-(i + kappa/2) n s),
///   K(dt) = prod_j V_j exp(-i dt g_j lambda_j) V_j^T,
/// with g_j evaluated at the step midpoint by the caller.
///
/// When every O_j conserves photon-number parity the space splits into even
/// and odd blocks that are propagated independently. States are held as real
/// matrices [Re | Im] per block so that every basis change is a real gemm.
class SplitStepKernel {
 public:
  SplitStepKernel(const RVector& number_diagonal, std::vector<RMatrix> kick_operators, double damping_rate = 0.0);

  int dim() const { return dim_; }
  int num_terms() const { return num_terms_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  bool parity_blocked() const { return blocks_.size() == 2; }
  double damping_rate() const { return kappa_; }
  const std::vector<int>& block_indices(int b) const { return blocks_[static_cast<std::size_t>(b)].indices; }
  int block_dim(int b) const { return static_cast<int>(block_indices(b).size()); }

  /// Cached free-evolution factors for one duration.
  struct FreeFactors {
    double duration = 0.0;
    std::vector<RVector> re;
    std::vector<RVector> im;
  };
  FreeFactors free_factors(double duration) const;

  /// Block-resolved state: blocks[b] is block_dim(b) x 2*cols, [Re | Im].
  struct Work {
    int cols = 0;
    std::vector<RMatrix> blocks;
    std::vector<char> active;
  };
  Work load(const CMatrix& columns) const;
  Work load(const StateVector& state) const;
  CMatrix store(const Work& work) const;
  StateVector store_vector(const Work& work) const;
  /// Identity restricted to block b (block_dim x 2*block_dim).
  RMatrix block_identity(int b) const;

  void apply_free(RMatrix& x, int block, const FreeFactors& f) const;
  void apply_kick(RMatrix& x, int block, std::span<const double> coeffs, double dt) const;
  /// F(dt/2) K(dt) F(dt/2) on every active block; `half` must be free_factors(dt/2).
  void step(Work& work, std::span<const double> coeffs, double dt, const FreeFactors& half) const;
  void step_block(RMatrix& x, int block, std::span<const double> coeffs, double dt, const FreeFactors& half) const;

  /// Kick with a separate coefficient per column; `coeffs` is num_terms x cols.
  /// One gemm pair per term, as for shared coefficients.
  void apply_kick_columns(RMatrix& x, int block, const RMatrix& coeffs, double dt) const;
  void step_columns(Work& work, const RMatrix& coeffs, double dt, const FreeFactors& half) const;

  /// Squared norm of a single-column Work.
  static double norm_squared(const Work& work);

 private:
  struct Block {
    std::vector<int> indices;
    RVector number;
    std::vector<RMatrix> basis;
    std::vector<RVector> eigenvalues;
  };
  int dim_;
  int num_terms_;
  double kappa_;
  std::vector<Block> blocks_;
};

/// Uniformly sampled real signal on [0, dt (n-1)], linearly interpolated.
struct SampledSignal {
  double dt = 0.0;
  std::vector<double> values;

  /// Throws kContractViolation outside the sampled window.
  double at(double t) const;
};

/// Kick coefficients of a DrivenModel along a drive-phase history theta(t)
/// (t in units of 1/w0), optionally with a flux-noise phase signal.
class DriveProgram {
 public:
  using PhaseFunction = std::function<double(double)>;

  DriveProgram(const DrivenModel& model, PhaseFunction phase, const SampledSignal* flux = nullptr);

  /// Constant drive frequency w (units of w0), theta = w t.
  static DriveProgram constant(const DrivenModel& model, double frequency = 1.0);

  int num_terms() const { return model_->has_asymmetry() ? 2 : 1; }
  void coefficients(double t, std::span<double> out) const;
  /// f(theta(t)).
  double drive_value(double t) const;
  const DrivenModel& model() const { return *model_; }

 private:
  const DrivenModel* model_;
  PhaseFunction phase_;
  const SampledSignal* flux_;
  DriveFunction drive_;
};

/// Kernel whose kick terms are the model's cos (and sin) operators.
SplitStepKernel make_kernel(const DrivenModel& model, double damping_rate = 0.0);

}  // namespace gkp

#endif  // GKPFLOQUET_PROPAGATION_HPP
