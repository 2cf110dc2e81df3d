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

#include "gkpfloquet/propagation.hpp"

#include <algorithm>
#include <cmath>

#include "gkpfloquet/errors.hpp"

namespace gkp {

namespace {

bool conserves_parity(const RMatrix& op) {
  for (Eigen::Index j = 0; j < op.cols(); ++j) {
    for (Eigen::Index i = (j + 1) % 2; i < op.rows(); i += 2) {
      if (op(i, j) != 0.0) return false;
    }
  }
  return true;
}

RMatrix restrict(const RMatrix& op, const std::vector<int>& idx) {
  const auto d = static_cast<Eigen::Index>(idx.size());
  RMatrix out(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) out(i, j) = op(idx[i], idx[j]);
  }
  return out;
}

// x <- diag(c + i s) x for x = [Re | Im].
void multiply_rows(RMatrix& x, const RVector& c, const RVector& s) {
  const Eigen::Index k = x.cols() / 2;
  for (Eigen::Index j = 0; j < k; ++j) {
    auto re = x.col(j).array();
    auto im = x.col(j + k).array();
    const Eigen::ArrayXd r0 = re;
    re = c.array() * r0 - s.array() * im;
    im = s.array() * r0 + c.array() * im;
  }
}

}  // namespace

SplitStepKernel::SplitStepKernel(const RVector& number_diagonal, std::vector<RMatrix> kick_operators,
                                 double damping_rate)
    : dim_(static_cast<int>(number_diagonal.size())),
      num_terms_(static_cast<int>(kick_operators.size())),
      kappa_(damping_rate) {
  if (!(damping_rate >= 0.0) || !std::isfinite(damping_rate)) {
    fail(ErrorCode::kInvalidArgument, "damping rate must be finite and >= 0");
  }
  bool blocked = true;
  for (const auto& op : kick_operators) {
    if (op.rows() != dim_ || op.cols() != dim_) fail(ErrorCode::kInvalidArgument, "kick operator has wrong shape");
    blocked = blocked && conserves_parity(op);
  }
  if (blocked) {
    blocks_.resize(2);
    for (int n = 0; n < dim_; ++n) blocks_[static_cast<std::size_t>(n % 2)].indices.push_back(n);
  } else {
    blocks_.resize(1);
    for (int n = 0; n < dim_; ++n) blocks_[0].indices.push_back(n);
  }
  for (auto& blk : blocks_) {
    const auto d = static_cast<Eigen::Index>(blk.indices.size());
    blk.number.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) blk.number(i) = number_diagonal(blk.indices[i]);
    for (const auto& op : kick_operators) {
      Eigen::SelfAdjointEigenSolver<RMatrix> es(restrict(op, blk.indices));
      if (es.info() != Eigen::Success) fail(ErrorCode::kNumerical, "kick operator diagonalization failed");
      blk.basis.push_back(es.eigenvectors());
      blk.eigenvalues.push_back(es.eigenvalues());
    }
  }
}

SplitStepKernel::FreeFactors SplitStepKernel::free_factors(double duration) const {
  FreeFactors f;
  f.duration = duration;
  for (const auto& blk : blocks_) {
    const Eigen::ArrayXd n = blk.number.array();
    const Eigen::ArrayXd mag = (-0.5 * kappa_ * duration * n).exp();
    f.re.emplace_back(mag * (duration * n).cos());
    f.im.emplace_back(-mag * (duration * n).sin());
  }
  return f;
}

SplitStepKernel::Work SplitStepKernel::load(const CMatrix& columns) const {
  if (columns.rows() != dim_) fail(ErrorCode::kInvalidArgument, "state dimension does not match kernel");
  Work w;
  w.cols = static_cast<int>(columns.cols());
  for (const auto& blk : blocks_) {
    const auto d = static_cast<Eigen::Index>(blk.indices.size());
    RMatrix x(d, 2 * w.cols);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (int j = 0; j < w.cols; ++j) {
        const cplx z = columns(blk.indices[i], j);
        x(i, j) = z.real();
        x(i, j + w.cols) = z.imag();
      }
    }
    w.active.push_back(x.isZero(0.0) ? 0 : 1);
    w.blocks.push_back(std::move(x));
  }
  return w;
}

SplitStepKernel::Work SplitStepKernel::load(const StateVector& state) const {
  return load(CMatrix(state));
}

CMatrix SplitStepKernel::store(const Work& w) const {
  CMatrix out = CMatrix::Zero(dim_, w.cols);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& idx = blocks_[b].indices;
    const RMatrix& x = w.blocks[b];
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (int j = 0; j < w.cols; ++j) {
        out(idx[i], j) = cplx{x(static_cast<Eigen::Index>(i), j), x(static_cast<Eigen::Index>(i), j + w.cols)};
      }
    }
  }
  return out;
}

StateVector SplitStepKernel::store_vector(const Work& w) const {
  if (w.cols != 1) fail(ErrorCode::kContractViolation, "store_vector on a multi-column state");
  return store(w).col(0);
}

RMatrix SplitStepKernel::block_identity(int b) const {
  const int d = block_dim(b);
  RMatrix x = RMatrix::Zero(d, 2 * d);
  x.leftCols(d).setIdentity();
  return x;
}

void SplitStepKernel::apply_free(RMatrix& x, int block, const FreeFactors& f) const {
  multiply_rows(x, f.re[static_cast<std::size_t>(block)], f.im[static_cast<std::size_t>(block)]);
}

void SplitStepKernel::apply_kick(RMatrix& x, int block, std::span<const double> coeffs, double dt) const {
  if (static_cast<int>(coeffs.size()) != num_terms_) {
    fail(ErrorCode::kContractViolation, "kick coefficient count does not match the kernel");
  }
  const Block& blk = blocks_[static_cast<std::size_t>(block)];
  RMatrix y;
  for (int t = 0; t < num_terms_; ++t) {
    const double g = coeffs[static_cast<std::size_t>(t)];
    if (g == 0.0) continue;
    const RMatrix& v = blk.basis[static_cast<std::size_t>(t)];
    const Eigen::ArrayXd phi = (dt * g) * blk.eigenvalues[static_cast<std::size_t>(t)].array();
    y.noalias() = v.transpose() * x;
    multiply_rows(y, phi.cos().matrix(), (-phi.sin()).matrix());
    x.noalias() = v * y;
  }
}

void SplitStepKernel::step_block(RMatrix& x, int block, std::span<const double> coeffs, double dt,
                                 const FreeFactors& half) const {
  apply_free(x, block, half);
  apply_kick(x, block, coeffs, dt);
  apply_free(x, block, half);
}

void SplitStepKernel::apply_kick_columns(RMatrix& x, int block, const RMatrix& coeffs, double dt) const {
  const Eigen::Index k = x.cols() / 2;
  if (coeffs.rows() != num_terms_ || coeffs.cols() != k) {
    fail(ErrorCode::kContractViolation, "per-column kick coefficients have the wrong shape");
  }
  const Block& blk = blocks_[static_cast<std::size_t>(block)];
  RMatrix y;
  for (int t = 0; t < num_terms_; ++t) {
    if (coeffs.row(t).isZero(0.0)) continue;
    const RMatrix& v = blk.basis[static_cast<std::size_t>(t)];
    const RVector& lam = blk.eigenvalues[static_cast<std::size_t>(t)];
    y.noalias() = v.transpose() * x;
    for (Eigen::Index j = 0; j < k; ++j) {
      const Eigen::ArrayXd phi = (dt * coeffs(t, j)) * lam.array();
      const Eigen::ArrayXd c = phi.cos(), s = -phi.sin();
      const Eigen::ArrayXd re = y.col(j).array();
      y.col(j) = (c * re - s * y.col(j + k).array()).matrix();
      y.col(j + k) = (s * re + c * y.col(j + k).array()).matrix();
    }
    x.noalias() = v * y;
  }
}

void SplitStepKernel::step_columns(Work& w, const RMatrix& coeffs, double dt, const FreeFactors& half) const {
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (w.active[b] == 0) continue;
    const int blk = static_cast<int>(b);
    apply_free(w.blocks[b], blk, half);
    apply_kick_columns(w.blocks[b], blk, coeffs, dt);
    apply_free(w.blocks[b], blk, half);
  }
}

void SplitStepKernel::step(Work& w, std::span<const double> coeffs, double dt, const FreeFactors& half) const {
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (w.active[b] == 0) continue;
    step_block(w.blocks[b], static_cast<int>(b), coeffs, dt, half);
  }
}

double SplitStepKernel::norm_squared(const Work& w) {
  double s = 0.0;
  for (std::size_t b = 0; b < w.blocks.size(); ++b) {
    if (w.active[b] != 0) s += w.blocks[b].squaredNorm();
  }
  return s;
}

double SampledSignal::at(double t) const {
  if (values.empty()) fail(ErrorCode::kContractViolation, "empty sampled signal");
  const double pos = t / dt;
  const double last = static_cast<double>(values.size() - 1);
  if (!(pos >= -1e-9) || !(pos <= last + 1e-9)) {
    fail(ErrorCode::kContractViolation, "sampled signal does not cover the requested time");
  }
  const double clamped = std::clamp(pos, 0.0, last);
  const auto i = static_cast<std::size_t>(std::min(std::floor(clamped), std::max(last - 1.0, 0.0)));
  if (values.size() == 1) return values[0];
  const double frac = clamped - static_cast<double>(i);
  return values[i] + frac * (values[i + 1] - values[i]);
}

DriveProgram::DriveProgram(const DrivenModel& model, PhaseFunction phase, const SampledSignal* flux)
    : model_(&model), phase_(std::move(phase)), flux_(flux) {
  drive_.kind = DriveKind::kHarmonic;
  drive_.n_harmonics = model.params().n_harmonics;
}

DriveProgram DriveProgram::constant(const DrivenModel& model, double frequency) {
  return DriveProgram(model, [frequency](double t) { return frequency * t; });
}

double DriveProgram::drive_value(double t) const { return drive_.value_at_phase(phase_(t)); }

void DriveProgram::coefficients(double t, std::span<double> out) const {
  const double f = drive_value(t);
  const double dphi = flux_ != nullptr ? flux_->at(t) : 0.0;
  const DrivenModel::Coefficients c = model_->coefficients(f, dphi);
  out[0] = c.cos_term;
  if (model_->has_asymmetry()) out[1] = c.sin_term;
}

SplitStepKernel make_kernel(const DrivenModel& model, double damping_rate) {
  std::vector<RMatrix> ops{model.cos_operator()};
  if (model.has_asymmetry()) ops.push_back(model.sin_operator());
  return SplitStepKernel(model.space().number_diagonal(), std::move(ops), damping_rate);
}

}  // namespace gkp
