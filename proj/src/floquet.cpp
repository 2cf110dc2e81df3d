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

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "gkpfloquet/errors.hpp"
#include "gkpfloquet/propagation.hpp"

namespace gkp {

namespace {

RMatrix restrict(const RMatrix& op, const std::vector<int>& idx) {
  const auto d = static_cast<Eigen::Index>(idx.size());
  RMatrix out(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) out(i, j) = op(idx[i], idx[j]);
  }
  return out;
}

CMatrix split_step_period(const DrivenModel& model, int steps, double frequency) {
  const SplitStepKernel kernel = make_kernel(model);
  const DriveProgram program = DriveProgram::constant(model, frequency);
  const double period = kPeriod / frequency;
  const double dt = period / steps;
  const SplitStepKernel::FreeFactors half = kernel.free_factors(0.5 * dt);
  std::vector<double> coeffs(static_cast<std::size_t>(program.num_terms()));
  const int dim = kernel.dim();
  CMatrix u = CMatrix::Zero(dim, dim);
  for (int b = 0; b < kernel.num_blocks(); ++b) {
    RMatrix x = kernel.block_identity(b);
    for (int j = 0; j < steps; ++j) {
      program.coefficients((j + 0.5) * dt, coeffs);
      kernel.step_block(x, b, coeffs, dt, half);
    }
    const auto& idx = kernel.block_indices(b);
    const auto d = static_cast<Eigen::Index>(idx.size());
    for (Eigen::Index c = 0; c < d; ++c) {
      for (Eigen::Index r = 0; r < d; ++r) u(idx[r], idx[c]) = cplx{x(r, c), x(r, c + d)};
    }
  }
  return u;
}

// x <- exp(-i h M) x for real symmetric M, x = [Re | Im].
void apply_symmetric_exp(RMatrix& x, const RMatrix& m, double h) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(m);
  if (es.info() != Eigen::Success) fail(ErrorCode::kNumerical, "CF4 step: eigensolver failed");
  const RMatrix& v = es.eigenvectors();
  const Eigen::ArrayXd phi = h * es.eigenvalues().array();
  const Eigen::ArrayXd c = phi.cos(), s = -phi.sin();
  RMatrix y = v.transpose() * x;
  const Eigen::Index k = y.cols() / 2;
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::ArrayXd re = y.col(j).array();
    const Eigen::ArrayXd im = y.col(j + k).array();
    y.col(j) = (c * re - s * im).matrix();
    y.col(j + k) = (s * re + c * im).matrix();
  }
  x.noalias() = v * y;
}

// Fourth-order commutator-free exponential scheme (Blanes-Moan) on the full
// lab-frame generator H(t) = n + K(t). Both exponents are real symmetric and
// are applied through their eigendecompositions.
CMatrix cf4_period(const DrivenModel& model, int steps, double frequency) {
  const SplitStepKernel kernel = make_kernel(model);
  const DriveProgram program = DriveProgram::constant(model, frequency);
  const double period = kPeriod / frequency;
  const double h = period / steps;
  const double r3 = std::sqrt(3.0);
  const double c1 = 0.5 - r3 / 6.0, c2 = 0.5 + r3 / 6.0;
  const double a1 = 0.25 + r3 / 6.0, a2 = 0.25 - r3 / 6.0;
  std::vector<double> k1(static_cast<std::size_t>(program.num_terms()));
  std::vector<double> k2(k1.size());
  const int dim = kernel.dim();
  CMatrix u = CMatrix::Zero(dim, dim);
  for (int b = 0; b < kernel.num_blocks(); ++b) {
    const auto& idx = kernel.block_indices(b);
    const auto d = static_cast<Eigen::Index>(idx.size());
    const RMatrix cb = restrict(model.cos_operator(), idx);
    const RMatrix sb = model.has_asymmetry() ? restrict(model.sin_operator(), idx) : RMatrix();
    RMatrix n = RMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) n(i, i) = idx[i];
    auto exponent = [&](double w1, double w2) {
      RMatrix m = 0.5 * n + (w1 * k1[0] + w2 * k2[0]) * cb;
      if (model.has_asymmetry()) m += (w1 * k1[1] + w2 * k2[1]) * sb;
      return m;
    };
    RMatrix x = kernel.block_identity(b);
    for (int j = 0; j < steps; ++j) {
      const double t = j * h;
      program.coefficients(t + c1 * h, k1);
      program.coefficients(t + c2 * h, k2);
      apply_symmetric_exp(x, exponent(a1, a2), h);
      apply_symmetric_exp(x, exponent(a2, a1), h);
    }
    for (Eigen::Index c = 0; c < d; ++c) {
      for (Eigen::Index r = 0; r < d; ++r) u(idx[r], idx[c]) = cplx{x(r, c), x(r, c + d)};
    }
  }
  return u;
}

}  // namespace

int IntegratorConfig::resolve(int n_harmonics, int fallback) const {
  const int steps = steps_per_period > 0 ? steps_per_period : fallback;
  if (steps < 16 * n_harmonics) {
    std::ostringstream msg;
    msg << "steps_per_period = " << steps << " is below the minimum 16 N = " << 16 * n_harmonics;
    fail(ErrorCode::kInvalidArgument, msg.str());
  }
  return steps;
}

int default_floquet_steps(int n_harmonics) { return 128 * n_harmonics; }

CMatrix kicked_propagator(const DrivenModel& model, double quarter_angle) {
  const SplitStepKernel kernel = make_kernel(model);
  const SplitStepKernel::FreeFactors quarter = kernel.free_factors(quarter_angle);
  // exp(i J (T/2) C) = exp(-i dt g C) with dt = T/2, g = -J.
  std::vector<double> coeffs(static_cast<std::size_t>(kernel.num_terms()), 0.0);
  coeffs[0] = -model.params().j_over_omega0;
  const int dim = kernel.dim();
  CMatrix u = CMatrix::Zero(dim, dim);
  for (int b = 0; b < kernel.num_blocks(); ++b) {
    RMatrix x = kernel.block_identity(b);
    for (int q = 0; q < 4; ++q) {
      kernel.apply_kick(x, b, coeffs, 0.5 * kPeriod);
      kernel.apply_free(x, b, quarter);
    }
    const auto& idx = kernel.block_indices(b);
    const auto d = static_cast<Eigen::Index>(idx.size());
    for (Eigen::Index c = 0; c < d; ++c) {
      for (Eigen::Index r = 0; r < d; ++r) u(idx[r], idx[c]) = cplx{x(r, c), x(r, c + d)};
    }
  }
  return u;
}

CMatrix harmonic_propagator_fixed(const DrivenModel& model, IntegratorScheme scheme, int steps_per_period,
                                  double drive_frequency) {
  if (!(drive_frequency > 0.0) || !std::isfinite(drive_frequency)) {
    fail(ErrorCode::kInvalidArgument, "drive frequency must be positive");
  }
  if (steps_per_period < 1) fail(ErrorCode::kInvalidArgument, "steps_per_period must be positive");
  return scheme == IntegratorScheme::kSplitStep ? split_step_period(model, steps_per_period, drive_frequency)
                                                : cf4_period(model, steps_per_period, drive_frequency);
}

PropagatorResult harmonic_propagator(const DrivenModel& model, const IntegratorConfig& cfg,
                                     const PropagatorOptions& opts) {
  const int n = model.params().n_harmonics;
  PropagatorResult r;
  r.steps_per_period = cfg.resolve(n, default_floquet_steps(n));
  r.u = harmonic_propagator_fixed(model, cfg.scheme, r.steps_per_period, opts.drive_frequency);
  if (!opts.check_convergence) return r;
  const FockSpace& space = model.space();
  for (int doubling = 0; doubling < 2; ++doubling) {
    const int steps = 2 * r.steps_per_period;
    CMatrix finer = harmonic_propagator_fixed(model, cfg.scheme, steps, opts.drive_frequency);
    r.convergence_error = space.lower_half_distance(finer, r.u);
    r.u = std::move(finer);
    r.steps_per_period = steps;
    if (r.convergence_error < opts.convergence_tol) return r;
  }
  std::ostringstream msg;
  msg << "one-period propagator not converged: step doubling to " << r.steps_per_period
      << " steps per period still changes U by " << r.convergence_error << " (tolerance " << opts.convergence_tol
      << ")";
  fail(ErrorCode::kIntegratorFailure, msg.str());
}

FloquetSolution floquet_states(const CMatrix& u, double period) {
  if (u.rows() != u.cols()) fail(ErrorCode::kInvalidArgument, "floquet_states: matrix is not square");
  const auto dim = u.rows();
  const double unitarity = (u.adjoint() * u - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (unitarity > 1e-8) {
    std::ostringstream msg;
    msg << "floquet_states: input is not unitary (max |U^dag U - I| = " << unitarity << ")";
    fail(ErrorCode::kNumerical, msg.str());
  }
  Eigen::ComplexSchur<CMatrix> schur(u);
  if (schur.info() != Eigen::Success) fail(ErrorCode::kNumerical, "floquet_states: Schur decomposition failed");
  FloquetSolution sol;
  sol.period = period;
  sol.states = schur.matrixU();
  sol.eigenvalues = schur.matrixT().diagonal();
  sol.quasienergies.resize(dim);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const cplx lam = sol.eigenvalues(k);
    const CVector v = sol.states.col(k);
    worst = std::max(worst, (u * v - lam * v).norm());
    double eps = -std::arg(lam) / period;
    if (eps <= -kPi / period) eps += 2.0 * kPi / period;
    sol.quasienergies(k) = eps;
  }
  if (worst > 1e-8) {
    std::ostringstream msg;
    msg << "floquet_states: eigenpair residual " << worst << " exceeds 1e-8";
    fail(ErrorCode::kNumerical, msg.str());
  }
  return sol;
}

CMatrix effective_hamiltonian(const FloquetSolution& s) {
  return s.states * s.quasienergies.cast<cplx>().asDiagonal() * s.states.adjoint();
}

double low_energy_deviation(const CMatrix& a, const CMatrix& b, double fraction) {
  const auto k = static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(a.rows())));
  if (k < 1) fail(ErrorCode::kInvalidArgument, "low_energy_deviation: empty subspace");
  const CMatrix diff = a.topLeftCorner(k, k) - b.topLeftCorner(k, k);
  const CMatrix herm = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

RVector floquet_squeezing(const FloquetSolution& solution, const GkpMetrics& metrics) {
  const auto dim = solution.states.cols();
  RVector out(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    try {
      out(k) = metrics.squeezing(StateVector(solution.states.col(k))).db();
    } catch (const Error&) {
      out(k) = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

StateVector canonical_phase(const StateVector& v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  const cplx c = v(k);
  if (std::abs(c) == 0.0) return v;
  return v * (std::abs(c) / c);
}

GkpPair select_gkp_states(const FloquetSolution& solution, const GkpMetrics& metrics) {
  const auto dim = solution.states.cols();
  const CVector rot = metrics.space().rotation_diagonal(kPi / 2);
  auto better = [](double f, double s, const GkpStateInfo& best) {
    if (best.index < 0) return true;
    if (f > best.fidelity + 1e-12) return true;
    return std::abs(f - best.fidelity) <= 1e-12 && s > best.squeezing.db();
  };
  GkpPair pair;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const StateVector v = solution.states.col(k);
    LogicalState logical;
    try {
      logical = metrics.decoder().decode(v);
    } catch (const Error&) {
      continue;  // states at the truncation edge
    }
    const double fp = logical.fidelity(LogicalTarget::kHPlus);
    const double fm = logical.fidelity(LogicalTarget::kHMinus);
    SqueezingReport sq;
    double sdb = -std::numeric_limits<double>::infinity();
    try {
      sq = metrics.squeezing(v);
      sdb = sq.db();
    } catch (const Error&) {
    }
    for (int which = 0; which < 2; ++which) {
      GkpStateInfo& best = which == 0 ? pair.plus : pair.minus;
      const double f = which == 0 ? fp : fm;
      if (!better(f, sdb, best)) continue;
      best.index = static_cast<int>(k);
      best.fidelity = f;
      best.squeezing = sq;
      best.quasienergy = solution.quasienergies(k);
      best.rotation = v.dot(rot.asDiagonal() * v);
    }
  }
  if (pair.plus.index < 0 || pair.minus.index < 0) {
    fail(ErrorCode::kDecoderConsistency, "select_gkp_states: no decodable Floquet state");
  }
  pair.overlap = std::abs(solution.states.col(pair.plus.index).dot(solution.states.col(pair.minus.index)));
  return pair;
}

}  // namespace gkp
