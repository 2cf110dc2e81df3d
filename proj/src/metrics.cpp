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

#include "gkpfloquet/metrics.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "gkpfloquet/errors.hpp"

namespace gkp {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr int kGaussPoints = 48;

double sign_cos_sqrt_pi(double q) { return std::cos(kSqrtPi * q) >= 0.0 ? 1.0 : -1.0; }

// Nodes and weights of the per-bin Gauss-Legendre rule covering |x| <= reach.
void bin_quadrature(double reach, std::vector<double>& nodes, std::vector<double>& weights) {
  using Rule = boost::math::quadrature::gauss<double, kGaussPoints>;
  const auto& abscissa = Rule::abscissa();
  const auto& w = Rule::weights();
  const int kmax = static_cast<int>(std::ceil(reach / kSqrtPi));
  const double half = 0.5 * kSqrtPi;
  for (int k = -kmax; k <= kmax; ++k) {
    const double center = kSqrtPi * k;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      const double a = abscissa[i];
      nodes.push_back(center + half * a);
      weights.push_back(sign * half * w[i]);
      if (a != 0.0) {
        nodes.push_back(center - half * a);
        weights.push_back(sign * half * w[i]);
      }
    }
  }
}

}  // namespace

double squeezing_delta(cplx s) {
  const double mag = std::abs(s);
  if (!(mag > 0.0)) fail(ErrorCode::kNumerical, "squeezing undefined: stabilizer expectation is zero");
  if (mag > 1.0 + 1e-8) {
    std::ostringstream msg;
    msg << "stabilizer expectation magnitude " << mag << " exceeds 1";
    fail(ErrorCode::kNumerical, msg.str());
  }
  return std::sqrt(std::max(0.0, -std::log(mag * mag) / (2.0 * kPi)));
}

double delta_to_db(double delta) { return -10.0 * std::log10(delta * delta); }

SqueezingReport squeezing_from_stabilizers(cplx sx, cplx sp) {
  SqueezingReport r;
  r.delta_x = squeezing_delta(sx);
  r.delta_p = squeezing_delta(sp);
  r.db_x = delta_to_db(r.delta_x);
  r.db_p = delta_to_db(r.delta_p);
  return r;
}

LogicalState LogicalState::from_bloch(double x, double y, double z) {
  LogicalState s;
  s.x = x;
  s.y = y;
  s.z = z;
  s.rho << cplx{1.0 + z, 0.0}, cplx{x, -y}, cplx{x, y}, cplx{1.0 - z, 0.0};
  s.rho *= 0.5;
  return s;
}

double LogicalState::fidelity(const Eigen::Vector2cd& v) const { return (v.adjoint() * rho * v)(0, 0).real(); }

double LogicalState::fidelity(LogicalTarget target) const { return fidelity(hadamard_eigenvector(target)); }

double LogicalState::bloch_length() const { return std::sqrt(x * x + y * y + z * z); }

Eigen::Vector2cd hadamard_eigenvector(LogicalTarget target) {
  const double c = std::cos(kPi / 8.0);
  const double s = std::sin(kPi / 8.0);
  Eigen::Vector2cd v;
  if (target == LogicalTarget::kHPlus) {
    v << c, s;
  } else {
    v << -s, c;
  }
  return v;
}

Decoder::Decoder(const FockSpace& space) : dim_(space.dim()) {
  // Hermite functions up to index D-1 are negligible beyond the classical
  // turning point plus a margin of several widths.
  const double reach = std::sqrt(2.0 * dim_ + 1.0) + 8.0;
  std::vector<double> nodes;
  std::vector<double> weights;
  bin_quadrature(reach, nodes, weights);
  const RMatrix h = hermite_functions(dim_, nodes);
  const Eigen::Map<const RVector> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  const RMatrix z = h * w.asDiagonal() * h.transpose();
  z_ = z.cast<cplx>();
  x_ = CMatrix(dim_, dim_);
  for (int n = 0; n < dim_; ++n) {
    for (int m = 0; m < dim_; ++m) {
      // i^(m-n) is real on the even diagonals where Z is nonzero.
      const int k = ((m - n) % 4 + 4) % 4;
      const double ph = (k == 0) ? 1.0 : (k == 2 ? -1.0 : 0.0);
      x_(m, n) = ph * z(m, n);
    }
  }
  y_ = 0.5 * kI * (x_ * z_ - z_ * x_);
}

LogicalState Decoder::finish(double x, double y, double z) const {
  LogicalState s = LogicalState::from_bloch(x, y, z);
  if (s.bloch_length() > 1.0 + 1e-6) {
    std::ostringstream msg;
    msg << "decoded Bloch vector has length " << s.bloch_length() << " > 1 (Fock truncation too small?)";
    fail(ErrorCode::kDecoderConsistency, msg.str());
  }
  return s;
}

LogicalState Decoder::decode(const StateVector& state) const {
  if (state.size() != dim_) fail(ErrorCode::kInvalidArgument, "decode: state dimension mismatch");
  const double nrm = state.squaredNorm();
  if (!(nrm > 0.0)) fail(ErrorCode::kInvalidArgument, "decode: zero state");
  auto expect = [&](const CMatrix& op) { return state.dot(op * state).real() / nrm; };
  return finish(expect(x_), expect(y_), expect(z_));
}

LogicalState Decoder::decode(const DensityMatrix& rho) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) fail(ErrorCode::kInvalidArgument, "decode: rho dimension mismatch");
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) fail(ErrorCode::kInvalidArgument, "decode: rho has non-positive trace");
  auto expect = [&](const CMatrix& op) { return op.cwiseProduct(rho.transpose()).sum().real() / tr; };
  return finish(expect(x_), expect(y_), expect(z_));
}

double Decoder::logical_fidelity(const StateVector& state, LogicalTarget target) const {
  return decode(state).fidelity(target);
}

double Decoder::logical_fidelity(const DensityMatrix& rho, LogicalTarget target) const {
  return decode(rho).fidelity(target);
}

LogicalState decode_marginals(std::span<const double> grid, std::span<const cplx> psi_x,
                              std::span<const cplx> psi_p) {
  if (grid.size() < 2 || psi_x.size() != grid.size() || psi_p.size() != grid.size()) {
    fail(ErrorCode::kInvalidArgument, "decode_marginals: grid and wavefunctions must have equal length >= 2");
  }
  const double dx = grid[1] - grid[0];
  double nx = 0.0, np = 0.0, zx = 0.0, xp = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double wgt = (i == 0 || i + 1 == grid.size()) ? 0.5 * dx : dx;
    const double s = sign_cos_sqrt_pi(grid[i]);
    const double px = std::norm(psi_x[i]) * wgt;
    const double pp = std::norm(psi_p[i]) * wgt;
    nx += px;
    np += pp;
    zx += s * px;
    xp += s * pp;
  }
  if (!(nx > 0.0) || !(np > 0.0)) fail(ErrorCode::kInvalidArgument, "decode_marginals: zero wavefunction");
  return LogicalState::from_bloch(xp / np, 0.0, zx / nx);
}

GkpMetrics::GkpMetrics(const FockSpace& space)
    : space_(&space),
      dx_(space.displacement(cplx{kSqrt2Pi, 0.0})),
      dp_(space.displacement(cplx{0.0, kSqrt2Pi})),
      decoder_(space) {}

cplx GkpMetrics::stabilizer_expectation(const StateVector& state, StabilizerKind kind) const {
  const double nrm = state.squaredNorm();
  if (!(nrm > 0.0)) fail(ErrorCode::kInvalidArgument, "stabilizer_expectation: zero state");
  return state.dot(stabilizer(kind) * state) / nrm;
}

cplx GkpMetrics::stabilizer_expectation(const DensityMatrix& rho, StabilizerKind kind) const {
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) fail(ErrorCode::kInvalidArgument, "stabilizer_expectation: rho has non-positive trace");
  return stabilizer(kind).cwiseProduct(rho.transpose()).sum() / tr;
}

SqueezingReport GkpMetrics::squeezing(const StateVector& state) const {
  return squeezing_from_stabilizers(stabilizer_expectation(state, StabilizerKind::kX),
                                    stabilizer_expectation(state, StabilizerKind::kP));
}

SqueezingReport GkpMetrics::squeezing(const DensityMatrix& rho) const {
  return squeezing_from_stabilizers(stabilizer_expectation(rho, StabilizerKind::kX),
                                    stabilizer_expectation(rho, StabilizerKind::kP));
}

namespace {

void warn_large_grid(const FockSpace& space, std::span<const double> xs, std::span<const double> ps) {
  double r2 = 0.0;
  for (double x : xs) {
    for (double p : ps) r2 = std::max(r2, 0.5 * (x * x + p * p));
  }
  if (r2 > space.dim() / 4.0) {
    std::ostringstream msg;
    msg << "Wigner grid reaches |alpha|^2 = " << r2 << " > dim/4; outer values are unreliable";
    warn(msg.str());
  }
}

}  // namespace

RMatrix wigner(const FockSpace& space, const StateVector& state, std::span<const double> xs,
               std::span<const double> ps) {
  warn_large_grid(space, xs, ps);
  const StateVector psi = state / state.norm();
  RVector parity(space.dim());
  for (int n = 0; n < space.dim(); ++n) parity(n) = (n % 2 == 0) ? 1.0 : -1.0;
  RMatrix w(xs.size(), ps.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ps.size(); ++j) {
      const cplx alpha = cplx{xs[i], ps[j]} / std::sqrt(2.0);
      const CVector phi = space.displacement(-alpha, true) * psi;
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (1.0 / kPi) * (parity.array() * phi.cwiseAbs2().array()).sum();
    }
  }
  return w;
}

RMatrix wigner(const FockSpace& space, const DensityMatrix& rho, std::span<const double> xs,
               std::span<const double> ps) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  if (es.info() != Eigen::Success) fail(ErrorCode::kNumerical, "wigner: density matrix diagonalization failed");
  const double tr = rho.trace().real();
  RMatrix w = RMatrix::Zero(xs.size(), ps.size());
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double lam = es.eigenvalues()(k) / tr;
    if (lam < 1e-12) continue;
    w += lam * wigner(space, StateVector(es.eigenvectors().col(k)), xs, ps);
  }
  return w;
}

namespace {

CMatrix to_momentum_frame(const DensityMatrix& rho) {
  // psi~ = sum (-i)^n c_n h_n, so rho~_mn = (-i)^m rho_mn i^n.
  CVector ph(rho.rows());
  cplx c{1.0, 0.0};
  for (Eigen::Index n = 0; n < rho.rows(); ++n) {
    ph(n) = c;
    c *= -kI;
  }
  return ph.asDiagonal() * rho * ph.conjugate().asDiagonal();
}

RVector density_on_grid(const DensityMatrix& rho, std::span<const double> grid) {
  const RMatrix h = hermite_functions(static_cast<int>(rho.rows()), grid);
  const CMatrix hc = h.cast<cplx>();
  const CMatrix rh = rho * hc;
  return (hc.conjugate().cwiseProduct(rh)).colwise().sum().real().transpose() / rho.trace().real();
}

}  // namespace

Marginals marginals(const StateVector& state, std::span<const double> xs, std::span<const double> ps) {
  const double nrm = state.squaredNorm();
  Marginals m;
  m.position = position_wavefunction(state, xs).cwiseAbs2() / nrm;
  m.momentum = momentum_wavefunction(state, ps).cwiseAbs2() / nrm;
  return m;
}

Marginals marginals(const DensityMatrix& rho, std::span<const double> xs, std::span<const double> ps) {
  Marginals m;
  m.position = density_on_grid(rho, xs);
  m.momentum = density_on_grid(to_momentum_frame(rho), ps);
  return m;
}

void write_wigner_csv(std::ostream& out, std::span<const double> xs, std::span<const double> ps, const RMatrix& w) {
  out << "x,p,W\n";
  out.precision(10);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ps.size(); ++j) {
      out << xs[i] << ',' << ps[j] << ',' << w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << '\n';
    }
  }
}

void write_marginal_csv(std::ostream& out, const char* column, std::span<const double> grid, const RVector& values) {
  out << column << ",P\n";
  out.precision(10);
  for (std::size_t i = 0; i < grid.size(); ++i) out << grid[i] << ',' << values(static_cast<Eigen::Index>(i)) << '\n';
}

}  // namespace gkp
