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

// Reference constructions used by the tests. Each one is built without the
// library routine it is compared against.

#ifndef GKPFLOQUET_TESTS_ORACLES_HPP
#define GKPFLOQUET_TESTS_ORACLES_HPP

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "gkpfloquet/fock_space.hpp"

namespace oracle {

using gkp::cplx;
using gkp::kPi;
using gkp::kSqrtPi;

// S(r)|0> from the matrix exponential of (r/2)(a^2 - a^dag^2) on a padded
// space. r > 0 gives x variance e^{-2r}/2.
inline gkp::StateVector squeezed_vacuum(int dim, double r) {
  const int big = dim + 150;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(big, big);
  for (int n = 1; n < big; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const Eigen::MatrixXcd ad = a.adjoint();
  const Eigen::MatrixXcd gen = 0.5 * r * (a * a - ad * ad);
  const Eigen::MatrixXcd s = gen.exp();
  return s.col(0).head(dim);
}

inline gkp::StateVector random_low_state(int dim, int levels, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  gkp::StateVector v = gkp::StateVector::Zero(dim);
  for (int n = 0; n < levels; ++n) v(n) = cplx{g(rng), g(rng)};
  return v / v.norm();
}

struct GridState {
  std::vector<double> grid;
  std::vector<cplx> psi_x;
  std::vector<cplx> psi_p;
};

// Approximate |0_L>: narrow Gaussians of width sigma at x = 2 s sqrt(pi)
// under a Gaussian envelope exp(-kappa^2 x^2 / 2). The momentum wavefunction
// is the analytic Fourier transform of the same sum.
inline GridState comb_zero_state(double sigma, double kappa) {
  GridState out;
  const double reach = 4.0 / kappa;
  const double dx = sigma / 8.0;
  const int n = static_cast<int>(2.0 * reach / dx) + 1;
  const int smax = static_cast<int>(reach / (2.0 * kSqrtPi)) + 1;
  out.grid.resize(n);
  out.psi_x.assign(n, 0.0);
  out.psi_p.assign(n, 0.0);
  for (int i = 0; i < n; ++i) out.grid[i] = -reach + dx * i;
  for (int s = -smax; s <= smax; ++s) {
    const double xs = 2.0 * kSqrtPi * s;
    const double env = std::exp(-0.5 * kappa * kappa * xs * xs);
    for (int i = 0; i < n; ++i) {
      const double q = out.grid[i];
      const double dxq = q - xs;
      if (std::abs(dxq) < 12.0 * sigma) out.psi_x[i] += env * std::exp(-0.5 * dxq * dxq / (sigma * sigma));
      out.psi_p[i] += env * sigma * std::exp(-0.5 * sigma * sigma * q * q) * std::exp(cplx{0.0, -q * xs});
    }
  }
  return out;
}

// exp(-beta n) applied to the ideal comb cos(pi/8)|0_L> + sin(pi/8)|1_L>,
// with Fock amplitudes <n|x> = h_n(x) summed over the comb teeth.
inline gkp::StateVector finite_energy_h_plus(int dim, double beta) {
  std::vector<double> teeth0, teeth1;
  for (int s = -12; s <= 12; ++s) {
    teeth0.push_back(2.0 * kSqrtPi * s);
    teeth1.push_back(kSqrtPi * (2.0 * s + 1.0));
  }
  // Independent Hermite evaluation in long double.
  auto amplitudes = [dim](const std::vector<double>& teeth) {
    std::vector<long double> c(dim, 0.0L);
    for (double x : teeth) {
      long double h0 = std::pow(static_cast<long double>(kPi), -0.25L) * std::exp(-0.5L * x * x);
      long double h1 = std::sqrt(2.0L) * x * h0;
      c[0] += h0;
      if (dim > 1) c[1] += h1;
      for (int n = 2; n < dim; ++n) {
        const long double h2 = std::sqrt(2.0L / n) * x * h1 - std::sqrt((n - 1.0L) / n) * h0;
        c[n] += h2;
        h0 = h1;
        h1 = h2;
      }
    }
    return c;
  };
  const auto c0 = amplitudes(teeth0);
  const auto c1 = amplitudes(teeth1);
  gkp::StateVector v(dim);
  for (int n = 0; n < dim; ++n) {
    const double comb = static_cast<double>(std::cos(kPi / 8) * c0[n] + std::sin(kPi / 8) * c1[n]);
    v(n) = std::exp(-beta * n) * comb;
  }
  return v / v.norm();
}

// Coherent state |alpha>, alpha real, from its Poisson amplitudes.
inline gkp::StateVector coherent(const gkp::FockSpace& s, double alpha) {
  gkp::StateVector v(s.dim());
  double c = std::exp(-0.5 * alpha * alpha);
  for (int n = 0; n < s.dim(); ++n) {
    v(n) = c;
    c *= alpha / std::sqrt(n + 1.0);
  }
  return v / v.norm();
}

// Least-squares slope of log10 P against log10 f after averaging the
// periodogram in logarithmic bins between f_lo and f_hi.
template <class Spectrum>
double log_log_slope(const Spectrum& p, double f_lo, double f_hi, int bins_per_decade = 8) {
  const double l0 = std::log10(f_lo), l1 = std::log10(f_hi);
  const int nbins = static_cast<int>(std::ceil((l1 - l0) * bins_per_decade));
  std::vector<double> sum(nbins, 0.0), lf(nbins, 0.0);
  std::vector<int> count(nbins, 0);
  for (std::size_t k = 0; k < p.psd.size(); ++k) {
    const double l = std::log10(p.frequency_hz[k]);
    if (l < l0 || l >= l1) continue;
    const int b = static_cast<int>((l - l0) * bins_per_decade);
    sum[b] += p.psd[k];
    lf[b] += l;
    ++count[b];
  }
  std::vector<double> xs, ys;
  for (int b = 0; b < nbins; ++b) {
    if (count[b] < 4) continue;
    xs.push_back(lf[b] / count[b]);
    ys.push_back(std::log10(sum[b] / count[b]));
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

// exp(-i t H) for real symmetric H, through its eigendecomposition.
inline gkp::CMatrix symmetric_exponential(const gkp::RMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<gkp::RMatrix> es(h);
  const gkp::CVector ph = (-t * es.eigenvalues()).unaryExpr([](double a) { return std::polar(1.0, a); });
  const gkp::CMatrix v = es.eigenvectors().cast<cplx>();
  return v * ph.asDiagonal() * v.adjoint();
}

}  // namespace oracle

#endif  // GKPFLOQUET_TESTS_ORACLES_HPP
