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

// Brute-force cross-checks of the library, recorded as JSON fixtures.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "gkpfloquet/errors.hpp"
#include "gkpfloquet/floquet.hpp"
#include "gkpfloquet/harness.hpp"
#include "gkpfloquet/parallel.hpp"

namespace gkp {

namespace {

using Json = nlohmann::ordered_json;

CMatrix symmetric_exponential(const RMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
  const CVector ph = (-t * es.eigenvalues()).unaryExpr([](double a) { return std::polar(1.0, a); });
  const CMatrix v = es.eigenvectors().cast<cplx>();
  return v * ph.asDiagonal() * v.adjoint();
}

StateVector random_low_state(int dim, int levels, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  StateVector v = StateVector::Zero(dim);
  for (int n = 0; n < levels; ++n) v(n) = cplx{g(rng), g(rng)};
  return v / v.norm();
}

// Narrow Gaussian teeth at 2 s sqrt(pi) under a wide envelope, with the
// analytic Fourier transform as the momentum wavefunction.
LogicalState decode_comb_zero(double sigma, double kappa) {
  const double reach = 4.0 / kappa;
  const double dx = sigma / 8.0;
  const int n = static_cast<int>(2.0 * reach / dx) + 1;
  const int smax = static_cast<int>(reach / (2.0 * kSqrtPi)) + 1;
  std::vector<double> grid(n);
  std::vector<cplx> px(n, 0.0), pp(n, 0.0);
  for (int i = 0; i < n; ++i) grid[i] = -reach + dx * i;
  for (int s = -smax; s <= smax; ++s) {
    const double xs = 2.0 * kSqrtPi * s;
    const double env = std::exp(-0.5 * kappa * kappa * xs * xs);
    for (int i = 0; i < n; ++i) {
      const double q = grid[i];
      const double d = q - xs;
      if (std::abs(d) < 12.0 * sigma) px[i] += env * std::exp(-0.5 * d * d / (sigma * sigma));
      pp[i] += env * sigma * std::exp(-0.5 * sigma * sigma * q * q) * std::exp(cplx{0.0, -q * xs});
    }
  }
  return decode_marginals(grid, px, pp);
}

// exp(-beta n) (cos(pi/8)|0_L> + sin(pi/8)|1_L>) with long-double Hermite sums.
StateVector finite_energy_h_plus(int dim, double beta) {
  auto amplitudes = [dim](bool odd) {
    std::vector<long double> c(dim, 0.0L);
    for (int s = -12; s <= 12; ++s) {
      const long double x = kSqrtPi * (2.0L * s + (odd ? 1.0L : 0.0L));
      long double h0 = std::pow(static_cast<long double>(kPi), -0.25L) * std::exp(-0.5L * x * x);
      long double h1 = std::sqrt(2.0L) * x * h0;
      c[0] += h0;
      c[1] += h1;
      for (int k = 2; k < dim; ++k) {
        const long double h2 = std::sqrt(2.0L / k) * x * h1 - std::sqrt((k - 1.0L) / k) * h0;
        c[k] += h2;
        h0 = h1;
        h1 = h2;
      }
    }
    return c;
  };
  const auto c0 = amplitudes(false), c1 = amplitudes(true);
  StateVector v(dim);
  for (int k = 0; k < dim; ++k) {
    v(k) = std::exp(-beta * k) * static_cast<double>(std::cos(kPi / 8) * c0[k] + std::sin(kPi / 8) * c1[k]);
  }
  return v / v.norm();
}

double log_log_slope(const Periodogram& p, double f_lo, double f_hi) {
  const int per_decade = 8;
  const double l0 = std::log10(f_lo), l1 = std::log10(f_hi);
  const int nb = static_cast<int>(std::ceil((l1 - l0) * per_decade));
  std::vector<double> sum(nb, 0.0), lf(nb, 0.0);
  std::vector<int> count(nb, 0);
  for (std::size_t k = 0; k < p.psd.size(); ++k) {
    const double l = std::log10(p.frequency_hz[k]);
    if (l < l0 || l >= l1) continue;
    const int b = static_cast<int>((l - l0) * per_decade);
    sum[b] += p.psd[k];
    lf[b] += l;
    ++count[b];
  }
  std::vector<double> xs, ys;
  for (int b = 0; b < nb; ++b) {
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

struct Check {
  std::string name;
  Json values;
  bool pass = false;
  std::string error;
};

Check kicked_identity() {
  Check c{"kicked_identity", {}, false, {}};
  const FockSpace s(250);
  ModelParams p;
  const CMatrix u = kicked_propagator(DrivenModel(s, p));
  const double d = s.lower_half_distance(u, symmetric_exponential(gkp_hamiltonian(s, p), kPeriod));
  c.values = {{"fock_dim", 250}, {"j_over_omega0", p.j_over_omega0}, {"lower_half_distance", d}, {"bound", 1e-6}};
  c.pass = d < 1e-6;
  return c;
}

Check fourier_symmetry() {
  Check c{"fourier_symmetry", {}, true, {}};
  const FockSpace s(250);
  const CMatrix r = s.rotation(kPi / 2);
  Json norms = Json::array();
  for (int n = 1; n <= 6; ++n) {
    ModelParams p;
    p.n_harmonics = n;
    const CMatrix h = truncated_gkp_hamiltonian(s, p).cast<cplx>();
    const double norm = (h * r - r * h).norm();
    norms.push_back({{"n_harmonics", n}, {"commutator_norm", norm}});
    c.pass = c.pass && norm < 1e-12;
  }
  c.values = {{"fock_dim", 250}, {"norms", norms}, {"bound", 1e-12}};
  return c;
}

Check decoder_suite() {
  Check c{"decoder", {}, true, {}};
  const FockSpace s(250);
  const GkpMetrics m(s);
  const Decoder& d = m.decoder();
  const double comb = decode_comb_zero(0.05, 0.05).fidelity(Eigen::Vector2cd(1.0, 0.0));
  std::mt19937_64 rng(7);
  double lin = 0.0, inter = 0.0;
  const CVector rot = s.rotation_diagonal(kPi / 2);
  Eigen::Matrix2cd had;
  had << 1.0, 1.0, 1.0, -1.0;
  had /= std::sqrt(2.0);
  for (int trial = 0; trial < 5; ++trial) {
    const StateVector a = random_low_state(s.dim(), 30, rng);
    const StateVector b = random_low_state(s.dim(), 30, rng);
    const double lam = 0.37;
    const DensityMatrix rho = lam * a * a.adjoint() + (1.0 - lam) * b * b.adjoint();
    const Eigen::Matrix2cd mix = lam * d.decode(a).rho + (1.0 - lam) * d.decode(b).rho;
    lin = std::max(lin, (d.decode(rho).rho - mix).cwiseAbs().maxCoeff());
    const Eigen::Matrix2cd rotated = d.decode(StateVector(rot.asDiagonal() * a)).rho;
    inter = std::max(inter, (rotated - had * d.decode(a).rho * had).cwiseAbs().maxCoeff());
  }
  Json ladder = Json::array();
  double last = 0.0;
  bool monotone = true;
  for (double beta : {0.4, 0.2, 0.1, 0.07, 0.05}) {
    const double f = d.logical_fidelity(finite_energy_h_plus(s.dim(), beta), LogicalTarget::kHPlus);
    ladder.push_back({{"beta", beta}, {"fidelity", f}});
    monotone = monotone && f > last;
    last = f;
  }
  c.values = {{"comb_zero_fidelity", comb},
              {"linearity_max_error", lin},
              {"intertwining_max_error", inter},
              {"finite_energy_h_plus", ladder},
              {"finite_energy_monotone", monotone}};
  c.pass = comb > 0.999 && lin < 1e-6 && inter < 1e-6 && monotone && last > 0.999;
  return c;
}

Check coherent_decay(int workers) {
  Check c{"coherent_decay", {}, true, {}};
  const FockSpace s(30);
  ModelParams p;
  p.j_over_omega0 = 0.0;
  const DrivenModel model(s, p);
  RampSchedule sched;
  sched.t_final = 20.0;
  PrepConfig cfg;
  cfg.sample_every = 2.0;
  NoiseConfig noise;
  noise.quality_factor = 100.0;
  StateVector v(s.dim());
  double amp = std::exp(-0.5);
  for (int n = 0; n < s.dim(); ++n) {
    v(n) = amp;
    amp /= std::sqrt(n + 1.0);
  }
  v /= v.norm();
  const int m = 500;
  std::vector<std::vector<double>> photons(m);
  std::vector<double> times;
  parallel_for(m, workers, [&](int k) {
    const TrajectoryResult t = trajectory_evolve(model, v, sched, cfg, noise, static_cast<std::uint64_t>(k));
    for (const Observables& o : t.samples) photons[static_cast<std::size_t>(k)].push_back(o.mean_photons);
  });
  const RampEvolution evo(model, sched, cfg);
  Json rows = Json::array();
  for (std::size_t i = 0; i < photons[0].size(); ++i) {
    double mean = 0.0, sq = 0.0;
    for (const auto& row : photons) {
      mean += row[i] / m;
      sq += row[i] * row[i] / m;
    }
    const double se = std::sqrt(std::max(0.0, sq - mean * mean) / (m - 1));
    const double t = static_cast<double>(evo.sample_steps()[i]) * evo.dt();
    const double exact = std::exp(-t / noise.quality_factor);
    rows.push_back({{"t_over_T", t / kPeriod}, {"mean_photons", mean}, {"stderr", se}, {"exact", exact}});
    c.pass = c.pass && std::abs(mean - exact) <= 3.0 * se + 1e-9;
  }
  c.values = {{"alpha", 1.0}, {"quality_factor", noise.quality_factor}, {"n_trajectories", m}, {"samples", rows}};
  return c;
}

Check periodogram_slopes() {
  Check c{"periodogram_slopes", {}, false, {}};
  const double dt = kPeriod / 64.0;
  const double unit = 1.0 / (2.0 * kPi * 1e9);
  const std::size_t n = 1 << 18;
  FluxSpectrum white;
  white.amplitude_1f = 0.0;
  white.white_floor = 1e-8;
  white.low_cutoff_hz = 1e6;
  white.high_cutoff_hz = 0.5 / (dt * unit);
  FluxSpectrum pink = white;
  pink.amplitude_1f = 5e-6;
  pink.white_floor = 0.0;
  const Periodogram pw = periodogram(flux_noise_trace(white, n, dt, 1.0, 3).samples, dt, 1.0);
  const Periodogram pp = periodogram(flux_noise_trace(pink, n, dt, 1.0, 4).samples, dt, 1.0);
  const double sw = log_log_slope(pw, 1e8, 0.9 * white.high_cutoff_hz);
  const double f0 = pp.frequency_hz.front();
  const double sp = log_log_slope(pp, 10.0 * f0, 1000.0 * f0);
  c.values = {{"white_slope", sw}, {"one_over_f_slope", sp}, {"tolerance", 0.1}};
  c.pass = std::abs(sw) <= 0.1 && std::abs(sp + 1.0) <= 0.1;
  return c;
}

void write_text(const std::string& dir, const std::string& name, const std::string& text) {
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
}

}  // namespace

RunReport run_oracles(const std::string& output_dir, int workers) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::function<Check()>> tasks{kicked_identity, fourier_symmetry, decoder_suite,
                                            [workers] { return coherent_decay(workers); }, periodogram_slopes};
  std::vector<Check> checks;
  for (const auto& task : tasks) {
    Check c;
    try {
      c = task();
    } catch (const Error& e) {
      c.error = e.what();
    }
    checks.push_back(std::move(c));
  }
  RunReport report;
  report.output_dir = output_dir;
  Json list = Json::array();
  std::ostringstream summary;
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const Check& c = checks[i];
    const bool ok = c.pass && c.error.empty();
    const std::string name = c.name.empty() ? "oracle_" + std::to_string(i) : c.name;
    report.points.push_back({name, ok ? "complete" : "failed", c.error.empty() && !ok ? "check failed" : c.error,
                             ok ? 0 : 3});
    Json e{{"name", name}, {"pass", ok}, {"values", c.values}};
    if (!c.error.empty()) e["error"] = c.error;
    list.push_back(e);
    summary << (ok ? "PASS " : "FAIL ") << name << "\n";
    failed += ok ? 0 : 1;
  }
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(std::string("oracles ") + kVersion);
  report.config_hash = hash.str();
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::filesystem::create_directories(output_dir);
  Json doc{{"config_hash", report.config_hash}, {"code_version", kVersion}, {"oracles", list}};
  write_text(output_dir, "oracles.json", doc.dump(2) + "\n");
  summary << "wall time " << wall << " s\n";
  report.summary = summary.str();
  write_text(output_dir, "summary.txt", "config_hash: " + report.config_hash + "\n" + report.summary);
  report.exit_code = failed == 0 ? 0 : failed < static_cast<int>(checks.size()) ? 4 : 3;
  return report;
}

}  // namespace gkp
