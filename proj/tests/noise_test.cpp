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

#include "gkpfloquet/noise.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "gkpfloquet/errors.hpp"
#include "oracles.hpp"

using namespace gkp;

namespace {

using oracle::coherent;
using oracle::log_log_slope;

constexpr double kDt = kPeriod / 64.0;
// seconds per model time unit at 1 GHz
const double kUnit = 1.0 / (2.0 * kPi * 1e9);

FluxSpectrum band(double a, double w) {
  FluxSpectrum s;
  s.amplitude_1f = a;
  s.white_floor = w;
  s.low_cutoff_hz = 1e6;
  s.high_cutoff_hz = 0.5 / (kDt * kUnit);
  return s;
}

struct Small {
  FockSpace space{40};
  DrivenModel model{space, ModelParams{}};
  RampSchedule schedule = [] {
    RampSchedule s;
    s.t_final = 30.0;
    return s;
  }();
};

}  // namespace

TEST(Seeds, SplitMixReferenceValues) {
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_NE(trajectory_seed(1, 0), trajectory_seed(1, 1));
  EXPECT_NE(trajectory_seed(1, 0), trajectory_seed(2, 0));
  EXPECT_EQ(trajectory_seed(7, 3), trajectory_seed(7, 3));
}

TEST(NoiseConfig, Validation) {
  NoiseConfig n;
  EXPECT_FALSE(n.lossy());
  EXPECT_EQ(n.damping_rate(), 0.0);
  n.quality_factor = 1e6;
  EXPECT_DOUBLE_EQ(n.damping_rate(), 1e-6);
  n.n_trajectories = 0;
  EXPECT_THROW(n.validate(), Error);
  n = NoiseConfig{};
  n.quality_factor = -1.0;
  EXPECT_THROW(n.validate(), Error);
}

TEST(NoiseConfig, DefaultCutoffs) {
  NoiseConfig n;
  const FluxSpectrum s = n.spectrum(2000.0, 4);
  EXPECT_DOUBLE_EQ(s.low_cutoff_hz, 1e9 / 20000.0);
  EXPECT_DOUBLE_EQ(s.high_cutoff_hz, 32e9);
}

TEST(FluxTrace, ZeroAmplitudesGiveZeroTrace) {
  const FluxNoiseTrace t = flux_noise_trace(band(0.0, 0.0), 4096, kDt, 1.0, 5);
  ASSERT_EQ(t.samples.size(), 4096u);
  for (double x : t.samples) EXPECT_EQ(x, 0.0);
}

TEST(FluxTrace, CutoffErrors) {
  FluxSpectrum s = band(1e-6, 0.0);
  s.low_cutoff_hz = 2.0 * s.high_cutoff_hz;
  try {
    flux_noise_trace(s, 1024, kDt, 1.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  s = band(1e-6, 0.0);
  s.high_cutoff_hz *= 1.5;
  EXPECT_THROW(flux_noise_trace(s, 1024, kDt, 1.0, 1), Error);
}

TEST(FluxTrace, VarianceMatchesIntegratedSpectrum) {
  const FluxSpectrum s = band(0.0, 1e-8);
  const std::size_t n = 1 << 18;
  const FluxNoiseTrace t = flux_noise_trace(s, n, kDt, 1.0, 11);
  double var = 0.0;
  for (double x : t.samples) var += x * x;
  var /= static_cast<double>(n);
  const double expected = s.white_floor * s.white_floor * (s.high_cutoff_hz - s.low_cutoff_hz);
  EXPECT_NEAR(var / expected, 1.0, 0.02);
}

TEST(FluxTrace, WhitePeriodogramIsFlat) {
  const FluxSpectrum s = band(0.0, 1e-8);
  const std::size_t n = 1 << 18;
  const FluxNoiseTrace t = flux_noise_trace(s, n, kDt, 1.0, 3);
  const Periodogram p = periodogram(t.samples, kDt, 1.0);
  const double slope = log_log_slope(p, 1e8, 0.9 * s.high_cutoff_hz);
  EXPECT_NEAR(slope, 0.0, 0.1);
}

TEST(FluxTrace, OneOverFPeriodogramSlope) {
  FluxSpectrum s = band(5e-6, 0.0);
  const std::size_t n = 1 << 18;
  const FluxNoiseTrace t = flux_noise_trace(s, n, kDt, 1.0, 4);
  const Periodogram p = periodogram(t.samples, kDt, 1.0);
  const double f_min = p.frequency_hz.front();
  const double slope = log_log_slope(p, 10.0 * f_min, 1000.0 * f_min);
  EXPECT_NEAR(slope, -1.0, 0.1);
}

TEST(FluxTrace, EnsembleMeanIsZero) {
  const FluxSpectrum s = band(5e-6, 1e-8);
  const std::size_t n = 2048;
  std::vector<double> mean(n, 0.0);
  double var = 0.0;
  const int m = 400;
  for (int k = 0; k < m; ++k) {
    const FluxNoiseTrace t = flux_noise_trace(s, n, kDt, 1.0, trajectory_seed(9, k));
    for (std::size_t i = 0; i < n; ++i) {
      mean[i] += t.samples[i] / m;
      var += t.samples[i] * t.samples[i] / (m * static_cast<double>(n));
    }
  }
  const double se = std::sqrt(var / m);
  for (std::size_t i = 0; i < n; i += 97) EXPECT_LT(std::abs(mean[i]), 5.0 * se);
}

TEST(Trajectory, NoLossMatchesPrepare) {
  const Small c;
  const PreparationRun ref = prepare(c.model, c.space.fock_state(0), c.schedule);
  const TrajectoryResult t = trajectory_evolve(c.model, c.space.fock_state(0), c.schedule, PrepConfig{}, NoiseConfig{}, 4);
  EXPECT_EQ((t.final_state - ref.final_state).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(t.record.jump_times.empty());
}

TEST(Trajectory, WeakLossApproachesNoiseless) {
  const Small c;
  const PreparationRun ref = prepare(c.model, c.space.fock_state(0), c.schedule);
  double previous = 1.0;
  for (double q : {1e6, 1e8, 1e10}) {
    NoiseConfig n;
    n.quality_factor = q;
    const TrajectoryResult t = trajectory_evolve(c.model, c.space.fock_state(0), c.schedule, PrepConfig{}, n, 0);
    ASSERT_TRUE(t.record.jump_times.empty());
    const double d = (t.final_state - ref.final_state).norm();
    EXPECT_LT(d, previous);
    previous = d;
  }
  EXPECT_LT(previous, 1e-6);
}

TEST(Trajectory, VacuumNeverJumps) {
  const FockSpace s(20);
  ModelParams p;
  p.j_over_omega0 = 0.0;
  RampSchedule sched;
  sched.t_final = 20.0;
  NoiseConfig n;
  n.quality_factor = 10.0;
  const TrajectoryResult t = trajectory_evolve(DrivenModel(s, p), s.fock_state(0), sched, PrepConfig{}, n, 1);
  EXPECT_TRUE(t.record.jump_times.empty());
  EXPECT_NEAR(std::abs(t.final_state(0)), 1.0, 1e-14);
}

TEST(Trajectory, SinglePhotonJumpsToVacuum) {
  const FockSpace s(20);
  ModelParams p;
  p.j_over_omega0 = 0.0;
  RampSchedule sched;
  sched.t_final = 20.0;
  NoiseConfig n;
  n.quality_factor = 20.0;
  int jumped = 0;
  for (int k = 0; k < 20; ++k) {
    const TrajectoryResult t = trajectory_evolve(DrivenModel(s, p), s.fock_state(1), sched, PrepConfig{}, n, k);
    ASSERT_LE(t.record.jump_times.size(), 1u);
    if (t.record.jump_times.empty()) {
      EXPECT_NEAR(std::abs(t.final_state(1)), 1.0, 1e-12);
      continue;
    }
    ++jumped;
    EXPECT_NEAR(std::abs(t.final_state(0)), 1.0, 1e-12);
    // the no-jump norm e^{-kappa t} equals the drawn threshold at the jump
    const double tj = t.record.jump_times[0] * kPeriod;
    std::mt19937_64 rng(t.record.seed);
    const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    EXPECT_NEAR(std::exp(-tj / n.quality_factor), r, 1e-9);
  }
  EXPECT_GT(jumped, 0);
}

// <n>(t) = |alpha|^2 e^{-kappa t} for the Lindblad master equation with J = 0.
void check_decay(const StateVector& initial, double n0, const FockSpace& s) {
  ModelParams p;
  p.j_over_omega0 = 0.0;
  const DrivenModel model(s, p);
  RampSchedule sched;
  sched.t_final = 20.0;
  PrepConfig cfg;
  cfg.sample_every = 2.0;
  NoiseConfig n;
  n.quality_factor = 100.0;
  const int m = 500;
  std::vector<std::vector<double>> photons;
  for (int k = 0; k < m; ++k) {
    const TrajectoryResult t = trajectory_evolve(model, initial, sched, cfg, n, k);
    std::vector<double> row;
    for (const Observables& o : t.samples) row.push_back(o.mean_photons);
    photons.push_back(row);
  }
  n.n_trajectories = m;
  const EnsembleResult e = ensemble_prepare(model, initial, sched, cfg, n);
  ASSERT_EQ(e.run.timeline.size(), photons[0].size());
  for (std::size_t i = 0; i < e.run.timeline.size(); ++i) {
    double mean = 0.0, sq = 0.0;
    for (const auto& row : photons) {
      mean += row[i] / m;
      sq += row[i] * row[i] / m;
    }
    const double se = std::sqrt(std::max(0.0, sq - mean * mean) / (m - 1));
    const double exact = n0 * std::exp(-e.run.timeline[i].t_periods * kPeriod / n.quality_factor);
    EXPECT_NEAR(e.run.timeline[i].mean_photons, mean, 1e-12);
    EXPECT_LE(std::abs(mean - exact), 3.0 * se + 1e-9) << "t = " << e.run.timeline[i].t_periods;
  }
}

TEST(Ensemble, CoherentStatePhotonDecay) {
  const FockSpace s(30);
  check_decay(coherent(s, 1.0), 1.0, s);
}

TEST(Ensemble, FockStatePhotonDecay) {
  const FockSpace s(30);
  check_decay(s.fock_state(2), 2.0, s);
}

TEST(Ensemble, SingleLosslessTrajectoryMatchesPrepare) {
  const Small c;
  const PreparationRun ref = prepare(c.model, c.space.fock_state(0), c.schedule);
  const EnsembleResult e = ensemble_prepare(c.model, c.space.fock_state(0), c.schedule, PrepConfig{}, NoiseConfig{});
  EXPECT_EQ((e.run.final_state - ref.final_state).cwiseAbs().maxCoeff(), 0.0);
  ASSERT_EQ(e.run.timeline.size(), ref.timeline.size());
  EXPECT_EQ(e.run.final_record.logical_fidelity, ref.final_record.logical_fidelity);
  EXPECT_EQ(e.run.final_record.squeezing_db_x, ref.final_record.squeezing_db_x);
}

TEST(Ensemble, DensityMatrixIsPhysical) {
  const Small c;
  NoiseConfig n;
  n.quality_factor = 200.0;
  n.n_trajectories = 24;
  n.flux.enabled = true;
  n.flux.amplitude_1f = 1e-4;
  n.batch_columns = 5;
  const EnsembleResult e = ensemble_prepare(c.model, c.space.fock_state(0), c.schedule, PrepConfig{}, n);
  const DensityMatrix& rho = e.run.final_rho;
  EXPECT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
  Eigen::SelfAdjointEigenSolver<DensityMatrix> eig(rho);
  EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-8);
  EXPECT_NEAR(e.run.final_record.norm_or_trace, 1.0, 1e-10);
}

TEST(Ensemble, CachedPathMatchesDirectTrajectories) {
  const Small c;
  NoiseConfig n;
  n.quality_factor = 30.0;
  n.n_trajectories = 12;
  const EnsembleResult e = ensemble_prepare(c.model, c.space.fock_state(4), c.schedule, PrepConfig{}, n);
  int with_jumps = 0;
  for (int k = 0; k < n.n_trajectories; ++k) {
    const TrajectoryResult t = trajectory_evolve(c.model, c.space.fock_state(4), c.schedule, PrepConfig{}, n, k);
    EXPECT_EQ(t.record.jump_times, e.trajectories[k].jump_times) << k;
    EXPECT_EQ(t.record.final_squeezing_db, e.trajectories[k].final_squeezing_db) << k;
    with_jumps += t.record.jump_times.empty() ? 0 : 1;
  }
  EXPECT_GT(with_jumps, 0);
  EXPECT_EQ(e.no_jump_trajectories, n.n_trajectories - with_jumps);
}

TEST(Ensemble, DeterministicAcrossWorkerCounts) {
  const Small c;
  for (bool flux : {false, true}) {
    NoiseConfig n;
    n.quality_factor = 300.0;
    n.n_trajectories = 10;
    n.flux.enabled = flux;
    n.flux.amplitude_1f = 1e-4;
    n.batch_columns = 3;
    n.workers = 1;
    const EnsembleResult a = ensemble_prepare(c.model, c.space.fock_state(0), c.schedule, PrepConfig{}, n);
    n.workers = 3;
    const EnsembleResult b = ensemble_prepare(c.model, c.space.fock_state(0), c.schedule, PrepConfig{}, n);
    EXPECT_EQ((a.run.final_rho - b.run.final_rho).cwiseAbs().maxCoeff(), 0.0) << flux;
    EXPECT_EQ(a.squeezing_db_stderr, b.squeezing_db_stderr);
    std::ostringstream ca, cb;
    write_trajectory_csv(ca, a.trajectories);
    write_trajectory_csv(cb, b.trajectories);
    EXPECT_EQ(ca.str(), cb.str());
  }
}

TEST(Ensemble, ZeroFluxAmplitudeRecoversNoiseless) {
  const Small c;
  NoiseConfig n;
  n.flux.enabled = true;
  n.flux.amplitude_1f = 0.0;
  n.flux.white_floor = 0.0;
  n.n_trajectories = 3;
  const EnsembleResult e = ensemble_prepare(c.model, c.space.fock_state(0), c.schedule, PrepConfig{}, n);
  const PreparationRun ref = prepare(c.model, c.space.fock_state(0), c.schedule);
  const StateVector& v = ref.final_state;
  EXPECT_LT((e.run.final_rho - v * v.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ensemble, TrajectoryCsvHeader) {
  TrajectoryRecord r;
  r.index = 2;
  r.seed = 9;
  r.jump_times = {1.5, 2.25};
  r.final_squeezing_db = 3.0;
  std::ostringstream out;
  write_trajectory_csv(out, {r});
  EXPECT_EQ(out.str(), "index,seed,jumps,jump_times,final_squeezing_dB\n2,9,2,1.5;2.25,3\n");
}
