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

#ifndef GKPFLOQUET_NOISE_HPP
#define GKPFLOQUET_NOISE_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gkpfloquet/state_prep.hpp"

namespace gkp {

/// One-sided flux-noise spectrum S(f) = A^2 (1 Hz / f) + W^2 between cutoffs.
/// Flux is measured in reduced flux quanta (the phase offset in radians).
struct FluxSpectrum {
  double amplitude_1f = 5e-6;
  double white_floor = 1e-8;
  double low_cutoff_hz = 0.0;
  double high_cutoff_hz = 0.0;

  /// PSD in rad^2 / Hz; zero outside [low, high].
  double psd(double f_hz) const;
  void validate() const;
};

struct FluxNoiseConfig {
  bool enabled = false;
  double amplitude_1f = 5e-6;
  double white_floor = 1e-8;
  /// 0 selects 1 / (10 t_f).
  double low_cutoff_hz = 0.0;
  /// 0 selects 8 N w0 / 2 pi.
  double high_cutoff_hz = 0.0;
  /// SQUID phase deviation per unit of trace, so dJ = E_J * coupling * trace.
  /// 1 when the full noise flux threads the SQUID loop.
  double squid_coupling = 0.5;
};

struct NoiseConfig {
  /// Q = w0 / kappa; 0 or infinity means no photon loss.
  double quality_factor = 0.0;
  FluxNoiseConfig flux;
  int n_trajectories = 1;
  std::uint64_t master_seed = 20260101;
  int workers = 1;
  int bootstrap_samples = 200;
  /// w0 / 2 pi in GHz; converts the spectrum's Hz to model time.
  double omega0_over_2pi_ghz = 1.0;
  /// Trajectories per gemm batch when each trajectory carries its own flux trace.
  int batch_columns = 16;

  bool lossy() const;
  /// kappa / w0.
  double damping_rate() const;
  void validate() const;
  /// Spectrum with the cutoff defaults resolved for a run.
  FluxSpectrum spectrum(double t_final_periods, int n_harmonics) const;
};

/// Counter-based seed derivation: splitmix64 of master and index.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

struct FluxNoiseTrace {
  std::vector<double> samples;
  /// Spacing in units of 1 / w0.
  double dt = 0.0;
  std::uint64_t seed = 0;

  SampledSignal signal() const { return SampledSignal{dt, samples}; }
};

/// Gaussian spectral synthesis of a real trace of `n_samples` points spaced
/// dt (units of 1 / w0). Throws kInvalidArgument on misordered cutoffs or a
/// high cutoff above Nyquist.
FluxNoiseTrace flux_noise_trace(const FluxSpectrum& spectrum, std::size_t n_samples, double dt,
                                double omega0_over_2pi_ghz, std::uint64_t seed);

struct Periodogram {
  std::vector<double> frequency_hz;
  std::vector<double> psd;
};
/// One-sided periodogram 2 |X_k|^2 dt / n, k = 1 .. n/2 - 1.
Periodogram periodogram(const std::vector<double>& samples, double dt, double omega0_over_2pi_ghz);

struct TrajectoryRecord {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  std::vector<double> jump_times;
  double final_squeezing_db = 0.0;
};

struct TrajectoryResult {
  /// Observables at each sample step of the ramp.
  std::vector<Observables> samples;
  /// Normalized final state.
  StateVector final_state;
  TrajectoryRecord record;
};

/// Quantum-jump trajectory of the lossy, flux-noisy ramp. Deterministic in
/// (master_seed, index).
TrajectoryResult trajectory_evolve(const DrivenModel& model, const StateVector& initial, const RampSchedule& schedule,
                                   const PrepConfig& cfg, const NoiseConfig& noise, std::uint64_t index);

struct EnsembleResult {
  /// Averaged timeline, final density matrix and final record.
  PreparationRun run;
  /// Bootstrap standard errors of the final metrics.
  double squeezing_db_stderr = 0.0;
  double fidelity_stderr = 0.0;
  std::vector<TrajectoryRecord> trajectories;
  /// Trajectories served from the shared no-jump path.
  int no_jump_trajectories = 0;
};

/// rho = (1/M) sum_k |psi_k><psi_k| with metrics on rho.
EnsembleResult ensemble_prepare(const DrivenModel& model, const StateVector& initial, const RampSchedule& schedule,
                                const PrepConfig& cfg, const NoiseConfig& noise);

/// index,seed,jumps,jump_times,final_squeezing_dB
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRecord>& trajectories);

}  // namespace gkp

#endif  // GKPFLOQUET_NOISE_HPP
