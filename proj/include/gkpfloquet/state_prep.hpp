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

#ifndef GKPFLOQUET_STATE_PREP_HPP
#define GKPFLOQUET_STATE_PREP_HPP

#include <iosfwd>
#include <vector>

#include "gkpfloquet/floquet.hpp"
#include "gkpfloquet/propagation.hpp"

namespace gkp {

/// Sigmoid chirp of the drive frequency into resonance.
///
///   w(t) = w0 + (w(0) - w0) sigma(t / t_f),
///   sigma(u) = (g(u) - g(1)) / (g(0) - g(1)),  g(u) = 1 / (1 + exp(slope (u - center))),
///
/// so sigma(0) = 1 and sigma(1) = 0 exactly.
struct RampSchedule {
  /// Preparation time in drive periods T = 2 pi / w0.
  double t_final = 2000.0;
  /// w(0) / w0. Below resonance by the incommensurate factor 1 - pi e-2.
  double omega_initial = 1.0 - kPi * 1e-2;
  // defaults from a coarse grid search maximizing noiseless squeezing from |0>
  // at t_final = 2000, N = 4, J = 2.5e-3, D = 250
  double slope = 16.0;
  /// Ramp midpoint as a fraction of t_final.
  double center = 0.4;
  /// Offset the drive phase so that it equals w0 t at t_final.
  bool align_final_phase = true;

  void validate() const;

  /// Duration in units of 1 / w0.
  double duration() const { return kPeriod * t_final; }
  /// w(t) / w0 for t in units of 1 / w0, clamped to [0, duration].
  double frequency(double t) const;
  /// Drive phase theta(t) = int_0^t w dt' (+ alignment offset), closed form.
  double phase(double t) const;
  /// sigma(u), u in [0, 1].
  double shape(double u) const;
};

/// w(t) / w0 with t in periods.
double ramp_frequency(const RampSchedule& schedule, double t_periods);
/// Phase of the nth drive harmonic, 4 n theta(t), t in periods.
double drive_phase(const RampSchedule& schedule, double t_periods, int harmonic);

/// Linear functionals of a state, averaged directly over trajectory ensembles.
struct Observables {
  cplx stabilizer_x{0.0, 0.0};
  cplx stabilizer_p{0.0, 0.0};
  double logical_x = 0.0;
  double logical_y = 0.0;
  double logical_z = 0.0;
  double mean_photons = 0.0;
  /// Norm squared (state) or trace (ensemble).
  double norm = 0.0;
  double leakage = 0.0;

  Observables& operator+=(const Observables& o);
  Observables& operator*=(double s);
};

/// Evaluates the observables of a normalized state.
Observables observe(const GkpMetrics& metrics, const StateVector& state);

struct TimelineRecord {
  double t_periods = 0.0;
  double omega = 1.0;
  double squeezing_db_x = 0.0;
  double squeezing_db_p = 0.0;
  double logical_fidelity = 0.0;
  double mean_photons = 0.0;
  double norm_or_trace = 1.0;
  double leakage = 0.0;
};

/// Metrics of (averaged) observables; squeezing is NaN where undefined.
TimelineRecord summarize(double t_periods, double omega, const Observables& obs, LogicalTarget target);

/// CSV with one record per line.
void write_timeline_csv(std::ostream& out, const std::vector<TimelineRecord>& timeline);

struct PrepConfig {
  /// Steps per drive period; 0 selects 16 N. The step is set against the
  /// fastest instantaneous drive frequency of the ramp.
  IntegratorConfig integrator;
  /// Timeline spacing in periods (at most 10).
  double sample_every = 10.0;
  LogicalTarget target = LogicalTarget::kHPlus;
  /// Population allowed in the top 10% of Fock levels.
  double leakage_limit = 1e-4;
};

int default_prep_steps(int n_harmonics);

/// Fixed-step discretization of a ramp: the kernel, the drive program and
/// the step and sampling grids.
class RampEvolution {
 public:
  RampEvolution(const DrivenModel& model, const RampSchedule& schedule, const PrepConfig& cfg,
                double damping_rate = 0.0, const SampledSignal* flux = nullptr);

  const SplitStepKernel& kernel() const { return kernel_; }
  const DriveProgram& program() const { return program_; }
  const RampSchedule& schedule() const { return schedule_; }
  int steps_per_period() const { return steps_per_period_; }
  long total_steps() const { return total_steps_; }
  double dt() const { return dt_; }
  /// Step counts at which the timeline is sampled: 0, every sample_every
  /// periods, and total_steps().
  const std::vector<long>& sample_steps() const { return sample_steps_; }

  /// Advances `work` by step j (from j dt to (j + 1) dt).
  void step(SplitStepKernel::Work& work, long j) const;
  /// Advances by a partial step of length h starting at time t (Strang, midpoint drive).
  void partial_step(SplitStepKernel::Work& work, double t, double h) const;

 private:
  RampSchedule schedule_;
  SplitStepKernel kernel_;
  DriveProgram program_;
  int steps_per_period_ = 0;
  long total_steps_ = 0;
  double dt_ = 0.0;
  SplitStepKernel::FreeFactors half_;
  std::vector<long> sample_steps_;
  mutable std::vector<double> coeffs_;
};

/// Throws kTruncation when the leakage exceeds the limit.
void check_leakage(double leakage, double limit, double t_periods);

struct PreparationRun {
  RampSchedule schedule;
  int steps_per_period = 0;
  std::vector<TimelineRecord> timeline;
  /// Pure final state (noiseless runs and single trajectories).
  StateVector final_state;
  /// Ensemble-averaged final density matrix (empty for pure runs).
  DensityMatrix final_rho;
  TimelineRecord final_record;
  /// Largest population outside the Fock classes n mod 4 occupied initially,
  /// over the sampled times.
  double max_class_leak = 0.0;
};

/// Noiseless, time-ordered evolution of `initial` under the chirped drive.
/// The drive is switched off at t_final.
PreparationRun prepare(const DrivenModel& model, const StateVector& initial, const RampSchedule& schedule,
                       const PrepConfig& cfg = {});

struct SuperpositionResult {
  PreparationRun run;
  /// |<psi+|final>|^2 and |<psi-|final>|^2.
  double weight_plus = 0.0;
  double weight_minus = 0.0;
  /// phi in alpha |psi+> + e^{i phi} beta |psi->.
  double phase = 0.0;
  LogicalState logical;
};

/// Prepares alpha |0> + beta |2> and projects onto the Floquet pair.
SuperpositionResult prepare_superposition(const DrivenModel& model, cplx alpha, cplx beta,
                                          const RampSchedule& schedule, const PrepConfig& cfg,
                                          const StateVector& psi_plus, const StateVector& psi_minus);

struct RampSearchPoint {
  double slope = 0.0;
  double center = 0.0;
  double squeezing_db = 0.0;
};

/// Grid search over slope x center maximizing final squeezing from |0>.
/// Returns every evaluated point, best first.
std::vector<RampSearchPoint> search_ramp(const DrivenModel& model, const RampSchedule& base,
                                         const std::vector<double>& slopes, const std::vector<double>& centers,
                                         const PrepConfig& cfg = {});

}  // namespace gkp

#endif  // GKPFLOQUET_STATE_PREP_HPP
