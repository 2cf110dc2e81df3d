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

#include "gkpfloquet/state_prep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "gkpfloquet/errors.hpp"

namespace gkp {

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double logistic_tail(double slope, double center, double u) { return 1.0 / (1.0 + std::exp(slope * (u - center))); }

// Antiderivative of logistic_tail in u.
double logistic_tail_integral(double slope, double center, double u) {
  return u - softplus(slope * (u - center)) / slope;
}

}  // namespace

void RampSchedule::validate() const {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) fail(ErrorCode::kInvalidArgument, "ramp: t_final must be > 0");
  if (!(omega_initial > 0.0) || !std::isfinite(omega_initial)) {
    fail(ErrorCode::kInvalidArgument, "ramp: omega_initial must be > 0");
  }
  if (!(slope > 0.0) || !std::isfinite(slope)) fail(ErrorCode::kInvalidArgument, "ramp: slope must be > 0");
  if (!(center >= 0.0 && center <= 1.0)) fail(ErrorCode::kInvalidArgument, "ramp: center must lie in [0, 1]");
}

double RampSchedule::shape(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  if (u == 0.0) return 1.0;
  if (u == 1.0) return 0.0;
  const double g0 = logistic_tail(slope, center, 0.0);
  const double g1 = logistic_tail(slope, center, 1.0);
  return (logistic_tail(slope, center, u) - g1) / (g0 - g1);
}

double RampSchedule::frequency(double t) const {
  return 1.0 + (omega_initial - 1.0) * shape(t / duration());
}

double RampSchedule::phase(double t) const {
  const double d = duration();
  const double g0 = logistic_tail(slope, center, 0.0);
  const double g1 = logistic_tail(slope, center, 1.0);
  const double i0 = logistic_tail_integral(slope, center, 0.0);
  // int_0^u sigma
  auto sigma_integral = [&](double u) {
    return (logistic_tail_integral(slope, center, u) - i0 - g1 * u) / (g0 - g1);
  };
  const double u = std::clamp(t / d, 0.0, 1.0);
  double theta = t + (omega_initial - 1.0) * d * sigma_integral(u);
  if (align_final_phase) theta -= (omega_initial - 1.0) * d * sigma_integral(1.0);
  return theta;
}

double ramp_frequency(const RampSchedule& schedule, double t_periods) {
  return schedule.frequency(kPeriod * t_periods);
}

double drive_phase(const RampSchedule& schedule, double t_periods, int harmonic) {
  return 4.0 * harmonic * schedule.phase(kPeriod * t_periods);
}

Observables& Observables::operator+=(const Observables& o) {
  stabilizer_x += o.stabilizer_x;
  stabilizer_p += o.stabilizer_p;
  logical_x += o.logical_x;
  logical_y += o.logical_y;
  logical_z += o.logical_z;
  mean_photons += o.mean_photons;
  norm += o.norm;
  leakage += o.leakage;
  return *this;
}

Observables& Observables::operator*=(double s) {
  stabilizer_x *= s;
  stabilizer_p *= s;
  logical_x *= s;
  logical_y *= s;
  logical_z *= s;
  mean_photons *= s;
  norm *= s;
  leakage *= s;
  return *this;
}

Observables observe(const GkpMetrics& metrics, const StateVector& state) {
  Observables o;
  o.norm = state.squaredNorm();
  if (!(o.norm > 0.0)) fail(ErrorCode::kInvalidArgument, "observe: zero state");
  const StateVector psi = state / std::sqrt(o.norm);
  o.stabilizer_x = metrics.stabilizer_expectation(psi, StabilizerKind::kX);
  o.stabilizer_p = metrics.stabilizer_expectation(psi, StabilizerKind::kP);
  const Decoder& dec = metrics.decoder();
  o.logical_x = psi.dot(dec.pauli_x() * psi).real();
  o.logical_y = psi.dot(dec.pauli_y() * psi).real();
  o.logical_z = psi.dot(dec.pauli_z() * psi).real();
  o.mean_photons = psi.cwiseAbs2().dot(metrics.space().number_diagonal());
  o.leakage = metrics.space().leakage(psi);
  return o;
}

TimelineRecord summarize(double t_periods, double omega, const Observables& obs, LogicalTarget target) {
  TimelineRecord r;
  r.t_periods = t_periods;
  r.omega = omega;
  try {
    const SqueezingReport sq = squeezing_from_stabilizers(obs.stabilizer_x, obs.stabilizer_p);
    r.squeezing_db_x = sq.db_x;
    r.squeezing_db_p = sq.db_p;
  } catch (const Error&) {
    r.squeezing_db_x = r.squeezing_db_p = std::numeric_limits<double>::quiet_NaN();
  }
  r.logical_fidelity = LogicalState::from_bloch(obs.logical_x, obs.logical_y, obs.logical_z).fidelity(target);
  r.mean_photons = obs.mean_photons;
  r.norm_or_trace = obs.norm;
  r.leakage = obs.leakage;
  return r;
}

void write_timeline_csv(std::ostream& out, const std::vector<TimelineRecord>& timeline) {
  out << "t_over_T,omega_over_omega0,squeezing_dB_x,squeezing_dB_p,logical_fidelity,mean_photon_number,"
         "norm_or_trace\n";
  const auto old = out.precision(12);
  for (const auto& r : timeline) {
    out << r.t_periods << ',' << r.omega << ',' << r.squeezing_db_x << ',' << r.squeezing_db_p << ','
        << r.logical_fidelity << ',' << r.mean_photons << ',' << r.norm_or_trace << '\n';
  }
  out.precision(old);
}

int default_prep_steps(int n_harmonics) { return 16 * n_harmonics; }

RampEvolution::RampEvolution(const DrivenModel& model, const RampSchedule& schedule, const PrepConfig& cfg,
                             double damping_rate, const SampledSignal* flux)
    : schedule_(schedule),
      kernel_(make_kernel(model, damping_rate)),
      program_(model, [s = schedule](double t) { return s.phase(t); }, flux) {
  schedule_.validate();
  if (!(cfg.sample_every > 0.0 && cfg.sample_every <= 10.0)) {
    fail(ErrorCode::kInvalidArgument, "sample_every must lie in (0, 10] periods");
  }
  const int n = model.params().n_harmonics;
  steps_per_period_ = cfg.integrator.resolve(n, default_prep_steps(n));
  // resolve the fastest instantaneous drive period
  const double fastest = std::max(1.0, schedule_.omega_initial);
  const double per_period = std::ceil(steps_per_period_ * fastest - 1e-9);
  total_steps_ = static_cast<long>(std::ceil(schedule_.t_final * per_period - 1e-9));
  dt_ = schedule_.duration() / static_cast<double>(total_steps_);
  half_ = kernel_.free_factors(0.5 * dt_);
  sample_steps_.push_back(0);
  for (long k = 1;; ++k) {
    const double t = static_cast<double>(k) * cfg.sample_every;
    if (t >= schedule_.t_final - 1e-9) break;
    const long s = std::lround(t / schedule_.t_final * static_cast<double>(total_steps_));
    if (s > sample_steps_.back()) sample_steps_.push_back(s);
  }
  sample_steps_.push_back(total_steps_);
  coeffs_.resize(static_cast<std::size_t>(program_.num_terms()));
}

void RampEvolution::step(SplitStepKernel::Work& work, long j) const {
  program_.coefficients((static_cast<double>(j) + 0.5) * dt_, coeffs_);
  kernel_.step(work, coeffs_, dt_, half_);
}

void RampEvolution::partial_step(SplitStepKernel::Work& work, double t, double h) const {
  const SplitStepKernel::FreeFactors half = kernel_.free_factors(0.5 * h);
  program_.coefficients(t + 0.5 * h, coeffs_);
  kernel_.step(work, coeffs_, h, half);
}

void check_leakage(double leakage, double limit, double t_periods) {
  if (leakage > limit) {
    std::ostringstream msg;
    msg << "Fock leakage " << leakage << " in the top 10% of levels exceeds " << limit << " at t/T = " << t_periods
        << "; increase the Fock dimension";
    fail(ErrorCode::kTruncation, msg.str());
  }
}

namespace {

// Population outside the n mod 4 classes in `occupied`.
double class_leak(const StateVector& psi, const std::array<bool, 4>& occupied) {
  double s = 0.0;
  for (Eigen::Index n = 0; n < psi.size(); ++n) {
    if (!occupied[static_cast<std::size_t>(n % 4)]) s += std::norm(psi(n));
  }
  return s / psi.squaredNorm();
}

}  // namespace

PreparationRun prepare(const DrivenModel& model, const StateVector& initial, const RampSchedule& schedule,
                       const PrepConfig& cfg) {
  const FockSpace& space = model.space();
  if (initial.size() != space.dim()) fail(ErrorCode::kInvalidArgument, "prepare: initial state dimension mismatch");
  if (std::abs(initial.squaredNorm() - 1.0) > 1e-8) fail(ErrorCode::kInvalidArgument, "prepare: initial state not normalized");
  const RampEvolution evo(model, schedule, cfg);
  const GkpMetrics metrics(space);

  std::array<bool, 4> occupied{};
  for (Eigen::Index n = 0; n < initial.size(); ++n) {
    if (std::norm(initial(n)) > 1e-12) occupied[static_cast<std::size_t>(n % 4)] = true;
  }

  PreparationRun run;
  run.schedule = evo.schedule();
  run.steps_per_period = evo.steps_per_period();
  SplitStepKernel::Work work = evo.kernel().load(initial);
  long done = 0;
  for (long target : evo.sample_steps()) {
    for (; done < target; ++done) evo.step(work, done);
    const StateVector psi = evo.kernel().store_vector(work);
    const double t = static_cast<double>(done) * evo.dt();
    const double t_periods = t / kPeriod;
    const TimelineRecord rec = summarize(t_periods, evo.schedule().frequency(t), observe(metrics, psi), cfg.target);
    check_leakage(rec.leakage, cfg.leakage_limit, t_periods);
    run.max_class_leak = std::max(run.max_class_leak, class_leak(psi, occupied));
    run.timeline.push_back(rec);
    if (done == evo.total_steps()) run.final_state = psi;
  }
  run.final_record = run.timeline.back();
  return run;
}

SuperpositionResult prepare_superposition(const DrivenModel& model, cplx alpha, cplx beta,
                                          const RampSchedule& schedule, const PrepConfig& cfg,
                                          const StateVector& psi_plus, const StateVector& psi_minus) {
  const FockSpace& space = model.space();
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-8) {
    fail(ErrorCode::kInvalidArgument, "prepare_superposition: |alpha|^2 + |beta|^2 must be 1");
  }
  if (space.dim() < 3) fail(ErrorCode::kInvalidArgument, "prepare_superposition: Fock dimension below 3");
  if (psi_plus.size() != space.dim() || psi_minus.size() != space.dim()) {
    fail(ErrorCode::kInvalidArgument, "prepare_superposition: Floquet pair dimension mismatch");
  }
  StateVector initial = StateVector::Zero(space.dim());
  initial(0) = alpha;
  initial(2) = beta;
  SuperpositionResult out;
  out.run = prepare(model, initial, schedule, cfg);
  const StateVector& f = out.run.final_state;
  const cplx cp = psi_plus.dot(f);
  const cplx cm = psi_minus.dot(f);
  out.weight_plus = std::norm(cp);
  out.weight_minus = std::norm(cm);
  // relative phase of the minus component against the plus component,
  // with the amplitudes' own phases removed
  if (std::abs(alpha) > 0.0 && std::abs(beta) > 0.0) {
    out.phase = std::arg((cm / beta) * std::conj(cp / alpha));
  }
  out.logical = GkpMetrics(space).decoder().decode(f);
  return out;
}

std::vector<RampSearchPoint> search_ramp(const DrivenModel& model, const RampSchedule& base,
                                         const std::vector<double>& slopes, const std::vector<double>& centers,
                                         const PrepConfig& cfg) {
  StateVector vacuum = model.space().fock_state(0);
  std::vector<RampSearchPoint> out;
  for (double s : slopes) {
    for (double c : centers) {
      RampSchedule sched = base;
      sched.slope = s;
      sched.center = c;
      const PreparationRun run = prepare(model, vacuum, sched, cfg);
      const TimelineRecord& r = run.final_record;
      out.push_back({s, c, 0.5 * (r.squeezing_db_x + r.squeezing_db_p)});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const RampSearchPoint& a, const RampSearchPoint& b) {
    const double x = std::isnan(a.squeezing_db) ? -1e300 : a.squeezing_db;
    const double y = std::isnan(b.squeezing_db) ? -1e300 : b.squeezing_db;
    return x > y;
  });
  return out;
}

}  // namespace gkp
