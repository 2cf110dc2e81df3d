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

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "gkpfloquet/errors.hpp"
#include "gkpfloquet/parallel.hpp"

namespace gkp {

namespace {

// Model time unit 1 / w0 in seconds.
double seconds_per_unit(double omega0_over_2pi_ghz) { return 1.0 / (2.0 * kPi * omega0_over_2pi_ghz * 1e9); }

// The FFTW planner is not thread safe; execution is.
std::mutex& fftw_mutex() {
  static std::mutex mu;
  return mu;
}

constexpr std::uint64_t kFluxStream = 0x6a09e667f3bcc909ULL;
constexpr std::uint64_t kBootstrapStream = 0xbb67ae8584caa73bULL;

}  // namespace

double FluxSpectrum::psd(double f) const {
  if (!(f > 0.0) || f < low_cutoff_hz || f > high_cutoff_hz) return 0.0;
  return amplitude_1f * amplitude_1f / f + white_floor * white_floor;
}

void FluxSpectrum::validate() const {
  if (!(amplitude_1f >= 0.0) || !(white_floor >= 0.0)) {
    fail(ErrorCode::kInvalidArgument, "flux noise amplitudes must be >= 0");
  }
  if (!(low_cutoff_hz > 0.0) || !(high_cutoff_hz > low_cutoff_hz) || !std::isfinite(high_cutoff_hz)) {
    std::ostringstream msg;
    msg << "flux noise cutoffs misordered: need 0 < low (" << low_cutoff_hz << " Hz) < high (" << high_cutoff_hz
        << " Hz)";
    fail(ErrorCode::kInvalidArgument, msg.str());
  }
}

bool NoiseConfig::lossy() const { return quality_factor > 0.0 && std::isfinite(quality_factor); }

double NoiseConfig::damping_rate() const { return lossy() ? 1.0 / quality_factor : 0.0; }

void NoiseConfig::validate() const {
  if (quality_factor < 0.0 || std::isnan(quality_factor)) fail(ErrorCode::kInvalidArgument, "quality_factor must be > 0");
  if (n_trajectories < 1) fail(ErrorCode::kInvalidArgument, "n_trajectories must be >= 1");
  if (workers < 1) fail(ErrorCode::kInvalidArgument, "workers must be >= 1");
  if (bootstrap_samples < 0) fail(ErrorCode::kInvalidArgument, "bootstrap_samples must be >= 0");
  if (batch_columns < 1) fail(ErrorCode::kInvalidArgument, "batch_columns must be >= 1");
  if (!(omega0_over_2pi_ghz > 0.0)) fail(ErrorCode::kInvalidArgument, "omega0_over_2pi_ghz must be > 0");
  if (!(flux.squid_coupling >= 0.0)) fail(ErrorCode::kInvalidArgument, "flux squid_coupling must be >= 0");
}

FluxSpectrum NoiseConfig::spectrum(double t_final_periods, int n_harmonics) const {
  FluxSpectrum s;
  s.amplitude_1f = flux.amplitude_1f;
  s.white_floor = flux.white_floor;
  const double f0 = omega0_over_2pi_ghz * 1e9;
  s.low_cutoff_hz = flux.low_cutoff_hz > 0.0 ? flux.low_cutoff_hz : f0 / (10.0 * t_final_periods);
  s.high_cutoff_hz = flux.high_cutoff_hz > 0.0 ? flux.high_cutoff_hz : 8.0 * n_harmonics * f0;
  return s;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ (index * 0x9e3779b97f4a7c15ULL + 1));
}

FluxNoiseTrace flux_noise_trace(const FluxSpectrum& spectrum, std::size_t n_samples, double dt,
                                double omega0_over_2pi_ghz, std::uint64_t seed) {
  spectrum.validate();
  if (n_samples < 4) fail(ErrorCode::kInvalidArgument, "flux noise trace needs at least 4 samples");
  if (!(dt > 0.0)) fail(ErrorCode::kInvalidArgument, "flux noise dt must be > 0");
  const double dt_s = dt * seconds_per_unit(omega0_over_2pi_ghz);
  const double nyquist = 0.5 / dt_s;
  if (spectrum.high_cutoff_hz > nyquist * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "flux noise high cutoff " << spectrum.high_cutoff_hz << " Hz exceeds the Nyquist frequency " << nyquist
        << " Hz of the propagation grid";
    fail(ErrorCode::kInvalidArgument, msg.str());
  }
  FluxNoiseTrace trace;
  trace.dt = dt;
  trace.seed = seed;
  const std::size_t n = n_samples + (n_samples % 2);
  const double df = 1.0 / (static_cast<double>(n) * dt_s);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<std::complex<double>> spec(n / 2 + 1, 0.0);
  for (std::size_t k = 1; k < n / 2; ++k) {
    // draw for every bin so the stream does not depend on the cutoffs
    const double g1 = gauss(rng), g2 = gauss(rng);
    const double s = spectrum.psd(static_cast<double>(k) * df);
    if (s <= 0.0) continue;
    // c2r returns 2 Re sum X_k e^{...}: Var x = sum 4 sigma^2 = sum S df
    spec[k] = 0.5 * std::sqrt(s * df) * std::complex<double>(g1, g2);
  }
  std::vector<double> out(n);
  fftw_plan plan;
  {
    const std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(spec.data()), out.data(),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    const std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
  out.resize(n_samples);
  trace.samples = std::move(out);
  return trace;
}

Periodogram periodogram(const std::vector<double>& samples, double dt, double omega0_over_2pi_ghz) {
  const std::size_t n = samples.size();
  if (n < 4) fail(ErrorCode::kInvalidArgument, "periodogram needs at least 4 samples");
  const double dt_s = dt * seconds_per_unit(omega0_over_2pi_ghz);
  std::vector<double> in(samples);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  fftw_plan plan;
  {
    const std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), reinterpret_cast<fftw_complex*>(spec.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    const std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
  Periodogram p;
  for (std::size_t k = 1; k < (n + 1) / 2; ++k) {
    p.frequency_hz.push_back(static_cast<double>(k) / (static_cast<double>(n) * dt_s));
    p.psd.push_back(2.0 * std::norm(spec[k]) * dt_s / static_cast<double>(n));
  }
  return p;
}

namespace {

struct Column {
  std::mt19937_64 rng;
  // a jump is due once the squared norm drops below this
  double threshold = 0.0;
  SampledSignal flux;
  std::vector<double> jump_times;

  bool has_flux() const { return !flux.values.empty(); }
};

double uniform01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

SplitStepKernel::Work extract_column(const SplitStepKernel::Work& w, int c) {
  SplitStepKernel::Work s;
  s.cols = 1;
  for (const RMatrix& b : w.blocks) {
    RMatrix x(b.rows(), 2);
    x.col(0) = b.col(c);
    x.col(1) = b.col(c + w.cols);
    s.active.push_back(x.isZero(0.0) ? 0 : 1);
    s.blocks.push_back(std::move(x));
  }
  return s;
}

void insert_column(SplitStepKernel::Work& w, int c, const SplitStepKernel::Work& s) {
  for (std::size_t b = 0; b < w.blocks.size(); ++b) {
    w.blocks[b].col(c) = s.blocks[b].col(0);
    w.blocks[b].col(c + w.cols) = s.blocks[b].col(1);
    if (!s.blocks[b].isZero(0.0)) w.active[b] = 1;
  }
}

double column_norm2(const SplitStepKernel::Work& w, int c) {
  double s = 0.0;
  for (const RMatrix& b : w.blocks) s += b.col(c).squaredNorm() + b.col(c + w.cols).squaredNorm();
  return s;
}

// Step-by-step driver for a batch of trajectories sharing a ramp.
class Engine {
 public:
  // With check_each set every column is held to the leakage limit; ensembles
  // check the trajectory average instead.
  Engine(const DrivenModel& model, const RampEvolution& evo, const GkpMetrics& metrics, const PrepConfig& cfg,
         bool check_each)
      : model_(model), evo_(evo), metrics_(metrics), cfg_(cfg), check_each_(check_each) {}

  struct Hooks {
    // squared norm of column 0 after every step
    std::vector<double>* norms = nullptr;
    // state at every sample step at or after the start
    std::vector<SplitStepKernel::Work>* checkpoints = nullptr;
  };

  // Evolves every column from step `start` (which must be a sample step) to
  // the end. samples[c] receives observables for the sample steps after start.
  void run(SplitStepKernel::Work& w, long start, std::vector<Column>& cols,
           std::vector<std::vector<Observables>>& samples, const Hooks& hooks) const {
    const auto& steps = evo_.sample_steps();
    auto next = static_cast<std::size_t>(std::lower_bound(steps.begin(), steps.end(), start) - steps.begin());
    if (next >= steps.size() || steps[next] != start) {
      fail(ErrorCode::kContractViolation, "trajectory restart is not on a sample step");
    }
    if (hooks.checkpoints != nullptr) hooks.checkpoints->push_back(w);
    ++next;
    const bool per_column = std::any_of(cols.begin(), cols.end(), [](const Column& c) { return c.has_flux(); });
    const bool lossy = evo_.kernel().damping_rate() > 0.0;
    RMatrix coeffs(evo_.kernel().num_terms(), w.cols);
    SplitStepKernel::Work pre;
    const long total = evo_.total_steps();
    for (long j = start; j < total; ++j) {
      if (lossy) pre = w;
      if (per_column) {
        const double mid = (static_cast<double>(j) + 0.5) * evo_.dt();
        fill_coefficients(coeffs, cols, mid);
        evo_.kernel().step_columns(w, coeffs, evo_.dt(), half());
      } else {
        evo_.step(w, j);
      }
      if (lossy) {
        for (int c = 0; c < w.cols; ++c) {
          if (column_norm2(w, c) < cols[static_cast<std::size_t>(c)].threshold) {
            SplitStepKernel::Work s = extract_column(pre, c);
            resolve_jumps(s, cols[static_cast<std::size_t>(c)], static_cast<double>(j) * evo_.dt(), evo_.dt());
            insert_column(w, c, s);
          }
        }
      }
      if (hooks.norms != nullptr) hooks.norms->push_back(column_norm2(w, 0));
      if (j + 1 == steps[next]) {
        record(w, samples, next);
        if (hooks.checkpoints != nullptr) hooks.checkpoints->push_back(w);
        ++next;
      }
    }
  }

  void run(SplitStepKernel::Work& w, long start, std::vector<Column>& cols,
           std::vector<std::vector<Observables>>& samples) const {
    run(w, start, cols, samples, Hooks{nullptr, nullptr});
  }

  // Observables of every column at sample index `s`.
  void record(const SplitStepKernel::Work& w, std::vector<std::vector<Observables>>& samples, std::size_t s) const {
    const CMatrix states = evo_.kernel().store(w);
    const double t_periods = static_cast<double>(evo_.sample_steps()[s]) * evo_.dt() / kPeriod;
    for (int c = 0; c < w.cols; ++c) {
      Observables o = observe(metrics_, states.col(c));
      // trajectory states are renormalized on output
      o.norm = 1.0;
      if (check_each_) check_leakage(o.leakage, cfg_.leakage_limit, t_periods);
      samples[static_cast<std::size_t>(c)][s] = o;
    }
  }

 private:
  const SplitStepKernel::FreeFactors& half() const {
    if (!half_) half_ = evo_.kernel().free_factors(0.5 * evo_.dt());
    return *half_;
  }

  void fill_coefficients(RMatrix& coeffs, const std::vector<Column>& cols, double t) const {
    const double f = evo_.program().drive_value(t);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double dphi = cols[c].has_flux() ? cols[c].flux.at(t) : 0.0;
      const DrivenModel::Coefficients k = model_.coefficients(f, dphi);
      coeffs(0, static_cast<Eigen::Index>(c)) = k.cos_term;
      if (coeffs.rows() > 1) coeffs(1, static_cast<Eigen::Index>(c)) = k.sin_term;
    }
  }

  // Single-column Strang step of length h starting at t.
  SplitStepKernel::Work partial(const SplitStepKernel::Work& s, const Column& col, double t, double h) const {
    SplitStepKernel::Work out = s;
    if (h <= 0.0) return out;
    const double mid = t + 0.5 * h;
    const double dphi = col.has_flux() ? col.flux.at(mid) : 0.0;
    const DrivenModel::Coefficients k = model_.coefficients(evo_.program().drive_value(mid), dphi);
    const double coeffs[2] = {k.cos_term, k.sin_term};
    evo_.kernel().step(out, std::span<const double>(coeffs, static_cast<std::size_t>(evo_.kernel().num_terms())), h,
                       evo_.kernel().free_factors(0.5 * h));
    return out;
  }

  // Replays one step of length dt from `s` (state at time t0), locating and
  // applying every jump inside it.
  void resolve_jumps(SplitStepKernel::Work& s, Column& col, double t0, double dt) const {
    double remaining = dt;
    for (int guard = 0; guard < 64; ++guard) {
      const SplitStepKernel::Work end = partial(s, col, t0, remaining);
      if (SplitStepKernel::norm_squared(end) >= col.threshold) {
        s = end;
        return;
      }
      auto f = [&](double h) { return SplitStepKernel::norm_squared(partial(s, col, t0, h)) - col.threshold; };
      const double f0 = SplitStepKernel::norm_squared(s) - col.threshold;
      const double f1 = SplitStepKernel::norm_squared(end) - col.threshold;
      if (!(f0 > 0.0)) fail(ErrorCode::kNumerical, "jump-time bisection failed: no sign change at the step start");
      std::uintmax_t iters = 100;
      double h = 0.0;
      try {
        const auto bracket = boost::math::tools::toms748_solve(f, 0.0, remaining, f0, f1,
                                                               boost::math::tools::eps_tolerance<double>(40), iters);
        h = 0.5 * (bracket.first + bracket.second);
        if (bracket.second - bracket.first > 1e-9 * dt) throw std::runtime_error("bracket too wide");
      } catch (const std::exception& e) {
        fail(ErrorCode::kNumerical, std::string("jump-time bisection failed: ") + e.what());
      }
      StateVector psi = evo_.kernel().store_vector(partial(s, col, t0, h));
      StateVector jumped = StateVector::Zero(psi.size());
      for (Eigen::Index n = 1; n < psi.size(); ++n) jumped(n - 1) = std::sqrt(static_cast<double>(n)) * psi(n);
      const double nrm = jumped.norm();
      if (!(nrm > 0.0)) fail(ErrorCode::kNumerical, "quantum jump from the vacuum");
      s = evo_.kernel().load(StateVector(jumped / nrm));
      col.jump_times.push_back((t0 + h) / kPeriod);
      col.threshold = uniform01(col.rng);
      t0 += h;
      remaining -= h;
    }
    fail(ErrorCode::kNumerical, "more than 64 quantum jumps inside one step; reduce the step size");
  }

  const DrivenModel& model_;
  const RampEvolution& evo_;
  const GkpMetrics& metrics_;
  const PrepConfig& cfg_;
  bool check_each_;
  mutable std::optional<SplitStepKernel::FreeFactors> half_;
};

Column make_column(const NoiseConfig& noise, const FluxSpectrum* spectrum, const RampEvolution& evo,
                   std::uint64_t seed) {
  Column col;
  col.rng.seed(seed);
  if (noise.lossy()) col.threshold = uniform01(col.rng);
  if (spectrum != nullptr) {
    const double f0 = noise.omega0_over_2pi_ghz * 1e9;
    // the record spans the slowest cutoff period so the 1/f band is resolved
    const double record = std::max(evo.schedule().duration(), kPeriod * f0 / spectrum->low_cutoff_hz);
    const auto n = static_cast<std::size_t>(std::ceil(record / evo.dt() - 1e-9)) + 1;
    FluxNoiseTrace trace = flux_noise_trace(*spectrum, n, evo.dt(), noise.omega0_over_2pi_ghz,
                                            splitmix64(seed ^ kFluxStream));
    trace.samples.resize(static_cast<std::size_t>(evo.total_steps()) + 1);
    for (double& x : trace.samples) x *= noise.flux.squid_coupling;
    col.flux = trace.signal();
  }
  return col;
}

TrajectoryRecord make_record(std::uint64_t index, std::uint64_t seed, const Column& col, const Observables& last) {
  TrajectoryRecord r;
  r.index = index;
  r.seed = seed;
  r.jump_times = col.jump_times;
  const TimelineRecord s = summarize(0.0, 1.0, last, LogicalTarget::kHPlus);
  r.final_squeezing_db = 0.5 * (s.squeezing_db_x + s.squeezing_db_p);
  return r;
}

// Lossy trajectories carry the no-jump norm decay; unitary runs are returned
// as computed so that they match prepare() bit for bit.
StateVector output_state(const StateVector& v, bool lossy) { return lossy ? StateVector(v / v.norm()) : v; }

void check_initial(const FockSpace& space, const StateVector& initial) {
  if (initial.size() != space.dim()) fail(ErrorCode::kInvalidArgument, "initial state dimension mismatch");
  if (std::abs(initial.squaredNorm() - 1.0) > 1e-8) fail(ErrorCode::kInvalidArgument, "initial state not normalized");
}

}  // namespace

TrajectoryResult trajectory_evolve(const DrivenModel& model, const StateVector& initial, const RampSchedule& schedule,
                                   const PrepConfig& cfg, const NoiseConfig& noise, std::uint64_t index) {
  noise.validate();
  check_initial(model.space(), initial);
  const RampEvolution evo(model, schedule, cfg, noise.damping_rate());
  const GkpMetrics metrics(model.space());
  const Engine engine(model, evo, metrics, cfg, true);
  std::optional<FluxSpectrum> spectrum;
  if (noise.flux.enabled) spectrum = noise.spectrum(schedule.t_final, model.params().n_harmonics);
  const std::uint64_t seed = trajectory_seed(noise.master_seed, index);
  std::vector<Column> cols{make_column(noise, spectrum ? &*spectrum : nullptr, evo, seed)};
  std::vector<std::vector<Observables>> samples(1, std::vector<Observables>(evo.sample_steps().size()));
  SplitStepKernel::Work w = evo.kernel().load(initial);
  engine.record(w, samples, 0);
  engine.run(w, 0, cols, samples);
  TrajectoryResult out;
  out.samples = std::move(samples[0]);
  out.final_state = output_state(evo.kernel().store_vector(w), noise.lossy());
  out.record = make_record(index, seed, cols[0], out.samples.back());
  return out;
}

EnsembleResult ensemble_prepare(const DrivenModel& model, const StateVector& initial, const RampSchedule& schedule,
                                const PrepConfig& cfg, const NoiseConfig& noise) {
  noise.validate();
  const FockSpace& space = model.space();
  check_initial(space, initial);
  const RampEvolution evo(model, schedule, cfg, noise.damping_rate());
  const GkpMetrics metrics(space);
  const Engine engine(model, evo, metrics, cfg, false);
  const int m = noise.n_trajectories;
  const std::size_t n_samples = evo.sample_steps().size();
  std::optional<FluxSpectrum> spectrum;
  if (noise.flux.enabled) spectrum = noise.spectrum(schedule.t_final, model.params().n_harmonics);

  std::vector<std::vector<Observables>> samples(static_cast<std::size_t>(m), std::vector<Observables>(n_samples));
  std::vector<StateVector> finals(static_cast<std::size_t>(m));
  std::vector<TrajectoryRecord> records(static_cast<std::size_t>(m));
  EnsembleResult result;

  if (!spectrum) {
    // Without flux noise every trajectory follows the same no-jump path until
    // its first jump: run it once, keeping norms and sample-step checkpoints.
    std::vector<double> norms;
    std::vector<SplitStepKernel::Work> checkpoints;
    std::vector<Column> shared(1);
    std::vector<std::vector<Observables>> cache(1, std::vector<Observables>(n_samples));
    SplitStepKernel::Work w = evo.kernel().load(initial);
    engine.record(w, cache, 0);
    engine.run(w, 0, shared, cache, Engine::Hooks{&norms, &checkpoints});
    const StateVector cached_final = output_state(evo.kernel().store_vector(w), noise.lossy());

    std::vector<int> jumpers;
    std::vector<Column> cols(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
      const std::uint64_t seed = trajectory_seed(noise.master_seed, static_cast<std::uint64_t>(k));
      Column& col = cols[static_cast<std::size_t>(k)];
      col = make_column(noise, nullptr, evo, seed);
      // norms are non-increasing, so the first crossing is found by bisection
      const auto first = std::partition_point(norms.begin(), norms.end(),
                                              [&](double v) { return v >= col.threshold; });
      if (!noise.lossy() || first == norms.end()) {
        samples[static_cast<std::size_t>(k)] = cache[0];
        finals[static_cast<std::size_t>(k)] = cached_final;
        records[static_cast<std::size_t>(k)] = make_record(static_cast<std::uint64_t>(k), seed, col, cache[0].back());
        ++result.no_jump_trajectories;
      } else {
        jumpers.push_back(k);
      }
    }
    parallel_for(static_cast<int>(jumpers.size()), noise.workers, [&](int i) {
      const int k = jumpers[static_cast<std::size_t>(i)];
      Column& col = cols[static_cast<std::size_t>(k)];
      const long jump_step = static_cast<long>(
          std::partition_point(norms.begin(), norms.end(), [&](double v) { return v >= col.threshold; }) -
          norms.begin());
      const auto& steps = evo.sample_steps();
      const auto s_idx =
          static_cast<std::size_t>(std::upper_bound(steps.begin(), steps.end(), jump_step) - steps.begin()) - 1;
      std::vector<Column> one{std::move(col)};
      std::vector<std::vector<Observables>> out(1, std::vector<Observables>(n_samples));
      std::copy(cache[0].begin(), cache[0].begin() + static_cast<std::ptrdiff_t>(s_idx) + 1, out[0].begin());
      SplitStepKernel::Work wk = checkpoints[s_idx];
      engine.run(wk, steps[s_idx], one, out);
      finals[static_cast<std::size_t>(k)] = output_state(evo.kernel().store_vector(wk), true);
      const std::uint64_t seed = trajectory_seed(noise.master_seed, static_cast<std::uint64_t>(k));
      records[static_cast<std::size_t>(k)] = make_record(static_cast<std::uint64_t>(k), seed, one[0], out[0].back());
      samples[static_cast<std::size_t>(k)] = std::move(out[0]);
    });
  } else {
    // Independent flux traces: fixed batches of consecutive indices, so the
    // arithmetic of each trajectory does not depend on scheduling.
    const int b = noise.batch_columns;
    const int batches = (m + b - 1) / b;
    parallel_for(batches, noise.workers, [&](int bi) {
      const int k0 = bi * b;
      const int k1 = std::min(m, k0 + b);
      std::vector<Column> cols;
      CMatrix init(space.dim(), k1 - k0);
      for (int k = k0; k < k1; ++k) {
        cols.push_back(make_column(noise, &*spectrum, evo, trajectory_seed(noise.master_seed, static_cast<std::uint64_t>(k))));
        init.col(k - k0) = initial;
      }
      std::vector<std::vector<Observables>> out(static_cast<std::size_t>(k1 - k0), std::vector<Observables>(n_samples));
      SplitStepKernel::Work w = evo.kernel().load(init);
      engine.record(w, out, 0);
      engine.run(w, 0, cols, out);
      const CMatrix f = evo.kernel().store(w);
      for (int k = k0; k < k1; ++k) {
        const auto c = static_cast<std::size_t>(k - k0);
        finals[static_cast<std::size_t>(k)] = output_state(f.col(k - k0), noise.lossy());
        const std::uint64_t seed = trajectory_seed(noise.master_seed, static_cast<std::uint64_t>(k));
        records[static_cast<std::size_t>(k)] = make_record(static_cast<std::uint64_t>(k), seed, cols[c], out[c].back());
        samples[static_cast<std::size_t>(k)] = std::move(out[c]);
      }
    });
  }

  // Deterministic-order reduction.
  const double inv_m = 1.0 / static_cast<double>(m);
  PreparationRun& run = result.run;
  run.schedule = evo.schedule();
  run.steps_per_period = evo.steps_per_period();
  for (std::size_t s = 0; s < n_samples; ++s) {
    Observables avg;
    for (int k = 0; k < m; ++k) avg += samples[static_cast<std::size_t>(k)][s];
    avg *= inv_m;
    const double t = static_cast<double>(evo.sample_steps()[s]) * evo.dt();
    check_leakage(avg.leakage, cfg.leakage_limit, t / kPeriod);
    run.timeline.push_back(summarize(t / kPeriod, evo.schedule().frequency(t), avg, cfg.target));
  }
  run.final_record = run.timeline.back();
  run.final_rho = DensityMatrix::Zero(space.dim(), space.dim());
  for (int k = 0; k < m; ++k) {
    const StateVector& v = finals[static_cast<std::size_t>(k)];
    run.final_rho.noalias() += inv_m * (v * v.adjoint());
  }
  if (m == 1) run.final_state = finals[0];

  // Bootstrap over trajectories on the final observables.
  if (m > 1 && noise.bootstrap_samples > 1) {
    std::mt19937_64 rng(splitmix64(noise.master_seed ^ kBootstrapStream));
    std::uniform_int_distribution<int> pick(0, m - 1);
    std::vector<double> sq, fid;
    for (int b = 0; b < noise.bootstrap_samples; ++b) {
      Observables avg;
      for (int k = 0; k < m; ++k) avg += samples[static_cast<std::size_t>(pick(rng))].back();
      avg *= inv_m;
      const TimelineRecord r = summarize(0.0, 1.0, avg, cfg.target);
      const double s = 0.5 * (r.squeezing_db_x + r.squeezing_db_p);
      if (std::isfinite(s)) sq.push_back(s);
      fid.push_back(r.logical_fidelity);
    }
    auto stddev = [](const std::vector<double>& v) {
      if (v.size() < 2) return 0.0;
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      return std::sqrt(var / static_cast<double>(v.size() - 1));
    };
    result.squeezing_db_stderr = stddev(sq);
    result.fidelity_stderr = stddev(fid);
  }
  result.trajectories = std::move(records);
  return result;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRecord>& trajectories) {
  out << "index,seed,jumps,jump_times,final_squeezing_dB\n";
  const auto old = out.precision(12);
  for (const auto& r : trajectories) {
    out << r.index << ',' << r.seed << ',' << r.jump_times.size() << ',';
    for (std::size_t i = 0; i < r.jump_times.size(); ++i) out << (i ? ";" : "") << r.jump_times[i];
    out << ',' << r.final_squeezing_db << '\n';
  }
  out.precision(old);
}

}  // namespace gkp
