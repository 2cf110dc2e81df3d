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

#ifndef GKPFLOQUET_HARNESS_HPP
#define GKPFLOQUET_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gkpfloquet/errors.hpp"
#include "gkpfloquet/noise.hpp"

namespace gkp {

inline constexpr const char* kVersion = "0.1.0";
/// Version of the CSV layouts documented in SCHEMA.md.
inline constexpr int kSchemaVersion = 1;

enum class ExperimentKind { kFloquetScan, kNSweep, kPrepSweep, kRobustnessSweep, kWignerDump };

const char* experiment_name(ExperimentKind kind);

struct PrepCurve {
  std::string label;
  /// 0 means no photon loss.
  double quality_factor = 0.0;
  bool flux_noise = false;
};

/// Optional block in GHz / microseconds, converted to the dimensionless
/// parameters on load.
struct PhysicalUnits {
  double omega0_over_2pi_ghz = 1.0;
  double ej_over_h_ghz = 2.0;
  double epsilon = 1.25e-3;
  std::optional<double> t_final_us;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kFloquetScan;
  int fock_dim = 250;
  ModelParams model;

  /// One-period propagators.
  IntegratorConfig floquet;
  double convergence_tol = 1e-6;

  RampSchedule ramp;
  PrepConfig prep;
  int initial_fock = 0;
  std::vector<double> t_final_values{1000.0, 1500.0, 2000.0, 3000.0};
  std::vector<PrepCurve> curves;
  bool write_trajectories = false;

  NoiseConfig noise;

  std::vector<int> n_values{1, 2, 3, 4, 5, 6};

  std::string robustness_axis = "impedance_ratio";
  std::vector<double> robustness_values{0.95, 1.0, 1.05};

  LogicalTarget wigner_state = LogicalTarget::kHPlus;
  double wigner_extent = 7.0;
  int wigner_points = 141;

  std::optional<PhysicalUnits> physical;

  /// Not part of the hash: neither changes any result.
  std::string output_dir = "out";
  int workers = 1;
};

/// A parsed configuration document. Keeps the source tree so that sweeps and
/// overrides edit fields by path before the typed config is resolved.
class ConfigDocument {
 public:
  ConfigDocument();
  ~ConfigDocument();
  ConfigDocument(const ConfigDocument& other);
  ConfigDocument& operator=(const ConfigDocument& other);

  /// YAML or JSON text. Throws kConfig with the line of the offending node.
  static ConfigDocument parse(const std::string& text, const std::string& source = "<string>");
  static ConfigDocument load(const std::string& path);

  /// Sets a dotted field path from "key=value"; the value is read as YAML.
  void set_override(const std::string& assignment);
  void set(const std::string& path, const std::string& value);

  /// Typed config. Throws kConfig naming the field (and line when known).
  ExperimentConfig resolve() const;

  const std::string& source() const { return source_; }

 private:
  struct Tree;
  Tree* tree_;
  std::string source_;
};

/// Canonical JSON of every result-affecting field, keys in a fixed order.
std::string canonical_json(const ExperimentConfig& config);
/// FNV-1a 64 of canonical_json, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);
std::uint64_t fnv1a64(const std::string& data);

struct PointStatus {
  std::string label;
  /// "complete" or "failed".
  std::string status;
  std::string error;
  int error_code = 0;
};

struct RunReport {
  /// 0 success, 2 config error, 3 numerical failure, 4 partial sweep.
  int exit_code = 0;
  std::string config_hash;
  std::string output_dir;
  std::string summary;
  std::vector<PointStatus> points;
};

/// Exit status for an exception escaping a run.
int exit_code_for(ErrorCode code);

/// Runs one experiment and writes its artifacts into config.output_dir.
/// Errors in individual sweep points are recorded in the manifest.
RunReport run_experiment(const ExperimentConfig& config);

/// Runs `base` once per value of the numeric field `axis`, each point into
/// <output_dir>/point_NNN, plus a combined sweep.csv and manifest.json.
RunReport run_sweep(const ConfigDocument& base, const std::string& axis, const std::vector<double>& values,
                    const std::string& output_dir, int workers);

/// Brute-force cross-checks recorded as fixtures (oracles.json) in `output_dir`.
RunReport run_oracles(const std::string& output_dir, int workers);

}  // namespace gkp

#endif  // GKPFLOQUET_HARNESS_HPP
