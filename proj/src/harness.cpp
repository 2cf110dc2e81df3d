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

#include "gkpfloquet/harness.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gkpfloquet/errors.hpp"
#include "gkpfloquet/floquet.hpp"
#include "gkpfloquet/parallel.hpp"

namespace gkp {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

const char* experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kFloquetScan:
      return "floquet-scan";
    case ExperimentKind::kNSweep:
      return "n-sweep";
    case ExperimentKind::kPrepSweep:
      return "prep-sweep";
    case ExperimentKind::kRobustnessSweep:
      return "robustness-sweep";
    case ExperimentKind::kWignerDump:
      return "wigner-dump";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Config documents

struct ConfigDocument::Tree {
  YAML::Node root;
};

ConfigDocument::ConfigDocument() : tree_(new Tree{YAML::Node(YAML::NodeType::Map)}) {}
ConfigDocument::~ConfigDocument() { delete tree_; }
ConfigDocument::ConfigDocument(const ConfigDocument& other)
    : tree_(new Tree{YAML::Clone(other.tree_->root)}), source_(other.source_) {}
ConfigDocument& ConfigDocument::operator=(const ConfigDocument& other) {
  if (this != &other) {
    tree_->root = YAML::Clone(other.tree_->root);
    source_ = other.source_;
  }
  return *this;
}

ConfigDocument ConfigDocument::parse(const std::string& text, const std::string& source) {
  ConfigDocument doc;
  doc.source_ = source;
  try {
    doc.tree_->root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    std::ostringstream msg;
    msg << source << ": parse error";
    if (e.mark.line >= 0) msg << " at line " << e.mark.line + 1 << ", column " << e.mark.column + 1;
    msg << ": " << e.msg;
    fail(ErrorCode::kConfig, msg.str());
  }
  if (doc.tree_->root.IsNull()) doc.tree_->root = YAML::Node(YAML::NodeType::Map);
  if (!doc.tree_->root.IsMap()) fail(ErrorCode::kConfig, source + ": the top level must be a mapping");
  return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfig, "cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(path);
  while (std::getline(in, part, '.')) {
    if (part.empty()) fail(ErrorCode::kConfig, "empty component in field path '" + path + "'");
    parts.push_back(part);
  }
  if (parts.empty()) fail(ErrorCode::kConfig, "empty field path");
  return parts;
}

}  // namespace

void ConfigDocument::set(const std::string& path, const std::string& value) {
  const std::vector<std::string> parts = split_path(path);
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception&) {
    parsed = YAML::Node(value);
  }
  // yaml-cpp nodes are handles: walk by reassignment
  std::vector<YAML::Node> chain{tree_->root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = chain.back()[parts[i]];
    if (!next.IsDefined() || next.IsNull()) {
      chain.back()[parts[i]] = YAML::Node(YAML::NodeType::Map);
      next = chain.back()[parts[i]];
    }
    if (!next.IsMap()) fail(ErrorCode::kConfig, "field '" + path + "': '" + parts[i] + "' is not a mapping");
    chain.push_back(next);
  }
  chain.back()[parts.back()] = parsed;
}

void ConfigDocument::set_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(ErrorCode::kConfig, "override '" + assignment + "' is not of the form key=value");
  }
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

namespace {

// Typed view of one mapping; every key must be consumed.
class Reader {
 public:
  Reader(YAML::Node node, std::string path, std::string source)
      : node_(std::move(node)), path_(std::move(path)), source_(std::move(source)) {
    if (node_.IsDefined() && !node_.IsNull() && !node_.IsMap()) error(node_, path_, "expected a mapping");
  }

  [[noreturn]] void error(const YAML::Node& at, const std::string& field, const std::string& what) const {
    std::ostringstream msg;
    msg << source_ << ": ";
    const YAML::Mark m = at.IsDefined() ? at.Mark() : YAML::Mark::null_mark();
    if (m.line >= 0) msg << "line " << m.line + 1 << ", ";
    msg << "field '" << field << "': " << what;
    fail(ErrorCode::kConfig, msg.str());
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    if (!node_.IsMap()) return false;
    const YAML::Node v = node_[key];
    if (v.IsDefined()) used_.insert(key);
    return v.IsDefined() && !v.IsNull();
  }

  YAML::Node raw(const std::string& key) {
    used_.insert(key);
    return node_[key];
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    out = convert<T>(node_[key], field(key));
  }

  template <class T>
  T convert(const YAML::Node& v, const std::string& name) const {
    if (!v.IsScalar()) error(v, name, "expected a scalar");
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      if constexpr (std::is_same_v<T, bool>) error(v, name, "expected true or false");
      else if constexpr (std::is_integral_v<T>) error(v, name, "expected an integer, got '" + v.Scalar() + "'");
      else if constexpr (std::is_floating_point_v<T>) error(v, name, "expected a number, got '" + v.Scalar() + "'");
      else error(v, name, "expected a string");
    }
  }

  template <class T>
  void get_list(const std::string& key, std::vector<T>& out) {
    if (!has(key)) {
      if (node_.IsMap() && node_[key].IsDefined()) out.clear();
      return;
    }
    const YAML::Node v = node_[key];
    if (!v.IsSequence()) error(v, field(key), "expected a list");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(convert<T>(v[i], field(key) + "[" + std::to_string(i) + "]"));
    }
  }

  Reader child(const std::string& key) { return Reader(raw(key), field(key), source_); }

  void finish() const {
    if (!node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!used_.count(key)) error(kv.first, field(key), "unknown field");
    }
  }

  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  std::string path_;
  std::string source_;
  std::set<std::string> used_;
};

std::vector<PrepCurve> default_curves() {
  return {{"noiseless", 0.0, false}, {"Q1e6", 1e6, false}, {"Q1e5", 1e5, false}, {"flux", 0.0, true}};
}

LogicalTarget parse_target(Reader& r, const std::string& key, LogicalTarget fallback) {
  if (!r.has(key)) return fallback;
  const std::string s = r.convert<std::string>(r.raw(key), r.field(key));
  if (s == "plus" || s == "H+") return LogicalTarget::kHPlus;
  if (s == "minus" || s == "H-") return LogicalTarget::kHMinus;
  r.error(r.raw(key), r.field(key), "expected 'plus' or 'minus', got '" + s + "'");
}

double finite_q(double q) { return std::isinf(q) ? 0.0 : q; }

// Re-raises a library validation error as a config error on `field`.
template <class F>
void check_field(const std::string& source, const std::string& field, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, source + ": field '" + field + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig ConfigDocument::resolve() const {
  ExperimentConfig c;
  Reader top(tree_->root, "", source_);

  if (top.has("experiment")) {
    const std::string kind = top.convert<std::string>(top.raw("experiment"), "experiment");
    const std::map<std::string, ExperimentKind> kinds{{"floquet-scan", ExperimentKind::kFloquetScan},
                                                      {"n-sweep", ExperimentKind::kNSweep},
                                                      {"prep-sweep", ExperimentKind::kPrepSweep},
                                                      {"robustness-sweep", ExperimentKind::kRobustnessSweep},
                                                      {"wigner-dump", ExperimentKind::kWignerDump}};
    const auto it = kinds.find(kind);
    if (it == kinds.end()) {
      top.error(top.raw("experiment"), "experiment",
                "unknown experiment '" + kind +
                    "' (floquet-scan, n-sweep, prep-sweep, robustness-sweep, wigner-dump)");
    }
    c.kind = it->second;
  } else {
    top.error(tree_->root, "experiment", "missing");
  }
  top.get("fock_dim", c.fock_dim);
  top.get("seed", c.noise.master_seed);
  top.get("workers", c.workers);
  top.get("output_dir", c.output_dir);
  // archived configs carry their hash; it is recomputed, never trusted
  top.has("config_hash");

  {
    Reader m = top.child("model");
    m.get("j_over_omega0", c.model.j_over_omega0);
    m.get("n_harmonics", c.model.n_harmonics);
    m.get("impedance_ratio", c.model.impedance_ratio);
    m.get("ej_asymmetry", c.model.ej_asymmetry);
    m.get("drive_epsilon", c.model.drive_epsilon);
    m.finish();
  }
  {
    Reader f = top.child("floquet");
    if (f.has("scheme")) {
      const std::string s = f.convert<std::string>(f.raw("scheme"), f.field("scheme"));
      if (s == "split-step") c.floquet.scheme = IntegratorScheme::kSplitStep;
      else if (s == "commutator-free-4") c.floquet.scheme = IntegratorScheme::kCommutatorFree4;
      else f.error(f.raw("scheme"), f.field("scheme"), "expected 'split-step' or 'commutator-free-4'");
    }
    f.get("steps_per_period", c.floquet.steps_per_period);
    f.get("convergence_tol", c.convergence_tol);
    f.finish();
  }
  {
    Reader r = top.child("ramp");
    r.get("t_final", c.ramp.t_final);
    r.get("omega_initial", c.ramp.omega_initial);
    r.get("slope", c.ramp.slope);
    r.get("center", c.ramp.center);
    r.get("align_final_phase", c.ramp.align_final_phase);
    r.finish();
  }
  {
    Reader p = top.child("prep");
    p.get("steps_per_period", c.prep.integrator.steps_per_period);
    p.get("sample_every", c.prep.sample_every);
    c.prep.target = parse_target(p, "target", c.prep.target);
    p.get("leakage_limit", c.prep.leakage_limit);
    p.get("initial_fock", c.initial_fock);
    p.get_list("t_final_values", c.t_final_values);
    p.get("write_trajectories", c.write_trajectories);
    if (p.has("curves")) {
      const YAML::Node list = p.raw("curves");
      if (!list.IsSequence()) p.error(list, p.field("curves"), "expected a list");
      for (std::size_t i = 0; i < list.size(); ++i) {
        Reader cr(list[i], p.field("curves") + "[" + std::to_string(i) + "]", source_);
        PrepCurve curve;
        cr.get("label", curve.label);
        cr.get("quality_factor", curve.quality_factor);
        cr.get("flux_noise", curve.flux_noise);
        cr.finish();
        curve.quality_factor = finite_q(curve.quality_factor);
        if (curve.label.empty()) cr.error(list[i], cr.field("label"), "missing");
        c.curves.push_back(curve);
      }
    }
    p.finish();
  }
  if (c.curves.empty()) c.curves = default_curves();
  {
    Reader n = top.child("noise");
    n.get("quality_factor", c.noise.quality_factor);
    n.get("n_trajectories", c.noise.n_trajectories);
    n.get("bootstrap_samples", c.noise.bootstrap_samples);
    n.get("batch_columns", c.noise.batch_columns);
    n.get("omega0_over_2pi_ghz", c.noise.omega0_over_2pi_ghz);
    {
      Reader f = n.child("flux");
      f.get("enabled", c.noise.flux.enabled);
      f.get("amplitude_1f", c.noise.flux.amplitude_1f);
      f.get("white_floor", c.noise.flux.white_floor);
      f.get("low_cutoff_hz", c.noise.flux.low_cutoff_hz);
      f.get("high_cutoff_hz", c.noise.flux.high_cutoff_hz);
      f.get("squid_coupling", c.noise.flux.squid_coupling);
      f.finish();
    }
    n.finish();
    c.noise.quality_factor = finite_q(c.noise.quality_factor);
  }
  {
    Reader s = top.child("n_sweep");
    s.get_list("values", c.n_values);
    s.finish();
  }
  {
    Reader r = top.child("robustness");
    r.get("axis", c.robustness_axis);
    r.get_list("values", c.robustness_values);
    if (c.robustness_axis != "impedance_ratio" && c.robustness_axis != "ej_asymmetry") {
      r.error(r.raw("axis"), r.field("axis"), "expected 'impedance_ratio' or 'ej_asymmetry'");
    }
    r.finish();
  }
  {
    Reader w = top.child("wigner");
    c.wigner_state = parse_target(w, "state", c.wigner_state);
    w.get("extent", c.wigner_extent);
    w.get("points", c.wigner_points);
    w.finish();
  }
  if (top.has("physical")) {
    Reader u = top.child("physical");
    PhysicalUnits pu;
    u.get("omega0_over_2pi_ghz", pu.omega0_over_2pi_ghz);
    u.get("ej_over_h_ghz", pu.ej_over_h_ghz);
    u.get("epsilon", pu.epsilon);
    if (u.has("t_final_us")) pu.t_final_us = u.convert<double>(u.raw("t_final_us"), u.field("t_final_us"));
    u.finish();
    CircuitParams circuit;
    circuit.omega0_over_2pi_ghz = pu.omega0_over_2pi_ghz;
    circuit.ej_over_h_ghz = pu.ej_over_h_ghz;
    circuit.epsilon = pu.epsilon;
    circuit.n_harmonics = c.model.n_harmonics;
    check_field(source_, "physical", [&] {
      const CircuitMapping mapped = circuit_map(circuit);
      c.model.j_over_omega0 = mapped.params.j_over_omega0;
      c.model.drive_epsilon = mapped.params.drive_epsilon;
    });
    c.noise.omega0_over_2pi_ghz = pu.omega0_over_2pi_ghz;
    if (pu.t_final_us) c.ramp.t_final = *pu.t_final_us * 1e3 * pu.omega0_over_2pi_ghz;
    c.physical = pu;
  }
  top.finish();

  // Range checks, reported against the owning block.
  if (c.fock_dim < 8) fail(ErrorCode::kConfig, source_ + ": field 'fock_dim': must be >= 8");
  if (c.workers < 1) fail(ErrorCode::kConfig, source_ + ": field 'workers': must be >= 1");
  check_field(source_, "model", [&] { c.model.validate(); });
  check_field(source_, "ramp", [&] { c.ramp.validate(); });
  check_field(source_, "noise", [&] { c.noise.validate(); });
  check_field(source_, "floquet.steps_per_period", [&] {
    c.floquet.resolve(c.model.n_harmonics, default_floquet_steps(c.model.n_harmonics));
  });
  check_field(source_, "prep.steps_per_period", [&] {
    c.prep.integrator.resolve(c.model.n_harmonics, default_prep_steps(c.model.n_harmonics));
  });
  if (!(c.convergence_tol > 0.0)) fail(ErrorCode::kConfig, source_ + ": field 'floquet.convergence_tol': must be > 0");
  if (!(c.prep.sample_every > 0.0) || c.prep.sample_every > 10.0) {
    fail(ErrorCode::kConfig, source_ + ": field 'prep.sample_every': must be in (0, 10]");
  }
  if (c.initial_fock < 0 || c.initial_fock >= c.fock_dim) {
    fail(ErrorCode::kConfig, source_ + ": field 'prep.initial_fock': outside the Fock space");
  }
  for (double t : c.t_final_values) {
    if (!(t > 0.0)) fail(ErrorCode::kConfig, source_ + ": field 'prep.t_final_values': entries must be > 0");
  }
  for (int n : c.n_values) {
    if (n < 1) fail(ErrorCode::kConfig, source_ + ": field 'n_sweep.values': entries must be >= 1");
  }
  for (const PrepCurve& curve : c.curves) {
    if (curve.quality_factor < 0.0) {
      fail(ErrorCode::kConfig, source_ + ": field 'prep.curves': quality_factor must be > 0 (0 = no loss)");
    }
  }
  if (c.wigner_points < 3) fail(ErrorCode::kConfig, source_ + ": field 'wigner.points': must be >= 3");
  if (!(c.wigner_extent > 0.0)) fail(ErrorCode::kConfig, source_ + ": field 'wigner.extent': must be > 0");
  return c;
}

// ---------------------------------------------------------------------------
// Canonical form and hash

namespace {

const char* target_name(LogicalTarget t) { return t == LogicalTarget::kHPlus ? "plus" : "minus"; }

Json config_json(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = experiment_name(c.kind);
  j["fock_dim"] = c.fock_dim;
  j["seed"] = c.noise.master_seed;
  j["model"] = {{"j_over_omega0", c.model.j_over_omega0},
                {"n_harmonics", c.model.n_harmonics},
                {"impedance_ratio", c.model.impedance_ratio},
                {"ej_asymmetry", c.model.ej_asymmetry},
                {"drive_epsilon", c.model.drive_epsilon}};
  j["floquet"] = {{"scheme", c.floquet.scheme == IntegratorScheme::kSplitStep ? "split-step" : "commutator-free-4"},
                  {"steps_per_period", c.floquet.steps_per_period},
                  {"convergence_tol", c.convergence_tol}};
  j["ramp"] = {{"t_final", c.ramp.t_final},
               {"omega_initial", c.ramp.omega_initial},
               {"slope", c.ramp.slope},
               {"center", c.ramp.center},
               {"align_final_phase", c.ramp.align_final_phase}};
  Json curves = Json::array();
  for (const PrepCurve& curve : c.curves) {
    curves.push_back({{"label", curve.label}, {"quality_factor", curve.quality_factor}, {"flux_noise", curve.flux_noise}});
  }
  j["prep"] = {{"steps_per_period", c.prep.integrator.steps_per_period},
               {"sample_every", c.prep.sample_every},
               {"target", target_name(c.prep.target)},
               {"leakage_limit", c.prep.leakage_limit},
               {"initial_fock", c.initial_fock},
               {"t_final_values", c.t_final_values},
               {"curves", curves},
               {"write_trajectories", c.write_trajectories}};
  j["noise"] = {{"quality_factor", c.noise.quality_factor},
                {"n_trajectories", c.noise.n_trajectories},
                {"bootstrap_samples", c.noise.bootstrap_samples},
                {"batch_columns", c.noise.batch_columns},
                {"omega0_over_2pi_ghz", c.noise.omega0_over_2pi_ghz},
                {"flux",
                 {{"enabled", c.noise.flux.enabled},
                  {"amplitude_1f", c.noise.flux.amplitude_1f},
                  {"white_floor", c.noise.flux.white_floor},
                  {"low_cutoff_hz", c.noise.flux.low_cutoff_hz},
                  {"high_cutoff_hz", c.noise.flux.high_cutoff_hz},
                  {"squid_coupling", c.noise.flux.squid_coupling}}}};
  j["n_sweep"] = {{"values", c.n_values}};
  j["robustness"] = {{"axis", c.robustness_axis}, {"values", c.robustness_values}};
  j["wigner"] = {{"state", target_name(c.wigner_state)}, {"extent", c.wigner_extent}, {"points", c.wigner_points}};
  return j;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

}  // namespace

std::string canonical_json(const ExperimentConfig& config) { return config_json(config).dump(); }

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& config) { return hex64(fnv1a64(canonical_json(config))); }

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
      return 2;
    default:
      return 3;
  }
}

// ---------------------------------------------------------------------------
// Artifact writing

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

class Artifacts {
 public:
  Artifacts(std::string dir, std::string hash) : dir_(std::move(dir)), hash_(std::move(hash)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) fail(ErrorCode::kIo, "cannot create output directory " + dir_ + ": " + ec.message());
  }

  const std::string& dir() const { return dir_; }
  const std::string& hash() const { return hash_; }

  // CSV with the config hash on its first line.
  void csv(const std::string& name, const std::string& body) const {
    write(name, "# config_hash=" + hash_ + "\n" + body);
  }

  void json(const std::string& name, Json value) const {
    Json out;
    out["config_hash"] = hash_;
    for (auto& [k, v] : value.items()) out[k] = v;
    write(name, out.dump(2) + "\n");
  }

  void write(const std::string& name, const std::string& text) const {
    const fs::path path = fs::path(dir_) / name;
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  }

 private:
  std::string dir_;
  std::string hash_;
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

Json artifact_choices(const ExperimentConfig& c) {
  const FluxSpectrum s = c.noise.spectrum(c.ramp.t_final, c.model.n_harmonics);
  Json j;
  j["ramp"] = {
      {"shape", "logistic g(u) = 1/(1+exp(slope (u-center))), rescaled so sigma(0)=1, sigma(1)=0"},
      {"slope", c.ramp.slope},
      {"center", c.ramp.center},
      {"omega_initial", c.ramp.omega_initial},
      {"default_selection",
       "slope 16, center 0.4 from a coarse grid search (slope 4..24, center 0.2..0.6) maximizing noiseless "
       "squeezing from |0> at t_f/T = 2000, N = 4, J/w0 = 2.5e-3, D = 250"}};
  j["flux_noise"] = {
      {"label", "artifact choice: amplitudes and cutoffs are not given in the Letter"},
      {"amplitude_1f_per_sqrt_hz", c.noise.flux.amplitude_1f},
      {"white_floor_per_sqrt_hz", c.noise.flux.white_floor},
      {"low_cutoff_hz", s.low_cutoff_hz},
      {"high_cutoff_hz", s.high_cutoff_hz},
      {"squid_coupling", c.noise.flux.squid_coupling},
      {"coupling",
       "dJ = E_J * squid_coupling * trace; trace in reduced flux quanta; noise enters the SQUID loop only"}};
  j["asymmetry"] = "junction energies E_J (1 -+ d/2); static term -d E_J cos(eps f / 2) sin(2 sqrt(pi) eta x)";
  return j;
}

Json metadata(const ExperimentConfig& c, const std::string& started, double wall) {
  Json j;
  j["experiment"] = experiment_name(c.kind);
  j["master_seed"] = c.noise.master_seed;
  j["code_version"] = kVersion;
  j["schema_version"] = kSchemaVersion;
  j["started_utc"] = started;
  j["wall_time_s"] = wall;
  j["workers"] = c.workers;
  j["artifact_choices"] = artifact_choices(c);
  if (c.physical) {
    Json p;
    p["omega0_over_2pi_ghz"] = c.physical->omega0_over_2pi_ghz;
    p["ej_over_h_ghz"] = c.physical->ej_over_h_ghz;
    p["epsilon"] = c.physical->epsilon;
    if (c.physical->t_final_us) p["t_final_us"] = *c.physical->t_final_us;
    p["converted"] = {{"j_over_omega0", c.model.j_over_omega0},
                      {"drive_epsilon", c.model.drive_epsilon},
                      {"t_final_periods", c.ramp.t_final}};
    j["physical_units"] = p;
  }
  return j;
}

struct PairResult {
  FloquetSolution solution;
  GkpPair pair;
  int steps_per_period = 0;
  double convergence_error = 0.0;
};

PairResult floquet_pair(const FockSpace& space, const GkpMetrics& metrics, const ModelParams& params,
                        const ExperimentConfig& c) {
  const DrivenModel model(space, params);
  PropagatorOptions opts;
  opts.convergence_tol = c.convergence_tol;
  const PropagatorResult u = harmonic_propagator(model, c.floquet, opts);
  PairResult r;
  r.solution = floquet_states(u.u);
  r.pair = select_gkp_states(r.solution, metrics);
  r.steps_per_period = u.steps_per_period;
  r.convergence_error = u.convergence_error;
  return r;
}

Json pair_json(const PairResult& r) {
  auto state = [](const GkpStateInfo& s) {
    return Json{{"index", s.index},
                {"squeezing_dB", s.squeezing.db()},
                {"squeezing_dB_x", s.squeezing.db_x},
                {"squeezing_dB_p", s.squeezing.db_p},
                {"logical_fidelity", s.fidelity},
                {"logical_infidelity", 1.0 - s.fidelity},
                {"quasienergy", s.quasienergy},
                {"rotation_expectation", s.rotation.real()}};
  };
  return Json{{"plus", state(r.pair.plus)},
              {"minus", state(r.pair.minus)},
              {"overlap", r.pair.overlap},
              {"steps_per_period", r.steps_per_period},
              {"convergence_error", r.convergence_error}};
}

// A unit of work whose failure is recorded instead of aborting the run.
struct Point {
  std::string label;
  bool ok = false;
  std::string error;
  int code = 0;
  std::string row;
  Json result;
};

template <class F>
void guarded(Point& p, F&& f) {
  try {
    f();
    p.ok = true;
  } catch (const Error& e) {
    p.error = e.what();
    p.code = exit_code_for(e.code());
  } catch (const std::exception& e) {
    p.error = e.what();
    p.code = 3;
  }
}

struct Outcome {
  std::string csv_name;
  std::string csv_header;
  std::vector<Point> points;
  Json results;
  std::vector<std::string> summary;
};

// ---------------------------------------------------------------------------
// Experiments

Outcome floquet_scan(const ExperimentConfig& c, const Artifacts&) {
  const FockSpace space(c.fock_dim);
  const GkpMetrics metrics(space);
  Outcome out;
  out.csv_name = "floquet_states.csv";
  out.csv_header =
      "index,quasienergy,squeezing_dB_x,squeezing_dB_p,squeezing_dB,fidelity_Hplus,fidelity_Hminus,"
      "rotation_expectation,mean_photon_number";
  const PairResult r = floquet_pair(space, metrics, c.model, c);
  const CVector rot = space.rotation_diagonal(kPi / 2);
  const FloquetSolution& sol = r.solution;
  std::vector<Point> rows(static_cast<std::size_t>(sol.states.cols()));
  parallel_for(static_cast<int>(rows.size()), c.workers, [&](int k) {
    const StateVector v = sol.states.col(k);
    double sx = NAN, sp = NAN;
    try {
      const SqueezingReport s = metrics.squeezing(v);
      sx = s.db_x;
      sp = s.db_p;
    } catch (const Error&) {
    }
    const double fp = metrics.decoder().logical_fidelity(v, LogicalTarget::kHPlus);
    const double fm = metrics.decoder().logical_fidelity(v, LogicalTarget::kHMinus);
    const double rexp = v.dot(rot.cwiseProduct(v)).real();
    const double n = v.cwiseAbs2().dot(space.number_diagonal());
    std::ostringstream row;
    row << k << ',' << fmt(sol.quasienergies(k)) << ',' << fmt(sx) << ',' << fmt(sp) << ',' << fmt(0.5 * (sx + sp))
        << ',' << fmt(fp) << ',' << fmt(fm) << ',' << fmt(rexp) << ',' << fmt(n);
    rows[static_cast<std::size_t>(k)].row = row.str();
    rows[static_cast<std::size_t>(k)].ok = true;
  });
  Point p;
  p.label = "floquet";
  p.ok = true;
  for (const Point& row : rows) p.row += row.row + "\n";
  if (!p.row.empty()) p.row.pop_back();
  out.points.push_back(p);
  out.results = {{"pair", pair_json(r)}};
  std::ostringstream s;
  s << "psi+ (state " << r.pair.plus.index << "): " << fmt(r.pair.plus.squeezing.db()) << " dB, 1-F = "
    << fmt(1.0 - r.pair.plus.fidelity);
  out.summary.push_back(s.str());
  s.str("");
  s << "psi- (state " << r.pair.minus.index << "): " << fmt(r.pair.minus.squeezing.db()) << " dB, 1-F = "
    << fmt(1.0 - r.pair.minus.fidelity);
  out.summary.push_back(s.str());
  return out;
}

Outcome n_sweep(const ExperimentConfig& c, const Artifacts&) {
  const FockSpace space(c.fock_dim);
  const GkpMetrics metrics(space);
  Outcome out;
  out.csv_name = "n_sweep.csv";
  out.csv_header =
      "n_harmonics,squeezing_plus_dB,infidelity_plus,squeezing_minus_dB,infidelity_minus,quasienergy_plus,"
      "quasienergy_minus,steps_per_period";
  out.points.resize(c.n_values.size());
  parallel_for(static_cast<int>(c.n_values.size()), c.workers, [&](int i) {
    Point& p = out.points[static_cast<std::size_t>(i)];
    const int n = c.n_values[static_cast<std::size_t>(i)];
    p.label = "N=" + std::to_string(n);
    guarded(p, [&] {
      ModelParams params = c.model;
      params.n_harmonics = n;
      const PairResult r = floquet_pair(space, metrics, params, c);
      std::ostringstream row;
      row << n << ',' << fmt(r.pair.plus.squeezing.db()) << ',' << fmt(1.0 - r.pair.plus.fidelity) << ','
          << fmt(r.pair.minus.squeezing.db()) << ',' << fmt(1.0 - r.pair.minus.fidelity) << ','
          << fmt(r.pair.plus.quasienergy) << ',' << fmt(r.pair.minus.quasienergy) << ',' << r.steps_per_period;
      p.row = row.str();
      p.result = pair_json(r);
      p.result["n_harmonics"] = n;
    });
  });
  Json list = Json::array();
  for (const Point& p : out.points) {
    if (p.ok) list.push_back(p.result);
    out.summary.push_back(p.label + (p.ok ? ": " + p.row : ": FAILED " + p.error));
  }
  out.results = {{"points", list}};
  return out;
}

std::string file_tag(const std::string& label, double t_final) {
  std::ostringstream out;
  out << label << "_tf" << fmt(t_final);
  return out.str();
}

Outcome prep_sweep(const ExperimentConfig& c, const Artifacts& art) {
  const FockSpace space(c.fock_dim);
  const DrivenModel model(space, c.model);
  const StateVector initial = space.fock_state(c.initial_fock);
  Outcome out;
  out.csv_name = "prep_sweep.csv";
  out.csv_header =
      "curve,quality_factor,flux_noise,t_over_T,squeezing_dB,squeezing_dB_x,squeezing_dB_p,logical_infidelity,"
      "squeezing_dB_stderr,infidelity_stderr,mean_photon_number,n_trajectories";
  for (const PrepCurve& curve : c.curves) {
    for (double tf : c.t_final_values) {
      Point p;
      p.label = file_tag(curve.label, tf);
      guarded(p, [&] {
        RampSchedule sched = c.ramp;
        sched.t_final = tf;
        NoiseConfig noise = c.noise;
        noise.quality_factor = curve.quality_factor;
        noise.flux.enabled = curve.flux_noise;
        noise.workers = c.workers;
        if (!noise.lossy() && !noise.flux.enabled) noise.n_trajectories = 1;
        const EnsembleResult e = ensemble_prepare(model, initial, sched, c.prep, noise);
        const TimelineRecord& f = e.run.final_record;
        std::ostringstream timeline;
        write_timeline_csv(timeline, e.run.timeline);
        art.csv("timeline_" + p.label + ".csv", timeline.str());
        if (c.write_trajectories) {
          std::ostringstream traj;
          write_trajectory_csv(traj, e.trajectories);
          art.csv("trajectories_" + p.label + ".csv", traj.str());
        }
        const double sq = 0.5 * (f.squeezing_db_x + f.squeezing_db_p);
        std::ostringstream row;
        row << curve.label << ',' << fmt(curve.quality_factor) << ',' << (curve.flux_noise ? 1 : 0) << ',' << fmt(tf)
            << ',' << fmt(sq) << ',' << fmt(f.squeezing_db_x) << ',' << fmt(f.squeezing_db_p) << ','
            << fmt(1.0 - f.logical_fidelity) << ',' << fmt(e.squeezing_db_stderr) << ','
            << fmt(e.fidelity_stderr) << ',' << fmt(f.mean_photons) << ',' << noise.n_trajectories;
        p.row = row.str();
        p.result = {{"curve", curve.label},
                    {"t_over_T", tf},
                    {"squeezing_dB", number_or_null(sq)},
                    {"logical_infidelity", 1.0 - f.logical_fidelity},
                    {"squeezing_dB_stderr", e.squeezing_db_stderr},
                    {"infidelity_stderr", e.fidelity_stderr},
                    {"no_jump_trajectories", e.no_jump_trajectories},
                    {"steps_per_period", e.run.steps_per_period}};
      });
      out.summary.push_back(p.label + (p.ok ? ": " + p.row : ": FAILED " + p.error));
      out.points.push_back(std::move(p));
    }
  }
  Json list = Json::array();
  for (const Point& p : out.points) {
    if (p.ok) list.push_back(p.result);
  }
  out.results = {{"points", list}};
  return out;
}

Outcome robustness_sweep(const ExperimentConfig& c, const Artifacts&) {
  const FockSpace space(c.fock_dim);
  const GkpMetrics metrics(space);
  Outcome out;
  out.csv_name = "robustness.csv";
  out.csv_header =
      "axis,value,squeezing_plus_dB,infidelity_plus,squeezing_minus_dB,infidelity_minus,squeezing_drop_dB,"
      "fidelity_drop";
  const PairResult base = floquet_pair(space, metrics, c.model, c);
  out.points.resize(c.robustness_values.size());
  parallel_for(static_cast<int>(c.robustness_values.size()), c.workers, [&](int i) {
    Point& p = out.points[static_cast<std::size_t>(i)];
    const double v = c.robustness_values[static_cast<std::size_t>(i)];
    p.label = c.robustness_axis + "=" + fmt(v);
    guarded(p, [&] {
      ModelParams params = c.model;
      if (c.robustness_axis == "impedance_ratio") params.impedance_ratio = v;
      else params.ej_asymmetry = v;
      const PairResult r = floquet_pair(space, metrics, params, c);
      const double drop = std::max(base.pair.plus.squeezing.db() - r.pair.plus.squeezing.db(),
                                   base.pair.minus.squeezing.db() - r.pair.minus.squeezing.db());
      const double fdrop = std::max(base.pair.plus.fidelity - r.pair.plus.fidelity,
                                    base.pair.minus.fidelity - r.pair.minus.fidelity);
      std::ostringstream row;
      row << c.robustness_axis << ',' << fmt(v) << ',' << fmt(r.pair.plus.squeezing.db()) << ','
          << fmt(1.0 - r.pair.plus.fidelity) << ',' << fmt(r.pair.minus.squeezing.db()) << ','
          << fmt(1.0 - r.pair.minus.fidelity) << ',' << fmt(drop) << ',' << fmt(fdrop);
      p.row = row.str();
      p.result = pair_json(r);
      p.result["value"] = v;
      p.result["squeezing_drop_dB"] = drop;
      p.result["fidelity_drop"] = fdrop;
    });
  });
  Json list = Json::array();
  for (const Point& p : out.points) {
    if (p.ok) list.push_back(p.result);
    out.summary.push_back(p.label + (p.ok ? ": " + p.row : ": FAILED " + p.error));
  }
  out.results = {{"axis", c.robustness_axis}, {"baseline", pair_json(base)}, {"points", list}};
  return out;
}

// Local maxima of a sampled density above `floor` times its maximum.
std::vector<double> peaks(const std::vector<double>& grid, const RVector& v, double floor) {
  std::vector<double> out;
  const double top = v.maxCoeff();
  for (Eigen::Index i = 1; i + 1 < v.size(); ++i) {
    if (v(i) > floor * top && v(i) >= v(i - 1) && v(i) > v(i + 1)) {
      // parabolic refinement
      const double a = v(i - 1), b = v(i), d = v(i + 1);
      const double h = grid[1] - grid[0];
      const double denom = a - 2.0 * b + d;
      const double shift = denom != 0.0 ? 0.5 * (a - d) / denom : 0.0;
      out.push_back(grid[static_cast<std::size_t>(i)] + shift * h);
    }
  }
  return out;
}

double mean_spacing(const std::vector<double>& p) {
  if (p.size() < 2) return NAN;
  return (p.back() - p.front()) / static_cast<double>(p.size() - 1);
}

Outcome wigner_dump(const ExperimentConfig& c, const Artifacts& art) {
  const FockSpace space(c.fock_dim);
  const GkpMetrics metrics(space);
  const PairResult r = floquet_pair(space, metrics, c.model, c);
  const GkpStateInfo& info = c.wigner_state == LogicalTarget::kHPlus ? r.pair.plus : r.pair.minus;
  const StateVector psi = canonical_phase(r.solution.states.col(info.index));
  const std::vector<double> grid = linspace(-c.wigner_extent, c.wigner_extent, c.wigner_points);
  const RMatrix w = wigner(space, psi, grid, grid);
  const Marginals m = marginals(psi, grid, grid);
  std::ostringstream ws, mx, mp;
  write_wigner_csv(ws, grid, grid, w);
  write_marginal_csv(mx, "x", grid, m.position);
  write_marginal_csv(mp, "p", grid, m.momentum);
  art.csv("marginal_x.csv", mx.str());
  art.csv("marginal_p.csv", mp.str());
  Outcome out;
  out.csv_name = "wigner.csv";
  Point p;
  p.label = std::string("wigner_") + target_name(c.wigner_state);
  p.ok = true;
  // write_wigner_csv supplies its own header line
  std::string body = ws.str();
  const auto nl = body.find('\n');
  out.csv_header = body.substr(0, nl);
  p.row = body.substr(nl + 1);
  if (!p.row.empty() && p.row.back() == '\n') p.row.pop_back();
  out.points.push_back(p);
  const std::vector<double> px = peaks(grid, m.position, 0.05), pp = peaks(grid, m.momentum, 0.05);
  out.results = {{"state", target_name(c.wigner_state)},
                 {"floquet_index", info.index},
                 {"squeezing_dB", info.squeezing.db()},
                 {"marginal_x_peaks", px},
                 {"marginal_p_peaks", pp},
                 {"mean_peak_spacing_x", number_or_null(mean_spacing(px))},
                 {"mean_peak_spacing_p", number_or_null(mean_spacing(pp))},
                 {"sqrt_pi", std::sqrt(kPi)}};
  out.summary.push_back("marginal peak spacing x = " + fmt(mean_spacing(px)) + ", p = " + fmt(mean_spacing(pp)) +
                        " (sqrt(pi) = " + fmt(std::sqrt(kPi)) + ")");
  return out;
}

std::string csv_body(const Outcome& o) {
  std::string body = o.csv_header + "\n";
  for (const Point& p : o.points) {
    if (p.ok && !p.row.empty()) body += p.row + "\n";
  }
  return body;
}

Json manifest_json(const std::string& experiment, const std::vector<PointStatus>& points) {
  Json list = Json::array();
  int done = 0;
  for (const PointStatus& p : points) {
    Json e{{"label", p.label}, {"status", p.status}};
    if (!p.error.empty()) e["error"] = p.error;
    list.push_back(e);
    done += p.status == "complete" ? 1 : 0;
  }
  return Json{{"experiment", experiment},
              {"points", list},
              {"complete", done},
              {"incomplete", static_cast<int>(points.size()) - done}};
}

int exit_for_points(const std::vector<PointStatus>& points, const std::vector<int>& codes) {
  int failed = 0, code = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].status != "complete") {
      ++failed;
      code = std::max(code, codes[i]);
    }
  }
  if (failed == 0) return 0;
  if (failed < static_cast<int>(points.size())) return 4;
  return code == 2 ? 2 : 3;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  RunReport report;
  report.config_hash = config_hash(c);
  report.output_dir = c.output_dir;
  const Artifacts art(c.output_dir, report.config_hash);
  Json archived = config_json(c);
  art.json("config.json", archived);

  Outcome out;
  std::vector<int> codes;
  try {
    switch (c.kind) {
      case ExperimentKind::kFloquetScan:
        out = floquet_scan(c, art);
        break;
      case ExperimentKind::kNSweep:
        out = n_sweep(c, art);
        break;
      case ExperimentKind::kPrepSweep:
        out = prep_sweep(c, art);
        break;
      case ExperimentKind::kRobustnessSweep:
        out = robustness_sweep(c, art);
        break;
      case ExperimentKind::kWignerDump:
        out = wigner_dump(c, art);
        break;
    }
  } catch (const Error& e) {
    // a failure outside the per-point guards aborts the whole experiment
    Point p;
    p.label = experiment_name(c.kind);
    p.error = e.what();
    p.code = exit_code_for(e.code());
    out.points = {p};
    out.summary = {std::string("FAILED: ") + e.what()};
  }
  for (const Point& p : out.points) {
    report.points.push_back({p.label, p.ok ? "complete" : "failed", p.error, p.code});
    codes.push_back(p.code);
  }
  report.exit_code = exit_for_points(report.points, codes);
  if (!out.csv_name.empty()) art.csv(out.csv_name, csv_body(out));
  if (!out.results.is_null()) art.json("results.json", out.results);
  art.json("manifest.json", manifest_json(experiment_name(c.kind), report.points));

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  art.json("metadata.json", metadata(c, started, wall));

  std::ostringstream summary;
  summary << "experiment: " << experiment_name(c.kind) << "\n";
  summary << "config_hash: " << report.config_hash << "\n";
  summary << "seed: " << c.noise.master_seed << "\n";
  for (const std::string& line : out.summary) summary << line << "\n";
  summary << "status: " << (report.exit_code == 0 ? "complete" : report.exit_code == 4 ? "partial" : "failed")
          << " (exit " << report.exit_code << ")\n";
  for (const PointStatus& p : report.points) {
    if (p.status != "complete") summary << "failed sub-experiment " << p.label << ": " << p.error << "\n";
  }
  report.summary = summary.str();
  art.write("summary.txt", report.summary);
  return report;
}

RunReport run_sweep(const ConfigDocument& base, const std::string& axis, const std::vector<double>& values,
                    const std::string& output_dir, int workers) {
  const ExperimentConfig base_cfg = base.resolve();
  // The axis must name a numeric field of the resolved config.
  {
    const Json j = config_json(base_cfg);
    std::string pointer;
    for (const std::string& part : split_path(axis)) pointer += "/" + part;
    const Json::json_pointer ptr(pointer);
    if (!j.contains(ptr) || !j.at(ptr).is_number()) {
      fail(ErrorCode::kConfig, "sweep axis '" + axis + "' is not a numeric config field");
    }
  }
  RunReport report;
  report.config_hash = config_hash(base_cfg);
  report.output_dir = output_dir;
  const Artifacts art(output_dir, report.config_hash);
  art.json("config.json", config_json(base_cfg));

  struct Slot {
    PointStatus status;
    int code = 0;
    std::string header;
    std::string rows;
    std::string hash;
  };
  std::vector<Slot> slots(values.size());
  // Points run one after another; each uses the full worker pool internally.
  for (std::size_t i = 0; i < values.size(); ++i) {
    Slot& s = slots[i];
    std::ostringstream dir;
    dir << "point_" << std::setw(3) << std::setfill('0') << i;
    s.status.label = axis + "=" + fmt(values[i]);
    try {
      ConfigDocument doc = base;
      doc.set(axis, fmt(values[i]));
      ExperimentConfig cfg = doc.resolve();
      cfg.output_dir = (fs::path(output_dir) / dir.str()).string();
      cfg.workers = workers;
      s.hash = config_hash(cfg);
      const RunReport r = run_experiment(cfg);
      s.status.status = r.exit_code == 0 ? "complete" : "failed";
      s.code = r.exit_code == 4 ? 4 : r.exit_code;
      if (r.exit_code != 0) {
        for (const PointStatus& p : r.points) {
          if (p.status != "complete") {
            s.status.error = p.label + ": " + p.error;
            break;
          }
        }
      }
      // gather the point's main table for the combined CSV
      const std::map<ExperimentKind, std::string> tables{{ExperimentKind::kFloquetScan, "floquet_states.csv"},
                                                         {ExperimentKind::kNSweep, "n_sweep.csv"},
                                                         {ExperimentKind::kPrepSweep, "prep_sweep.csv"},
                                                         {ExperimentKind::kRobustnessSweep, "robustness.csv"},
                                                         {ExperimentKind::kWignerDump, "wigner.csv"}};
      std::ifstream in(fs::path(cfg.output_dir) / tables.at(cfg.kind));
      std::string line;
      std::getline(in, line);  // hash line
      std::getline(in, s.header);
      while (std::getline(in, line)) s.rows += std::to_string(i) + "," + fmt(values[i]) + "," + line + "\n";
    } catch (const Error& e) {
      s.status.status = "failed";
      s.status.error = e.what();
      s.code = exit_code_for(e.code());
    }
  }
  std::string header;
  for (const Slot& s : slots) {
    if (!s.header.empty()) {
      header = s.header;
      break;
    }
  }
  std::string body = "point," + axis + (header.empty() ? "" : "," + header) + "\n";
  for (const Slot& s : slots) body += s.rows;
  art.csv("sweep.csv", body);

  std::vector<int> codes;
  for (const Slot& s : slots) {
    report.points.push_back(s.status);
    codes.push_back(s.code);
  }
  Json manifest = manifest_json(std::string("sweep:") + experiment_name(base_cfg.kind), report.points);
  manifest["axis"] = axis;
  manifest["values"] = values;
  Json hashes = Json::array();
  for (const Slot& s : slots) hashes.push_back(s.hash);
  manifest["point_config_hashes"] = hashes;
  art.json("manifest.json", manifest);
  report.exit_code = values.empty() ? 0 : exit_for_points(report.points, codes);

  std::ostringstream summary;
  summary << "sweep of " << experiment_name(base_cfg.kind) << " over " << axis << " (" << values.size()
          << " points)\nconfig_hash: " << report.config_hash << "\n";
  for (const PointStatus& p : report.points) {
    summary << p.label << ": " << p.status << (p.error.empty() ? "" : " (" + p.error + ")") << "\n";
  }
  summary << "exit " << report.exit_code << "\n";
  report.summary = summary.str();
  art.write("summary.txt", report.summary);
  return report;
}

}  // namespace gkp
