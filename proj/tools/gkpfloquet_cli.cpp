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

// gkpfloquet: command-line runner over the C API.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gkpfloquet/gkpfloquet.h"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int workers = 0;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (YAML or JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  cmd->add_option("--out", c.out, "output directory (overrides the config)");
  cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--override", c.overrides, "key=value, dotted keys, repeatable")->take_all();
}

int report_error(gkp_status s) {
  std::fprintf(stderr, "error: %s\n", gkp_last_error());
  return gkp_exit_code(s);
}

// Loads and adjusts the config; returns 0 or an exit code.
int load(const Common& c, gkp_config** cfg) {
  gkp_status s = gkp_config_load(c.config.c_str(), cfg);
  if (s != GKP_OK) return report_error(s);
  for (const std::string& o : c.overrides) {
    if ((s = gkp_config_override(*cfg, o.c_str())) != GKP_OK) return report_error(s);
  }
  if (c.seed && (s = gkp_config_set_seed(*cfg, *c.seed)) != GKP_OK) return report_error(s);
  if (!c.out.empty() && (s = gkp_config_set_output_dir(*cfg, c.out.c_str())) != GKP_OK) return report_error(s);
  if (c.workers > 0 && (s = gkp_config_set_workers(*cfg, c.workers)) != GKP_OK) return report_error(s);
  if ((s = gkp_config_validate(*cfg)) != GKP_OK) return report_error(s);
  return 0;
}

int finish(gkp_status s, gkp_result* r) {
  if (s != GKP_OK) return report_error(s);
  std::fputs(gkp_result_summary(r), stdout);
  std::printf("artifacts: %s\n", gkp_result_output_dir(r));
  const int code = gkp_result_exit_code(r);
  gkp_result_free(r);
  return code;
}

std::string hash_of(const gkp_config* cfg) {
  char buf[32];
  gkp_config_hash(cfg, buf, sizeof buf, nullptr);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floquet GKP state simulator"};
  app.set_version_flag("--version", gkp_version());
  app.require_subcommand(1);

  Common run_opts, sweep_opts, validate_opts;
  CLI::App* run = app.add_subcommand("run", "run the experiment named in the config");
  add_common(run, run_opts);

  CLI::App* sweep = app.add_subcommand("sweep", "run the config once per value of a numeric field");
  add_common(sweep, sweep_opts);
  std::string axis;
  std::vector<std::string> value_text;
  sweep->add_option("--axis", axis, "dotted config field, e.g. model.impedance_ratio")->required();
  sweep->add_option("--values", value_text, "comma-separated values (may be empty)")
      ->delimiter(',')
      ->expected(0, -1)
      ->required();

  CLI::App* validate = app.add_subcommand("validate", "check a config without running it");
  add_common(validate, validate_opts);
  bool print_json = false;
  validate->add_flag("--print", print_json, "print the resolved canonical config");

  CLI::App* oracle = app.add_subcommand("oracle", "run the brute-force oracle suite and record fixtures");
  std::string oracle_out = "oracles";
  int oracle_workers = 1;
  oracle->add_option("--out", oracle_out, "output directory");
  oracle->add_option("--workers", oracle_workers, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  gkp_config* cfg = nullptr;
  int code = 0;
  if (*run) {
    if ((code = load(run_opts, &cfg)) == 0) {
      gkp_result* r = nullptr;
      const gkp_status s = gkp_run(cfg, &r);
      code = finish(s, r);
    }
  } else if (*sweep) {
    if ((code = load(sweep_opts, &cfg)) == 0) {
      std::vector<double> values;
      for (const std::string& v : value_text) {
        if (v.empty()) continue;
        try {
          std::size_t used = 0;
          values.push_back(std::stod(v, &used));
          if (used != v.size()) throw std::invalid_argument(v);
        } catch (const std::exception&) {
          std::fprintf(stderr, "error: --values: '%s' is not a number\n", v.c_str());
          gkp_config_free(cfg);
          return 2;
        }
      }
      gkp_result* r = nullptr;
      const gkp_status s = gkp_sweep(cfg, axis.c_str(), values.data(), values.size(), &r);
      code = finish(s, r);
    }
  } else if (*validate) {
    if ((code = load(validate_opts, &cfg)) == 0) {
      std::printf("valid, config_hash=%s\n", hash_of(cfg).c_str());
      if (print_json) {
        std::size_t needed = 0;
        gkp_config_to_json(cfg, nullptr, 0, &needed);
        std::string json(needed, '\0');
        gkp_config_to_json(cfg, json.data(), json.size(), nullptr);
        json.pop_back();
        std::printf("%s\n", json.c_str());
      }
    }
  } else if (*oracle) {
    gkp_result* r = nullptr;
    const gkp_status s = gkp_run_oracles(oracle_out.c_str(), oracle_workers, &r);
    code = finish(s, r);
  }
  gkp_config_free(cfg);
  return code;
}
