// Copyright 2026 The snlse-lab Authors
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

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "snlse/harness.hpp"

// Exit codes: 0 success, 1 selftest failure, 2 usage or configuration error,
// 3 divergence, 4 runtime or I/O failure.
int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for the stochastic cubic Schroedinger equation on the torus."};
  app.set_version_flag("--version", SNLSE_VERSION_STRING);

  std::string experiment;
  std::string config_file;
  std::vector<std::string> assignments;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out_dir;
  app.add_option("experiment", experiment, "converge | longterm | eps-scaling | decomposition | selftest")
      ->required();
  app.add_option("--config", config_file, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", assignments, "Override a config key, e.g. --set noise.epsilon=0.2");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  auto* workers_opt = app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", out_dir, "Output directory");
  CLI11_PARSE(app, argc, argv);

  snlse::harness::ConfigSources sources;
  sources.experiment = experiment;
  if (!config_file.empty()) sources.config_file = config_file;
  sources.assignments = assignments;
  if (*seed_opt) sources.seed = seed;
  if (*workers_opt) sources.workers = workers;
  if (*out_opt) sources.out_dir = out_dir;
  if (const char* env = std::getenv(snlse::harness::kOutDirEnv)) sources.env_out_dir = env;

  snlse::harness::RunConfig config;
  try {
    config = snlse::harness::load_config(sources);
  } catch (const snlse::harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  const auto outcome = snlse::harness::run_experiment(config, std::cout);
  if (outcome.exit_code != 0) {
    std::cerr << outcome.report << "\n";
  } else {
    for (const auto& p : outcome.outputs) std::cout << "wrote " << p.string() << "\n";
  }
  return outcome.exit_code;
}
