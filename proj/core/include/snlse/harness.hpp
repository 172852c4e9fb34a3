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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "snlse/analysis.hpp"
#include "snlse/integrators.hpp"

namespace snlse::harness {

/// Configuration problems, always naming the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class ExperimentKind { kConverge, kLongterm, kEpsScaling, kDecomposition, kSelftest };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& name);

struct InitialData {
  std::string kind = "smooth-rational";  // "smooth-rational", "single-mode", "file"
  double scale = 1.0;
  Complex amplitude{1.0, 0.0};  // single-mode c
  int mode = 1;                 // single-mode l
  std::string file;             // lines "k,re,im"
};

/// Parameters of the decomposition experiment.
struct DecompositionConfig {
  int num_modes = 8;
  double tau = 0.05;
  double t_n = 0.0;
  double mu = 1.0;
  int substeps = 256;
  int cases = 5;
};

/// Fully resolved and validated run description.
struct RunConfig {
  ExperimentKind experiment = ExperimentKind::kLongterm;
  std::string profile = "desk";

  int num_modes = 256;
  double decay_exponent = 8.0;
  std::map<int, double> eigenvalue_table;  // used instead of the decay family when non-empty
  double alpha = 0.0;                      // resolved noise amplitude
  double mu = 0.0;                         // resolved nonlinearity coefficient
  double epsilon = 0.1;
  double q = 3.5;

  std::vector<SchemeKind> schemes;
  SchemeKind reference = SchemeKind::kSnrli1;
  double tau = 0.01;
  std::vector<double> tau_list;
  double tau_ref = 1e-4;
  double horizon = 20.0;
  std::vector<double> epsilon_list;
  HorizonMode horizon_mode = HorizonMode::kFixedT;
  std::int64_t checkpoint_stride = 10;

  int num_paths = 20;
  double sigma = 1.0;
  int p_moment = 1;
  std::uint64_t master_seed = 0;
  int workers = 1;

  InitialData initial;
  DecompositionConfig decomposition;

  std::filesystem::path out_dir = "out";
  bool dealias = false;
  bool allow_diverged = false;
  bool emit_svg = false;

  /// Resolved configuration as JSON text (every default included), and the
  /// keys set both in the file and on the command line.
  std::string resolved_json;
  struct Override {
    std::string key;
    std::string file_value;
    std::string flag_value;
  };
  std::vector<Override> overrides;
};

/// Command-line inputs mirrored onto config keys.
struct ConfigSources {
  std::string experiment;
  std::optional<std::filesystem::path> config_file;
  std::vector<std::string> assignments;  // "dotted.key=value"
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::filesystem::path> out_dir;
  /// Value of the output-directory environment variable, if any.
  std::optional<std::string> env_out_dir;
};

/// Environment variable that overrides the output directory.
inline constexpr const char* kOutDirEnv = "SNLSE_LAB_OUT_DIR";

/// Defaults < config file < environment < flags. Throws ConfigError.
RunConfig load_config(const ConfigSources& sources);

/// Builds the experiment's starting state.
SpectralState make_initial_state(const RunConfig& config);
QWienerSpec make_noise(const RunConfig& config);
MonteCarloSetup make_setup(const RunConfig& config);

/// CSV writers; floating point uses 17 significant digits. Empty input is refused.
void emit_converge_csv(const std::vector<ErrorRecord>& records, const RunConfig& config,
                       const std::filesystem::path& path);
void emit_longterm_csv(const ErrorCurve& curve, const std::filesystem::path& path);
void emit_eps_csv(const EpsilonScalingResult& result, double q, const std::filesystem::path& path);
/// Generic form used by the writers above.
void emit_csv(const std::vector<std::string>& header,
              const std::vector<std::vector<std::string>>& rows, const std::filesystem::path& path);
std::string format_double(double value);

/// Polyline plot, optionally with logarithmic axes.
struct PlotSeries {
  std::string label;
  std::vector<double> xs, ys;
};
void emit_svg(const std::vector<PlotSeries>& series, const std::string& title,
              const std::string& x_label, const std::string& y_label, bool log_x, bool log_y,
              const std::filesystem::path& path);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

struct RunOutcome {
  int exit_code = 0;
  std::vector<std::filesystem::path> outputs;
  std::string report;  // human-readable summary or structured error
};

/// Runs one experiment, writing CSVs, the manifest and optional SVGs into
/// config.out_dir. Divergence (unless allowed) and I/O failures give a
/// nonzero exit code.
RunOutcome run_experiment(const RunConfig& config, std::ostream& log);

struct SelftestRow {
  std::string name;
  bool passed = false;
  std::string detail;
};
/// Quick invariant checks across all modules.
std::vector<SelftestRow> run_selftest();

}  // namespace snlse::harness
