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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "snlse/diagnostics.hpp"
#include "snlse/errors.hpp"
#include "snlse/harness.hpp"

namespace snlse::harness {

using nlohmann::json;

namespace {

json default_config(ExperimentKind experiment, const std::string& profile) {
  json cfg = {
      {"experiment", to_string(experiment)},
      {"profile", profile},
      {"grid", {{"K", 256}}},
      {"noise",
       {{"decay_exponent", 8.0},
        {"table", nullptr},
        {"amplitude", nullptr},
        {"epsilon", 0.1},
        {"q", 3.5}}},
      {"equation", {{"mu", nullptr}}},
      {"schemes", {"SNRLI1", "SLI1"}},
      {"reference", "SNRLI1"},
      {"tau", 0.01},
      {"tau_list", json::array()},
      {"tau_ref", 1e-4},
      {"T", 20.0},
      {"epsilon_list", {0.2, 0.1}},
      {"horizon_mode", "fixed_T"},
      {"checkpoint_stride", 10},
      {"M", 20},
      {"sigma", 1.0},
      {"p", 1},
      {"master_seed", 20240229},
      {"workers", 1},
      {"initial_data", {{"kind", "smooth-rational"}, {"scale", 1.0}, {"c", {1.0, 0.0}}, {"l", 1}, {"file", ""}}},
      {"decomposition",
       {{"K", 8}, {"tau", 0.05}, {"t_n", 0.0}, {"mu", 1.0}, {"substeps", 256}, {"cases", 5}}},
      {"output", {{"dir", "out"}}},
      {"flags", {{"dealias", false}, {"allow_diverged", false}, {"emit_svg", false}}},
  };
  switch (experiment) {
    case ExperimentKind::kLongterm:
      if (profile == "full") {
        cfg["T"] = 100.0;
        cfg["M"] = 100;
        cfg["tau_ref"] = 1e-5;
      }
      break;
    case ExperimentKind::kConverge:
      cfg["grid"]["K"] = 64;
      cfg["noise"]["amplitude"] = 1.0;
      cfg["equation"]["mu"] = 0.0;
      cfg["schemes"] = {"SNRLI1"};
      cfg["reference"] = "EXACT_LINEAR";
      cfg["tau_list"] = {0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
      cfg["tau_ref"] = 0.00390625;
      cfg["T"] = 1.0;
      cfg["M"] = 200;
      break;
    case ExperimentKind::kEpsScaling:
      cfg["grid"]["K"] = 128;
      cfg["noise"]["q"] = 6.0;
      cfg["schemes"] = {"SNRLI1"};
      cfg["T"] = 5.0;
      cfg["M"] = 50;
      break;
    case ExperimentKind::kDecomposition:
    case ExperimentKind::kSelftest:
      break;
  }
  return cfg;
}

void flatten(const json& j, const std::string& prefix, std::map<std::string, json>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else {
    out[prefix] = j;
  }
}

void merge_checked(json& target, const json& source, const std::string& prefix) {
  if (!source.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected a section");
  for (const auto& [k, v] : source.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (!target.contains(k)) throw ConfigError(key, "unknown key");
    if (target[k].is_object()) {
      merge_checked(target[k], v, key);
    } else {
      target[k] = v;
    }
  }
}

json* lookup(json& root, const std::string& dotted) {
  json* node = &root;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!node->is_object() || !node->contains(part)) return nullptr;
    node = &(*node)[part];
  }
  return node;
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return json(text);
  }
}

template <typename T>
T get(const json& root, const std::string& dotted) {
  const json* node = &root;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) node = &node->at(part);
  try {
    return node->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(dotted, std::string("wrong type: ") + e.what());
  }
}

bool is_multiple(double big, double small) {
  const double ratio = big / small;
  return ratio >= 1.0 - 1e-12 && std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kConverge: return "converge";
    case ExperimentKind::kLongterm: return "longterm";
    case ExperimentKind::kEpsScaling: return "eps-scaling";
    case ExperimentKind::kDecomposition: return "decomposition";
    case ExperimentKind::kSelftest: return "selftest";
  }
  return "?";
}

ExperimentKind parse_experiment(const std::string& name) {
  for (auto kind : {ExperimentKind::kConverge, ExperimentKind::kLongterm, ExperimentKind::kEpsScaling,
                    ExperimentKind::kDecomposition, ExperimentKind::kSelftest}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("experiment", "unknown experiment '" + name +
                                      "' (converge, longterm, eps-scaling, decomposition, selftest)");
}

RunConfig load_config(const ConfigSources& sources) {
  json file_cfg = json::object();
  if (sources.config_file) {
    std::ifstream in(*sources.config_file);
    if (!in) throw ConfigError("--config", "cannot open " + sources.config_file->string());
    try {
      file_cfg = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("--config", std::string("malformed file: ") + e.what());
    }
  }

  std::vector<std::pair<std::string, json>> flag_values;
  for (const auto& a : sources.assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(a, "expected key=value");
    flag_values.emplace_back(a.substr(0, eq), parse_value(a.substr(eq + 1)));
  }
  if (sources.seed) flag_values.emplace_back("master_seed", json(*sources.seed));
  if (sources.workers) flag_values.emplace_back("workers", json(*sources.workers));
  if (sources.out_dir) flag_values.emplace_back("output.dir", json(sources.out_dir->string()));

  // The experiment and profile pick the defaults, so resolve them first.
  std::string experiment_name = sources.experiment;
  if (experiment_name.empty() && file_cfg.contains("experiment")) {
    experiment_name = get<std::string>(file_cfg, "experiment");
  }
  std::string profile = file_cfg.value("profile", std::string("desk"));
  for (const auto& [k, v] : flag_values) {
    if (k == "profile" && v.is_string()) profile = v.get<std::string>();
    if (k == "experiment" && v.is_string()) experiment_name = v.get<std::string>();
  }
  require(profile == "desk" || profile == "full", "profile", "expected 'desk' or 'full'");
  const ExperimentKind experiment = parse_experiment(experiment_name);

  json cfg = default_config(experiment, profile);
  merge_checked(cfg, file_cfg, "");
  cfg["experiment"] = to_string(experiment);
  if (sources.env_out_dir && !sources.env_out_dir->empty()) cfg["output"]["dir"] = *sources.env_out_dir;

  std::map<std::string, json> file_flat;
  flatten(file_cfg, "", file_flat);
  RunConfig config;
  for (const auto& [k, v] : flag_values) {
    json* slot = lookup(cfg, k);
    if (slot == nullptr || slot->is_object()) throw ConfigError(k, "unknown key");
    if (auto it = file_flat.find(k); it != file_flat.end()) {
      config.overrides.push_back({k, it->second.dump(), v.dump()});
    }
    *slot = v;
  }

  config.experiment = experiment;
  config.profile = profile;
  config.num_modes = get<int>(cfg, "grid.K");
  require(config.num_modes >= 8 && (config.num_modes & (config.num_modes - 1)) == 0, "grid.K",
          "K must be a power of two >= 8");

  config.decay_exponent = get<double>(cfg, "noise.decay_exponent");
  require(config.decay_exponent >= 0.0, "noise.decay_exponent", "must be >= 0");
  if (!cfg["noise"]["table"].is_null()) {
    const json& table = cfg["noise"]["table"];
    require(table.is_object(), "noise.table", "expected an object {\"k\": lambda_k}");
    for (const auto& [k, v] : table.items()) {
      int mode = 0;
      try {
        mode = std::stoi(k);
      } catch (const std::exception&) {
        throw ConfigError("noise.table." + k, "mode index must be an integer");
      }
      require(v.is_number() && v.get<double>() >= 0.0, "noise.table." + k, "eigenvalue must be >= 0");
      config.eigenvalue_table[mode] = v.get<double>();
    }
  }
  config.epsilon = get<double>(cfg, "noise.epsilon");
  require(config.epsilon > 0.0 && config.epsilon <= 1.0, "noise.epsilon", "must lie in (0, 1]");
  config.q = get<double>(cfg, "noise.q");
  config.alpha = cfg["noise"]["amplitude"].is_null() ? std::pow(config.epsilon, config.q - 1.0)
                                                     : get<double>(cfg, "noise.amplitude");
  require(config.alpha >= 0.0 && std::isfinite(config.alpha), "noise.amplitude", "must be >= 0");
  config.mu = cfg["equation"]["mu"].is_null() ? config.epsilon * config.epsilon
                                              : get<double>(cfg, "equation.mu");
  require(std::isfinite(config.mu), "equation.mu", "must be finite");

  for (const auto& s : get<std::vector<std::string>>(cfg, "schemes")) {
    try {
      config.schemes.push_back(parse_scheme(s));
    } catch (const std::exception& e) {
      throw ConfigError("schemes", e.what());
    }
  }
  require(!config.schemes.empty(), "schemes", "at least one scheme is required");
  try {
    config.reference = parse_scheme(get<std::string>(cfg, "reference"));
  } catch (const InvalidConfiguration& e) {
    throw ConfigError("reference", e.what());
  }
  if (config.reference == SchemeKind::kExactLinear) {
    require(config.mu == 0.0, "reference", "EXACT_LINEAR reference requires equation.mu = 0");
  }
  for (auto s : config.schemes) {
    if (s == SchemeKind::kExactLinear) {
      require(config.mu == 0.0, "schemes", "EXACT_LINEAR requires equation.mu = 0");
    }
  }

  config.tau = get<double>(cfg, "tau");
  config.tau_list = get<std::vector<double>>(cfg, "tau_list");
  config.tau_ref = get<double>(cfg, "tau_ref");
  config.horizon = get<double>(cfg, "T");
  config.epsilon_list = get<std::vector<double>>(cfg, "epsilon_list");
  const auto horizon_mode = get<std::string>(cfg, "horizon_mode");
  require(horizon_mode == "fixed_T" || horizon_mode == "scaled_T_eps", "horizon_mode",
          "expected 'fixed_T' or 'scaled_T_eps'");
  config.horizon_mode = horizon_mode == "fixed_T" ? HorizonMode::kFixedT : HorizonMode::kScaledTEps;
  config.checkpoint_stride = get<std::int64_t>(cfg, "checkpoint_stride");
  require(config.checkpoint_stride >= 1, "checkpoint_stride", "must be >= 1");
  config.num_paths = get<int>(cfg, "M");
  require(config.num_paths >= 1, "M", "must be >= 1");
  config.sigma = get<double>(cfg, "sigma");
  require(config.sigma >= 0.0, "sigma", "must be >= 0");
  config.p_moment = get<int>(cfg, "p");
  require(config.p_moment >= 1, "p", "must be >= 1");
  config.master_seed = get<std::uint64_t>(cfg, "master_seed");
  config.workers = get<int>(cfg, "workers");
  require(config.workers >= 1, "workers", "must be >= 1");

  require(config.tau_ref > 0.0, "tau_ref", "must be > 0");
  require(config.horizon > 0.0, "T", "must be > 0");
  switch (experiment) {
    case ExperimentKind::kConverge:
      require(config.tau_list.size() >= 3, "tau_list", "needs at least 3 step sizes");
      for (double t : config.tau_list) {
        require(t > 0.0, "tau_list", "step sizes must be > 0");
        require(is_multiple(t, config.tau_ref), "tau_ref",
                "tau_ref=" + format_double(config.tau_ref) + " does not divide tau=" + format_double(t));
        require(is_multiple(config.horizon, t), "T", "must be a whole number of steps for tau=" + format_double(t));
      }
      break;
    case ExperimentKind::kLongterm:
    case ExperimentKind::kEpsScaling:
      require(config.tau > 0.0, "tau", "must be > 0");
      require(is_multiple(config.tau, config.tau_ref), "tau_ref",
              "tau_ref=" + format_double(config.tau_ref) + " does not divide tau=" + format_double(config.tau));
      require(is_multiple(config.horizon, config.tau), "T", "must be a whole number of tau steps");
      if (experiment == ExperimentKind::kEpsScaling) {
        require(config.q > 2.0, "noise.q", "epsilon scaling needs q > 2");
        require(!config.epsilon_list.empty(), "epsilon_list", "must not be empty");
        for (double e : config.epsilon_list) require(e > 0.0 && e <= 1.0, "epsilon_list", "entries must lie in (0, 1]");
      }
      break;
    case ExperimentKind::kDecomposition:
    case ExperimentKind::kSelftest:
      break;
  }
  require(is_multiple(config.horizon, config.tau_ref), "T", "must be a whole number of tau_ref steps");

  const json& ini = cfg["initial_data"];
  config.initial.kind = get<std::string>(cfg, "initial_data.kind");
  require(config.initial.kind == "smooth-rational" || config.initial.kind == "single-mode" ||
              config.initial.kind == "file",
          "initial_data.kind", "expected smooth-rational, single-mode or file");
  config.initial.scale = get<double>(cfg, "initial_data.scale");
  const auto c = get<std::vector<double>>(cfg, "initial_data.c");
  require(c.size() == 2, "initial_data.c", "expected [re, im]");
  config.initial.amplitude = Complex{c[0], c[1]};
  config.initial.mode = get<int>(cfg, "initial_data.l");
  require(2 * std::abs(config.initial.mode) <= config.num_modes && config.initial.mode < config.num_modes / 2,
          "initial_data.l", "mode outside the grid");
  config.initial.file = ini.at("file").get<std::string>();
  if (config.initial.kind == "file") require(!config.initial.file.empty(), "initial_data.file", "path required");

  auto& dec = config.decomposition;
  dec.num_modes = get<int>(cfg, "decomposition.K");
  require(dec.num_modes >= 8 && dec.num_modes <= kMaxTripleSumModes && (dec.num_modes & (dec.num_modes - 1)) == 0,
          "decomposition.K", "must be a power of two in [8, 32]");
  dec.tau = get<double>(cfg, "decomposition.tau");
  require(dec.tau > 0.0, "decomposition.tau", "must be > 0");
  dec.t_n = get<double>(cfg, "decomposition.t_n");
  dec.mu = get<double>(cfg, "decomposition.mu");
  dec.substeps = get<int>(cfg, "decomposition.substeps");
  require(dec.substeps >= 1, "decomposition.substeps", "must be >= 1");
  dec.cases = get<int>(cfg, "decomposition.cases");
  require(dec.cases >= 1, "decomposition.cases", "must be >= 1");

  config.out_dir = get<std::string>(cfg, "output.dir");
  config.dealias = get<bool>(cfg, "flags.dealias");
  config.allow_diverged = get<bool>(cfg, "flags.allow_diverged");
  config.emit_svg = get<bool>(cfg, "flags.emit_svg");

  config.resolved_json = cfg.dump(2);
  return config;
}

QWienerSpec make_noise(const RunConfig& config) {
  if (!config.eigenvalue_table.empty()) return QWienerSpec::table(config.eigenvalue_table, config.alpha);
  return QWienerSpec::power_decay(config.decay_exponent, config.alpha);
}

SpectralState make_initial_state(const RunConfig& config) {
  const SpectralGrid grid(config.num_modes);
  const auto& ini = config.initial;
  if (ini.kind == "single-mode") {
    return SpectralState::single_mode(grid, ini.scale * ini.amplitude, ini.mode);
  }
  if (ini.kind == "file") {
    std::ifstream in(ini.file);
    if (!in) throw ConfigError("initial_data.file", "cannot open " + ini.file);
    SpectralState s(grid);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream row(line);
      int k = 0;
      double re = 0.0, im = 0.0;
      if (!(row >> k >> re >> im)) {
        throw ConfigError("initial_data.file", "line " + std::to_string(line_no) + ": expected k,re,im");
      }
      if (k < -config.num_modes / 2 || k >= config.num_modes / 2) {
        throw ConfigError("initial_data.file", "line " + std::to_string(line_no) + ": mode outside grid");
      }
      s.coeff(k) = ini.scale * Complex{re, im};
    }
    return s;
  }
  const auto xs = grid.collocation_points();
  CVector values(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) values[j] = ini.scale * 2.0 / (2.0 - std::cos(xs[j]));
  return forward_transform(grid, values);
}

MonteCarloSetup make_setup(const RunConfig& config) {
  MonteCarloSetup setup{make_initial_state(config), make_noise(config), 0.0, {}, 1e-4, {}, {}, 0, 1, false};
  setup.mu = config.mu;
  setup.aliasing = config.dealias ? Aliasing::kPadded : Aliasing::kCollocation;
  setup.tau_ref = config.tau_ref;
  setup.reference = config.reference;
  setup.error.sigma = config.sigma;
  setup.error.p_moment = config.p_moment;
  setup.error.num_paths = config.num_paths;
  setup.error.epsilon = config.epsilon;
  setup.error.q_exponent = config.q;
  setup.master_seed = config.master_seed;
  setup.workers = config.workers;
  setup.allow_diverged = config.allow_diverged;
  return setup;
}

}  // namespace snlse::harness
