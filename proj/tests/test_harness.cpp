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

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "snlse/harness.hpp"

using namespace snlse;
using namespace snlse::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("snlse_harness_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

ConfigSources sources(const std::string& experiment, std::vector<std::string> sets = {}) {
  ConfigSources s;
  s.experiment = experiment;
  s.assignments = std::move(sets);
  return s;
}

}  // namespace

TEST_CASE("formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(2.5e-7) == "2.4999999999999999e-07");
}

TEST_CASE("defaults for the long-time experiment") {
  const auto cfg = load_config(sources("longterm"));
  CHECK(cfg.epsilon == 0.1);
  CHECK(cfg.q == 3.5);
  CHECK(cfg.tau == 0.01);
  CHECK(cfg.num_modes == 256);
  CHECK(cfg.decay_exponent == 8.0);
  CHECK(cfg.mu == doctest::Approx(0.01));
  CHECK(cfg.alpha == doctest::Approx(std::pow(0.1, 2.5)));
  CHECK(cfg.schemes.size() == 2);
  const auto full = load_config(sources("longterm", {"profile=full"}));
  CHECK(full.horizon == 100.0);
  CHECK(full.num_paths == 100);
  CHECK(full.tau_ref == 1e-5);
}

TEST_CASE("configuration errors name the key") {
  auto key_of = [](const ConfigSources& s) {
    try {
      load_config(s);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  CHECK(key_of(sources("longterm", {"tau=0.01", "tau_ref=0.003"})) == "tau_ref");
  CHECK(key_of(sources("longterm", {"grid.K=100"})) == "grid.K");
  CHECK(key_of(sources("longterm", {"noise.colour=red"})) == "noise.colour");
  CHECK(key_of(sources("longterm", {"M=0"})) == "M");
  CHECK(key_of(sources("warp-drive")) == "experiment");
  CHECK(key_of(sources("converge", {"equation.mu=1"})) == "reference");
  const auto dir = scratch_dir("errors");
  auto s = sources("longterm");
  s.config_file = write_file(dir / "bad.json", R"({"noise": {"epsilon": 0.1, "sigma_x": 2}})");
  CHECK(key_of(s) == "noise.sigma_x");
  s.config_file = write_file(dir / "broken.json", "{ not json");
  CHECK(key_of(s) == "--config");
}

TEST_CASE("precedence: defaults, file, environment, flags") {
  const auto dir = scratch_dir("precedence");
  auto s = sources("longterm", {"noise.epsilon=0.2"});
  s.config_file = write_file(dir / "cfg.json", R"({"noise": {"epsilon": 0.05}, "output": {"dir": "from_file"}})");
  auto cfg = load_config(s);
  CHECK(cfg.epsilon == 0.2);
  REQUIRE(cfg.overrides.size() == 1);
  CHECK(cfg.overrides[0].key == "noise.epsilon");
  CHECK(cfg.overrides[0].file_value == "0.05");
  CHECK(cfg.overrides[0].flag_value == "0.2");
  CHECK(cfg.out_dir == "from_file");
  s.env_out_dir = "from_env";
  CHECK(load_config(s).out_dir == "from_env");
  s.out_dir = "from_flag";
  CHECK(load_config(s).out_dir == "from_flag");
  s.seed = 5;
  s.workers = 3;
  cfg = load_config(s);
  CHECK(cfg.master_seed == 5);
  CHECK(cfg.workers == 3);
}

TEST_CASE("initial data") {
  const auto dir = scratch_dir("initial");
  auto cfg = load_config(sources("longterm", {"grid.K=16", "initial_data.kind=\"single-mode\"",
                                              "initial_data.c=[0.5,-0.5]", "initial_data.l=3"}));
  const auto u = make_initial_state(cfg);
  CHECK(u.coeff(3) == Complex{0.5, -0.5});
  write_file(dir / "u0.txt", "# k,re,im\n0,1.5,0\n-2,0.25,0.5\n");
  cfg = load_config(sources("longterm", {"grid.K=16", "initial_data.kind=file",
                                         "initial_data.file=\"" + (dir / "u0.txt").string() + "\""}));
  const auto f = make_initial_state(cfg);
  CHECK(f.coeff(0) == Complex{1.5, 0.0});
  CHECK(f.coeff(-2) == Complex{0.25, 0.5});
  CHECK(f.coeff(1) == Complex{0.0, 0.0});
}

TEST_CASE("csv writers") {
  const auto dir = scratch_dir("csv");
  ErrorCurve curve;
  curve.scheme = SchemeKind::kSli1;
  ErrorRecord r;
  r.time = 0.5;
  r.error_sq = 0.1;
  r.num_paths_used = 4;
  curve.points.push_back(r);
  emit_longterm_csv(curve, dir / "one.csv");
  const auto l = lines(dir / "one.csv");
  REQUIRE(l.size() == 2);
  CHECK(l[0] == "scheme,t,error_sq,std_error,M");
  CHECK(l[1] == "SLI1,0.5,0.10000000000000001,0,4");
  curve.points.clear();
  CHECK_THROWS(emit_longterm_csv(curve, dir / "empty.csv"));
  CHECK_THROWS(emit_csv({"a"}, {}, dir / "empty.csv"));
}

TEST_CASE("converge run end to end") {
  const auto dir = scratch_dir("converge");
  auto s = sources("converge", {"tau_list=[0.125,0.0625,0.03125,0.015625]", "tau_ref=0.015625", "M=8",
                                "grid.K=16"});
  s.out_dir = dir;
  const auto cfg = load_config(s);
  std::ostringstream log;
  const auto out = run_experiment(cfg, log);
  REQUIRE(out.exit_code == 0);
  const auto l = lines(dir / "converge.csv");
  REQUIRE(l.size() == 6);
  CHECK(l[0] == "scheme,tau,sigma,p,M,error,error_sq,std_error,slope_running");
  CHECK(l[5].rfind("SNRLI1,fit,", 0) == 0);
  const std::string first = slurp(dir / "converge.csv");
  CHECK(run_experiment(cfg, log).exit_code == 0);
  CHECK(slurp(dir / "converge.csv") == first);

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["outputs"][0]["file"] == "converge.csv");
  CHECK(manifest["outputs"][0]["fnv1a64"] == file_checksum(dir / "converge.csv"));
  std::vector<std::string> keys;
  for (const auto& [k, v] : manifest.items()) keys.push_back(k);
  CHECK(std::is_sorted(keys.begin(), keys.end()));
}

TEST_CASE("longterm run writes matching time grids and records overrides") {
  const auto dir = scratch_dir("longterm");
  auto s = sources("longterm", {"grid.K=16", "T=0.2", "tau_ref=0.005", "M=4", "checkpoint_stride=5",
                                "flags.emit_svg=true", "master_seed=11"});
  s.config_file = write_file(dir / "cfg.json", R"({"master_seed": 10})");
  s.out_dir = dir / "out";
  std::ostringstream log;
  const auto out = run_experiment(load_config(s), log);
  REQUIRE(out.exit_code == 0);
  const auto a = lines(dir / "out" / "longterm_SNRLI1.csv");
  const auto b = lines(dir / "out" / "longterm_SLI1.csv");
  REQUIRE(a.size() == b.size());
  CHECK(a.size() == 6);
  auto second_field = [](const std::string& row) {
    const auto start = row.find(',') + 1;
    return row.substr(start, row.find(',', start) - start);
  };
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(second_field(a[i]) == second_field(b[i]));
  CHECK(fs::exists(dir / "out" / "longterm.svg"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["overrides"][0]["key"] == "master_seed");
  CHECK(manifest["overrides"][0]["file"] == "10");
  CHECK(manifest["overrides"][0]["flag"] == "11");
  CHECK(manifest["config"]["master_seed"] == 11);
  CHECK(log.str().find("overrides") != std::string::npos);
}

TEST_CASE("divergence yields a structured error") {
  const auto dir = scratch_dir("diverge");
  auto s = sources("longterm", {"grid.K=16", "T=0.5", "tau_ref=0.005", "M=2", "initial_data.scale=3000",
                                "equation.mu=1", "schemes=[\"SLI1\"]"});
  s.out_dir = dir;
  std::ostringstream log;
  const auto out = run_experiment(load_config(s), log);
  CHECK(out.exit_code == 3);
  const auto report = nlohmann::json::parse(out.report);
  CHECK(report["error"] == "divergence");
  CHECK(nlohmann::json::parse(slurp(dir / "manifest.json"))["status"] == "diverged");
}

TEST_CASE("selftest and decomposition experiments") {
  for (const auto& rows = run_selftest(); const auto& r : rows) {
    INFO(r.name << " " << r.detail);
    CHECK(r.passed);
  }
  const auto dir = scratch_dir("decomposition");
  auto s = sources("decomposition", {"decomposition.cases=2", "decomposition.substeps=64"});
  s.out_dir = dir;
  std::ostringstream log;
  CHECK(run_experiment(load_config(s), log).exit_code == 0);
  CHECK(lines(dir / "decomposition.csv").size() == 3);
}
