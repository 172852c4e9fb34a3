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

#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>

#include "json.hpp"
#include "snlse/diagnostics.hpp"
#include "snlse/harness.hpp"
#include "snlse/philox.hpp"

#ifndef SNLSE_VERSION
#define SNLSE_VERSION "0.0.0"
#endif

namespace snlse::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const json& manifest, const fs::path& path) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << manifest.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<fs::path> run_converge(const RunConfig& config, json& manifest, std::ostream& log) {
  const auto setup = make_setup(config);
  std::vector<ErrorRecord> records;
  std::vector<PlotSeries> plots;
  json fits = json::object();
  for (auto scheme : config.schemes) {
    const auto recs = strong_error(setup, scheme, config.tau_list, config.horizon);
    const auto fit = order_fit(recs);
    log << std::string(to_string(scheme)) << ": fitted order " << format_double(fit.slope) << " (r^2 "
        << format_double(fit.r_squared) << ")\n";
    fits[std::string(to_string(scheme))] = {{"slope", fit.slope}, {"r_squared", fit.r_squared}};
    PlotSeries s{std::string(to_string(scheme)), {}, {}};
    for (const auto& r : recs) {
      s.xs.push_back(r.tau);
      s.ys.push_back(r.error_value);
    }
    plots.push_back(std::move(s));
    records.insert(records.end(), recs.begin(), recs.end());
  }
  manifest["results"]["fitted_order"] = fits;
  std::vector<fs::path> outputs{config.out_dir / "converge.csv"};
  emit_converge_csv(records, config, outputs.back());
  if (config.emit_svg) {
    outputs.push_back(config.out_dir / "converge.svg");
    emit_svg(plots, "strong error vs step size", "tau", "error", true, true, outputs.back());
  }
  return outputs;
}

std::vector<fs::path> run_longterm(const RunConfig& config, json& manifest, std::ostream& log) {
  const auto setup = make_setup(config);
  std::vector<LaneSpec> lanes;
  for (auto s : config.schemes) lanes.push_back({s, config.tau, config.checkpoint_stride});
  const auto result = run_coupled(setup, lanes, config.horizon);
  const auto curves = error_curves(result, config.p_moment);
  manifest["results"]["diverged_paths"] = result.diverged_paths;
  manifest["results"]["paths_used"] = result.num_paths_used;

  std::vector<fs::path> outputs;
  std::vector<PlotSeries> plots;
  for (const auto& curve : curves) {
    outputs.push_back(config.out_dir / ("longterm_" + std::string(to_string(curve.scheme)) + ".csv"));
    emit_longterm_csv(curve, outputs.back());
    PlotSeries s{std::string(to_string(curve.scheme)), {}, {}};
    for (const auto& pt : curve.points) {
      s.xs.push_back(pt.time);
      s.ys.push_back(pt.error_sq);
    }
    plots.push_back(std::move(s));
    log << std::string(to_string(curve.scheme)) << ": final squared error " << format_double(curve.points.back().error_sq)
        << "\n";
  }
  json moments = json::object();
  for (const auto& lane : result.lanes) {
    const auto series = moment_monitor(lane.state_norms, config.p_moment);
    moments[std::string(to_string(lane.spec.scheme))] = {{"final", series.values.back()},
                                            {"initial", series.values.front()},
                                            {"growth_warning", series.growth_warning}};
    if (series.growth_warning) {
      log << "warning: " << std::string(to_string(lane.spec.scheme)) << " moment grew more than tenfold\n";
    }
  }
  manifest["results"]["moment_monitor"] = moments;
  if (config.emit_svg) {
    outputs.push_back(config.out_dir / "longterm.svg");
    emit_svg(plots, "squared error over time", "t", "error_sq", false, true, outputs.back());
  }
  return outputs;
}

std::vector<fs::path> run_eps(const RunConfig& config, json& manifest, std::ostream& log) {
  const auto setup = make_setup(config);
  const auto result =
      epsilon_scaling_study(setup, config.epsilon_list, config.tau, config.horizon, config.horizon_mode);
  log << "fitted epsilon exponent " << format_double(result.fitted_exponent) << " (q = " << format_double(config.q)
      << ")\n";
  manifest["results"]["fitted_exponent"] = result.fitted_exponent;
  std::vector<fs::path> outputs{config.out_dir / "eps_scaling.csv"};
  emit_eps_csv(result, config.q, outputs.back());
  if (config.emit_svg) {
    PlotSeries s{"SNRLI1", {}, {}};
    for (const auto& r : result.rows) {
      s.xs.push_back(r.epsilon);
      s.ys.push_back(r.record.error_value);
    }
    outputs.push_back(config.out_dir / "eps_scaling.svg");
    emit_svg({s}, "error vs epsilon", "epsilon", "error", true, true, outputs.back());
  }
  return outputs;
}

std::vector<fs::path> run_decomposition(const RunConfig& config, json& manifest, std::ostream& log) {
  const auto& dec = config.decomposition;
  const SpectralGrid grid(dec.num_modes);
  const auto key = Philox4x32::key_from_seed(config.master_seed);
  std::vector<std::vector<std::string>> rows;
  double worst = 0.0;
  for (int c = 0; c < dec.cases; ++c) {
    SpectralState v(grid);
    for (int j = 0; j < dec.num_modes; ++j) {
      const int k = grid.mode(j);
      const auto z = keyed_complex_normal({static_cast<std::uint32_t>(c), 7u, static_cast<std::uint32_t>(j), 0u},
                                          key);
      v.coeffs[j] = 0.3 * z / std::pow(1.0 + std::abs(k), 3.0);
    }
    v.coeff(-dec.num_modes / 2) = 0.0;
    const auto rep = local_error_decomposition_check(v, dec.t_n, dec.tau, dec.mu, dec.substeps);
    const double rel = rep.local_error > 0 ? rep.residual / rep.local_error : rep.residual;
    worst = std::max(worst, rel);
    rows.push_back({std::to_string(c), format_double(dec.tau), std::to_string(dec.substeps),
                    format_double(rep.residual), format_double(rep.local_error), format_double(rep.w_term),
                    format_double(rep.r_term)});
  }
  log << "worst relative residual " << format_double(worst) << "\n";
  manifest["results"]["worst_relative_residual"] = worst;
  std::vector<fs::path> outputs{config.out_dir / "decomposition.csv"};
  emit_csv({"case", "tau", "substeps", "residual", "local_error", "w_term", "r_term"}, rows, outputs.back());
  return outputs;
}

}  // namespace

RunOutcome run_experiment(const RunConfig& config, std::ostream& log) {
  RunOutcome outcome;
  const fs::path manifest_path = config.out_dir / "manifest.json";
  json manifest;
  manifest["tool"] = {{"name", "snlse-lab"}, {"version", SNLSE_VERSION}};
  manifest["experiment"] = to_string(config.experiment);
  manifest["profile"] = config.profile;
  manifest["master_seed"] = config.master_seed;
  manifest["workers"] = config.workers;
  manifest["config"] = json::parse(config.resolved_json);
  manifest["overrides"] = json::array();
  for (const auto& o : config.overrides) {
    manifest["overrides"].push_back({{"key", o.key}, {"file", o.file_value}, {"flag", o.flag_value}});
  }
  manifest["started"] = utc_now();
  manifest["status"] = "running";
  manifest["results"] = json::object();
  manifest["outputs"] = json::array();

  try {
    fs::create_directories(config.out_dir);
    write_manifest(manifest, manifest_path);
  } catch (const std::exception& e) {
    outcome.exit_code = 4;
    outcome.report = std::string("error: ") + e.what();
    return outcome;
  }
  for (const auto& o : config.overrides) {
    log << "note: " << o.key << " from the command line (" << o.flag_value << ") overrides the file value ("
        << o.file_value << ")\n";
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<fs::path> outputs;
  try {
    switch (config.experiment) {
      case ExperimentKind::kConverge: outputs = run_converge(config, manifest, log); break;
      case ExperimentKind::kLongterm: outputs = run_longterm(config, manifest, log); break;
      case ExperimentKind::kEpsScaling: outputs = run_eps(config, manifest, log); break;
      case ExperimentKind::kDecomposition: outputs = run_decomposition(config, manifest, log); break;
      case ExperimentKind::kSelftest: {
        const auto rows = run_selftest();
        std::vector<std::vector<std::string>> csv;
        bool ok = true;
        for (const auto& r : rows) {
          log << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << "\n";
          csv.push_back({r.name, r.passed ? "pass" : "fail", r.detail});
          ok = ok && r.passed;
        }
        outputs.push_back(config.out_dir / "selftest.csv");
        emit_csv({"check", "result", "detail"}, csv, outputs.back());
        if (!ok) {
          outcome.exit_code = 1;
          manifest["status"] = "failed";
        }
        break;
      }
    }
    if (manifest["status"] == "running") manifest["status"] = "ok";
  } catch (const RunError& e) {
    outcome.exit_code = 3;
    manifest["status"] = "diverged";
    manifest["error"] = {{"kind", "divergence"}, {"message", e.what()}, {"paths", e.diverged_paths()}};
    outcome.report = json({{"error", "divergence"}, {"message", e.what()}, {"paths", e.diverged_paths()}}).dump();
  } catch (const std::exception& e) {
    outcome.exit_code = 4;
    manifest["status"] = "error";
    manifest["error"] = {{"kind", "runtime"}, {"message", e.what()}};
    outcome.report = json({{"error", "runtime"}, {"message", e.what()}}).dump();
  }
  manifest["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["finished"] = utc_now();

  try {
    for (const auto& p : outputs) {
      manifest["outputs"].push_back({{"file", p.filename().string()}, {"fnv1a64", file_checksum(p)}});
    }
    write_manifest(manifest, manifest_path);
  } catch (const std::exception& e) {
    outcome.exit_code = 4;
    outcome.report = std::string("error: ") + e.what();
    return outcome;
  }
  outputs.push_back(manifest_path);
  outcome.outputs = std::move(outputs);
  if (outcome.report.empty()) outcome.report = "status " + manifest["status"].get<std::string>();
  return outcome;
}

}  // namespace snlse::harness
