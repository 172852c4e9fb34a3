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

#include "snlse/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

#include "snlse/errors.hpp"

namespace snlse {

namespace {

std::int64_t commensurate(double big, double small, const char* what) {
  const double ratio = big / small;
  const auto r = static_cast<std::int64_t>(std::llround(ratio));
  if (r < 1 || std::abs(ratio - static_cast<double>(r)) > 1e-9 * ratio) {
    throw InvalidInput(std::string(what) + ": " + std::to_string(big) +
                       " is not an integer multiple of " + std::to_string(small));
  }
  return r;
}

double weighted_distance(std::span<const double> weights, std::span<const Complex> a,
                         std::span<const Complex> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += weights[j] * std::norm(a[j] - b[j]);
  return std::sqrt(sum);
}

double weighted_norm(std::span<const double> weights, std::span<const Complex> a) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += weights[j] * std::norm(a[j]);
  return std::sqrt(sum);
}

struct PathOutput {
  bool diverged = false;
  std::vector<std::vector<double>> error_norms;  // [lane][checkpoint]
  std::vector<std::vector<double>> state_norms;
};

// (mean x)^{1/(2p)} and its jackknife standard error.
std::pair<double, double> moment_root_with_jackknife(std::span<const double> x, int p) {
  const double m = static_cast<double>(x.size());
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  const double inv = 1.0 / (2.0 * p);
  const double estimate = std::pow(total / m, inv);
  if (x.size() < 2) return {estimate, 0.0};
  std::vector<double> loo(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    loo[i] = std::pow(std::max(0.0, (total - x[i]) / (m - 1.0)), inv);
  }
  const double mean_loo = std::accumulate(loo.begin(), loo.end(), 0.0) / m;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  return {estimate, std::sqrt((m - 1.0) / m * ss)};
}

std::pair<double, double> mean_with_std_error(std::span<const double> x) {
  const double m = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / m;
  if (x.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (m - 1.0) / m)};
}

}  // namespace

void ErrorConfig::validate() const {
  if (!std::isfinite(sigma) || sigma < 0.0) throw InvalidConfiguration("sigma must be >= 0");
  if (p_moment < 1) throw InvalidConfiguration("p must be >= 1");
  if (num_paths < 1) throw InvalidConfiguration("M must be >= 1");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidConfiguration("epsilon must lie in (0, 1]");
  if (!std::isfinite(q_exponent)) throw InvalidConfiguration("q must be finite");
}

double predicted_strong_order(const ErrorConfig& config) noexcept {
  return std::min({0.5, (config.nu - 1.0) / 2.0, config.gamma});
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(workers, 1, count);
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

CoupledResult run_coupled(const MonteCarloSetup& setup, std::span<const LaneSpec> lanes,
                          double horizon) {
  setup.error.validate();
  const auto& grid = setup.initial.grid;
  if (!(setup.tau_ref > 0.0)) throw InvalidInput("tau_ref must be > 0");
  const std::int64_t num_fine = commensurate(horizon, setup.tau_ref, "horizon vs tau_ref");

  SchemeParams ref_params{setup.mu, setup.tau_ref, setup.noise, setup.reference, setup.aliasing};
  ref_params.validate();

  std::vector<SchemeParams> lane_params;
  std::vector<std::int64_t> coarsening;
  for (const auto& lane : lanes) {
    const std::int64_t r = commensurate(lane.tau, setup.tau_ref, "tau vs tau_ref");
    commensurate(horizon, lane.tau, "horizon vs tau");
    if (lane.checkpoint_stride < 1) throw InvalidInput("checkpoint stride must be >= 1");
    SchemeParams p{setup.mu, lane.tau, setup.noise, lane.scheme, setup.aliasing};
    p.validate();
    lane_params.push_back(p);
    coarsening.push_back(r);
  }

  std::vector<double> weights(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    weights[j] = std::pow(1.0 + std::abs(grid.mode(j)), 2.0 * setup.error.sigma);
  }

  const int num_paths = setup.error.num_paths;
  std::vector<PathOutput> outputs(static_cast<std::size_t>(num_paths));

  parallel_for(num_paths, setup.workers, [&](int m) {
    const BrownianPath path(setup.noise, grid, setup.master_seed, static_cast<std::uint32_t>(m),
                            setup.tau_ref, num_fine);
    const std::size_t n = grid.size();
    Stepper ref_stepper(grid, ref_params);
    std::vector<Stepper> steppers;
    for (const auto& p : lane_params) steppers.emplace_back(grid, p);

    CVector u_ref = setup.initial.coeffs;
    std::vector<CVector> u(lanes.size(), setup.initial.coeffs);
    std::vector<CVector> acc(lanes.size(), CVector(n));
    CVector fine(n), forcing(n);

    PathOutput out;
    out.error_norms.resize(lanes.size());
    out.state_norms.resize(lanes.size());
    for (std::size_t l = 0; l < lanes.size(); ++l) {
      out.error_norms[l].push_back(0.0);
      out.state_norms[l].push_back(weighted_norm(weights, u[l]));
    }

    try {
      for (std::int64_t s = 0; s < num_fine; ++s) {
        path.fine_increments(s, fine);
        if (setup.reference == SchemeKind::kExactLinear) {
          exact_convolution_from_aggregate(path, s, 1, fine, forcing);
        } else {
          scale_increments(path.mode_scales(), fine, forcing);
        }
        ref_stepper.advance(u_ref, forcing, static_cast<double>(s) * setup.tau_ref);
        check_divergence(grid, u_ref, s + 1);

        for (std::size_t l = 0; l < lanes.size(); ++l) {
          auto& a = acc[l];
          for (std::size_t j = 0; j < n; ++j) a[j] += fine[j];
          const std::int64_t r = coarsening[l];
          if ((s + 1) % r != 0) continue;
          const std::int64_t step = (s + 1) / r - 1;
          if (lanes[l].scheme == SchemeKind::kExactLinear) {
            exact_convolution_from_aggregate(path, step, r, a, forcing);
          } else {
            scale_increments(path.mode_scales(), a, forcing);
          }
          std::fill(a.begin(), a.end(), Complex{});
          steppers[l].advance(u[l], forcing, static_cast<double>(step) * lanes[l].tau);
          check_divergence(grid, u[l], step + 1);
          if ((step + 1) % lanes[l].checkpoint_stride == 0) {
            out.error_norms[l].push_back(weighted_distance(weights, u_ref, u[l]));
            out.state_norms[l].push_back(weighted_norm(weights, u[l]));
          }
        }
      }
    } catch (const DivergenceError&) {
      out.diverged = true;
    }
    outputs[static_cast<std::size_t>(m)] = std::move(out);
  });

  CoupledResult result;
  for (std::size_t l = 0; l < lanes.size(); ++l) {
    LaneResult lane;
    lane.spec = lanes[l];
    lane.coarsening = coarsening[l];
    const std::int64_t steps = num_fine / coarsening[l];
    lane.times.push_back(0.0);
    for (std::int64_t c = lanes[l].checkpoint_stride; c <= steps; c += lanes[l].checkpoint_stride) {
      lane.times.push_back(static_cast<double>(c) * lanes[l].tau);
    }
    result.lanes.push_back(std::move(lane));
  }
  for (int m = 0; m < num_paths; ++m) {
    auto& out = outputs[static_cast<std::size_t>(m)];
    if (out.diverged) {
      result.diverged_paths.push_back(static_cast<std::uint32_t>(m));
      continue;
    }
    ++result.num_paths_used;
    for (std::size_t l = 0; l < lanes.size(); ++l) {
      result.lanes[l].error_norms.push_back(std::move(out.error_norms[l]));
      result.lanes[l].state_norms.push_back(std::move(out.state_norms[l]));
    }
  }
  if (!result.diverged_paths.empty() && !setup.allow_diverged) {
    std::string ids;
    for (auto id : result.diverged_paths) ids += (ids.empty() ? "" : ",") + std::to_string(id);
    throw RunError(std::to_string(result.diverged_paths.size()) + " path(s) diverged: " + ids,
                   result.diverged_paths);
  }
  if (result.num_paths_used == 0) throw RunError("every path diverged", result.diverged_paths);
  return result;
}

std::vector<ErrorRecord> strong_error(const MonteCarloSetup& setup, SchemeKind scheme,
                                      std::span<const double> taus, double horizon) {
  std::vector<LaneSpec> lanes;
  for (double tau : taus) lanes.push_back({scheme, tau, 1});
  const CoupledResult result = run_coupled(setup, lanes, horizon);
  const int p = setup.error.p_moment;

  std::vector<ErrorRecord> records;
  for (const auto& lane : result.lanes) {
    const std::size_t checkpoints = lane.times.size();
    std::vector<double> x(lane.error_norms.size());
    ErrorRecord best;
    best.scheme = scheme;
    best.tau = lane.spec.tau;
    best.num_paths_used = result.num_paths_used;
    for (std::size_t c = 0; c < checkpoints; ++c) {
      for (std::size_t m = 0; m < x.size(); ++m) x[m] = std::pow(lane.error_norms[m][c], 2.0 * p);
      const auto [value, se] = moment_root_with_jackknife(x, p);
      if (c == 0 || value > best.error_value) {
        best.error_value = value;
        best.std_error = se;
        best.time = lane.times[c];
        double sq = 0.0;
        for (std::size_t m = 0; m < x.size(); ++m) sq += lane.error_norms[m][c] * lane.error_norms[m][c];
        best.error_sq = sq / static_cast<double>(x.size());
      }
    }
    records.push_back(best);
  }
  return records;
}

OrderFit loglog_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw InvalidInput("fit needs >= 2 points");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw InvalidInput("log-log fit needs positive data");
    const double lx = std::log(xs[i]);
    const double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double vxx = sxx - sx * sx / n;
  if (!(vxx > 0.0)) throw InvalidInput("fit needs distinct abscissae");
  const double vxy = sxy - sx * sy / n;
  const double vyy = syy - sy * sy / n;
  OrderFit fit;
  fit.slope = vxy / vxx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r_squared = vyy > 0.0 ? vxy * vxy / (vxx * vyy) : 1.0;
  return fit;
}

OrderFit order_fit(std::span<const ErrorRecord> records) {
  if (records.size() < 3) throw InvalidInput("order_fit needs at least 3 records");
  std::vector<double> taus, errors;
  for (const auto& r : records) {
    if (!(r.error_value > 0.0)) throw InvalidInput("order_fit needs positive errors");
    taus.push_back(r.tau);
    errors.push_back(r.error_value);
  }
  std::vector<double> sorted = taus;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidInput("order_fit needs distinct step sizes");
  }
  return loglog_fit(taus, errors);
}

std::vector<ErrorCurve> error_curves(const CoupledResult& result, int p_moment) {
  std::vector<ErrorCurve> curves;
  for (const auto& lane : result.lanes) {
    ErrorCurve curve;
    curve.scheme = lane.spec.scheme;
    std::vector<double> sq(lane.error_norms.size()), pw(lane.error_norms.size());
    for (std::size_t c = 0; c < lane.times.size(); ++c) {
      for (std::size_t m = 0; m < sq.size(); ++m) {
        const double e = lane.error_norms[m][c];
        sq[m] = e * e;
        pw[m] = std::pow(e, 2.0 * p_moment);
      }
      ErrorRecord rec;
      rec.scheme = lane.spec.scheme;
      rec.tau = lane.spec.tau;
      rec.time = lane.times[c];
      const auto [mean_sq, se_sq] = mean_with_std_error(sq);
      rec.error_sq = mean_sq;
      rec.std_error = se_sq;
      rec.error_value = moment_root_with_jackknife(pw, p_moment).first;
      rec.num_paths_used = result.num_paths_used;
      curve.points.push_back(rec);
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

std::vector<ErrorCurve> longterm_error_curve(const MonteCarloSetup& setup,
                                             std::span<const SchemeKind> schemes, double tau,
                                             double horizon, std::int64_t checkpoint_stride) {
  std::vector<LaneSpec> lanes;
  for (auto s : schemes) lanes.push_back({s, tau, checkpoint_stride});
  return error_curves(run_coupled(setup, lanes, horizon), setup.error.p_moment);
}

EpsilonScalingResult epsilon_scaling_study(const MonteCarloSetup& base,
                                           std::span<const double> epsilons, double tau,
                                           double horizon, HorizonMode mode) {
  if (epsilons.empty()) throw InvalidInput("epsilon list is empty");
  if (!(base.error.q_exponent > 2.0)) throw InvalidConfiguration("epsilon scaling needs q > 2");
  EpsilonScalingResult result;
  std::vector<double> xs, ys;
  for (double eps : epsilons) {
    MonteCarloSetup setup = base;
    setup.error.epsilon = eps;
    setup.mu = eps * eps;
    setup.noise = base.noise.with_amplitude(std::pow(eps, base.error.q_exponent - 1.0));
    const double t_end = mode == HorizonMode::kFixedT ? horizon : horizon / (eps * eps);
    // snap the horizon onto the coarse grid
    const double steps = std::round(t_end / tau);
    const double snapped = steps * tau;
    const LaneSpec lane{SchemeKind::kSnrli1, tau, static_cast<std::int64_t>(steps)};
    const CoupledResult run = run_coupled(setup, std::span(&lane, 1), snapped);
    const ErrorCurve curve = error_curves(run, setup.error.p_moment).front();
    EpsilonScalingRow row;
    row.epsilon = eps;
    row.horizon = snapped;
    row.record = curve.points.back();
    result.rows.push_back(row);
    xs.push_back(eps);
    ys.push_back(row.record.error_value);
  }
  const bool distinct = std::any_of(xs.begin(), xs.end(), [&](double x) { return x != xs.front(); });
  const bool positive = std::all_of(ys.begin(), ys.end(), [](double y) { return y > 0.0; });
  result.fitted_exponent = distinct && positive ? loglog_fit(xs, ys).slope : std::nan("");
  return result;
}

MomentSeries moment_monitor(const std::vector<std::vector<double>>& norms, int p_moment,
                            double growth_factor) {
  MomentSeries series;
  if (norms.empty()) return series;
  const std::size_t checkpoints = norms.front().size();
  series.values.assign(checkpoints, 0.0);
  for (const auto& path : norms) {
    if (path.size() != checkpoints) throw InvalidInput("moment_monitor: ragged checkpoint grids");
    double running = 0.0;
    for (std::size_t c = 0; c < checkpoints; ++c) {
      running = std::max(running, std::pow(path[c], 2.0 * p_moment));
      series.values[c] += running;
    }
  }
  for (double& v : series.values) v /= static_cast<double>(norms.size());
  if (checkpoints > 0 && series.values.front() > 0.0) {
    series.growth_warning = series.values.back() > growth_factor * series.values.front();
  }
  return series;
}

MomentSeries moment_monitor(std::span<const Trajectory> trajectories, SobolevIndex sigma,
                            int p_moment, double growth_factor) {
  std::vector<std::vector<double>> norms;
  for (const auto& t : trajectories) {
    std::vector<double> row;
    for (const auto& s : t.snapshots) row.push_back(sobolev_norm(s, sigma));
    norms.push_back(std::move(row));
  }
  return moment_monitor(norms, p_moment, growth_factor);
}

}  // namespace snlse
