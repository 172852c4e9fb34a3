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
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "snlse/integrators.hpp"
#include "snlse/noise.hpp"
#include "snlse/spectral.hpp"

namespace snlse {

/// Error norm and Monte Carlo description shared by the experiments.
struct ErrorConfig {
  double sigma = 1.0;   // Sobolev index of the error norm
  int p_moment = 1;     // error measured in L^{2p}(Omega, H^sigma)
  int num_paths = 1;    // M
  double epsilon = 1.0; // small-data parameter, mu = eps^2, alpha = eps^{q-1}
  double q_exponent = 3.5;
  double gamma = 1.0;   // initial data in H^{sigma+gamma}
  double nu = 2.0;      // Q^{1/2} in L_2^{sigma+nu}

  void validate() const;
};

/// min(1/2, (nu-1)/2, gamma): the guaranteed strong order.
double predicted_strong_order(const ErrorConfig& config) noexcept;

/// Everything a coupled Monte Carlo run needs besides the schemes under test.
struct MonteCarloSetup {
  SpectralState initial;
  QWienerSpec noise;  // amplitude is alpha
  double mu = 0.0;
  Aliasing aliasing = Aliasing::kCollocation;
  double tau_ref = 1e-4;  // fine step; the reference runs at this step
  SchemeKind reference = SchemeKind::kSnrli1;
  ErrorConfig error;
  std::uint64_t master_seed = 0;
  int workers = 1;
  bool allow_diverged = false;
};

struct ErrorRecord {
  SchemeKind scheme = SchemeKind::kSnrli1;
  double tau = 0.0;
  double time = 0.0;
  double error_value = 0.0;  // (E ||e||_sigma^{2p})^{1/(2p)}
  double error_sq = 0.0;     // E ||e||_sigma^2
  double std_error = 0.0;    // jackknife standard error of error_value (or error_sq for curves)
  int num_paths_used = 0;
};

/// Raised by the Monte Carlo drivers when paths diverge and exclusion is off.
class RunError : public std::runtime_error {
 public:
  RunError(const std::string& what, std::vector<std::uint32_t> diverged)
      : std::runtime_error(what), diverged_(std::move(diverged)) {}
  const std::vector<std::uint32_t>& diverged_paths() const noexcept { return diverged_; }

 private:
  std::vector<std::uint32_t> diverged_;
};

/// One scheme at one step size inside a coupled run.
struct LaneSpec {
  SchemeKind scheme = SchemeKind::kSnrli1;
  double tau = 0.0;
  std::int64_t checkpoint_stride = 1;  // in coarse steps
};

/// Per-lane output of a coupled run, rows indexed by (used) path in path order.
struct LaneResult {
  LaneSpec spec;
  std::int64_t coarsening = 1;
  std::vector<double> times;                     // checkpoint times, first is 0
  std::vector<std::vector<double>> error_norms;  // ||u_ref - u||_sigma
  std::vector<std::vector<double>> state_norms;  // ||u||_sigma
};

struct CoupledResult {
  std::vector<LaneResult> lanes;
  std::vector<std::uint32_t> diverged_paths;
  int num_paths_used = 0;
};

/// Runs the reference at tau_ref and every lane on the same Brownian path for
/// each of the M paths, each path walked once at the fine step. Paths run on
/// `setup.workers` threads; results are stored by path index, so every
/// statistic downstream is independent of the worker count.
CoupledResult run_coupled(const MonteCarloSetup& setup, std::span<const LaneSpec> lanes,
                          double horizon);

/// Max over checkpoints t_n of (M^-1 sum_m ||u_ref(t_n) - u^n||_sigma^{2p})^{1/(2p)}
/// for each tau, with the jackknife standard error at the maximising checkpoint.
std::vector<ErrorRecord> strong_error(const MonteCarloSetup& setup, SchemeKind scheme,
                                      std::span<const double> taus, double horizon);

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares line through (log tau, log error); needs >= 3 distinct taus.
OrderFit order_fit(std::span<const ErrorRecord> records);
/// Least-squares line through (log x, log y); needs >= 2 points with distinct x.
OrderFit loglog_fit(std::span<const double> xs, std::span<const double> ys);

struct ErrorCurve {
  SchemeKind scheme = SchemeKind::kSnrli1;
  std::vector<ErrorRecord> points;  // one per checkpoint, t = 0 first
};

/// Squared L^2(Omega, H^sigma) error against the coupled reference over time,
/// one series per scheme on a shared checkpoint grid.
std::vector<ErrorCurve> longterm_error_curve(const MonteCarloSetup& setup,
                                             std::span<const SchemeKind> schemes, double tau,
                                             double horizon, std::int64_t checkpoint_stride);

/// Curves from an already computed coupled run (one lane per curve).
std::vector<ErrorCurve> error_curves(const CoupledResult& result, int p_moment);

enum class HorizonMode { kFixedT, kScaledTEps };

struct EpsilonScalingRow {
  double epsilon = 0.0;
  double horizon = 0.0;
  ErrorRecord record;
};

struct EpsilonScalingResult {
  std::vector<EpsilonScalingRow> rows;
  double fitted_exponent = 0.0;  // slope of log error vs log epsilon; NaN without two distinct epsilons
};

/// For each epsilon: mu = eps^2, alpha = eps^{q-1}, horizon T or T/eps^2, and
/// the L^{2p}(Omega, H^sigma) SNRLI1 error at the horizon. `base.mu` and the
/// noise amplitude are overwritten per epsilon.
EpsilonScalingResult epsilon_scaling_study(const MonteCarloSetup& base,
                                           std::span<const double> epsilons, double tau,
                                           double horizon, HorizonMode mode);

struct MomentSeries {
  std::vector<double> values;  // E[ sup_{s <= t} ||w(s)||_sigma^{2p} ]
  bool growth_warning = false;
};

/// Running empirical moment over paths; `norms[m][c]` is ||w||_sigma of path m
/// at checkpoint c. Warns when the final value exceeds `growth_factor` times
/// the initial one.
MomentSeries moment_monitor(const std::vector<std::vector<double>>& norms, int p_moment,
                            double growth_factor = 10.0);
MomentSeries moment_monitor(std::span<const Trajectory> trajectories, SobolevIndex sigma,
                            int p_moment, double growth_factor = 10.0);

/// Runs fn(m) for m in [0, count) on up to `workers` threads. Exceptions are
/// rethrown after all workers finish, lowest index first.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

}  // namespace snlse
