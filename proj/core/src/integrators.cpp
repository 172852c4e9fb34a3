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

#include "snlse/integrators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "snlse/errors.hpp"

namespace snlse {

namespace {

constexpr Complex kI{0.0, 1.0};

double as_double(int k) { return static_cast<double>(k); }

std::int64_t coarsening_for(const BrownianPath& path, double tau) {
  const double ratio = tau / path.fine_step();
  const auto r = static_cast<std::int64_t>(std::llround(ratio));
  if (r < 1 || std::abs(ratio - static_cast<double>(r)) > 1e-9 * ratio) {
    throw InvalidInput("step " + std::to_string(tau) + " is not an integer multiple of the path's fine step " +
                       std::to_string(path.fine_step()));
  }
  return r;
}

}  // namespace

std::string_view to_string(SchemeKind kind) noexcept {
  switch (kind) {
    case SchemeKind::kSnrli1: return "SNRLI1";
    case SchemeKind::kSli1: return "SLI1";
    case SchemeKind::kExactLinear: return "EXACT_LINEAR";
  }
  return "?";
}

SchemeKind parse_scheme(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "SNRLI1") return SchemeKind::kSnrli1;
  if (upper == "SLI1") return SchemeKind::kSli1;
  if (upper == "EXACT_LINEAR") return SchemeKind::kExactLinear;
  throw InvalidConfiguration("unknown scheme '" + std::string(name) +
                             "' (expected SNRLI1, SLI1 or EXACT_LINEAR)");
}

void SchemeParams::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidConfiguration("tau must be finite and > 0");
  if (!std::isfinite(mu)) throw InvalidConfiguration("mu must be finite");
  if (kind == SchemeKind::kExactLinear && mu != 0.0) {
    throw InvalidConfiguration("EXACT_LINEAR requires mu = 0");
  }
}

SpectralState g_term(const SpectralState& u, double tau, Aliasing aliasing) {
  const SpectralState ubar = conjugate_state(u);
  const SpectralState smoothed = phi1_operator_apply(ubar, Complex{0.0, -2.0 * tau});
  return pointwise_product(u, subtract_states(ubar, smoothed), aliasing);
}

Complex g_zero_mode(const SpectralState& u, double tau) {
  Complex sum{};
  for (std::size_t j = 0; j < u.coeffs.size(); ++j) {
    const double l = u.grid.mode(j);
    sum += std::norm(u.coeffs[j]) * (1.0 - phi1(Complex{0.0, 2.0 * tau * l * l}));
  }
  return sum;
}

SpectralState h_term(const SpectralState& u, double tau) {
  SpectralState out(u.grid, u.time);
  for (std::size_t j = 0; j < u.coeffs.size(); ++j) {
    const double k = u.grid.mode(j);
    out.coeffs[j] = (1.0 - phi1(Complex{0.0, 2.0 * k * k * tau})) * std::norm(u.coeffs[j]) * u.coeffs[j];
  }
  return out;
}

Stepper::Stepper(const SpectralGrid& grid, const SchemeParams& params)
    : grid_(grid), params_(params) {
  params_.validate();
  const std::size_t n = grid.size();
  free_phase_.resize(n);
  phi1_.resize(n);
  negated_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = grid.mode(j);
    free_phase_[j] = std::polar(1.0, -k * k * params_.tau);
    phi1_[j] = k == 0.0 ? Complex{1.0} : phi1(Complex{0.0, 2.0 * params_.tau * k * k});
    negated_[j] = grid.wrapped_index(-static_cast<long long>(grid.mode(j)));
  }
  conj_.resize(n);
  cubic_.resize(n);
  bracket_.resize(n);
}

void Stepper::advance(std::span<Complex> u, std::span<const Complex> forcing, double t_n) {
  const std::size_t n = grid_.size();
  if (u.size() != n || forcing.size() != n) throw InvalidInput("stepper: length mismatch");
  const double tau = params_.tau;
  const double mu = params_.mu;
  const double alpha = params_.alpha();

  if (params_.kind == SchemeKind::kExactLinear) {
    const double t_next = t_n + tau;
    for (std::size_t j = 0; j < n; ++j) {
      const double k = grid_.mode(j);
      u[j] = free_phase_[j] * u[j] - kI * alpha * std::polar(1.0, -k * k * t_next) * forcing[j];
    }
    return;
  }

  // bracket = u - i tau mu u^2 (phi_1(-2 i tau d_xx) conj(u)) - i alpha dW
  for (std::size_t j = 0; j < n; ++j) conj_[j] = phi1_[j] * std::conj(u[negated_[j]]);
  detail::product3(grid_, u, u, conj_, params_.aliasing, cubic_, scratch_);
  const Complex nonlinear = -kI * tau * mu;
  const Complex noise = -kI * alpha;
  for (std::size_t j = 0; j < n; ++j) bracket_[j] = u[j] + nonlinear * cubic_[j] + noise * forcing[j];

  if (params_.kind == SchemeKind::kSli1) {
    for (std::size_t j = 0; j < n; ++j) u[j] = free_phase_[j] * bracket_[j];
    return;
  }

  Complex g0{};
  for (std::size_t j = 0; j < n; ++j) g0 += std::norm(u[j]) * (1.0 - phi1_[j]);
  const Complex zero_mode_coef = -2.0 * kI * mu * tau * g0;
  const Complex h_coef = kI * mu * tau;
  for (std::size_t j = 0; j < n; ++j) {
    const Complex su = free_phase_[j] * u[j];
    const Complex sh = free_phase_[j] * ((1.0 - phi1_[j]) * std::norm(u[j]) * u[j]);
    u[j] = free_phase_[j] * bracket_[j] + zero_mode_coef * su + h_coef * sh;
  }
}

void check_divergence(const SpectralGrid& grid, std::span<const Complex> u, std::int64_t step) {
  double sum = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (!std::isfinite(u[j].real()) || !std::isfinite(u[j].imag())) {
      throw DivergenceError(step, "non-finite coefficient at mode " + std::to_string(grid.mode(j)));
    }
    const double w = 1.0 + std::abs(grid.mode(j));
    sum += w * w * std::norm(u[j]);
  }
  if (!(std::sqrt(sum) <= kDivergenceBound)) {
    throw DivergenceError(step, "H^1 norm " + std::to_string(std::sqrt(sum)) + " exceeds bound");
  }
}

namespace {

SpectralState one_step(const SpectralState& u, const SpectralState& dw, SchemeParams params,
                       SchemeKind kind) {
  detail::require_same_grid(u.grid, dw.grid);
  params.kind = kind;
  Stepper stepper(u.grid, params);
  SpectralState out = u;
  stepper.advance(out.coeffs, dw.coeffs, u.time);
  out.time = u.time + params.tau;
  return out;
}

}  // namespace

SpectralState snrli1_step(const SpectralState& u, const SpectralState& dw,
                          const SchemeParams& params) {
  return one_step(u, dw, params, SchemeKind::kSnrli1);
}

SpectralState sli1_step(const SpectralState& u, const SpectralState& dw,
                        const SchemeParams& params) {
  return one_step(u, dw, params, SchemeKind::kSli1);
}

SpectralState snrli1_twisted_step(const SpectralState& v, double t_n, const SpectralState& dw,
                                  const SchemeParams& params) {
  detail::require_same_grid(v.grid, dw.grid);
  params.validate();
  const double tau = params.tau;
  const double mu = params.mu;
  // S(-t_n) ( (S(t_n) v)^2 (phi_1(-2 i tau d_xx) S(-t_n) conj(v)) )
  const SpectralState sv = free_group_apply(v, t_n);
  const SpectralState smoothed =
      phi1_operator_apply(free_group_apply(conjugate_state(v), -t_n), Complex{0.0, -2.0 * tau});
  const SpectralState cubic =
      free_group_apply(cubic_product(sv, sv, smoothed, params.aliasing), -t_n);
  const SpectralState correction = subtract_states(
      add_states(cubic, scale_state(v, 2.0 * g_zero_mode(v, tau))), h_term(v, tau));
  SpectralState out = add_states(v, scale_state(correction, -kI * tau * mu));
  out = add_states(out, scale_state(free_group_apply(dw, -t_n), -kI * params.alpha()));
  out.time = t_n + tau;
  return out;
}

SpectralState exact_linear_step(const SpectralState& u, const BrownianPath& path,
                                std::int64_t n, const SchemeParams& params) {
  SchemeParams p = params;
  p.kind = SchemeKind::kExactLinear;
  p.validate();
  detail::require_same_grid(u.grid, path.grid());
  const std::int64_t r = coarsening_for(path, p.tau);
  const SpectralState conv = exact_convolution_sample(path, n, r);
  Stepper stepper(u.grid, p);
  SpectralState out = u;
  const double t_n = static_cast<double>(n) * p.tau;
  stepper.advance(out.coeffs, conv.coeffs, t_n);
  out.time = t_n + p.tau;
  return out;
}

Trajectory integrate(const SpectralState& initial, const BrownianPath& path,
                     const SchemeParams& params, std::int64_t num_steps, std::int64_t coarsening,
                     std::int64_t snapshot_stride) {
  params.validate();
  detail::require_same_grid(initial.grid, path.grid());
  if (num_steps < 0) throw InvalidInput("num_steps must be >= 0");
  if (snapshot_stride < 1) throw InvalidInput("snapshot stride must be >= 1");
  if (coarsening < 1 || std::abs(static_cast<double>(coarsening) * path.fine_step() - params.tau) >
                            1e-9 * params.tau) {
    throw InvalidInput("tau must equal coarsening * fine_step");
  }
  if (num_steps * coarsening > path.num_fine_steps()) {
    throw InvalidInput("path exhausted: " + std::to_string(num_steps) + " steps at coarsening " +
                       std::to_string(coarsening) + " need " +
                       std::to_string(num_steps * coarsening) + " fine steps, path has " +
                       std::to_string(path.num_fine_steps()));
  }

  Trajectory traj;
  traj.params = params;
  traj.master_seed = path.master_seed();
  traj.path_index = path.path_index();
  traj.coarsening = coarsening;
  traj.snapshot_stride = snapshot_stride;
  traj.snapshots.push_back(initial);

  const auto& grid = initial.grid;
  Stepper stepper(grid, params);
  CVector u = initial.coeffs;
  CVector fine(grid.size()), acc(grid.size()), forcing(grid.size());
  const double t0 = initial.time;
  for (std::int64_t n = 0; n < num_steps; ++n) {
    std::fill(acc.begin(), acc.end(), Complex{});
    for (std::int64_t s = n * coarsening; s < (n + 1) * coarsening; ++s) {
      path.fine_increments(s, fine);
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += fine[j];
    }
    // noise is aligned to path time, which starts at 0
    const double t_n = static_cast<double>(n) * params.tau;
    if (params.kind == SchemeKind::kExactLinear) {
      exact_convolution_from_aggregate(path, n, coarsening, acc, forcing);
    } else {
      scale_increments(path.mode_scales(), acc, forcing);
    }
    stepper.advance(u, forcing, t_n);
    check_divergence(grid, u, n + 1);
    if ((n + 1) % snapshot_stride == 0 || n + 1 == num_steps) {
      traj.snapshots.emplace_back(grid, u, t0 + static_cast<double>(n + 1) * params.tau);
    }
  }
  return traj;
}

}  // namespace snlse
