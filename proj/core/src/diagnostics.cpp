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

#include "snlse/diagnostics.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "snlse/errors.hpp"
#include "snlse/integrators.hpp"

namespace snlse {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_small_grid(const SpectralGrid& grid) {
  if (grid.num_modes() > kMaxTripleSumModes) {
    throw CostError("triple sums are O(K^3); K=" + std::to_string(grid.num_modes()) +
                    " exceeds the limit of " + std::to_string(kMaxTripleSumModes));
  }
}

// Twisted-variable node values of SNRLI1 with `substeps` steps over [t_n, t_n + tau].
std::vector<SpectralState> substep_nodes(const SpectralState& v, double t_n, double tau,
                                         double mu, int substeps) {
  const double h = tau / substeps;
  SchemeParams params{mu, h, QWienerSpec::none(), SchemeKind::kSnrli1, Aliasing::kPadded};
  Stepper stepper(v.grid, params);
  const CVector zero(v.grid.size());
  SpectralState u = free_group_apply(v, t_n);
  std::vector<SpectralState> nodes{v};
  for (int j = 0; j < substeps; ++j) {
    stepper.advance(u.coeffs, zero, t_n + j * h);
    SpectralState node = free_group_apply(u, -(t_n + (j + 1) * h));
    node.time = t_n + (j + 1) * h;
    nodes.push_back(std::move(node));
  }
  return nodes;
}

}  // namespace

SpectralState twisted_nonlinearity(const SpectralState& w, double t) {
  const SpectralState sw = free_group_apply(w, t);
  return free_group_apply(cubic_product(sw, sw, conjugate_state(sw), Aliasing::kPadded), -t);
}

SpectralState compute_R_term(const SpectralState& v, double t_n, double tau, double mu) {
  require_small_grid(v.grid);
  const auto& grid = v.grid;
  const int half = grid.num_modes() / 2;
  SpectralState out(grid, t_n);
  for (std::size_t j1 = 0; j1 < grid.size(); ++j1) {
    const long long l1 = grid.mode(j1);
    const Complex c1 = std::conj(v.coeffs[j1]);
    if (c1 == Complex{}) continue;
    const Complex first = tau * phi1(Complex{0.0, 2.0 * tau * static_cast<double>(l1 * l1)});
    for (std::size_t j2 = 0; j2 < grid.size(); ++j2) {
      const long long l2 = grid.mode(j2);
      const Complex c12 = c1 * v.coeffs[j2];
      if (c12 == Complex{}) continue;
      for (std::size_t j3 = 0; j3 < grid.size(); ++j3) {
        const long long l3 = grid.mode(j3);
        const long long l = -l1 + l2 + l3;
        if (l < -half || l >= half) continue;
        const long long phase = l * l + l1 * l1 - l2 * l2 - l3 * l3;
        if (phase == 0) continue;
        const double p = static_cast<double>(phase);
        const Complex second = tau * phi1(Complex{0.0, tau * p});
        out.coeffs[grid.index(static_cast<int>(l))] +=
            std::polar(1.0, t_n * p) * c12 * v.coeffs[j3] * (first - second);
      }
    }
  }
  return scale_state(out, -kI * mu);
}

DecompositionReport local_error_decomposition_check(const SpectralState& v, double t_n,
                                                    double tau, double mu, int substeps) {
  require_small_grid(v.grid);
  if (substeps < 1) throw InvalidInput("substeps must be >= 1");
  if (!(tau > 0.0)) throw InvalidInput("tau must be > 0");
  const SobolevIndex h1(1.0);

  const SchemeParams params{mu, tau, QWienerSpec::none(), SchemeKind::kSnrli1,
                            Aliasing::kPadded};
  const SpectralState numerical = snrli1_twisted_step(v, t_n, SpectralState(v.grid), params);

  const auto coarse = substep_nodes(v, t_n, tau, mu, substeps);
  const auto fine = substep_nodes(v, t_n, tau, mu, 2 * substeps);
  const double h = tau / substeps;

  // Richardson-extrapolated exact flow at the coarse nodes, and the
  // trapezoidal rule for int_0^tau I(v(t_n+s)) - I(v(t_n)) ds.
  SpectralState integral(v.grid, t_n);
  SpectralState flow = v;
  for (int j = 0; j <= substeps; ++j) {
    SpectralState node = subtract_states(scale_state(fine[2 * static_cast<std::size_t>(j)], 2.0),
                                         coarse[static_cast<std::size_t>(j)]);
    const double s = t_n + j * h;
    const SpectralState diff =
        subtract_states(twisted_nonlinearity(node, s), twisted_nonlinearity(v, s));
    const double weight = (j == 0 || j == substeps) ? 0.5 * h : h;
    integral = add_states(integral, scale_state(diff, weight));
    if (j == substeps) flow = std::move(node);
  }
  const SpectralState w_term = scale_state(integral, kI * mu);
  const SpectralState local_error = subtract_states(numerical, flow);
  const SpectralState r_term = compute_R_term(v, t_n, tau, mu);

  DecompositionReport report;
  report.residual = sobolev_norm(subtract_states(local_error, add_states(w_term, r_term)), h1);
  report.local_error = sobolev_norm(local_error, h1);
  report.w_term = sobolev_norm(w_term, h1);
  report.r_term = sobolev_norm(r_term, h1);
  return report;
}

FrequencySplit rco_frequency_split(const SpectralState& v, double tau0) {
  if (!(tau0 > 0.0 && tau0 < 1.0)) throw InvalidInput("cut-off tau0 must lie in (0, 1)");
  const double n0_real = 2.0 * std::floor(1.0 / tau0);
  if (n0_real > v.grid.num_modes()) {
    throw InvalidInput("cut-off mode N0=" + std::to_string(static_cast<long long>(n0_real)) +
                       " exceeds K=" + std::to_string(v.grid.num_modes()));
  }
  FrequencySplit split;
  split.n0 = static_cast<int>(n0_real);
  const SpectralState low = project_low_modes(v, split.n0);
  const SobolevIndex h1(1.0);
  split.low_part_norm = sobolev_norm(low, h1);
  split.high_part_norm = sobolev_norm(subtract_states(v, low), h1);
  return split;
}

}  // namespace snlse
