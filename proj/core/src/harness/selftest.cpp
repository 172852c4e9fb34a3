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

#include <cmath>
#include <sstream>

#include "snlse/diagnostics.hpp"
#include "snlse/harness.hpp"
#include "snlse/philox.hpp"

namespace snlse::harness {

namespace {

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

SpectralState smooth_state(int k_modes) {
  const SpectralGrid grid(k_modes);
  const auto xs = grid.collocation_points();
  CVector values(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) values[j] = 2.0 / (2.0 - std::cos(xs[j]));
  return forward_transform(grid, values);
}

}  // namespace

std::vector<SelftestRow> run_selftest() {
  std::vector<SelftestRow> rows;
  auto add = [&](std::string name, bool ok, std::string detail) {
    rows.push_back({std::move(name), ok, std::move(detail)});
  };

  {
    const auto out = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
    add("philox_known_answer", out[0] == 0x6627e8d5u && out[3] == 0x9b00dbd8u, "counter 0, key 0");
  }
  {
    const auto u = smooth_state(64);
    const auto back = forward_transform(u.grid, inverse_transform(u));
    const double err = sobolev_norm(subtract_states(u, back), SobolevIndex(0.0));
    add("transform_round_trip", err < 1e-13, sci(err));
  }
  {
    const auto u = smooth_state(64);
    const double drift =
        std::abs(sobolev_norm(free_group_apply(u, 0.37), SobolevIndex(1.0)) - sobolev_norm(u, SobolevIndex(1.0)));
    add("free_group_isometry", drift < 1e-12, sci(drift));
  }
  {
    const Complex z{0.0, 0.99e-4};
    const Complex w{0.0, 1.01e-4};
    const double jump = std::abs(phi1(w) - phi1(z) - (w - z) / 2.0 - (w * w - z * z) / 6.0);
    add("phi1_branch_continuity", jump < 1e-13, sci(jump));
  }
  {
    const SpectralGrid grid(32);
    const auto path = sample_path(QWienerSpec::power_decay(8.0, 1.0), grid, 42, 0, 0.01, 4);
    const auto coarse = wiener_increment(path, 0, 4);
    SpectralState sum(grid);
    for (int n = 0; n < 4; ++n) sum = add_states(sum, wiener_increment(path, n, 1));
    const double diff = sobolev_norm(subtract_states(coarse, sum), SobolevIndex(0.0));
    add("noise_aggregation", diff < 1e-14, sci(diff));
  }
  {
    const auto u = smooth_state(32);
    SchemeParams params{0.0, 0.05, QWienerSpec::none()};
    const auto step = snrli1_step(u, SpectralState(u.grid), params);
    const double diff = sobolev_norm(subtract_states(step, free_group_apply(u, 0.05)), SobolevIndex(1.0));
    add("linear_limit", diff < 1e-13, sci(diff));
  }
  {
    const SpectralGrid grid(8);
    SpectralState v(grid);
    v.coeff(0) = {0.3, 0.1};
    v.coeff(1) = {0.1, -0.05};
    v.coeff(-2) = {0.02, 0.03};
    const auto coarse = local_error_decomposition_check(v, 0.0, 0.05, 1.0, 16);
    const auto fine = local_error_decomposition_check(v, 0.0, 0.05, 1.0, 64);
    const double ratio = coarse.residual / std::max(fine.residual, 1e-300);
    add("decomposition_convergence", fine.residual < coarse.residual && ratio > 8.0,
        "residual " + sci(fine.residual) + ", ratio " + sci(ratio));
  }
  return rows;
}

}  // namespace snlse::harness
