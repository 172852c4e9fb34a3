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

#include <complex>

#include "snlse/spectral.hpp"

namespace snlse::testing {

/// Composite Simpson on `nodes` intervals of int_0^tau (e^{2 i s a} - e^{i s P}) ds.
inline Complex oscillatory_integral(double a, double p, double tau, int nodes) {
  auto f = [&](double s) { return std::exp(Complex{0, 2 * s * a}) - std::exp(Complex{0, s * p}); };
  const double h = tau / nodes;
  Complex acc = f(0.0) + f(tau);
  for (int i = 1; i < nodes; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return acc * h / 3.0;
}

/// Brute-force remainder: direct sum over retained frequency triples with
/// quadrature for each oscillatory integral.
inline SpectralState brute_force_r_term(const SpectralState& v, double t_n, double tau, double mu,
                                        int nodes = 10000) {
  const int half = v.grid.num_modes() / 2;
  SpectralState out(v.grid);
  for (int l = -half; l < half; ++l) {
    Complex acc{0, 0};
    for (int l1 = -half; l1 < half; ++l1) {
      if (v.coeff(l1) == Complex{0, 0}) continue;
      for (int l2 = -half; l2 < half; ++l2) {
        const int l3 = l + l1 - l2;
        if (l3 < -half || l3 >= half) continue;
        const Complex amp = std::conj(v.coeff(l1)) * v.coeff(l2) * v.coeff(l3);
        if (amp == Complex{0, 0}) continue;
        const double p = double(l) * l + double(l1) * l1 - double(l2) * l2 - double(l3) * l3;
        if (p == 0.0) continue;
        acc += std::exp(Complex{0, t_n * p}) * amp * oscillatory_integral(double(l1) * l1, p, tau, nodes);
      }
    }
    out.coeff(l) = Complex{0, -mu} * acc;
  }
  return out;
}

}  // namespace snlse::testing
