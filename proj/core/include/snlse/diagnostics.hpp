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

#include "snlse/spectral.hpp"

namespace snlse {

/// Largest grid accepted by the O(K^3) triple sums below.
inline constexpr int kMaxTripleSumModes = 32;

/// I_t^s(w) = S(-(t+s)) ( |S(t+s) w|^2 S(t+s) w ), evaluated alias-free.
SpectralState twisted_nonlinearity(const SpectralState& w, double t);

/// Remainder of the non-resonant scheme relative to the frozen-coefficient
/// Duhamel integral:
///
///   R_l = -i mu sum_{l = -l1 + l2 + l3, P != 0} e^{i t_n P} conj(v_l1) v_l2 v_l3
///         * int_0^tau (e^{2 i s l1^2} - e^{i s P}) ds,     P = l^2 + l1^2 - l2^2 - l3^2,
///
/// with the integrals in closed form tau phi_1(2 i tau l1^2) and
/// tau phi_1(i tau P). The sum runs over retained modes only, matching
/// alias-free (padded) products. Throws CostError for K > 32.
SpectralState compute_R_term(const SpectralState& v, double t_n, double tau, double mu);

struct DecompositionReport {
  double residual = 0.0;     // || E - (W + R) ||_1
  double local_error = 0.0;  // || E ||_1
  double w_term = 0.0;       // || W ||_1
  double r_term = 0.0;       // || R ||_1
};

/// Checks E^n = W^n + R(v) for the deterministic (alpha = 0) twisted map.
/// The exact flow is SNRLI1 on `substeps` and 2*`substeps` substeps combined
/// by Richardson extrapolation; W^n uses the trapezoidal rule on the substep
/// nodes. Throws CostError for K > 32.
DecompositionReport local_error_decomposition_check(const SpectralState& v, double t_n,
                                                    double tau, double mu, int substeps);

struct FrequencySplit {
  double low_part_norm = 0.0;   // ||P_N0 v||_1
  double high_part_norm = 0.0;  // ||(I - P_N0) v||_1
  int n0 = 0;
};

/// Cut-off N0 = 2 floor(1/tau0); throws InvalidInput if tau0 is not in (0,1)
/// or N0 > K.
FrequencySplit rco_frequency_split(const SpectralState& v, double tau0);

}  // namespace snlse
