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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "snlse/noise.hpp"
#include "snlse/spectral.hpp"

namespace snlse {

/// SNRLI1: non-resonant low-regularity scheme (zero mode treated exactly).
/// SLI1: the low-regularity scheme without the resonance corrections.
/// EXACT_LINEAR: exact sampling of the linear (mu = 0) flow.
enum class SchemeKind { kSnrli1, kSli1, kExactLinear };

std::string_view to_string(SchemeKind kind) noexcept;
/// Accepts "SNRLI1", "SLI1", "EXACT_LINEAR" (case-insensitive).
SchemeKind parse_scheme(std::string_view name);

/// Step parameters for  i du = -u_xx dt + mu |u|^2 u dt + alpha dW.
struct SchemeParams {
  double mu = 0.0;
  double tau = 0.0;
  QWienerSpec noise = QWienerSpec::none();
  SchemeKind kind = SchemeKind::kSnrli1;
  Aliasing aliasing = Aliasing::kCollocation;

  double alpha() const noexcept { return noise.amplitude(); }
  /// Throws InvalidConfiguration on tau <= 0 or EXACT_LINEAR with mu != 0.
  void validate() const;
};

/// g(u) = u * (I - phi_1(-2 i tau d_xx)) conj(u).
SpectralState g_term(const SpectralState& u, double tau,
                     Aliasing aliasing = Aliasing::kCollocation);
/// Zero-mode coefficient of g(u): sum_l |u_l|^2 (1 - phi_1(2 i tau l^2)).
Complex g_zero_mode(const SpectralState& u, double tau);
/// (h(u))_k = (1 - phi_1(2 i k^2 tau)) |u_k|^2 u_k.
SpectralState h_term(const SpectralState& u, double tau);

SpectralState snrli1_step(const SpectralState& u, const SpectralState& dw,
                          const SchemeParams& params);
/// The same scheme written for the twisted variable v = S(-t) u.
SpectralState snrli1_twisted_step(const SpectralState& v, double t_n, const SpectralState& dw,
                                  const SchemeParams& params);
SpectralState sli1_step(const SpectralState& u, const SpectralState& dw,
                        const SchemeParams& params);
/// Exact step of the linear equation, coupled to `path` at coarse step n
/// with coarsening tau / fine_step.
SpectralState exact_linear_step(const SpectralState& u, const BrownianPath& path,
                                std::int64_t n, const SchemeParams& params);

/// Reusable one-step map with precomputed multipliers and scratch space.
/// Not thread-safe; use one per worker.
class Stepper {
 public:
  Stepper(const SpectralGrid& grid, const SchemeParams& params);

  const SchemeParams& params() const noexcept { return params_; }
  const SpectralGrid& grid() const noexcept { return grid_; }

  /// Advances coefficients `u` from t_n to t_n + tau in place. `forcing` is
  /// Delta W^n for SNRLI1/SLI1 and the exact convolution sample
  /// int_{t_n}^{t_n+tau} S(-s) dW(s) for EXACT_LINEAR.
  void advance(std::span<Complex> u, std::span<const Complex> forcing, double t_n);

 private:
  SpectralGrid grid_;
  SchemeParams params_;
  CVector free_phase_;      // exp(-i k^2 tau)
  CVector phi1_;            // phi_1(2 i tau l^2), 1 at l = 0
  std::vector<std::size_t> negated_;  // storage index of -k mod K
  CVector conj_, cubic_, bracket_;
  detail::ProductScratch scratch_;
};

/// Divergence guard: non-finite coefficients or ||u||_1 above this bound.
inline constexpr double kDivergenceBound = 1e6;
/// Throws DivergenceError naming `step` when the guard trips.
void check_divergence(const SpectralGrid& grid, std::span<const Complex> u, std::int64_t step);

struct Trajectory {
  std::vector<SpectralState> snapshots;
  SchemeParams params;
  std::uint64_t master_seed = 0;
  std::uint32_t path_index = 0;
  std::int64_t coarsening = 1;
  std::int64_t snapshot_stride = 1;
};

/// Applies the selected one-step map `num_steps` times, with Delta W^n drawn
/// from `path` at coarsening r (tau must equal r * fine_step). Snapshots are
/// kept at step 0, every `snapshot_stride` steps, and at the final step.
Trajectory integrate(const SpectralState& initial, const BrownianPath& path,
                     const SchemeParams& params, std::int64_t num_steps, std::int64_t coarsening,
                     std::int64_t snapshot_stride = 1);

}  // namespace snlse
