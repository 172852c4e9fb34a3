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
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace snlse {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

namespace detail {
class FftPlan;
}

/// Fourier modes k = -K/2 .. K/2-1 on the periodic interval [-pi, pi].
///
/// Coefficients are stored in FFT order: storage index j holds mode j for
/// j < K/2 and mode j - K otherwise. The represented function is
/// u(x) = sum_k exp(ikx) u_k with no normalisation inside u_k, evaluated at
/// the collocation points x_j = -pi + 2 pi j / K.
class SpectralGrid {
 public:
  /// Throws InvalidInput unless K is a power of two and K >= 8.
  explicit SpectralGrid(int num_modes);

  int num_modes() const noexcept { return num_modes_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(num_modes_); }

  int mode(std::size_t index) const noexcept {
    const int j = static_cast<int>(index);
    return j < num_modes_ / 2 ? j : j - num_modes_;
  }
  /// Storage index of a wavenumber in [-K/2, K/2); throws InvalidInput otherwise.
  std::size_t index(int mode) const;
  /// Storage index of the wavenumber congruent to `mode` modulo K.
  std::size_t wrapped_index(long long mode) const noexcept;

  std::vector<int> mode_indices() const;
  std::vector<double> collocation_points() const;

  /// Coefficients -> values at collocation points.
  void to_physical(std::span<const Complex> coeffs, std::span<Complex> values) const;
  /// Values at collocation points -> coefficients.
  void to_spectral(std::span<const Complex> values, std::span<Complex> coeffs) const;

  friend bool operator==(const SpectralGrid& a, const SpectralGrid& b) noexcept {
    return a.num_modes_ == b.num_modes_;
  }

 private:
  int num_modes_;
  std::shared_ptr<const detail::FftPlan> plan_;
};

/// Sobolev order sigma >= 0.
class SobolevIndex {
 public:
  explicit SobolevIndex(double sigma);
  double value() const noexcept { return sigma_; }

 private:
  double sigma_;
};

/// Product evaluation: plain K-point collocation, or zero-padded evaluation
/// that is alias-free for the product being formed (3K/2 points for two
/// factors, 2K for three) followed by truncation to the retained modes.
enum class Aliasing { kCollocation, kPadded };

/// Complex Fourier coefficients of a periodic function at a time instant.
struct SpectralState {
  SpectralGrid grid;
  CVector coeffs;
  double time = 0.0;

  explicit SpectralState(const SpectralGrid& g, double t = 0.0);
  SpectralState(const SpectralGrid& g, CVector c, double t = 0.0);

  /// c * exp(i l x).
  static SpectralState single_mode(const SpectralGrid& g, Complex c, int l, double t = 0.0);

  Complex coeff(int mode) const { return coeffs[grid.index(mode)]; }
  Complex& coeff(int mode) { return coeffs[grid.index(mode)]; }

  bool all_finite() const noexcept;
};

SpectralState forward_transform(const SpectralGrid& grid, std::span<const Complex> values,
                                double time = 0.0);
CVector inverse_transform(const SpectralState& state);

/// (sum_k (1+|k|)^{2 sigma} |u_k|^2)^{1/2} over the retained modes.
double sobolev_norm(const SpectralState& state, SobolevIndex index);

/// Free Schroedinger group S(t) = exp(i t d_xx): mode k picks up exp(-i k^2 t).
SpectralState free_group_apply(const SpectralState& state, double t);

/// phi_1(z) = (exp(z) - 1) / z, with phi_1(0) = 1.
Complex phi1(Complex z) noexcept;

/// Below this modulus phi1 switches to its Taylor series.
inline constexpr double kPhi1SeriesThreshold = 1e-4;

/// phi_1(a d_xx): mode l is multiplied by phi1(-a l^2), and mode 0 by 1.
SpectralState phi1_operator_apply(const SpectralState& state, Complex a);

SpectralState pointwise_product(const SpectralState& a, const SpectralState& b,
                                Aliasing aliasing = Aliasing::kCollocation);
SpectralState cubic_product(const SpectralState& a, const SpectralState& b,
                            const SpectralState& c,
                            Aliasing aliasing = Aliasing::kCollocation);

/// Coefficient map u_k -> conj(u_{-k}) (indices modulo K), i.e. pointwise conjugation.
SpectralState conjugate_state(const SpectralState& state);
SpectralState scale_state(const SpectralState& state, Complex c);
SpectralState add_states(const SpectralState& a, const SpectralState& b);
SpectralState subtract_states(const SpectralState& a, const SpectralState& b);

/// Zeroes every mode with |k| > N0/2.
SpectralState project_low_modes(const SpectralState& state, int n0);

namespace detail {

void require_same_grid(const SpectralGrid& a, const SpectralGrid& b);

// Raw-buffer product kernels shared by the operations above and the steppers.
// `scratch` buffers are resized as needed.
struct ProductScratch {
  CVector a, b, c, out;
};
void product2(const SpectralGrid& grid, std::span<const Complex> a, std::span<const Complex> b,
              Aliasing aliasing, std::span<Complex> out, ProductScratch& scratch);
void product3(const SpectralGrid& grid, std::span<const Complex> a, std::span<const Complex> b,
              std::span<const Complex> c, Aliasing aliasing, std::span<Complex> out,
              ProductScratch& scratch);

}  // namespace detail

}  // namespace snlse
