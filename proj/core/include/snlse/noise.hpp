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
#include <map>
#include <span>
#include <vector>

#include "snlse/philox.hpp"
#include "snlse/spectral.hpp"

namespace snlse {

/// Covariance of a Q-Wiener process diagonal in the Fourier basis, together
/// with the noise amplitude alpha multiplying dW in the equation.
///
/// W(x,t) = sum_k sqrt(lambda_k) beta_k(t) e_k(x) with e_k = exp(ikx)/sqrt(2 pi),
/// so in the exp(ikx) coefficient convention mode k of W carries
/// sqrt(lambda_k / (2 pi)) beta_k.
class QWienerSpec {
 public:
  /// lambda_k = 1 / (1 + |k|^s).
  static QWienerSpec power_decay(double exponent, double amplitude);
  /// Explicit eigenvalues; modes absent from the table have lambda_k = 0.
  static QWienerSpec table(std::map<int, double> eigenvalues, double amplitude);
  /// lambda_k = 0 for all k.
  static QWienerSpec none();

  double eigenvalue(int k) const;
  double amplitude() const noexcept { return amplitude_; }
  QWienerSpec with_amplitude(double amplitude) const;

  /// sum_k (1+|k|)^{2 sigma} lambda_k / (2 pi) over the grid's modes.
  double hs_norm_sq(const SpectralGrid& grid, SobolevIndex sigma) const;

  /// sqrt(lambda_k / (2 pi)) in storage order.
  std::vector<double> mode_scales(const SpectralGrid& grid) const;

  bool is_power_decay() const noexcept { return table_.empty() && exponent_ >= 0.0; }
  double exponent() const noexcept { return exponent_; }
  const std::map<int, double>& eigenvalue_table() const noexcept { return table_; }

 private:
  QWienerSpec(double exponent, std::map<int, double> table, double amplitude);

  double exponent_;  // < 0 means "table" (possibly empty = no noise)
  std::map<int, double> table_;
  double amplitude_;
};

/// Standard complex Gaussian (independent real/imaginary parts, each
/// N(0, 1/2)) as a pure function of the Philox counter and key.
Complex keyed_complex_normal(Philox4x32::Counter counter, Philox4x32::Key key) noexcept;

/// Random stream tags multiplexed into the counter.
enum class NoiseStream : std::uint32_t { kIncrement = 0, kConvolutionResidual = 1 };

/// Per-mode complex Brownian increments at a fine step, for one Monte Carlo
/// path. Increments are never stored: each one is a pure function of
/// (master_seed, path_index, k, step), so the path is immutable, cheap to copy,
/// and independent of traversal order or worker count.
class BrownianPath {
 public:
  BrownianPath(QWienerSpec spec, SpectralGrid grid, std::uint64_t master_seed,
               std::uint32_t path_index, double fine_step, std::int64_t num_fine_steps);

  const QWienerSpec& spec() const noexcept { return spec_; }
  const SpectralGrid& grid() const noexcept { return grid_; }
  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint32_t path_index() const noexcept { return path_index_; }
  double fine_step() const noexcept { return fine_step_; }
  std::int64_t num_fine_steps() const noexcept { return num_fine_steps_; }
  /// sqrt(lambda_k / (2 pi)) in storage order.
  std::span<const double> mode_scales() const noexcept { return scales_; }

  /// Delta beta_k over fine step `step`; E|.|^2 = fine_step. Zero when lambda_k = 0.
  Complex fine_increment(int mode, std::int64_t step) const;
  /// All modes of one fine step, storage order.
  void fine_increments(std::int64_t step, std::span<Complex> out) const;
  /// Sum of `count` fine increments starting at `first_step`, accumulated in
  /// step order from zero.
  Complex aggregated_increment(int mode, std::int64_t first_step, std::int64_t count) const;

  /// Standard complex normal on the convolution-residual stream for coarse
  /// step n at coarsening r.
  Complex residual_normal(int mode, std::int64_t n, std::int64_t r) const;

 private:
  Complex raw_increment(std::size_t index, std::int64_t step) const noexcept;

  QWienerSpec spec_;
  SpectralGrid grid_;
  std::uint64_t seed_;
  std::uint32_t path_index_;
  double fine_step_;
  std::int64_t num_fine_steps_;
  std::vector<double> scales_;
  double sqrt_fine_step_;
};

BrownianPath sample_path(const QWienerSpec& spec, const SpectralGrid& grid,
                         std::uint64_t master_seed, std::uint32_t path_index, double fine_step,
                         std::int64_t num_fine_steps);

/// Delta W^n over coarse step n of size r * fine_step: mode k carries
/// sqrt(lambda_k / (2 pi)) times the aggregated Brownian increment.
SpectralState wiener_increment(const BrownianPath& path, std::int64_t n, std::int64_t r);

/// Scale aggregated Brownian increments (storage order) into Delta W.
void scale_increments(std::span<const double> scales, std::span<const Complex> aggregated,
                      std::span<Complex> out) noexcept;

/// Cov(I_k, Delta beta_k) for I_k = int_{t_n}^{t_n+tau} exp(i k^2 s) d beta_k(s).
Complex convolution_covariance(int k, double t_n, double tau) noexcept;

/// Sample of int_{t_n}^{t_n+tau} S(-s) dW(s), tau = r * fine_step, t_n = n tau,
/// jointly Gaussian with the path's own Delta W^n.
SpectralState exact_convolution_sample(const BrownianPath& path, std::int64_t n, std::int64_t r);

/// Same, from already aggregated Brownian increments (storage order).
void exact_convolution_from_aggregate(const BrownianPath& path, std::int64_t n, std::int64_t r,
                                      std::span<const Complex> aggregated,
                                      std::span<Complex> out);

}  // namespace snlse
