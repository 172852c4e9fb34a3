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

#include "snlse/noise.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "snlse/errors.hpp"

namespace snlse {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr std::uint32_t kModeBias = 1u << 23;

Philox4x32::Counter make_counter(std::uint32_t path, NoiseStream stream, int mode,
                                 std::uint64_t word) noexcept {
  const std::uint32_t tagged = (static_cast<std::uint32_t>(stream) << 24) |
                               ((static_cast<std::uint32_t>(mode) + kModeBias) & 0xFFFFFFu);
  return {path, tagged, static_cast<std::uint32_t>(word), static_cast<std::uint32_t>(word >> 32)};
}

}  // namespace

QWienerSpec::QWienerSpec(double exponent, std::map<int, double> table, double amplitude)
    : exponent_(exponent), table_(std::move(table)), amplitude_(amplitude) {
  if (!std::isfinite(amplitude) || amplitude < 0.0) {
    throw InvalidInput("noise amplitude must be finite and >= 0");
  }
  for (const auto& [k, lam] : table_) {
    if (!std::isfinite(lam) || lam < 0.0) {
      throw InvalidInput("eigenvalue for mode " + std::to_string(k) + " must be finite and >= 0");
    }
  }
}

QWienerSpec QWienerSpec::power_decay(double exponent, double amplitude) {
  if (!std::isfinite(exponent) || exponent < 0.0) {
    throw InvalidInput("eigenvalue decay exponent must be finite and >= 0");
  }
  return QWienerSpec(exponent, {}, amplitude);
}

QWienerSpec QWienerSpec::table(std::map<int, double> eigenvalues, double amplitude) {
  return QWienerSpec(-1.0, std::move(eigenvalues), amplitude);
}

QWienerSpec QWienerSpec::none() { return QWienerSpec(-1.0, {}, 0.0); }

QWienerSpec QWienerSpec::with_amplitude(double amplitude) const {
  return QWienerSpec(exponent_, table_, amplitude);
}

double QWienerSpec::eigenvalue(int k) const {
  if (exponent_ >= 0.0) return 1.0 / (1.0 + std::pow(std::abs(static_cast<double>(k)), exponent_));
  auto it = table_.find(k);
  return it == table_.end() ? 0.0 : it->second;
}

double QWienerSpec::hs_norm_sq(const SpectralGrid& grid, SobolevIndex sigma) const {
  double sum = 0.0;
  for (int k : grid.mode_indices()) {
    sum += std::pow(1.0 + std::abs(k), 2.0 * sigma.value()) * eigenvalue(k);
  }
  return sum / kTwoPi;
}

std::vector<double> QWienerSpec::mode_scales(const SpectralGrid& grid) const {
  std::vector<double> scales(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    scales[j] = std::sqrt(eigenvalue(grid.mode(j)) / kTwoPi);
  }
  return scales;
}

Complex keyed_complex_normal(Philox4x32::Counter counter, Philox4x32::Key key) noexcept {
  const auto r = Philox4x32::generate(counter, key);
  const std::uint64_t a = (std::uint64_t{r[0]} << 32) | r[1];
  const std::uint64_t b = (std::uint64_t{r[2]} << 32) | r[3];
  constexpr double kScale = 0x1.0p-53;
  const double u1 = static_cast<double>((a >> 11) + 1) * kScale;  // (0, 1]
  const double u2 = static_cast<double>(b >> 11) * kScale;        // [0, 1)
  // |Z|^2 ~ Exp(1), so each component has variance 1/2
  const double radius = std::sqrt(-std::log(u1));
  return std::polar(radius, kTwoPi * u2);
}

BrownianPath::BrownianPath(QWienerSpec spec, SpectralGrid grid, std::uint64_t master_seed,
                           std::uint32_t path_index, double fine_step,
                           std::int64_t num_fine_steps)
    : spec_(std::move(spec)),
      grid_(std::move(grid)),
      seed_(master_seed),
      path_index_(path_index),
      fine_step_(fine_step),
      num_fine_steps_(num_fine_steps) {
  if (!(fine_step > 0.0) || !std::isfinite(fine_step)) {
    throw InvalidInput("fine step must be finite and > 0");
  }
  if (num_fine_steps < 1) throw InvalidInput("a path needs at least one fine step");
  scales_ = spec_.mode_scales(grid_);
  sqrt_fine_step_ = std::sqrt(fine_step_);
}

Complex BrownianPath::raw_increment(std::size_t index, std::int64_t step) const noexcept {
  if (scales_[index] == 0.0) return Complex{};
  const auto ctr = make_counter(path_index_, NoiseStream::kIncrement, grid_.mode(index),
                                static_cast<std::uint64_t>(step));
  return sqrt_fine_step_ * keyed_complex_normal(ctr, Philox4x32::key_from_seed(seed_));
}

Complex BrownianPath::fine_increment(int mode, std::int64_t step) const {
  if (step < 0 || step >= num_fine_steps_) {
    throw InvalidInput("fine step " + std::to_string(step) + " outside path of " +
                       std::to_string(num_fine_steps_) + " steps");
  }
  return raw_increment(grid_.index(mode), step);
}

void BrownianPath::fine_increments(std::int64_t step, std::span<Complex> out) const {
  if (step < 0 || step >= num_fine_steps_) {
    throw InvalidInput("fine step " + std::to_string(step) + " outside path of " +
                       std::to_string(num_fine_steps_) + " steps");
  }
  for (std::size_t j = 0; j < grid_.size(); ++j) out[j] = raw_increment(j, step);
}

Complex BrownianPath::aggregated_increment(int mode, std::int64_t first_step,
                                           std::int64_t count) const {
  if (count < 1 || first_step < 0 || first_step + count > num_fine_steps_) {
    throw InvalidInput("aggregation window [" + std::to_string(first_step) + ", " +
                       std::to_string(first_step + count) + ") outside path");
  }
  const std::size_t j = grid_.index(mode);
  Complex acc{};
  for (std::int64_t s = first_step; s < first_step + count; ++s) acc += raw_increment(j, s);
  return acc;
}

Complex BrownianPath::residual_normal(int mode, std::int64_t n, std::int64_t r) const {
  // word = (r << 32) | n keeps streams for different coarsenings apart
  const std::uint64_t word = (static_cast<std::uint64_t>(r) << 32) |
                             (static_cast<std::uint64_t>(n) & 0xFFFFFFFFu);
  const auto ctr = make_counter(path_index_, NoiseStream::kConvolutionResidual, mode, word);
  return keyed_complex_normal(ctr, Philox4x32::key_from_seed(seed_));
}

BrownianPath sample_path(const QWienerSpec& spec, const SpectralGrid& grid,
                         std::uint64_t master_seed, std::uint32_t path_index, double fine_step,
                         std::int64_t num_fine_steps) {
  return BrownianPath(spec, grid, master_seed, path_index, fine_step, num_fine_steps);
}

namespace {

void require_coarse_step(const BrownianPath& path, std::int64_t n, std::int64_t r) {
  if (r < 1 || n < 0 || r * (n + 1) > path.num_fine_steps()) {
    throw InvalidInput("coarse step n=" + std::to_string(n) + " at coarsening r=" +
                       std::to_string(r) + " exceeds path of " +
                       std::to_string(path.num_fine_steps()) + " fine steps");
  }
}

CVector aggregate_all(const BrownianPath& path, std::int64_t n, std::int64_t r) {
  const auto& grid = path.grid();
  CVector acc(grid.size());
  CVector fine(grid.size());
  for (std::int64_t s = n * r; s < (n + 1) * r; ++s) {
    path.fine_increments(s, fine);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += fine[j];
  }
  return acc;
}

}  // namespace

void scale_increments(std::span<const double> scales, std::span<const Complex> aggregated,
                      std::span<Complex> out) noexcept {
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = scales[j] * aggregated[j];
}

SpectralState wiener_increment(const BrownianPath& path, std::int64_t n, std::int64_t r) {
  require_coarse_step(path, n, r);
  const CVector acc = aggregate_all(path, n, r);
  SpectralState dw(path.grid(), static_cast<double>(n * r) * path.fine_step());
  scale_increments(path.mode_scales(), acc, dw.coeffs);
  return dw;
}

Complex convolution_covariance(int k, double t_n, double tau) noexcept {
  const double k2 = static_cast<double>(k) * k;
  return tau * std::polar(1.0, k2 * t_n) * phi1(Complex{0.0, k2 * tau});
}

void exact_convolution_from_aggregate(const BrownianPath& path, std::int64_t n, std::int64_t r,
                                      std::span<const Complex> aggregated,
                                      std::span<Complex> out) {
  const auto& grid = path.grid();
  const double tau = static_cast<double>(r) * path.fine_step();
  const double t_n = static_cast<double>(n) * tau;
  const auto scales = path.mode_scales();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (scales[j] == 0.0) {
      out[j] = Complex{};
      continue;
    }
    const int k = grid.mode(j);
    if (k == 0) {
      out[j] = scales[j] * aggregated[j];
      continue;
    }
    // I = rho * dbeta + sqrt(tau - |c|^2 / tau) * Z, rho = c / tau
    const Complex cov = convolution_covariance(k, t_n, tau);
    const Complex rho = cov / tau;
    const double resid_var = std::max(0.0, tau - std::norm(cov) / tau);
    Complex integral = rho * aggregated[j];
    if (resid_var > 0.0) integral += std::sqrt(resid_var) * path.residual_normal(k, n, r);
    out[j] = scales[j] * integral;
  }
}

SpectralState exact_convolution_sample(const BrownianPath& path, std::int64_t n, std::int64_t r) {
  require_coarse_step(path, n, r);
  const CVector acc = aggregate_all(path, n, r);
  const double tau = static_cast<double>(r) * path.fine_step();
  SpectralState out(path.grid(), static_cast<double>(n) * tau);
  exact_convolution_from_aggregate(path, n, r, acc, out.coeffs);
  return out;
}

}  // namespace snlse
