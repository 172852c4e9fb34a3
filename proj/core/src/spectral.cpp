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

#include "snlse/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "snlse/errors.hpp"

namespace snlse {

namespace detail {

// Unnormalised complex DFT pair of one length. Plans are made once per length
// and executed through the new-array interface, which is thread-safe.
class FftPlan {
 public:
  explicit FftPlan(int n) : n_(n) {
    CVector in(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
    auto* pin = reinterpret_cast<fftw_complex*>(in.data());
    auto* pout = reinterpret_cast<fftw_complex*>(out.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_1d(n, pin, pout, FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft_1d(n, pin, pout, FFTW_BACKWARD, flags);
  }
  ~FftPlan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  int size() const noexcept { return n_; }

  // out_j = sum_k in_k exp(-2 pi i jk/n)
  void forward(const Complex* in, Complex* out) const {
    fftw_execute_dft(forward_, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }
  // out_j = sum_k in_k exp(+2 pi i jk/n)
  void backward(const Complex* in, Complex* out) const {
    fftw_execute_dft(backward_, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }

  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

 private:
  int n_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

namespace {

std::shared_ptr<const FftPlan> plan_for(int n) {
  static std::map<int, std::shared_ptr<const FftPlan>> cache;
  std::lock_guard lock(FftPlan::planner_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto plan = std::make_shared<const FftPlan>(n);
  cache.emplace(n, plan);
  return plan;
}

// Values on the n-point grid x_j = -pi + 2 pi j/n of the K-mode coefficient
// vector `coeffs` (n >= K, n even). The exp(-ik pi) factor turns into a
// half-length rotation of the plain DFT output.
void to_physical_n(const SpectralGrid& grid, std::span<const Complex> coeffs, int n,
                   CVector& embed, std::span<Complex> values) {
  const int k = grid.num_modes();
  const auto& plan = *plan_for(n);
  const Complex* src = coeffs.data();
  if (n != k) {
    embed.assign(static_cast<std::size_t>(n), Complex{});
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
      const int m = grid.mode(j);
      embed[static_cast<std::size_t>(m >= 0 ? m : m + n)] = coeffs[j];
    }
    src = embed.data();
  }
  plan.backward(src, values.data());
  std::rotate(values.begin(), values.begin() + n / 2, values.end());
}

// Inverse of to_physical_n followed by truncation to the K retained modes.
void to_spectral_n(const SpectralGrid& grid, std::span<const Complex> values, int n,
                   CVector& work, std::span<Complex> coeffs) {
  const int k = grid.num_modes();
  const auto& plan = *plan_for(n);
  work.resize(static_cast<std::size_t>(n));
  plan.forward(values.data(), work.data());
  const double inv_n = 1.0 / n;
  for (std::size_t j = 0; j < static_cast<std::size_t>(k); ++j) {
    const int m = grid.mode(j);
    const Complex c = work[static_cast<std::size_t>(m >= 0 ? m : m + n)];
    coeffs[j] = (m % 2 == 0 ? inv_n : -inv_n) * c;
  }
}

}  // namespace

void require_same_grid(const SpectralGrid& a, const SpectralGrid& b) {
  if (!(a == b)) {
    throw InvalidInput("grid mismatch: K=" + std::to_string(a.num_modes()) +
                       " vs K=" + std::to_string(b.num_modes()));
  }
}

void product2(const SpectralGrid& grid, std::span<const Complex> a, std::span<const Complex> b,
              Aliasing aliasing, std::span<Complex> out, ProductScratch& s) {
  const int k = grid.num_modes();
  const int n = aliasing == Aliasing::kPadded ? 3 * k / 2 : k;
  s.a.resize(static_cast<std::size_t>(n));
  s.b.resize(static_cast<std::size_t>(n));
  to_physical_n(grid, a, n, s.out, s.a);
  to_physical_n(grid, b, n, s.out, s.b);
  for (std::size_t j = 0; j < s.a.size(); ++j) s.a[j] *= s.b[j];
  to_spectral_n(grid, s.a, n, s.out, out);
}

void product3(const SpectralGrid& grid, std::span<const Complex> a, std::span<const Complex> b,
              std::span<const Complex> c, Aliasing aliasing, std::span<Complex> out,
              ProductScratch& s) {
  const int k = grid.num_modes();
  const int n = aliasing == Aliasing::kPadded ? 2 * k : k;
  s.a.resize(static_cast<std::size_t>(n));
  s.b.resize(static_cast<std::size_t>(n));
  s.c.resize(static_cast<std::size_t>(n));
  to_physical_n(grid, a, n, s.out, s.a);
  if (b.data() == a.data()) {
    s.b = s.a;
  } else {
    to_physical_n(grid, b, n, s.out, s.b);
  }
  to_physical_n(grid, c, n, s.out, s.c);
  for (std::size_t j = 0; j < s.a.size(); ++j) s.a[j] *= s.b[j] * s.c[j];
  to_spectral_n(grid, s.a, n, s.out, out);
}

}  // namespace detail

SpectralGrid::SpectralGrid(int num_modes) : num_modes_(num_modes) {
  if (num_modes < 8 || (num_modes & (num_modes - 1)) != 0) {
    throw InvalidInput("K must be a power of two >= 8, got " + std::to_string(num_modes));
  }
  plan_ = detail::plan_for(num_modes);
}

std::size_t SpectralGrid::index(int mode) const {
  if (mode < -num_modes_ / 2 || mode >= num_modes_ / 2) {
    throw InvalidInput("mode " + std::to_string(mode) + " outside [-K/2, K/2) for K=" +
                       std::to_string(num_modes_));
  }
  return static_cast<std::size_t>(mode >= 0 ? mode : mode + num_modes_);
}

std::size_t SpectralGrid::wrapped_index(long long mode) const noexcept {
  long long r = mode % num_modes_;
  if (r < 0) r += num_modes_;
  return static_cast<std::size_t>(r);
}

std::vector<int> SpectralGrid::mode_indices() const {
  std::vector<int> ks(size());
  for (int i = 0; i < num_modes_; ++i) ks[static_cast<std::size_t>(i)] = i - num_modes_ / 2;
  return ks;
}

std::vector<double> SpectralGrid::collocation_points() const {
  std::vector<double> xs(size());
  for (int j = 0; j < num_modes_; ++j) {
    xs[static_cast<std::size_t>(j)] = -M_PI + 2.0 * M_PI * j / num_modes_;
  }
  return xs;
}

void SpectralGrid::to_physical(std::span<const Complex> coeffs, std::span<Complex> values) const {
  if (coeffs.size() != size() || values.size() != size()) {
    throw InvalidInput("transform length mismatch");
  }
  plan_->backward(coeffs.data(), values.data());
  std::rotate(values.begin(), values.begin() + num_modes_ / 2, values.end());
}

void SpectralGrid::to_spectral(std::span<const Complex> values, std::span<Complex> coeffs) const {
  if (coeffs.size() != size() || values.size() != size()) {
    throw InvalidInput("transform length mismatch");
  }
  plan_->forward(values.data(), coeffs.data());
  const double inv_k = 1.0 / num_modes_;
  for (std::size_t j = 0; j < size(); ++j) {
    coeffs[j] *= (mode(j) % 2 == 0) ? inv_k : -inv_k;
  }
}

SobolevIndex::SobolevIndex(double sigma) : sigma_(sigma) {
  if (!std::isfinite(sigma) || sigma < 0.0) {
    throw InvalidInput("Sobolev index must be finite and >= 0");
  }
}

SpectralState::SpectralState(const SpectralGrid& g, double t)
    : grid(g), coeffs(g.size()), time(t) {}

SpectralState::SpectralState(const SpectralGrid& g, CVector c, double t)
    : grid(g), coeffs(std::move(c)), time(t) {
  if (coeffs.size() != grid.size()) {
    throw InvalidInput("coefficient vector has length " + std::to_string(coeffs.size()) +
                       ", grid has K=" + std::to_string(grid.num_modes()));
  }
}

SpectralState SpectralState::single_mode(const SpectralGrid& g, Complex c, int l, double t) {
  SpectralState s(g, t);
  s.coeff(l) = c;
  return s;
}

bool SpectralState::all_finite() const noexcept {
  return std::all_of(coeffs.begin(), coeffs.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

SpectralState forward_transform(const SpectralGrid& grid, std::span<const Complex> values,
                                double time) {
  if (values.size() != grid.size()) {
    throw InvalidInput("forward_transform: expected " + std::to_string(grid.num_modes()) +
                       " values, got " + std::to_string(values.size()));
  }
  SpectralState s(grid, time);
  grid.to_spectral(values, s.coeffs);
  return s;
}

CVector inverse_transform(const SpectralState& state) {
  CVector values(state.grid.size());
  state.grid.to_physical(state.coeffs, values);
  return values;
}

double sobolev_norm(const SpectralState& state, SobolevIndex index) {
  const double two_sigma = 2.0 * index.value();
  double sum = 0.0;
  for (std::size_t j = 0; j < state.coeffs.size(); ++j) {
    const double w = 1.0 + std::abs(state.grid.mode(j));
    sum += std::pow(w, two_sigma) * std::norm(state.coeffs[j]);
  }
  return std::sqrt(sum);
}

SpectralState free_group_apply(const SpectralState& state, double t) {
  SpectralState out = state;
  for (std::size_t j = 0; j < out.coeffs.size(); ++j) {
    const double k = state.grid.mode(j);
    out.coeffs[j] *= std::polar(1.0, -k * k * t);
  }
  return out;
}

Complex phi1(Complex z) noexcept {
  if (std::abs(z) < kPhi1SeriesThreshold) {
    // sum_{n=0}^{7} z^n / (n+1)!
    static constexpr double kCoeffs[8] = {1.0,         1.0 / 2,    1.0 / 6,    1.0 / 24,
                                          1.0 / 120,   1.0 / 720,  1.0 / 5040, 1.0 / 40320};
    Complex acc = kCoeffs[7];
    for (int n = 6; n >= 0; --n) acc = acc * z + kCoeffs[n];
    return acc;
  }
  // exp(x+iy) - 1 = expm1(x) cos y - 2 sin^2(y/2) + i e^x sin y, free of cancellation
  const double x = z.real();
  const double y = z.imag();
  const double sh = std::sin(0.5 * y);
  const Complex em1{std::expm1(x) * std::cos(y) - 2.0 * sh * sh, std::exp(x) * std::sin(y)};
  return em1 / z;
}

SpectralState phi1_operator_apply(const SpectralState& state, Complex a) {
  SpectralState out = state;
  for (std::size_t j = 0; j < out.coeffs.size(); ++j) {
    const int l = state.grid.mode(j);
    if (l == 0) continue;
    const double l2 = static_cast<double>(l) * l;
    out.coeffs[j] *= phi1(-a * l2);
  }
  return out;
}

SpectralState pointwise_product(const SpectralState& a, const SpectralState& b,
                                Aliasing aliasing) {
  detail::require_same_grid(a.grid, b.grid);
  SpectralState out(a.grid, a.time);
  detail::ProductScratch scratch;
  detail::product2(a.grid, a.coeffs, b.coeffs, aliasing, out.coeffs, scratch);
  return out;
}

SpectralState cubic_product(const SpectralState& a, const SpectralState& b,
                            const SpectralState& c, Aliasing aliasing) {
  detail::require_same_grid(a.grid, b.grid);
  detail::require_same_grid(a.grid, c.grid);
  SpectralState out(a.grid, a.time);
  detail::ProductScratch scratch;
  detail::product3(a.grid, a.coeffs, b.coeffs, c.coeffs, aliasing, out.coeffs, scratch);
  return out;
}

SpectralState conjugate_state(const SpectralState& state) {
  SpectralState out(state.grid, state.time);
  for (std::size_t j = 0; j < out.coeffs.size(); ++j) {
    const int k = state.grid.mode(j);
    out.coeffs[j] = std::conj(state.coeffs[state.grid.wrapped_index(-static_cast<long long>(k))]);
  }
  return out;
}

SpectralState scale_state(const SpectralState& state, Complex c) {
  SpectralState out = state;
  for (auto& z : out.coeffs) z *= c;
  return out;
}

SpectralState add_states(const SpectralState& a, const SpectralState& b) {
  detail::require_same_grid(a.grid, b.grid);
  SpectralState out = a;
  for (std::size_t j = 0; j < out.coeffs.size(); ++j) out.coeffs[j] += b.coeffs[j];
  return out;
}

SpectralState subtract_states(const SpectralState& a, const SpectralState& b) {
  detail::require_same_grid(a.grid, b.grid);
  SpectralState out = a;
  for (std::size_t j = 0; j < out.coeffs.size(); ++j) out.coeffs[j] -= b.coeffs[j];
  return out;
}

SpectralState project_low_modes(const SpectralState& state, int n0) {
  if (n0 < 1 || n0 > state.grid.num_modes()) {
    throw InvalidInput("projector cut-off N0=" + std::to_string(n0) + " must lie in [1, K=" +
                       std::to_string(state.grid.num_modes()) + "]");
  }
  SpectralState out = state;
  for (std::size_t j = 0; j < out.coeffs.size(); ++j) {
    // |k| > N0/2 with N0/2 taken exactly (N0 may be odd)
    if (2 * std::abs(state.grid.mode(j)) > n0) out.coeffs[j] = Complex{};
  }
  return out;
}

}  // namespace snlse
