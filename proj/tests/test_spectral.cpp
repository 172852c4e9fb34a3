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
#include <numbers>

#include "doctest.h"
#include "snlse/errors.hpp"
#include "snlse/spectral.hpp"
#include "test_util.hpp"

using namespace snlse;
using snlse::testing::max_abs_diff;
using snlse::testing::random_state;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("grid rejects bad sizes and maps modes") {
  CHECK_THROWS_AS(SpectralGrid(12), InvalidInput);
  CHECK_THROWS_AS(SpectralGrid(4), InvalidInput);
  const SpectralGrid g(8);
  CHECK(g.mode(0) == 0);
  CHECK(g.mode(3) == 3);
  CHECK(g.mode(4) == -4);
  CHECK(g.mode(7) == -1);
  CHECK(g.index(-1) == 7);
  CHECK_THROWS_AS(g.index(4), InvalidInput);
  CHECK(g.wrapped_index(4) == 4);
  CHECK(g.wrapped_index(-9) == 7);
  CHECK(g.collocation_points().front() == doctest::Approx(-kPi));
}

TEST_CASE("forward transform of simple functions") {
  const SpectralGrid g(16);
  const auto xs = g.collocation_points();
  CVector c(16, Complex{2.5, -1.0}), cosv(16);
  for (std::size_t j = 0; j < 16; ++j) cosv[j] = std::cos(xs[j]);
  const auto constant = forward_transform(g, c);
  CHECK(std::abs(constant.coeff(0) - Complex{2.5, -1.0}) < 1e-15);
  for (int k = 1; k < 8; ++k) CHECK(std::abs(constant.coeff(k)) < 1e-15);
  const auto cs = forward_transform(g, cosv);
  CHECK(std::abs(cs.coeff(1) - 0.5) < 1e-15);
  CHECK(std::abs(cs.coeff(-1) - 0.5) < 1e-15);
  CHECK(std::abs(cs.coeff(0)) < 1e-15);
  CHECK(std::abs(cs.coeff(2)) < 1e-15);
  CHECK_THROWS_AS(forward_transform(g, CVector(8)), InvalidInput);
}

TEST_CASE("smooth rational data matches quadrature coefficients") {
  // Reference values from 40-digit quadrature of u(x) cos(kx) / (2 pi).
  const auto u = snlse::testing::smooth_rational(64);
  CHECK(u.coeff(0).real() == doctest::Approx(1.154700538379251529).epsilon(1e-14));
  CHECK(u.coeff(1).real() == doctest::Approx(0.30940107675850305804).epsilon(1e-14));
  CHECK(u.coeff(-5).real() == doctest::Approx(0.0015948932890535046237).epsilon(1e-12));
  CHECK(std::abs(u.coeff(3).imag()) < 1e-15);

  // Independent trapezoid oracle on 8K points.
  const int fine = 8 * 64;
  for (int k : {0, 2, 7, -11}) {
    Complex acc{0.0, 0.0};
    for (int j = 0; j < fine; ++j) {
      const double x = -kPi + 2 * kPi * j / fine;
      acc += 2.0 / (2.0 - std::cos(x)) * std::exp(Complex{0.0, -k * x});
    }
    acc /= static_cast<double>(fine);
    CHECK(std::abs(u.coeff(k) - acc) < 1e-14);
  }
}

TEST_CASE("transform round trip") {
  std::mt19937_64 rng(3);
  const SpectralGrid g(32);
  const auto u = random_state(g, rng, 0.0);
  const auto back = forward_transform(g, inverse_transform(u));
  CHECK(max_abs_diff(u, back) < 1e-14);
}

TEST_CASE("sobolev norm") {
  const SpectralGrid g(8);
  CHECK(sobolev_norm(SpectralState::single_mode(g, 1.0, 1), SobolevIndex(1.0)) == doctest::Approx(2.0));
  CHECK(sobolev_norm(SpectralState::single_mode(g, Complex{3, 4}, 0), SobolevIndex(2.7)) ==
        doctest::Approx(5.0));
  CHECK_THROWS_AS(SobolevIndex(-0.5), InvalidInput);
  // 40-digit summation of the exact geometric coefficients.
  const auto u = snlse::testing::smooth_rational(256);
  CHECK(sobolev_norm(u, SobolevIndex(1.0)) == doctest::Approx(1.4968785127468695668).epsilon(1e-14));
  CHECK(sobolev_norm(u, SobolevIndex(0.0)) == doctest::Approx(1.2408064788027994653).epsilon(1e-14));
}

TEST_CASE("free group") {
  std::mt19937_64 rng(5);
  const SpectralGrid g(32);
  const auto u = random_state(g, rng);
  CHECK(max_abs_diff(free_group_apply(u, 0.0), u) == 0.0);
  const auto one = free_group_apply(SpectralState::single_mode(g, 1.0, 1), 0.3);
  CHECK(std::abs(one.coeff(1) - std::exp(Complex{0, -0.3})) < 1e-15);
  for (int trial = 0; trial < 20; ++trial) {
    const double t = std::uniform_real_distribution<double>(-10, 10)(rng);
    const double s = std::uniform_real_distribution<double>(-10, 10)(rng);
    const auto a = free_group_apply(free_group_apply(u, t), s);
    const auto b = free_group_apply(u, t + s);
    CHECK(max_abs_diff(a, b) < 1e-12);
    CHECK(sobolev_norm(free_group_apply(u, t), SobolevIndex(1.0)) ==
          doctest::Approx(sobolev_norm(u, SobolevIndex(1.0))).epsilon(1e-13));
  }
}

TEST_CASE("phi1 values") {
  CHECK(phi1(Complex{0, 0}) == Complex{1, 0});
  const Complex ipi{0.0, kPi};
  CHECK(std::abs(phi1(ipi) - Complex{0.0, 2.0 / kPi}) < 1e-15);
  // Extended-precision oracles.
  const Complex tiny = phi1(Complex{1e-9, 0.0});
  CHECK(std::abs(tiny.real() - 1.0000000005000000001666666667) < 1e-15);
  struct Case {
    Complex z, want;
  };
  const Case cases[] = {
      {{0.0, 1e-6}, {0.99999999999983333333, 4.9999999999995831071e-7}},
      {{1e-3, 2.0}, {0.45474933504118874699, 0.70850897043076207037}},
      {{0.0, 0.5}, {0.95885107720840600055, 0.24483487621925456777}},
      {{-30.0, 0.0}, {0.033333333333330214126, 0.0}},
      {{0.0, 50.0}, {-0.0052474970740785757183, 0.00070067943015773451862}},
      {{0.0, 9.9e-5}, {0.9999999983665000008, 0.000049499999959570872032}},
  };
  for (const auto& c : cases) CHECK(std::abs(phi1(c.z) - c.want) <= 4e-16 * std::abs(c.want));
}

TEST_CASE("phi1 operator") {
  std::mt19937_64 rng(7);
  const SpectralGrid g(16);
  const auto u = random_state(g, rng);
  CHECK(max_abs_diff(phi1_operator_apply(u, 0.0), u) == 0.0);
  const double tau = 0.3;
  const auto m = SpectralState::single_mode(g, 1.0, -1);
  CHECK(std::abs(phi1_operator_apply(m, Complex{0, -2 * tau}).coeff(-1) - phi1(Complex{0, 2 * tau})) < 1e-16);
  const auto out = phi1_operator_apply(u, Complex{0, -2 * tau});
  for (int k = -8; k < 8; ++k) {
    const Complex want = k == 0 ? u.coeff(0) : phi1(Complex{0, 2 * tau * k * k}) * u.coeff(k);
    CHECK(std::abs(out.coeff(k) - want) < 1e-15);
  }
}

TEST_CASE("products") {
  std::mt19937_64 rng(11);
  const SpectralGrid g(64);
  const auto b = random_state(g, rng);
  const auto one = SpectralState::single_mode(g, 1.0, 0);
  CHECK(max_abs_diff(pointwise_product(one, b), b) < 1e-14);
  const auto e1 = SpectralState::single_mode(g, 1.0, 1);
  const auto sq = pointwise_product(e1, e1, Aliasing::kPadded);
  CHECK(std::abs(sq.coeff(2) - 1.0) < 1e-15);

  // Low-band states: padded products equal the exact coefficient convolution.
  const int band = g.num_modes() / 6;
  const auto a = random_state(g, rng, 1.0, band);
  const auto c = random_state(g, rng, 1.0, band);
  const auto prod = pointwise_product(a, c, Aliasing::kPadded);
  const auto cube = cubic_product(a, c, b, Aliasing::kPadded);
  const int half = g.num_modes() / 2;
  for (int k = -half; k < half; ++k) {
    Complex want{0, 0};
    for (int l = -band; l <= band; ++l) {
      if (std::abs(k - l) <= band) want += a.coeff(l) * c.coeff(k - l);
    }
    CHECK(std::abs(prod.coeff(k) - want) < 1e-14);
  }
  for (int k = -half; k < half; ++k) {
    Complex want{0, 0};
    for (int l = -band; l <= band; ++l) {
      for (int m = -band; m <= band; ++m) {
        const int n = k - l - m;
        if (n >= -half && n < half) want += a.coeff(l) * c.coeff(m) * b.coeff(n);
      }
    }
    CHECK(std::abs(cube.coeff(k) - want) < 1e-13);
  }
  CHECK_THROWS_AS(pointwise_product(a, SpectralState(SpectralGrid(8))), InvalidInput);
  CHECK_THROWS_AS(cubic_product(a, a, SpectralState(SpectralGrid(8))), InvalidInput);
}

TEST_CASE("conjugate, scale, add") {
  std::mt19937_64 rng(13);
  const SpectralGrid g(16);
  const auto u = random_state(g, rng);
  const auto c = conjugate_state(SpectralState::single_mode(g, Complex{1, 2}, 1));
  CHECK(c.coeff(-1) == Complex{1, -2});
  CHECK(c.coeff(1) == Complex{0, 0});
  CHECK(max_abs_diff(scale_state(u, 0.0), SpectralState(g)) == 0.0);
  CHECK(conjugate_state(conjugate_state(u)).coeffs == u.coeffs);
  CHECK(max_abs_diff(subtract_states(add_states(u, u), u), u) < 1e-15);
  CHECK_THROWS_AS(add_states(u, SpectralState(SpectralGrid(8))), InvalidInput);
  // Spectral conjugation is pointwise conjugation on the grid.
  const auto vals = inverse_transform(u);
  const auto cv = inverse_transform(conjugate_state(u));
  for (std::size_t j = 0; j < vals.size(); ++j) CHECK(std::abs(cv[j] - std::conj(vals[j])) < 1e-14);
}

TEST_CASE("low-mode projector") {
  std::mt19937_64 rng(17);
  const SpectralGrid g(32);
  const auto u = random_state(g, rng);
  CHECK(project_low_modes(u, 32).coeffs == u.coeffs);
  CHECK(max_abs_diff(project_low_modes(SpectralState::single_mode(g, 1.0, 15), 2), SpectralState(g)) == 0.0);
  const auto p = project_low_modes(u, 16);
  CHECK(sobolev_norm(p, SobolevIndex(1.0)) <= sobolev_norm(u, SobolevIndex(1.0)));
  CHECK(project_low_modes(p, 16).coeffs == p.coeffs);
  CHECK_THROWS_AS(project_low_modes(u, 64), InvalidInput);
}
