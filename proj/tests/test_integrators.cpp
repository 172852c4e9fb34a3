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

#include "doctest.h"
#include "snlse/errors.hpp"
#include "snlse/integrators.hpp"
#include "test_util.hpp"

using namespace snlse;
using snlse::testing::max_abs_diff;
using snlse::testing::random_state;

namespace {

SchemeParams params(double mu, double tau, double alpha = 0.0, SchemeKind kind = SchemeKind::kSnrli1) {
  SchemeParams p;
  p.mu = mu;
  p.tau = tau;
  p.noise = QWienerSpec::power_decay(8.0, alpha);
  p.kind = kind;
  return p;
}

}  // namespace

TEST_CASE("scheme names") {
  CHECK(to_string(SchemeKind::kSnrli1) == "SNRLI1");
  CHECK(parse_scheme("sli1") == SchemeKind::kSli1);
  CHECK(parse_scheme("EXACT_LINEAR") == SchemeKind::kExactLinear);
  CHECK_THROWS_AS(parse_scheme("RK4"), InvalidConfiguration);
  CHECK_THROWS_AS(params(0.0, -1.0).validate(), InvalidConfiguration);
  CHECK_THROWS_AS(params(1.0, 0.1, 0.0, SchemeKind::kExactLinear).validate(), InvalidConfiguration);
}

TEST_CASE("g and h terms") {
  const SpectralGrid g(16);
  std::mt19937_64 rng(1);
  const auto u = random_state(g, rng);
  CHECK(max_abs_diff(g_term(u, 0.0), SpectralState(g)) < 1e-16);
  CHECK(max_abs_diff(h_term(u, 0.0), SpectralState(g)) == 0.0);
  const Complex c{0.7, -0.2};
  const double tau = 0.13;
  const int l = 3;
  const auto mode = SpectralState::single_mode(g, c, l);
  const Complex factor = 1.0 - phi1(Complex{0, 2 * tau * l * l});
  const auto gt = g_term(mode, tau);
  CHECK(std::abs(gt.coeff(0) - std::norm(c) * factor) < 1e-15);
  for (int k = 1; k < 8; ++k) CHECK(std::abs(gt.coeff(k)) < 1e-15);
  const auto ht = h_term(mode, tau);
  CHECK(std::abs(ht.coeff(l) - factor * std::norm(c) * c) < 1e-15);
  CHECK(std::abs(ht.coeff(0)) == 0.0);
  CHECK(max_abs_diff(g_term(SpectralState::single_mode(g, 2.5, 0), tau), SpectralState(g)) < 1e-15);
  CHECK(h_term(SpectralState::single_mode(g, 2.5, 0), tau).coeff(0) == Complex{0, 0});
  CHECK(std::abs(g_zero_mode(u, tau) - g_term(u, tau).coeff(0)) < 1e-14);
}

TEST_CASE("free flight when mu and alpha vanish") {
  const SpectralGrid g(32);
  std::mt19937_64 rng(2);
  const auto u = random_state(g, rng);
  const auto p = params(0.0, 0.05);
  CHECK(max_abs_diff(snrli1_step(u, SpectralState(g), p), free_group_apply(u, 0.05)) < 1e-15);
  CHECK(max_abs_diff(sli1_step(u, SpectralState(g), p), free_group_apply(u, 0.05)) < 1e-15);
}

TEST_CASE("single-mode closed forms") {
  const SpectralGrid g(16);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Complex c{unif(rng), unif(rng)};
    const int l = static_cast<int>(rng() % 15) - 7;
    const double tau = 0.5 * (unif(rng) + 1.0) + 1e-3;
    const double mu = 2.0 * unif(rng);
    const auto u = SpectralState::single_mode(g, c, l);
    const auto p = params(mu, tau);
    const Complex phase = std::exp(Complex{0, -double(l) * l * tau});
    const auto nr = snrli1_step(u, SpectralState(g), p);
    CHECK(std::abs(nr.coeff(l) - phase * (1.0 - Complex{0, tau * mu * std::norm(c)}) * c) < 1e-12);
    const Complex ph = phi1(Complex{0, 2.0 * l * l * tau});
    const auto li = sli1_step(u, SpectralState(g), p);
    CHECK(std::abs(li.coeff(l) - phase * (c - Complex{0, tau * mu} * c * std::norm(c) * ph)) < 1e-12);
  }
}

TEST_CASE("consistency with the equation as tau goes to zero") {
  const SpectralGrid g(16);
  std::mt19937_64 rng(4);
  const auto u = random_state(g, rng, 3.0);
  const double mu = 0.8;
  auto rate = [&](double tau) {
    return scale_state(subtract_states(snrli1_step(u, SpectralState(g), params(mu, tau)), u), 1.0 / tau);
  };
  const auto extrapolated = scale_state(subtract_states(scale_state(rate(1e-4), 10.0), rate(1e-3)), 1.0 / 9.0);
  auto target = scale_state(cubic_product(u, u, conjugate_state(u)), Complex{0, -mu});
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double k = g.mode(j);
    target.coeffs[j] += Complex{0, -k * k} * u.coeffs[j];
  }
  const double raw = sobolev_norm(subtract_states(rate(1e-4), target), SobolevIndex(0.0));
  const double refined = sobolev_norm(subtract_states(extrapolated, target), SobolevIndex(0.0));
  CHECK(refined < 1e-4);
  CHECK(refined < raw / 10);
}

TEST_CASE("twisted form") {
  const SpectralGrid g(16);
  std::mt19937_64 rng(5);
  const auto v = random_state(g, rng);
  const auto dw = random_state(g, rng, 4.0);
  auto p = params(0.6, 0.07, 0.3);
  const auto at_zero = snrli1_twisted_step(v, 0.0, dw, p);
  CHECK(max_abs_diff(at_zero, free_group_apply(snrli1_step(v, dw, p), -0.07)) < 1e-12);
  const double t_n = 3.7;
  const auto twisted = snrli1_twisted_step(v, t_n, dw, p);
  const auto direct = free_group_apply(snrli1_step(free_group_apply(v, t_n), dw, p), -(t_n + 0.07));
  CHECK(max_abs_diff(twisted, direct) < 1e-12);
  p.mu = 0.0;
  const auto linear = snrli1_twisted_step(v, t_n, dw, p);
  const auto want = subtract_states(v, scale_state(free_group_apply(dw, -t_n), Complex{0, 0.3}));
  CHECK(max_abs_diff(linear, want) < 1e-14);
  CHECK_THROWS_AS(snrli1_step(v, SpectralState(SpectralGrid(8)), p), InvalidInput);
}

TEST_CASE("SLI1 and SNRLI1 coincide without the nonlinearity") {
  const SpectralGrid g(16);
  std::mt19937_64 rng(6);
  const auto u = random_state(g, rng);
  const auto dw = random_state(g, rng, 4.0);
  const auto p = params(0.0, 0.02, 0.5);
  CHECK(snrli1_step(u, dw, p).coeffs == sli1_step(u, dw, p).coeffs);
}

TEST_CASE("exact linear step") {
  const SpectralGrid g(16);
  std::mt19937_64 rng(7);
  const auto u = random_state(g, rng);
  auto p = params(0.0, 0.04, 0.0, SchemeKind::kExactLinear);
  const auto path = sample_path(p.noise, g, 1, 0, 0.01, 40);
  CHECK(max_abs_diff(exact_linear_step(u, path, 2, p), free_group_apply(u, 0.04)) < 1e-15);
  p.noise = QWienerSpec::none();
  CHECK(max_abs_diff(exact_linear_step(u, sample_path(p.noise, g, 1, 0, 0.01, 40), 2, p),
                     free_group_apply(u, 0.04)) < 1e-15);
  p.mu = 1.0;
  CHECK_THROWS_AS(exact_linear_step(u, path, 2, p), InvalidConfiguration);
}

TEST_CASE("integrate") {
  const SpectralGrid g(32);
  std::mt19937_64 rng(8);
  const auto u0 = random_state(g, rng);
  const auto quiet = params(0.0, 0.01);
  const auto path = sample_path(quiet.noise, g, 3, 0, 0.005, 400);
  const auto none = integrate(u0, path, quiet, 0, 2);
  CHECK(none.snapshots.size() == 1);
  const auto flown = integrate(u0, path, quiet, 200, 2, 50);
  CHECK(max_abs_diff(flown.snapshots.back(), free_group_apply(u0, 2.0)) < 1e-11);
  CHECK(flown.snapshots.back().time == doctest::Approx(2.0));

  const auto noisy = params(1.0, 0.01, 0.5);
  const auto npath = sample_path(noisy.noise, g, 3, 0, 0.005, 400);
  const auto a = integrate(u0, npath, noisy, 200, 2, 1);
  const auto b = integrate(u0, npath, noisy, 200, 2, 7);
  CHECK(a.snapshots.back().coeffs == b.snapshots.back().coeffs);
  CHECK_THROWS_AS(integrate(u0, npath, noisy, 201, 2), InvalidInput);

  SpectralState big = scale_state(u0, 1000.0);
  try {
    integrate(big, npath, params(1.0, 0.01, 0.5), 200, 2);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.step() >= 1);
  }
  SpectralState bad = u0;
  bad.coeffs[3] = Complex{NAN, 0};
  CHECK_THROWS_AS(integrate(bad, npath, noisy, 10, 2), DivergenceError);
}
