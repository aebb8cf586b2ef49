// Copyright 2026 The fluctinit Authors
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

#include <doctest.h>

#include <cmath>
#include <limits>

#include "fluctinit/error.hpp"
#include "fluctinit/kernel.hpp"

using namespace fluctinit;

TEST_SUITE("kernel") {
  TEST_CASE("psp kernel values") {
    const KernelParams p{20e-3, 10e-3};
    CHECK(psp_kernel(-1e-3, p) == 0.0);
    CHECK(psp_kernel(0.0, p) == doctest::Approx(0.0).epsilon(1e-15));
    const KernelParams equal{20e-3, 20e-3};
    CHECK(psp_kernel(20e-3, equal) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(psp_kernel(20e-3, KernelParams{20e-3, 20e-3 * (1 + 1e-9)}) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
    CHECK_THROWS_AS(psp_kernel(std::numeric_limits<double>::quiet_NaN(), p), InvalidArgument);
    for (double t = 0.0; t < 0.2; t += 1e-3) CHECK(psp_kernel(t, p) >= 0.0);
  }

  TEST_CASE("analytic integrals") {
    const auto e = kernel_integrals_analytic(KernelParams{20e-3, 10e-3});
    CHECK(e.eps_bar == doctest::Approx(0.010).epsilon(1e-12));
    CHECK(e.eps_hat == doctest::Approx(0.01 * 0.01 / 0.06).epsilon(1e-12));
    const auto d = kernel_integrals_analytic(KernelParams{20e-3, 0.0, SynapseKind::Delta});
    CHECK(d.eps_bar == doctest::Approx(0.020));
    CHECK(d.eps_hat == doctest::Approx(0.010));
  }

  TEST_CASE("numeric integrals match the simulated neuron table") {
    const auto e = kernel_integrals_numeric(KernelParams{20e-3, 10e-3}, 2e-3);
    CHECK(std::abs(e.eps_bar - 0.0110) <= 1e-4);
    CHECK(std::abs(e.eps_hat - 0.0020) <= 1e-4);
    const auto i = kernel_integrals_numeric(KernelParams{10e-3, 5e-3}, 2e-3);
    CHECK(std::abs(i.eps_bar - 0.0061) <= 1e-4);
    CHECK(std::abs(i.eps_hat - 0.0012) <= 1e-4);
    // ε̄ of the recursion is dt/(1 - λ_syn).
    CHECK(e.eps_bar == doctest::Approx(2e-3 / (1.0 - std::exp(-0.2))).epsilon(1e-9));
  }

  TEST_CASE("numeric integrals converge to the analytic ones") {
    const KernelParams p{20e-3, 10e-3};
    const auto a = kernel_integrals_analytic(p);
    double prev_bar = 1e9, prev_hat = 1e9;
    for (double dt : {2e-3, 1e-3, 0.5e-3, 0.1e-3}) {
      const auto e = kernel_integrals_numeric(p, dt);
      const double err_bar = std::abs(e.eps_bar - a.eps_bar);
      const double err_hat = std::abs(e.eps_hat - a.eps_hat);
      CHECK(err_bar < prev_bar);
      CHECK(err_hat < prev_hat);
      prev_bar = err_bar;
      prev_hat = err_hat;
    }
    const auto fine = kernel_integrals_numeric(p, 0.01e-3);
    CHECK(std::abs(fine.eps_bar / a.eps_bar - 1.0) < 0.01);
    CHECK(std::abs(fine.eps_hat / a.eps_hat - 1.0) < 0.01);
  }

  TEST_CASE("eps_bar agrees with a trapezoid integral of the kernel") {
    const KernelParams p{20e-3, 10e-3};
    const double dt = 1e-5;
    double sum = 0.0;
    for (double t = 0.0; t < 0.6; t += dt) sum += 0.5 * dt * (psp_kernel(t, p) + psp_kernel(t + dt, p));
    CHECK(sum == doctest::Approx(kernel_integrals_analytic(p).eps_bar).epsilon(1e-4));
  }

  TEST_CASE("short horizon and bad dt are rejected") {
    const KernelParams p{20e-3, 10e-3};
    CHECK_THROWS_AS(kernel_integrals_numeric(p, 2e-3, 0.1), InvalidArgument);
    CHECK_THROWS_AS(kernel_integrals_numeric(p, 0.0), InvalidArgument);
    CHECK_THROWS_AS(kernel_integrals_analytic(KernelParams{-1.0, 1.0}), InvalidArgument);
  }
}
