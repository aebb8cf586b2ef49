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

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

#include "fluctinit/special.hpp"

using namespace fluctinit;

TEST_SUITE("special") {
  TEST_CASE("normal cdf and quantile against boost") {
    const boost::math::normal_distribution<double> n;
    for (double x = -8.0; x <= 8.0; x += 0.37) {
      CHECK(special::normal_cdf(x) == doctest::Approx(boost::math::cdf(n, x)).epsilon(1e-12).scale(1e-300));
    }
    for (double p : {1e-10, 1e-4, 0.01, 0.3, 0.5, 0.77, 0.99, 1 - 1e-9}) {
      CHECK(special::normal_quantile(p) == doctest::Approx(boost::math::quantile(n, p)).epsilon(1e-10));
    }
  }

  TEST_CASE("incomplete gamma against boost") {
    for (double a : {0.5, 1.0, 3.7, 10.0, 350.0}) {
      for (double x : {0.01, 0.5, 1.0, 4.0, 9.5, 30.0, 340.0, 360.0}) {
        CHECK(special::gamma_p(a, x) == doctest::Approx(boost::math::gamma_p(a, x)).epsilon(1e-10));
        CHECK(special::gamma_q(a, x) ==
              doctest::Approx(boost::math::gamma_q(a, x)).epsilon(1e-9).scale(1e-300));
      }
    }
    const boost::math::gamma_distribution<double> g(350.0, 2.0 * 0.25 / 700.0);
    for (double x : {0.2, 0.24, 0.25, 0.26, 0.3}) {
      CHECK(special::gamma_cdf(x, 350.0, 2.0 * 0.25 / 700.0) == doctest::Approx(boost::math::cdf(g, x)).epsilon(1e-10));
    }
  }

  TEST_CASE("nakagami quantiles for n = 700, sigma_u = 1/2") {
    auto cdf = [](double x) { return special::nakagami_cdf(x, 350.0, 0.25); };
    CHECK(special::invert_cdf(cdf, 0.005, 0.0, 2.0) == doctest::Approx(0.465748).epsilon(1e-5));
    CHECK(special::invert_cdf(cdf, 0.995, 0.0, 2.0) == doctest::Approx(0.534566).epsilon(1e-5));
  }

  TEST_CASE("kolmogorov survival against the theta-function form") {
    // Q(λ) = 1 - (√(2π)/λ) Σ_k exp(-(2k-1)²π²/(8λ²)), converges fast for small λ.
    const double pi = 3.14159265358979323846;
    for (double l : {0.3, 0.5, 0.8, 1.0, 1.36, 1.63, 2.5}) {
      double sum = 0.0;
      for (int k = 1; k <= 50; ++k) sum += std::exp(-(2.0 * k - 1) * (2.0 * k - 1) * pi * pi / (8.0 * l * l));
      const double q = 1.0 - std::sqrt(2.0 * pi) / l * sum;
      CHECK(special::kolmogorov_survival(l) == doctest::Approx(q).epsilon(1e-10).scale(1e-12));
    }
    CHECK(special::kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(special::kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
    CHECK(special::kolmogorov_survival(0.1) == 1.0);
  }
}
