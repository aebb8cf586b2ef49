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

#pragma once

#include <functional>

namespace fluctinit::special {

/// Standard normal CDF Φ(x).
double normal_cdf(double x);

/// Standard normal quantile Φ⁻¹(p), p in (0, 1).
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0.
///
/// Series expansion for x < a + 1, Lentz continued fraction otherwise.
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// CDF of Gamma(shape k, scale θ).
double gamma_cdf(double x, double shape, double scale);

/// CDF of Nakagami(m, Ω): P(m, m x² / Ω).
double nakagami_cdf(double x, double m, double omega);

/// Quantile by bisection of a monotone CDF on [lo, hi].
double invert_cdf(const std::function<double(double)>& cdf, double p, double lo, double hi);

/// Kolmogorov distribution survival function Q_KS(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}.
double kolmogorov_survival(double lambda);

}  // namespace fluctinit::special
