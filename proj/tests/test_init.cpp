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

#include "fluctinit/error.hpp"
#include "fluctinit/init.hpp"
#include "fluctinit/kernel.hpp"

using namespace fluctinit;

namespace {

// Rounded kernel integrals of the simulated excitatory (20/10 ms) and
// inhibitory (10/5 ms) neurons.
const KernelIntegrals kEpsE{0.0110, 0.0020};
const KernelIntegrals kEpsI{0.0061, 0.0012};

double sigma_of(const WeightSpec& s) { return std::sqrt(s.second_moment() - s.mean() * s.mean()); }

double lambda_of(const WeightSpec& s) { return std::get<Exponential>(s.family).lambda; }
double mu_of(const WeightSpec& s) { return std::get<LogNormal>(s.family).mu; }

DalianStats dalian_ff() {
  DalianStats s;
  s.n_e = 128;
  s.n_i = 32;
  s.nu_e = s.nu_i = 15.8;
  s.eps_e = kEpsE;
  s.eps_i = kEpsI;
  return s;
}

DalianStats dalian_rec() {
  DalianStats s;
  s.n_f = 700;
  s.n_r = 128;
  s.n_i = 32;
  s.nu_e = s.nu_i = 15.8;
  s.eps_e = kEpsE;
  s.eps_i = kEpsI;
  return s;
}

}  // namespace

TEST_SUITE("init") {
  TEST_CASE("feed-forward magnitudes") {
    const auto eps = kernel_integrals_numeric(KernelParams{20e-3, 10e-3}, 2e-3);
    const auto shd = init_feedforward(FluctuationTarget::with_sigma(1.0), {700, 15.8, 0, {}}, eps);
    CHECK(sigma_of(shd) == doctest::Approx(0.21075).epsilon(1e-4));
    const auto randman = init_feedforward(FluctuationTarget::with_sigma(1.0), {20, 5.0, 0, {}}, eps);
    CHECK(sigma_of(randman) == doctest::Approx(2.2164).epsilon(1e-4));
    const auto rounded = init_feedforward(FluctuationTarget::with_sigma(1.0), {20, 5.0, 0, {}}, kEpsE);
    CHECK(sigma_of(rounded) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
    const auto xi = init_feedforward(FluctuationTarget::with_xi(2.0), {20, 5.0, 0, {}}, kEpsE);
    CHECK(xi.mean() == 0.0);
    CHECK(sigma_of(xi) == doctest::Approx(std::sqrt(5.0) / 2.0).epsilon(1e-12));
  }

  TEST_CASE("unreachable target reports the largest feasible xi") {
    FluctuationTarget t = FluctuationTarget::with_sigma(0.01, 0.9);
    try {
      init_feedforward(t, {20, 5.0, 0, {}}, kEpsE);
      FAIL("expected UnreachableTarget");
    } catch (const UnreachableTarget& e) {
      // σ_W² = 0 at σ_U = |μ_W|√(nνε̂), μ_W = μ_U/(nνε̄).
      const double mu_w = 0.9 / (20 * 5.0 * 0.0110);
      const double sigma_min = mu_w * std::sqrt(20 * 5.0 * 0.0020);
      CHECK(e.xi_bound() == doctest::Approx((1.0 - 0.9) / sigma_min).epsilon(1e-12));
    }
  }

  TEST_CASE("recurrent split") {
    FluctuationTarget t = FluctuationTarget::with_sigma(1.0);
    t.alpha = 0.9;
    const InputStats st{700, 15.8, 128, {}};
    const auto r = init_recurrent(t, st, kEpsE);
    CHECK(sigma_of(r.ff) == doctest::Approx(0.2017).epsilon(2e-4));
    CHECK(sigma_of(r.rec) == doctest::Approx(0.1572).epsilon(2e-4));
    CHECK(r.ff.mean() == 0.0);
    const auto f = predict_fluctuations(r, st, kEpsE);
    CHECK(f.mu_u == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(f.sigma_u == doctest::Approx(1.0).epsilon(1e-12));
    t.alpha = 0.999999;
    const auto lim = init_recurrent(t, st, kEpsE);
    CHECK(sigma_of(lim.rec) < 1e-3);
    t.mu_u = 0.3;
    t.alpha = 0.5;
    const auto m = init_recurrent(t, st, kEpsE);
    CHECK(m.ff.mean() == doctest::Approx(m.rec.mean()).epsilon(1e-12));
    const auto fm = predict_fluctuations(m, st, kEpsE);
    CHECK(fm.mu_u == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(fm.sigma_u == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("dalian exponential, feed-forward") {
    const auto s = dalian_ff();
    const auto d = init_dalian_ff_exp(FluctuationTarget::with_sigma(1.0), s);
    CHECK(lambda_of(d.exc) == doctest::Approx(8.439).epsilon(2e-4));
    CHECK(lambda_of(d.inh) == doctest::Approx(1.170).epsilon(5e-4));
    CHECK(lambda_of(d.inh) / lambda_of(d.exc) == doctest::Approx(0.138636).epsilon(1e-5));
    const auto f = predict_fluctuations(d, s);
    CHECK(std::abs(f.mu_u) < 1e-12);
    CHECK(f.sigma_u * f.sigma_u == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(init_dalian_ff_exp(FluctuationTarget::with_sigma(1.0, 0.2), s), InvalidArgument);

    DalianStats sym = s;
    sym.n_i = 128;
    sym.eps_i = kEpsE;
    const auto e = init_dalian_ff_exp(FluctuationTarget::with_sigma(1.0), sym);
    CHECK(lambda_of(e.inh) == doctest::Approx(lambda_of(e.exc)).epsilon(1e-12));
  }

  TEST_CASE("dalian exponential, recurrent") {
    FluctuationTarget t = FluctuationTarget::with_sigma(1.0);
    t.alpha = 0.9;
    const auto s = dalian_rec();
    const auto d = init_dalian_rec_exp(t, s);
    CHECK(lambda_of(d.rec_exc) / lambda_of(d.ff) == doctest::Approx(1.282854).epsilon(1e-6));
    CHECK(lambda_of(d.inh) / lambda_of(d.ff) == doctest::Approx(0.022188).epsilon(1e-4));
    CHECK(lambda_of(d.ff) == doctest::Approx(50.1394).epsilon(1e-5));
    CHECK(lambda_of(d.rec_exc) == doctest::Approx(64.3215).epsilon(1e-5));
    CHECK(lambda_of(d.inh) == doctest::Approx(1.11249).epsilon(1e-5));
    const auto f = predict_fluctuations(d, s);
    CHECK(std::abs(f.mu_u) < 1e-12);
    CHECK(f.sigma_u == doctest::Approx(1.0).epsilon(1e-12));
    // Feed-forward share of the excitatory variance is α.
    const double vf = 700 * d.ff.second_moment() * 15.8 * kEpsE.eps_hat;
    const double vr = 128 * d.rec_exc.second_moment() * 15.8 * kEpsE.eps_hat;
    CHECK(vf / (vf + vr) == doctest::Approx(0.9).epsilon(1e-12));
    t.alpha = 1.0 - 1e-9;
    CHECK(init_dalian_rec_exp(t, s).rec_exc.mean() < 1e-5);
    t.alpha = 1.0;
    CHECK_THROWS_AS(init_dalian_rec_exp(t, s), InvalidArgument);
  }

  TEST_CASE("dalian log-normal") {
    const auto s = dalian_ff();
    const auto d = init_dalian_lognormal_ff(FluctuationTarget::with_sigma(1.0), s);
    CHECK(mu_of(d.exc) == doctest::Approx(-2.78634).epsilon(1e-5));
    CHECK(mu_of(d.inh) == doctest::Approx(-0.81044).epsilon(1e-5));
    const auto f = predict_fluctuations(d, s);
    CHECK(std::abs(f.mu_u) < 1e-12);
    CHECK(f.sigma_u == doctest::Approx(1.0).epsilon(1e-12));

    FluctuationTarget t = FluctuationTarget::with_sigma(1.0);
    t.alpha = 0.9;
    const auto r = init_dalian_lognormal_rec(t, dalian_rec());
    CHECK(mu_of(r.ff) == doctest::Approx(-4.56823).epsilon(1e-5));
    CHECK(mu_of(r.rec_exc) == doctest::Approx(-4.81732).epsilon(1e-5));
    CHECK(mu_of(r.inh) == doctest::Approx(-0.76003).epsilon(1e-5));
    const auto fr = predict_fluctuations(r, dalian_rec());
    CHECK(std::abs(fr.mu_u) < 1e-12);
    CHECK(fr.sigma_u == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("kaiming") {
    CHECK(sigma_of(init_kaiming(100)) * sigma_of(init_kaiming(100)) == doctest::Approx(0.02));
    CHECK(sigma_of(init_kaiming(2)) == doctest::Approx(1.0));
    CHECK(sigma_of(init_kaiming(700)) == doctest::Approx(0.0534522).epsilon(1e-6));
  }

  TEST_CASE("sampling moments and determinism") {
    WeightSpec e{Exponential{2.0}, SignConstraint::NonNegative, 1000, 1000};
    const auto w = sample_weights(e, 3);
    const double mean = w.mean();
    const double var = (w.array() - mean).square().mean();
    CHECK(std::abs(mean - 0.5) < 0.002);
    CHECK(std::abs(var - 0.25) < 0.01);
    WeightSpec l{LogNormal{0.0, 1.0}, SignConstraint::NonNegative, 1000, 1000};
    CHECK(sample_weights(l, 4).mean() == doctest::Approx(std::exp(0.5)).epsilon(0.01));
    WeightSpec n{Normal{0.0, 1.0}, SignConstraint::Free, 10, 7};
    CHECK(sample_weights(n, 9) == sample_weights(n, 9));
    CHECK(sample_weights(n, 9) != sample_weights(n, 10));
    WeightSpec bad{Normal{0.0, 1.0}, SignConstraint::NonNegative, 2, 2};
    CHECK_THROWS_AS(sample_weights(bad, 1), InvalidArgument);
  }

  TEST_CASE("sampled prediction") {
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 50);
    const SampledBlock blocks[] = {{&zero, 10.0, kEpsE, 1.0}};
    const auto f = predict_fluctuations_sampled(blocks);
    CHECK(f.mu_u(0) == 0.0);
    CHECK(f.sigma_u(0) == 0.0);
    Eigen::MatrixXd w(2, 3);
    w << 1, 2, 3, -1, 0, 1;
    const SampledBlock b2[] = {{&w, 10.0, kEpsE, 1.0}};
    const auto g = predict_fluctuations_sampled(b2);
    CHECK(g.mu_u(0) == doctest::Approx(6 * 10 * 0.0110));
    CHECK(g.sigma_u(1) == doctest::Approx(std::sqrt(2 * 10 * 0.0020)));
  }
}
