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

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fluctinit/diagnostics.hpp"
#include "fluctinit/error.hpp"
#include "fluctinit/setup.hpp"

using namespace fluctinit;

namespace {

Network one_layer(std::size_t n_in, std::size_t n_hidden) {
  LayerConfig h;
  h.n = n_hidden;
  LayerConfig o;
  o.kind = LayerKind::Readout;
  o.n = 1;
  const LayerConfig layers[] = {h, o};
  return Network::build(n_in, layers);
}

DenseSpikes constant_input(std::size_t n_units, std::size_t steps) {
  DenseSpikes d;
  d.n_samples = 1;
  d.n_steps = steps;
  d.n_units = n_units;
  d.dt_ms = 2.0;
  d.data.assign(steps * n_units, 1);
  d.labels = {0};
  return d;
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("zero weights give zero statistics") {
    const Network net = one_layer(3, 4);
    const auto stats = measure_membrane_stats(net, constant_input(3, 300), 50);
    REQUIRE(stats.size() == 2);
    CHECK(stats[0].population == "L0.H");
    CHECK(stats[0].mu_hat.isZero(0.0));
    CHECK(stats[0].sigma_hat.isZero(0.0));
    CHECK(stats[0].steps == 250);
    CHECK(stats[0].potentials.total() == 4 * 250);
  }

  TEST_CASE("constant current settles at its fixed point") {
    Network net = one_layer(1, 2);
    net.connection("L0.ff").weights << 0.1, 0.3;
    const double ls = std::exp(-2.0 / 10.0);
    const auto stats = measure_membrane_stats(net, constant_input(1, 1000), default_warmup_steps(net) * 4);
    CHECK(stats[0].mu_hat(0) == doctest::Approx(0.1 / (1 - ls)).epsilon(1e-6));
    CHECK(stats[0].mu_hat(1) == doctest::Approx(0.3 / (1 - ls)).epsilon(1e-6));
    CHECK(stats[0].sigma_hat.maxCoeff() < 1e-6);
  }

  TEST_CASE("too few steps after warmup") {
    const Network net = one_layer(1, 1);
    CHECK_THROWS_AS(measure_membrane_stats(net, constant_input(1, 150), 51), InvalidArgument);
    CHECK(default_warmup_steps(net) == 50);
  }

  TEST_CASE("poisson drive matches the sampling distribution of sigma") {
    const std::size_t n_in = 700, n_neurons = 40;
    const double nu = 15.8;
    Network net = one_layer(n_in, n_neurons);
    InitConfig ic;
    ic.target = FluctuationTarget::with_sigma(0.5);
    ic.nu_hz = nu;
    ic.seed = 5;
    initialize_network(net, ic);
    const DenseSpikes d = bin_counts(generate_poisson(n_in, nu, 20000.0, 2.0, 17), 2.0);
    const auto stats = measure_membrane_stats(net, d, 200);
    const double pop_mean = stats[0].sigma_hat.mean();
    const Distribution nak = Distribution::nakagami(350.0, 0.25);
    CHECK(pop_mean > nak.quantile(0.005));
    CHECK(pop_mean < nak.quantile(0.995));
    CHECK(stats[0].potentials.total() == n_neurons * stats[0].steps);
  }

  TEST_CASE("sampling theory closed forms") {
    KernelIntegrals eps{0.0110, 0.0020};
    const SamplingTheory t = sampling_theory(700, 15.8, eps, 1.0);
    CHECK(t.mu_hat.b * t.mu_hat.b == doctest::Approx(0.9559).epsilon(1e-4));
    CHECK(t.mean_driven_fraction == doctest::Approx(0.153).epsilon(3e-3));
    CHECK(t.sigma2_hat.mean() == doctest::Approx(1.0));
    const double var = t.sigma2_hat.a * t.sigma2_hat.b * t.sigma2_hat.b;
    CHECK(var == doctest::Approx(2.0 / 700.0));
    CHECK(t.sigma_hat.a == 350.0);
    CHECK(t.sigma_hat.b == 1.0);
    CHECK_THROWS_AS(sampling_theory(0, 15.8, eps, 1.0), InvalidArgument);
  }

  TEST_CASE("ks test is calibrated") {
    const Distribution ref = Distribution::gamma(3.0, 0.5);
    std::mt19937_64 rng(2);
    std::gamma_distribution<double> g(3.0, 0.5);
    int passes = 0;
    const int reps = 100;
    for (int r = 0; r < reps; ++r) {
      std::vector<double> v(10000);
      for (auto& x : v) x = g(rng);
      passes += distribution_compare(v, ref).pass ? 1 : 0;
    }
    CHECK(passes >= 95);
    const KsResult one = distribution_compare(std::vector<double>(100, 1.0), Distribution::normal(1.0, 1.0));
    CHECK(one.critical == doctest::Approx(1.6276 / 10.0).epsilon(1e-3));
  }

  TEST_CASE("ks test rejects a mismatched reference") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(1.5, 0.5);
    std::vector<double> v(2000);
    for (auto& x : v) x = n(rng);
    const KsResult r = distribution_compare(v, Distribution::gamma(2.0, 0.75));
    CHECK_FALSE(r.pass);
    CHECK(r.p_value < 0.01);
    CHECK_THROWS_AS(distribution_compare(std::vector<double>(99, 0.0), Distribution::normal(0, 1)),
                    InvalidArgument);
  }

  TEST_CASE("quantiles invert the cdf") {
    for (const auto& d : {Distribution::normal(0.2, 0.7), Distribution::gamma(350.0, 2.0 / 700.0),
                          Distribution::nakagami(10.0, 0.25)}) {
      for (double p : {0.005, 0.3, 0.995}) CHECK(d.cdf(d.quantile(p)) == doctest::Approx(p).epsilon(1e-8));
    }
    const Distribution nak = Distribution::nakagami(350.0, 0.25);
    CHECK(nak.quantile(0.005) == doctest::Approx(0.465748).epsilon(1e-5));
    CHECK(nak.quantile(0.995) == doctest::Approx(0.534566).epsilon(1e-5));
  }

  TEST_CASE("spike train statistics") {
    Eigen::MatrixXd periodic = Eigen::MatrixXd::Zero(2, 1000);
    for (int n = 0; n < 1000; n += 10) periodic(0, n) = 1.0;
    const std::vector<Eigen::MatrixXd> one = {periodic};
    const auto st = spiketrain_stats(one, 2e-3);
    CHECK(st.rate_hz(0) == doctest::Approx(50.0));
    CHECK(st.rate_hz(1) == 0.0);
    REQUIRE(st.isi_cv.size() == 1);
    CHECK(st.isi_cv[0] == doctest::Approx(0.0).epsilon(1e-12));

    std::mt19937_64 rng(4);
    std::bernoulli_distribution spike(0.01);
    Eigen::MatrixXd poisson(1, 200000);
    for (Eigen::Index n = 0; n < poisson.cols(); ++n) poisson(0, n) = spike(rng) ? 1.0 : 0.0;
    const std::vector<Eigen::MatrixXd> p = {poisson};
    const auto sp = spiketrain_stats(p, 2e-3);
    REQUIRE(sp.isi_cv.size() == 1);
    CHECK(sp.isi_cv[0] == doctest::Approx(1.0).epsilon(0.1));

    const std::vector<Eigen::MatrixXd> empty = {Eigen::MatrixXd::Zero(3, 100)};
    const auto se = spiketrain_stats(empty, 2e-3);
    CHECK(se.rate_hz.isZero());
    CHECK(se.isi_cv.empty());
    REQUIRE(se.population_rate_std_hz.size() == 1);
    CHECK(se.population_rate_std_hz[0] == 0.0);
  }

  TEST_CASE("histogram keeps every value") {
    std::vector<double> v;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    for (int i = 0; i < 5000; ++i) v.push_back(n(rng));
    const auto edges = freedman_diaconis_edges(v);
    CHECK(edges.size() > 10);
    CHECK(std::is_sorted(edges.begin(), edges.end()));
    const Histogram h = histogram(v, edges);
    CHECK(h.total() == 5000);
    v.push_back(100.0);
    CHECK(histogram(v, edges).total() == 5001);
    const std::vector<double> same(10, 2.0);
    CHECK(histogram(same, freedman_diaconis_edges(same)).counts.size() == 1);
  }

  TEST_CASE("csv writers") {
    const Network net = one_layer(2, 2);
    const auto stats = measure_membrane_stats(net, constant_input(2, 200), 10);
    std::ostringstream a, b;
    write_membrane_stats_csv(a, stats);
    write_histogram_csv(b, stats);
    CHECK(a.str() == "population,neuron,mu_hat,sigma_hat\nL0.H,0,0,0\nL0.H,1,0,0\nout,0,0,0\n");
    CHECK(b.str().rfind("population,lo,hi,count\n", 0) == 0);
  }
}
