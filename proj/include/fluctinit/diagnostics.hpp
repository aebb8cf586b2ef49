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

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fluctinit/datasets.hpp"
#include "fluctinit/kernel.hpp"
#include "fluctinit/network.hpp"

namespace fluctinit {

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<std::size_t> counts;

  std::size_t total() const;
};

/// Freedman–Diaconis bin width 2·IQR·n^{-1/3}; one bin if the IQR is zero.
std::vector<double> freedman_diaconis_edges(std::span<const double> values, std::size_t max_bins = 1000);
/// Histogram over `edges`; values outside fall into the end bins.
Histogram histogram(std::span<const double> values, std::vector<double> edges);

/// Per-neuron time-averaged membrane statistics of one population.
struct MembraneStats {
  std::string population;
  Eigen::VectorXd mu_hat;
  Eigen::VectorXd sigma_hat;
  Histogram potentials;  // pooled post-warmup values of all neurons
  std::size_t steps = 0;  // post-warmup steps per neuron
};

/// Simulates the network without threshold or reset over all samples of
/// `data` played back to back as one stream, discards the first
/// `warmup_steps` and returns statistics for every population (readout last).
/// Throws InvalidArgument if fewer than 100 steps remain.
std::vector<MembraneStats> measure_membrane_stats(const Network& net, const DenseSpikes& data,
                                                  std::size_t warmup_steps);

/// Default warmup: 5 τ_mem of the slowest hidden population.
std::size_t default_warmup_steps(const Network& net);

/// Reference distribution for the Kolmogorov–Smirnov comparison.
struct Distribution {
  enum class Kind { Normal, Gamma, Nakagami };
  Kind kind = Kind::Normal;
  double a = 0.0;  // Normal: mean;  Gamma: shape; Nakagami: m
  double b = 1.0;  // Normal: sd;    Gamma: scale; Nakagami: Ω

  static Distribution normal(double mean, double sd) { return {Kind::Normal, mean, sd}; }
  static Distribution gamma(double shape, double scale) { return {Kind::Gamma, shape, scale}; }
  static Distribution nakagami(double m, double omega) { return {Kind::Nakagami, m, omega}; }

  double cdf(double x) const;
  double quantile(double p) const;
  double mean() const;
  std::string describe() const;
};

/// Sampling distributions of the measured membrane statistics of a neuron
/// with n random inputs at rate ν targeted to σ_U (μ_U = 0).
struct SamplingTheory {
  Distribution mu_hat;       // Normal(0, σ_U² ν ε̄²/ε̂)
  Distribution sigma2_hat;   // Gamma(n/2, 2σ_U²/n)
  Distribution sigma_hat;    // Nakagami(n/2, σ_U²)
  double mean_driven_fraction = 0.0;  // P(μ̂_U ≥ θ)
};

SamplingTheory sampling_theory(std::size_t n, double nu, const KernelIntegrals& eps, double sigma_u,
                               double theta = 1.0);

struct KsResult {
  std::size_t n = 0;
  double statistic = 0.0;
  double critical = 0.0;  // asymptotic critical value at `level`
  double p_value = 0.0;
  bool pass = false;
};

/// Two-sided one-sample KS test. Requires at least 100 samples.
KsResult distribution_compare(std::span<const double> samples, const Distribution& reference,
                              double level = 0.01);

struct SpikeTrainStats {
  Eigen::VectorXd rate_hz;                // per neuron
  std::vector<double> isi_cv;             // neurons with ≥ 3 spikes in some sample
  std::vector<double> population_rate_std_hz;  // per sample
};

/// Rasters are per-sample (neurons × steps) spike matrices at step `dt` (s).
/// ISIs are taken within samples; the population rate (Hz per neuron) is
/// filtered with an exponential kernel of time constant `tau_filter`.
SpikeTrainStats spiketrain_stats(std::span<const Eigen::MatrixXd> rasters, double dt, double tau_filter = 5e-3);

void write_membrane_stats_csv(std::ostream& out, std::span<const MembraneStats> stats);
void write_histogram_csv(std::ostream& out, std::span<const MembraneStats> stats);
void write_spiketrain_csv(std::ostream& out, const std::string& population, const SpikeTrainStats& stats);

}  // namespace fluctinit
