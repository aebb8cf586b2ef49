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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "fluctinit/kernel.hpp"

namespace fluctinit {

/// Desired membrane-potential statistics, in threshold units (θ = 1 by default).
///
/// Exactly one of `sigma_u` and `xi` is set. ξ = (θ - μ_U)/σ_U is converted to
/// σ_U on use; `alpha` is the feed-forward share of σ_U² in recurrent layers.
struct FluctuationTarget {
  double mu_u = 0.0;
  std::optional<double> sigma_u;
  std::optional<double> xi;
  double alpha = 0.9;
  double theta = 1.0;

  static FluctuationTarget with_sigma(double sigma_u, double mu_u = 0.0);
  static FluctuationTarget with_xi(double xi, double mu_u = 0.0);

  void validate() const;
  double sigma() const;
};

/// Statistics of the presynaptic population of a layer.
struct InputStats {
  std::size_t n_in = 0;
  double nu = 0.0;                 // Hz
  std::size_t n_rec = 0;           // recurrent inputs, 0 if none
  std::optional<double> nu_rec;    // defaults to nu

  void validate() const;
  double recurrent_rate() const { return nu_rec.value_or(nu); }
};

/// Population statistics for sign-constrained (Dale) layers.
///
/// Feed-forward Dale layers use n_e/n_i with rates nu_e/nu_i. Layers with
/// excitatory recurrence use n_f (feed-forward excitatory), n_r (recurrent
/// excitatory), n_i (recurrent inhibitory) and a common rate nu_e.
struct DalianStats {
  std::size_t n_e = 0;
  std::size_t n_i = 0;
  std::size_t n_f = 0;
  std::size_t n_r = 0;
  double nu_e = 0.0;
  double nu_i = 0.0;
  KernelIntegrals eps_e;
  KernelIntegrals eps_i;
};

struct Normal {
  double mu = 0.0;
  double sigma = 0.0;
};
struct Exponential {
  double lambda = 1.0;
};
struct LogNormal {
  double mu = 0.0;
  double sigma = 1.0;
};
struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

using WeightFamily = std::variant<Normal, Exponential, LogNormal, Uniform>;

enum class SignConstraint { Free, NonNegative };

/// Distribution of one connection block. `rows` are postsynaptic neurons,
/// `cols` presynaptic ones.
struct WeightSpec {
  WeightFamily family = Normal{};
  SignConstraint sign = SignConstraint::Free;
  std::size_t rows = 0;
  std::size_t cols = 0;

  void validate() const;
  double mean() const;         // E[w]
  double second_moment() const;  // E[w²]
  std::string describe() const;
};

struct RecurrentSpecs {
  WeightSpec ff;
  WeightSpec rec;
};

struct DalianSpecs {
  WeightSpec exc;
  WeightSpec inh;
};

struct DalianRecurrentSpecs {
  WeightSpec ff;
  WeightSpec rec_exc;
  WeightSpec inh;
};

/// Predicted membrane statistics.
struct Fluctuations {
  double mu_u = 0.0;
  double sigma_u = 0.0;
};

/// Normal(μ_W, σ_W²) feed-forward weights reaching the target (no recurrence).
/// Throws UnreachableTarget if σ_W² would be negative.
WeightSpec init_feedforward(const FluctuationTarget& target, const InputStats& stats,
                            const KernelIntegrals& eps);

/// Normal feed-forward and recurrent weights with a common mean; α splits σ_U².
/// Assumes the recurrent rate equals `stats.recurrent_rate()`.
RecurrentSpecs init_recurrent(const FluctuationTarget& target, const InputStats& stats,
                              const KernelIntegrals& eps);

/// Exponential excitatory/inhibitory weights for a balanced (μ_U = 0) Dale layer.
DalianSpecs init_dalian_ff_exp(const FluctuationTarget& target, const DalianStats& stats);

/// Exponential weights for a Dale layer with feed-forward excitation, recurrent
/// excitation and recurrent inhibition; α is the feed-forward share of the
/// excitatory variance.
DalianRecurrentSpecs init_dalian_rec_exp(const FluctuationTarget& target,
                                         const DalianStats& stats);

/// Log-normal variants (σ = 1 for every population).
DalianSpecs init_dalian_lognormal_ff(const FluctuationTarget& target, const DalianStats& stats);
DalianRecurrentSpecs init_dalian_lognormal_rec(const FluctuationTarget& target,
                                               const DalianStats& stats);

/// Kaiming/He: Normal(0, 2/n).
WeightSpec init_kaiming(std::size_t n);

/// One term of a membrane-statistics prediction: `n` presynaptic neurons at
/// rate `nu` with weights from `spec`, entering with `sign` (+1 or -1).
struct InputBlock {
  const WeightSpec* spec = nullptr;
  std::size_t n = 0;
  double nu = 0.0;
  KernelIntegrals eps;
  double sign = 1.0;
};

/// μ_U = Σ sign·n·E[w]·ν·ε̄,  σ_U² = Σ n·E[w²]·ν·ε̂.
Fluctuations predict_fluctuations(std::span<const InputBlock> blocks);
Fluctuations predict_fluctuations(const WeightSpec& spec, const InputStats& stats,
                                  const KernelIntegrals& eps);
Fluctuations predict_fluctuations(const RecurrentSpecs& specs, const InputStats& stats,
                                  const KernelIntegrals& eps);
Fluctuations predict_fluctuations(const DalianSpecs& specs, const DalianStats& stats);
Fluctuations predict_fluctuations(const DalianRecurrentSpecs& specs, const DalianStats& stats);

/// Sampled weights feeding a population; rows are postsynaptic neurons.
struct SampledBlock {
  const Eigen::MatrixXd* weights = nullptr;
  double nu = 0.0;
  KernelIntegrals eps;
  double sign = 1.0;
};

/// Per-neuron prediction from concrete weights:
/// μ_i = Σ_j sign·w_ij ν ε̄, σ_i² = Σ_j w_ij² ν ε̂.
struct PerNeuronFluctuations {
  Eigen::VectorXd mu_u;
  Eigen::VectorXd sigma_u;
};
PerNeuronFluctuations predict_fluctuations_sampled(std::span<const SampledBlock> blocks);

/// I.i.d. draws from `spec` with shape (rows, cols); deterministic in the seed.
/// Normal under NonNegative is rejected rather than clamped.
Eigen::MatrixXd sample_weights(const WeightSpec& spec, std::uint64_t seed);

}  // namespace fluctinit
