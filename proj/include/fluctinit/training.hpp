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
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fluctinit/datasets.hpp"
#include "fluctinit/network.hpp"
#include "fluctinit/optimizer.hpp"
#include "fluctinit/simulate.hpp"

namespace fluctinit {

/// Activity penalty λ·g with bound v (spike counts per sample).
struct RegularizerConfig {
  double strength = 0.0;
  double bound = 0.0;
};

struct LossConfig {
  bool supervised = true;
  std::optional<RegularizerConfig> upper;  // population-level soft upper bound
  std::optional<RegularizerConfig> lower;  // per-neuron lower bound (homeostasis)
};

/// Softmax cross-entropy of one score vector; writes ∂loss/∂scores if `grad` is set.
double cross_entropy(const Eigen::VectorXd& scores, std::uint32_t label, Eigen::VectorXd* grad = nullptr);

/// ([mean_i ζ_i - v]₊)² for one layer and one sample (unscaled).
double upper_penalty(const Eigen::VectorXd& counts, double bound);
/// (1/M) Σ_i ([v - ζ_i]₊)² for one layer and one sample (unscaled).
double lower_penalty(const Eigen::VectorXd& counts, double bound);

/// λ times the per-layer penalties summed over layers.
double regularizer_upper(std::span<const Eigen::VectorXd> layer_counts, const RegularizerConfig& cfg);
double regularizer_lower(std::span<const Eigen::VectorXd> layer_counts, const RegularizerConfig& cfg);

/// Loss terms summed over the samples of a batch.
struct LossSums {
  double supervised = 0.0;
  double upper = 0.0;
  double lower = 0.0;
  std::size_t correct = 0;
  std::size_t samples = 0;
  std::vector<Eigen::VectorXd> counts;  // per hidden layer: spike counts summed over samples

  double total() const { return supervised + upper + lower; }
  LossSums& operator+=(const LossSums& o);
};

/// Gradients of the summed loss; divide by the batch size for the mean.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;      // per connection
  std::vector<double> abs_spike_grad;         // per hidden layer: Σ |∂L/∂S|
  std::vector<double> spike_grad_count;       // entries summed above
  double abs_readout_grad = 0.0;              // Σ |∂L/∂U_out| over steps
  double readout_grad_count = 0.0;

  static Gradients zeros(const Network& net);
  Gradients& operator+=(const Gradients& o);
};

struct BackwardResult {
  LossSums loss;
  Gradients grads;
};

/// Evaluates the loss of a recorded trace and, if `backward`, its surrogate
/// gradient by reverse-mode sweep of the forward recursion. The reset factor
/// (1 - S[n]) is a constant in the backward pass; scores are max over time
/// with ties routed to the latest maximum.
BackwardResult backprop_through_time(const Network& net, const Trace& trace,
                                     std::span<const std::uint32_t> labels, const LossConfig& loss,
                                     const SurrogateConfig& surrogate, const SimOptions& opts,
                                     bool backward = true);

/// Forward + backward over `samples` of `data` in fixed 64-sample shards,
/// reduced in shard order. Gradients are for the mean loss over the samples.
BackwardResult batch_gradients(const Network& net, const DenseSpikes& data,
                               std::span<const std::size_t> samples, const LossConfig& loss,
                               const SurrogateConfig& surrogate, const SimOptions& opts = {},
                               std::size_t workers = 1, bool backward = true);

/// Per-layer mean |∂L/∂S| and mean |∂L/∂W| (weights into the layer); the last
/// entry of each vector is the readout (|∂L/∂U_out| for the spike column).
struct GradientProbe {
  std::vector<double> spike_grad;
  std::vector<double> weight_grad;
};

GradientProbe probe_from(const Network& net, const Gradients& mean_grads);
GradientProbe gradient_probe(const Network& net, const DenseSpikes& data,
                             std::span<const std::size_t> samples, const LossConfig& loss,
                             const SurrogateConfig& surrogate, std::size_t workers = 1);

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 400;
  OptimizerKind optimizer = OptimizerKind::Smorms3;
  double eta = 1e-2;
  RegularizerConfig upper{0.01, 0.0};  // bound 0: duration_ms / 100 (10 Hz)
  bool use_upper = true;
  RegularizerConfig lower{1.0, 1.0};
  std::size_t priming_epochs = 0;
  bool ongoing_homeostasis = false;
  SurrogateConfig surrogate;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 0 is the untrained network
  std::string phase;      // "init", "priming" or "supervised"
  std::string split;      // "train" or "valid"
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<double> layer_rates_hz;
  std::vector<double> active_fraction;  // per hidden layer: neurons with mean count ≥ 1
  GradientProbe probe;                  // train rows only
};

struct TrainingLog {
  std::vector<EpochRecord> records;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch training: `priming_epochs` on the activity terms only, then
/// `epochs` supervised. Records epoch 0 (untrained), then train and valid rows
/// per epoch. Throws NumericalError on a non-finite loss.
TrainingLog train(Network& net, const DenseSpikes& train_data, const DenseSpikes& valid_data,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Loss, accuracy, rates and active fractions without updates.
EpochRecord evaluate(const Network& net, const DenseSpikes& data, const LossConfig& loss,
                     const SurrogateConfig& surrogate, std::size_t workers = 1);

/// CSV: epoch,phase,split,loss,accuracy,rate_L<k>...,active_L<k>...,grad_spike_L<k>...,
/// grad_spike_out,grad_w_L<k>...,grad_w_out
void write_training_log_csv(std::ostream& out, const TrainingLog& log, std::size_t n_hidden);

}  // namespace fluctinit
