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
#include <vector>

#include <Eigen/Core>

namespace fluctinit {

/// LIF neuron parameters; times in seconds, potentials in threshold units.
struct NeuronParams {
  double tau_mem = 20e-3;
  double tau_syn = 10e-3;
  double theta = 1.0;
  double dt = 2e-3;

  void validate() const;
  double lambda_mem() const;
  double lambda_syn() const;
};

enum class LayerKind { Hidden, Readout };

/// Excitatory/inhibitory split of a hidden layer obeying Dale's law.
struct DaleConfig {
  std::size_t n_e = 0;
  std::size_t n_i = 0;
  NeuronParams exc{20e-3, 10e-3};
  NeuronParams inh{10e-3, 5e-3};
  bool exc_recurrence = false;
};

struct LayerConfig {
  std::size_t n = 0;
  NeuronParams neuron;
  LayerKind kind = LayerKind::Hidden;
  bool recurrent = false;
  std::optional<DaleConfig> dale;
  bool skip_to_readout = false;
};

/// A group of neurons sharing time constants. Hidden layers own one population,
/// Dale layers two (excitatory first, then inhibitory); the readout is last.
struct Population {
  std::string name;
  std::size_t size = 0;
  NeuronParams neuron;
  bool spiking = true;
  int layer = 0;  // hidden layer index, -1 for the readout
};

inline constexpr int kInputSource = -1;

/// Weight block feeding the synaptic current of one population:
///   I[n+1] = λ_syn I[n] + W S_source[n],  contributing `sign`·I to the membrane.
struct Connection {
  std::string name;
  int source = kInputSource;  // population index or kInputSource
  int target = 0;
  double sign = 1.0;
  double lambda_syn = 0.0;
  bool non_negative = false;  // Dale constraint, enforced after every update
  Eigen::MatrixXd weights;    // rows: target neurons, cols: source neurons
};

/// Connection graph of a dense spiking network.
///
/// Block names: "L<k>.ff", "L<k>.rec" for plain layers; "L<k>.FE", "L<k>.FI",
/// "L<k>.RE", "L<k>.RI", "L<k>.IE", "L<k>.II" for Dale layers; "out.ff" for the
/// last hidden layer into the readout and "out.skip<k>" for skip connections.
class Network {
 public:
  Network() = default;

  /// Builds an all-zero network. `layers` lists hidden layers followed by
  /// exactly one readout layer.
  static Network build(std::size_t n_inputs, std::span<const LayerConfig> layers);

  std::size_t n_inputs() const { return n_inputs_; }
  double dt() const { return dt_; }
  std::size_t n_hidden_layers() const { return layer_populations_.size(); }
  std::size_t n_outputs() const { return populations_.back().size; }
  int readout() const { return static_cast<int>(populations_.size()) - 1; }

  const std::vector<Population>& populations() const { return populations_; }
  const std::vector<Connection>& connections() const { return connections_; }
  std::vector<Connection>& connections() { return connections_; }
  const std::vector<LayerConfig>& layer_configs() const { return configs_; }

  /// Population indices of hidden layer `k` (one, or E then I for Dale layers).
  const std::vector<int>& layer_populations(std::size_t k) const {
    return layer_populations_.at(k);
  }
  std::size_t layer_size(std::size_t k) const;

  Connection& connection(const std::string& name);
  const Connection& connection(const std::string& name) const;
  bool has_connection(const std::string& name) const;

  /// Connections whose target is population `p`.
  std::vector<int> inputs_of(int p) const;

  /// Clamps every Dale-constrained block to non-negative values.
  void enforce_sign_constraints();

 private:
  std::size_t n_inputs_ = 0;
  double dt_ = 0.0;
  std::vector<LayerConfig> configs_;
  std::vector<Population> populations_;
  std::vector<Connection> connections_;
  std::vector<std::vector<int>> layer_populations_;
};

}  // namespace fluctinit
