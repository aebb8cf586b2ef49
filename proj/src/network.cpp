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

#include "fluctinit/network.hpp"

#include <cmath>

#include "fluctinit/error.hpp"

namespace fluctinit {

void NeuronParams::validate() const {
  for (double v : {tau_mem, tau_syn, theta, dt}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("neuron: time constants, threshold and dt must be positive");
    }
  }
}

double NeuronParams::lambda_mem() const { return std::exp(-dt / tau_mem); }
double NeuronParams::lambda_syn() const { return std::exp(-dt / tau_syn); }

namespace {

std::string layer_prefix(std::size_t k) { return "L" + std::to_string(k) + "."; }

}  // namespace

Network Network::build(std::size_t n_inputs, std::span<const LayerConfig> layers) {
  if (n_inputs < 1) throw InvalidArgument("network: needs at least one input");
  if (layers.empty() || layers.back().kind != LayerKind::Readout) {
    throw InvalidArgument("network: last layer must be the readout");
  }
  Network net;
  net.n_inputs_ = n_inputs;
  net.configs_.assign(layers.begin(), layers.end());
  net.dt_ = layers.back().neuron.dt;

  auto add_population = [&](std::string name, std::size_t size, const NeuronParams& neuron,
                            bool spiking, int layer) {
    neuron.validate();
    if (std::abs(neuron.dt - net.dt_) > 1e-15) {
      throw InvalidArgument("network: all layers must share one time step");
    }
    if (size < 1) throw InvalidArgument("network: empty population " + name);
    net.populations_.push_back({std::move(name), size, neuron, spiking, layer});
    return static_cast<int>(net.populations_.size()) - 1;
  };
  auto add_connection = [&](std::string name, int source, int target, double sign,
                            double lambda_syn, bool non_negative) {
    const std::size_t cols = source == kInputSource
                                 ? n_inputs
                                 : net.populations_.at(static_cast<std::size_t>(source)).size;
    const std::size_t rows = net.populations_.at(static_cast<std::size_t>(target)).size;
    Connection c;
    c.name = std::move(name);
    c.source = source;
    c.target = target;
    c.sign = sign;
    c.lambda_syn = lambda_syn;
    c.non_negative = non_negative;
    c.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                      static_cast<Eigen::Index>(cols));
    net.connections_.push_back(std::move(c));
  };

  int previous_output = kInputSource;  // excitatory output of the previous layer
  std::vector<int> skip_sources;
  for (std::size_t k = 0; k + 1 < layers.size(); ++k) {
    const LayerConfig& cfg = layers[k];
    if (cfg.kind != LayerKind::Hidden) throw InvalidArgument("network: readout must be last");
    const std::string pre = layer_prefix(k);
    const int layer = static_cast<int>(k);
    if (cfg.dale) {
      const DaleConfig& d = *cfg.dale;
      if (d.n_e + d.n_i != cfg.n) throw InvalidArgument("network: n_e + n_i must equal n");
      const int e = add_population(pre + "E", d.n_e, d.exc, true, layer);
      const int i = add_population(pre + "I", d.n_i, d.inh, true, layer);
      const double ls_e = d.exc.lambda_syn();
      const double ls_i = d.inh.lambda_syn();
      add_connection(pre + "FE", previous_output, e, 1.0, ls_e, true);
      add_connection(pre + "FI", previous_output, i, 1.0, ls_e, true);
      if (d.exc_recurrence) {
        add_connection(pre + "RE", e, e, 1.0, ls_e, true);
        add_connection(pre + "RI", e, i, 1.0, ls_e, true);
      }
      add_connection(pre + "IE", i, e, -1.0, ls_i, true);
      add_connection(pre + "II", i, i, -1.0, ls_i, true);
      net.layer_populations_.push_back({e, i});
      previous_output = e;
    } else {
      const int p = add_population(pre + "H", cfg.n, cfg.neuron, true, layer);
      add_connection(pre + "ff", previous_output, p, 1.0, cfg.neuron.lambda_syn(), false);
      if (cfg.recurrent) add_connection(pre + "rec", p, p, 1.0, cfg.neuron.lambda_syn(), false);
      net.layer_populations_.push_back({p});
      previous_output = p;
    }
    if (cfg.skip_to_readout && k + 2 < layers.size()) skip_sources.push_back(previous_output);
  }

  const LayerConfig& out = layers.back();
  const int readout = add_population("out", out.n, out.neuron, false, -1);
  add_connection("out.ff", previous_output, readout, 1.0, out.neuron.lambda_syn(), false);
  for (int src : skip_sources) {
    add_connection("out.skip" + std::to_string(net.populations_[src].layer), src, readout, 1.0,
                   out.neuron.lambda_syn(), false);
  }
  return net;
}

std::size_t Network::layer_size(std::size_t k) const {
  std::size_t n = 0;
  for (int p : layer_populations(k)) n += populations_[static_cast<std::size_t>(p)].size;
  return n;
}

Connection& Network::connection(const std::string& name) {
  for (auto& c : connections_) {
    if (c.name == name) return c;
  }
  throw InvalidArgument("network: no connection named " + name);
}

const Connection& Network::connection(const std::string& name) const {
  return const_cast<Network*>(this)->connection(name);
}

bool Network::has_connection(const std::string& name) const {
  for (const auto& c : connections_) {
    if (c.name == name) return true;
  }
  return false;
}

std::vector<int> Network::inputs_of(int p) const {
  std::vector<int> out;
  for (std::size_t c = 0; c < connections_.size(); ++c) {
    if (connections_[c].target == p) out.push_back(static_cast<int>(c));
  }
  return out;
}

void Network::enforce_sign_constraints() {
  for (auto& c : connections_) {
    if (c.non_negative) c.weights = c.weights.cwiseMax(0.0);
  }
}

}  // namespace fluctinit
