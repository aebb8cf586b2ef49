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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fluctinit/init.hpp"
#include "fluctinit/network.hpp"

namespace fluctinit {

enum class InitStrategy { Fluctuation, Kaiming, DalianExponential, DalianLogNormal };

/// How to initialize every block of a network. All presynaptic populations are
/// assumed to fire at `nu_hz` (the dataset rate).
struct InitConfig {
  InitStrategy strategy = InitStrategy::Fluctuation;
  FluctuationTarget target = FluctuationTarget::with_sigma(1.0);
  std::optional<FluctuationTarget> readout_target;  // defaults to `target`
  double nu_hz = 5.0;
  std::uint64_t seed = 1;
};

struct BlockInit {
  std::string connection;
  WeightSpec spec;
};

struct PopulationPrediction {
  std::string population;
  KernelIntegrals eps;  // kernel of the population's own synapse type
  Fluctuations predicted;
  double mean_driven_fraction = 0.0;  // predicted P(μ̂_U ≥ θ) across neurons
};

struct InitReport {
  std::vector<BlockInit> blocks;
  std::vector<PopulationPrediction> populations;
};

/// Computes the weight distribution of every connection and the predicted
/// membrane statistics of every population without touching the weights.
InitReport plan_initialization(const Network& net, const InitConfig& cfg);

/// plan_initialization followed by sampling; block c uses seed + c.
InitReport initialize_network(Network& net, const InitConfig& cfg);

/// Kernel integrals of the simulated neuron for presynaptic time constant
/// `tau_syn` onto a membrane with `tau_mem`.
KernelIntegrals kernel_for(double tau_mem, double tau_syn, double dt);

}  // namespace fluctinit
