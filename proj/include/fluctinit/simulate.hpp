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
#include <vector>

#include <Eigen/Core>

#include "fluctinit/datasets.hpp"
#include "fluctinit/network.hpp"

namespace fluctinit {

/// SuperSpike surrogate h(x) = 1/(β|x| + 1)²; the rescaled variant divides by
/// h(θ) so that the derivative at rest (U = 0) is one.
struct SurrogateConfig {
  double beta = 20.0;
  bool rescaled = false;
};

double surrogate_derivative(double x, const SurrogateConfig& cfg, double theta = 1.0);

/// Smooth spike function whose derivative is the surrogate (x/(β|x|+1), scaled
/// like the surrogate). Used by the differentiable twin network.
double smooth_spike(double x, const SurrogateConfig& cfg, double theta = 1.0);

enum class SpikeMode { Heaviside, Smooth };

struct SimOptions {
  bool threshold = true;  // false: no spikes at all (no-reset diagnostic mode)
  bool reset = true;
  SpikeMode spike_mode = SpikeMode::Heaviside;
  SurrogateConfig smooth;  // shape of the smooth spike function
};

/// Step-by-step simulator owning the state of one batch.
///
/// One call to step() advances every population from step n to n+1:
///   I_c[n+1] = λ_c I_c[n] + W_c S_src[n]
///   U[n+1]   = (λ_mem U[n] + (1 - λ_mem) Σ_c sign_c I_c[n]) (1 - S[n])
///   S[n+1]   = Θ(U[n+1] - θ)
/// Input spikes S_input[n] are passed to the call that advances from n.
class Simulator {
 public:
  Simulator(const Network& net, std::size_t batch, SimOptions opts = {});

  void reset_state();
  void step(const Eigen::MatrixXd& input);

  std::size_t steps_done() const { return steps_; }
  std::size_t batch() const { return batch_; }
  const Eigen::MatrixXd& membrane(int pop) const { return u_[static_cast<std::size_t>(pop)]; }
  const Eigen::MatrixXd& spikes(int pop) const { return s_[static_cast<std::size_t>(pop)]; }
  const Eigen::MatrixXd& current(int conn) const { return i_[static_cast<std::size_t>(conn)]; }

  /// Replaces a population's state (used by single-step tests).
  void set_state(int pop, const Eigen::MatrixXd& u, const Eigen::MatrixXd& s);
  void set_current(int conn, const Eigen::MatrixXd& i);

 private:
  const Network* net_;
  std::size_t batch_;
  SimOptions opts_;
  std::size_t steps_ = 0;
  std::vector<Eigen::MatrixXd> u_, s_, i_;
  std::vector<std::vector<int>> inputs_of_;
  std::vector<double> lambda_mem_;
};

/// Adds W·S to `out`, skipping zero entries of S (spike matrices are sparse).
void accumulate_product(const Eigen::MatrixXd& w, const Eigen::MatrixXd& s, Eigen::MatrixXd& out);

/// Recorded forward pass of one batch: U and S for every population at steps
/// 0..T, plus the input matrices for steps 0..T-1.
struct Trace {
  std::size_t steps = 0;
  std::size_t batch = 0;
  std::vector<std::vector<Eigen::MatrixXd>> u;
  std::vector<std::vector<Eigen::MatrixXd>> s;
  std::vector<Eigen::MatrixXd> inputs;
};

Trace run_forward(const Network& net, std::vector<Eigen::MatrixXd> inputs,
                  const SimOptions& opts = {});

struct RecordFlags {
  bool membrane = false;
  bool spikes = false;
};

/// Output of simulate(); per-sample matrices are (neurons × steps+1).
struct SimulationResult {
  std::size_t steps = 0;
  std::size_t samples = 0;
  std::vector<Eigen::MatrixXd> readout;                  // [sample]
  std::vector<std::vector<Eigen::MatrixXd>> membrane;    // [pop][sample] if recorded
  std::vector<std::vector<Eigen::MatrixXd>> spikes;      // [pop][sample] if recorded
  std::vector<Eigen::MatrixXd> spike_counts;             // [pop]: neurons × samples
  std::vector<double> layer_rates_hz;                    // per hidden layer
};

/// Runs the network over every sample of `data` (binned at the network's dt).
/// Samples are processed in fixed shards; `workers` threads never change results.
SimulationResult simulate(const Network& net, const DenseSpikes& data, RecordFlags record = {},
                          const SimOptions& opts = {}, std::size_t workers = 1);

/// CSV rows "sample,layer,neuron,step,value" of the recorded membranes
/// (layer = population name).
void write_membrane_csv(std::ostream& out, const Network& net, const SimulationResult& result);

}  // namespace fluctinit
