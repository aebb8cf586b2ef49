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
#include <span>
#include <vector>

#include <Eigen/Core>

namespace fluctinit {

enum class OptimizerKind { Smorms3, Sgd };

/// Per-tensor SMORMS3 accumulators; empty for SGD.
struct Smorms3State {
  Eigen::ArrayXXd g1, g2, m;
};

/// SMORMS3 or plain SGD applied after every mini-batch.
///
/// SMORMS3 with r = 1/(m+1) from the previous m:
///   g1 ← (1-r) g1 + r g,  g2 ← (1-r) g2 + r g²,  m ← 1 + m (1 - g1²/(g2+ε))
///   Δθ = -g · min(η, g1²/(g2+ε)) / (√g2 + ε)
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double eta, double epsilon = 1e-16);

  /// Updates every parameter in place. State is created on the first call and
  /// the number and shapes of tensors must not change afterwards.
  void step(std::span<Eigen::MatrixXd* const> params, std::span<const Eigen::MatrixXd> grads);

  OptimizerKind kind() const { return kind_; }
  double eta() const { return eta_; }
  const std::vector<Smorms3State>& state() const { return state_; }

 private:
  OptimizerKind kind_;
  double eta_;
  double eps_;
  std::vector<Smorms3State> state_;
};

}  // namespace fluctinit
