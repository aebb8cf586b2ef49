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

#include "fluctinit/optimizer.hpp"

#include <cmath>

#include "fluctinit/error.hpp"

namespace fluctinit {

Optimizer::Optimizer(OptimizerKind kind, double eta, double epsilon)
    : kind_(kind), eta_(eta), eps_(epsilon) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("optimizer: learning rate must be positive");
  if (!(epsilon > 0.0)) throw InvalidArgument("optimizer: epsilon must be positive");
}

void Optimizer::step(std::span<Eigen::MatrixXd* const> params, std::span<const Eigen::MatrixXd> grads) {
  if (params.size() != grads.size()) throw InvalidArgument("optimizer: parameter/gradient count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k]->rows() != grads[k].rows() || params[k]->cols() != grads[k].cols()) {
      throw InvalidArgument("optimizer: gradient shape mismatch");
    }
  }
  if (kind_ == OptimizerKind::Sgd) {
    for (std::size_t k = 0; k < params.size(); ++k) *params[k] -= eta_ * grads[k];
    return;
  }
  if (state_.empty()) {
    for (const auto& g : grads) {
      state_.push_back({Eigen::ArrayXXd::Zero(g.rows(), g.cols()), Eigen::ArrayXXd::Zero(g.rows(), g.cols()),
                        Eigen::ArrayXXd::Ones(g.rows(), g.cols())});
    }
  } else if (state_.size() != grads.size()) {
    throw InvalidArgument("optimizer: number of parameter tensors changed");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    Smorms3State& s = state_[k];
    if (s.g1.rows() != grads[k].rows() || s.g1.cols() != grads[k].cols()) {
      throw InvalidArgument("optimizer: parameter shape changed");
    }
    const auto g = grads[k].array();
    const Eigen::ArrayXXd r = 1.0 / (s.m + 1.0);
    s.g1 = (1.0 - r) * s.g1 + r * g;
    s.g2 = (1.0 - r) * s.g2 + r * g.square();
    const Eigen::ArrayXXd ratio = s.g1.square() / (s.g2 + eps_);
    s.m = 1.0 + s.m * (1.0 - ratio);
    params[k]->array() -= g * ratio.min(eta_) / (s.g2.sqrt() + eps_);
  }
}

}  // namespace fluctinit
