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

namespace fluctinit {

enum class SynapseKind { CurrentBased, Delta };

/// Time constants of the postsynaptic potential kernel, in seconds.
struct KernelParams {
  double tau_mem = 20e-3;
  double tau_syn = 10e-3;
  SynapseKind synapse = SynapseKind::CurrentBased;

  void validate() const;
};

/// Integrals of the PSP kernel: eps_bar = ∫ε(t)dt, eps_hat = ∫ε(t)²dt (seconds).
struct KernelIntegrals {
  double eps_bar = 0.0;
  double eps_hat = 0.0;
};

/// Continuous-time PSP kernel ε(t) for a unit-weight input spike at t = 0.
///
/// Current-based synapses give the difference of exponentials
/// (e^{-t/τ_syn} - e^{-t/τ_mem}) / (1 - τ_mem/τ_syn); when the two time
/// constants agree to a relative 1e-6 the alpha-function limit
/// (t/τ_syn) e^{-t/τ_mem} is returned instead. Delta synapses give e^{-t/τ_mem}.
/// Negative times evaluate to zero. Throws InvalidArgument for non-finite t.
double psp_kernel(double t, const KernelParams& p);

/// Closed-form kernel integrals of the continuous-time kernel.
KernelIntegrals kernel_integrals_analytic(const KernelParams& p);

/// Default integration horizon: 30 times the slower time constant.
double default_kernel_horizon(const KernelParams& p);

/// Kernel integrals of the discrete-time neuron actually simulated.
///
/// Runs the simulator's update recursion (see dynamics) for a single unit
/// input spike at step 0 and sums u[n]·dt and u[n]²·dt over `horizon`.
/// Throws InvalidArgument when dt <= 0 or when the horizon is shorter than
/// 20 max(τ_mem, τ_syn), which would truncate the tail above 1e-6.
KernelIntegrals kernel_integrals_numeric(const KernelParams& p, double dt, double horizon);
KernelIntegrals kernel_integrals_numeric(const KernelParams& p, double dt);

}  // namespace fluctinit
