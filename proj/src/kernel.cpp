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

#include "fluctinit/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fluctinit/error.hpp"

namespace fluctinit {

namespace {

constexpr double kEqualTauTolerance = 1e-6;

bool equal_time_constants(const KernelParams& p) {
  return std::abs(1.0 - p.tau_mem / p.tau_syn) < kEqualTauTolerance;
}

}  // namespace

void KernelParams::validate() const {
  if (!(tau_mem > 0.0) || !std::isfinite(tau_mem)) {
    throw InvalidArgument("kernel: tau_mem must be positive");
  }
  if (synapse == SynapseKind::CurrentBased && (!(tau_syn > 0.0) || !std::isfinite(tau_syn))) {
    throw InvalidArgument("kernel: tau_syn must be positive for current-based synapses");
  }
}

double psp_kernel(double t, const KernelParams& p) {
  if (!std::isfinite(t)) throw InvalidArgument("kernel: non-finite time");
  p.validate();
  if (t < 0.0) return 0.0;
  if (p.synapse == SynapseKind::Delta) return std::exp(-t / p.tau_mem);
  if (equal_time_constants(p)) return (t / p.tau_syn) * std::exp(-t / p.tau_mem);
  return (std::exp(-t / p.tau_syn) - std::exp(-t / p.tau_mem)) / (1.0 - p.tau_mem / p.tau_syn);
}

KernelIntegrals kernel_integrals_analytic(const KernelParams& p) {
  p.validate();
  if (p.synapse == SynapseKind::Delta) return {p.tau_mem, p.tau_mem / 2.0};
  // Both integrals are continuous through τ_mem = τ_syn, so no special case.
  return {p.tau_syn, p.tau_syn * p.tau_syn / (2.0 * (p.tau_syn + p.tau_mem))};
}

double default_kernel_horizon(const KernelParams& p) {
  const double slow =
      p.synapse == SynapseKind::Delta ? p.tau_mem : std::max(p.tau_mem, p.tau_syn);
  return 30.0 * slow;
}

KernelIntegrals kernel_integrals_numeric(const KernelParams& p, double dt, double horizon) {
  p.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("kernel: dt must be positive");
  const double slow =
      p.synapse == SynapseKind::Delta ? p.tau_mem : std::max(p.tau_mem, p.tau_syn);
  if (!(horizon >= 20.0 * slow)) {
    throw InvalidArgument("kernel: horizon " + std::to_string(horizon) +
                          " s is shorter than 20 time constants");
  }

  const double lambda_mem = std::exp(-dt / p.tau_mem);
  const auto steps = static_cast<long>(std::ceil(horizon / dt));
  KernelIntegrals out;

  if (p.synapse == SynapseKind::Delta) {
    // u[n+1] = λ_mem u[n] + S[n]
    double u = 0.0;
    for (long n = 0; n < steps; ++n) {
      u = lambda_mem * u + (n == 0 ? 1.0 : 0.0);
      out.eps_bar += u * dt;
      out.eps_hat += u * u * dt;
    }
    return out;
  }

  // Same recursion as the LIF layer step, unit weight, spike at step 0:
  //   I[n+1] = λ_syn I[n] + S[n]
  //   U[n+1] = λ_mem U[n] + (1 - λ_mem) I[n]
  const double lambda_syn = std::exp(-dt / p.tau_syn);
  double u = 0.0;
  double current = 0.0;
  for (long n = 0; n < steps; ++n) {
    const double u_next = lambda_mem * u + (1.0 - lambda_mem) * current;
    current = lambda_syn * current + (n == 0 ? 1.0 : 0.0);
    u = u_next;
    out.eps_bar += u * dt;
    out.eps_hat += u * u * dt;
  }
  return out;
}

KernelIntegrals kernel_integrals_numeric(const KernelParams& p, double dt) {
  return kernel_integrals_numeric(p, dt, default_kernel_horizon(p));
}

}  // namespace fluctinit
