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

#include "fluctinit/init.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "fluctinit/error.hpp"

namespace fluctinit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string("init: ") + what + " must be positive");
  }
}

void require_balanced(const FluctuationTarget& target) {
  if (target.mu_u != 0.0) {
    throw InvalidArgument("init: balanced state required (Dale initialization needs mu_u = 0)");
  }
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("init: alpha must lie in (0, 1)");
}

void require_kernel(const KernelIntegrals& eps, const char* which) {
  if (!(eps.eps_bar > 0.0) || !(eps.eps_hat > 0.0)) {
    throw InvalidArgument(std::string("init: kernel integrals for ") + which +
                          " must be positive");
  }
}

WeightSpec make_spec(WeightFamily family, SignConstraint sign, std::size_t cols) {
  WeightSpec spec;
  spec.family = family;
  spec.sign = sign;
  spec.rows = 1;
  spec.cols = cols;
  return spec;
}

// Largest ξ keeping σ_W² = σ_U²/(nνε̂) - μ_W² non-negative.
double xi_bound(const FluctuationTarget& target, double mu_w, double n_nu_ehat) {
  const double sigma_min = std::abs(mu_w) * std::sqrt(n_nu_ehat);
  if (sigma_min == 0.0) return std::numeric_limits<double>::infinity();
  return (target.theta - target.mu_u) / sigma_min;
}

[[noreturn]] void throw_unreachable(const char* which, double variance, double bound) {
  std::ostringstream msg;
  msg << "init: target unreachable, " << which << " variance would be " << variance
      << " (mean-driven); largest feasible xi is " << bound;
  throw UnreachableTarget(msg.str(), bound);
}

}  // namespace

FluctuationTarget FluctuationTarget::with_sigma(double sigma_u, double mu_u) {
  FluctuationTarget t;
  t.mu_u = mu_u;
  t.sigma_u = sigma_u;
  return t;
}

FluctuationTarget FluctuationTarget::with_xi(double xi, double mu_u) {
  FluctuationTarget t;
  t.mu_u = mu_u;
  t.xi = xi;
  return t;
}

void FluctuationTarget::validate() const {
  if (sigma_u.has_value() == xi.has_value()) {
    throw InvalidArgument("init: set exactly one of sigma_u and xi");
  }
  if (!std::isfinite(mu_u) || !(mu_u < theta)) {
    throw InvalidArgument("init: mu_u must lie below the threshold");
  }
  if (sigma_u) require_positive(*sigma_u, "sigma_u");
  if (xi) require_positive(*xi, "xi");
}

double FluctuationTarget::sigma() const {
  validate();
  return sigma_u ? *sigma_u : (theta - mu_u) / *xi;
}

void InputStats::validate() const {
  if (n_in < 1) throw InvalidArgument("init: n_in must be at least 1");
  require_positive(nu, "input rate nu");
  if (nu_rec) require_positive(*nu_rec, "recurrent rate nu_rec");
}

void WeightSpec::validate() const {
  std::visit(overloaded{
                 [&](const Normal& d) {
                   if (!(d.sigma >= 0.0) || !std::isfinite(d.mu)) {
                     throw InvalidArgument("weights: normal sigma must be >= 0");
                   }
                   if (sign == SignConstraint::NonNegative) {
                     throw InvalidArgument(
                         "weights: normal family cannot satisfy a non-negative constraint");
                   }
                 },
                 [](const Exponential& d) { require_positive(d.lambda, "exponential lambda"); },
                 [](const LogNormal& d) {
                   require_positive(d.sigma, "log-normal sigma");
                   if (!std::isfinite(d.mu)) throw InvalidArgument("weights: log-normal mu");
                 },
                 [&](const Uniform& d) {
                   if (!(d.lo <= d.hi)) throw InvalidArgument("weights: uniform lo > hi");
                   if (sign == SignConstraint::NonNegative && d.lo < 0.0) {
                     throw InvalidArgument("weights: uniform lower bound below zero");
                   }
                 },
             },
             family);
}

double WeightSpec::mean() const {
  return std::visit(overloaded{
                        [](const Normal& d) { return d.mu; },
                        [](const Exponential& d) { return 1.0 / d.lambda; },
                        [](const LogNormal& d) { return std::exp(d.mu + 0.5 * d.sigma * d.sigma); },
                        [](const Uniform& d) { return 0.5 * (d.lo + d.hi); },
                    },
                    family);
}

double WeightSpec::second_moment() const {
  return std::visit(
      overloaded{
          [](const Normal& d) { return d.sigma * d.sigma + d.mu * d.mu; },
          [](const Exponential& d) { return 2.0 / (d.lambda * d.lambda); },
          [](const LogNormal& d) { return std::exp(2.0 * d.mu + 2.0 * d.sigma * d.sigma); },
          [](const Uniform& d) { return (d.lo * d.lo + d.lo * d.hi + d.hi * d.hi) / 3.0; },
      },
      family);
}

std::string WeightSpec::describe() const {
  std::ostringstream out;
  out.precision(10);
  std::visit(overloaded{
                 [&](const Normal& d) { out << "normal(mu=" << d.mu << ",sigma=" << d.sigma << ")"; },
                 [&](const Exponential& d) { out << "exponential(lambda=" << d.lambda << ")"; },
                 [&](const LogNormal& d) {
                   out << "lognormal(mu=" << d.mu << ",sigma=" << d.sigma << ")";
                 },
                 [&](const Uniform& d) { out << "uniform(lo=" << d.lo << ",hi=" << d.hi << ")"; },
             },
             family);
  return out.str();
}

WeightSpec init_feedforward(const FluctuationTarget& target, const InputStats& stats,
                            const KernelIntegrals& eps) {
  const double sigma_u = target.sigma();
  stats.validate();
  require_kernel(eps, "feed-forward input");
  if (stats.n_rec != 0) {
    throw InvalidArgument("init: feed-forward initialization used on a recurrent layer");
  }
  const double n = static_cast<double>(stats.n_in);
  const double mu_w = target.mu_u / (n * stats.nu * eps.eps_bar);
  const double n_nu_ehat = n * stats.nu * eps.eps_hat;
  const double var_w = sigma_u * sigma_u / n_nu_ehat - mu_w * mu_w;
  if (var_w < 0.0) throw_unreachable("feed-forward", var_w, xi_bound(target, mu_w, n_nu_ehat));
  return make_spec(Normal{mu_w, std::sqrt(var_w)}, SignConstraint::Free, stats.n_in);
}

RecurrentSpecs init_recurrent(const FluctuationTarget& target, const InputStats& stats,
                              const KernelIntegrals& eps) {
  const double sigma_u = target.sigma();
  stats.validate();
  require_kernel(eps, "recurrent layer");
  require_alpha(target.alpha);
  if (stats.n_rec < 1) throw InvalidArgument("init: recurrent initialization needs n_rec >= 1");

  const double n_f = static_cast<double>(stats.n_in);
  const double n_r = static_cast<double>(stats.n_rec);
  const double nu_f = stats.nu;
  const double nu_r = stats.recurrent_rate();
  const double mu_wv = target.mu_u / ((n_f * nu_f + n_r * nu_r) * eps.eps_bar);
  const double var_u = sigma_u * sigma_u;
  const double var_w = target.alpha * var_u / (n_f * nu_f * eps.eps_hat) - mu_wv * mu_wv;
  const double var_v = (1.0 - target.alpha) * var_u / (n_r * nu_r * eps.eps_hat) - mu_wv * mu_wv;
  if (var_w < 0.0) {
    throw_unreachable("feed-forward", var_w,
                      xi_bound(target, mu_wv, n_f * nu_f * eps.eps_hat / target.alpha));
  }
  if (var_v < 0.0) {
    throw_unreachable("recurrent", var_v,
                      xi_bound(target, mu_wv, n_r * nu_r * eps.eps_hat / (1.0 - target.alpha)));
  }
  return {make_spec(Normal{mu_wv, std::sqrt(var_w)}, SignConstraint::Free, stats.n_in),
          make_spec(Normal{mu_wv, std::sqrt(var_v)}, SignConstraint::Free, stats.n_rec)};
}

namespace {

void validate_dalian_ff(const DalianStats& s) {
  if (s.n_e < 1 || s.n_i < 1) throw InvalidArgument("init: Dale layer needs n_e, n_i >= 1");
  require_positive(s.nu_e, "excitatory rate");
  require_positive(s.nu_i, "inhibitory rate");
  require_kernel(s.eps_e, "excitatory synapses");
  require_kernel(s.eps_i, "inhibitory synapses");
}

void validate_dalian_rec(const DalianStats& s) {
  if (s.n_f < 1 || s.n_r < 1 || s.n_i < 1) {
    throw InvalidArgument("init: recurrent Dale layer needs n_f, n_r, n_i >= 1");
  }
  require_positive(s.nu_e, "population rate");
  if (s.nu_i != 0.0 && s.nu_i != s.nu_e) {
    throw InvalidArgument("init: recurrent Dale initialization assumes one common rate");
  }
  require_kernel(s.eps_e, "excitatory synapses");
  require_kernel(s.eps_i, "inhibitory synapses");
}

// Δ_EI: ratio of inhibitory to excitatory mean drive per unit weight.
double delta_ei(const DalianStats& s) {
  return (s.n_i * s.nu_i * s.eps_i.eps_bar) / (s.n_e * s.nu_e * s.eps_e.eps_bar);
}

}  // namespace

DalianSpecs init_dalian_ff_exp(const FluctuationTarget& target, const DalianStats& stats) {
  const double sigma_u = target.sigma();
  require_balanced(target);
  validate_dalian_ff(stats);
  const double d = delta_ei(stats);
  const double lambda_e =
      std::sqrt(2.0 * (d * d * stats.n_e * stats.nu_e * stats.eps_e.eps_hat +
                       stats.n_i * stats.nu_i * stats.eps_i.eps_hat)) /
      (sigma_u * d);
  const double lambda_i = lambda_e * d;
  return {make_spec(Exponential{lambda_e}, SignConstraint::NonNegative, stats.n_e),
          make_spec(Exponential{lambda_i}, SignConstraint::NonNegative, stats.n_i)};
}

DalianRecurrentSpecs init_dalian_rec_exp(const FluctuationTarget& target,
                                         const DalianStats& stats) {
  const double sigma_u = target.sigma();
  require_balanced(target);
  require_alpha(target.alpha);
  validate_dalian_rec(stats);

  const double alpha = target.alpha;
  const double nu = stats.nu_e;
  const double n_f = static_cast<double>(stats.n_f);
  const double n_r = static_cast<double>(stats.n_r);
  const double n_i = static_cast<double>(stats.n_i);
  const double eb_e = stats.eps_e.eps_bar;
  const double eb_i = stats.eps_i.eps_bar;
  const double eh_e = stats.eps_e.eps_hat;
  const double eh_i = stats.eps_i.eps_hat;

  // λ_R = λ_F Δ_R fixes the feed-forward share α of the excitatory variance,
  // λ_I = λ_F Δ_EI balances the mean, λ_F then sets the total variance.
  const double delta_r = std::sqrt(alpha * n_r / (n_f - alpha * n_f));
  const double delta_ei_r = delta_r * eb_i * n_i / (delta_r * eb_e * n_f + eb_e * n_r);
  const double dr2 = delta_r * delta_r;
  const double de2 = delta_ei_r * delta_ei_r;
  const double lambda_f = std::sqrt(2.0 * nu * (dr2 * de2 * n_f * eh_e + de2 * n_r * eh_e +
                                                dr2 * n_i * eh_i)) /
                          (sigma_u * delta_r * delta_ei_r);

  return {make_spec(Exponential{lambda_f}, SignConstraint::NonNegative, stats.n_f),
          make_spec(Exponential{lambda_f * delta_r}, SignConstraint::NonNegative, stats.n_r),
          make_spec(Exponential{lambda_f * delta_ei_r}, SignConstraint::NonNegative, stats.n_i)};
}

DalianSpecs init_dalian_lognormal_ff(const FluctuationTarget& target, const DalianStats& stats) {
  const double sigma_u = target.sigma();
  require_balanced(target);
  validate_dalian_ff(stats);
  const double d = delta_ei(stats);
  const double mu_e =
      0.5 * std::log(sigma_u * sigma_u /
                     (stats.n_e * stats.nu_e * stats.eps_e.eps_hat +
                      stats.n_i * stats.nu_i * stats.eps_i.eps_hat / (d * d))) -
      1.0;
  const double mu_i = mu_e + std::log(1.0 / d);
  return {make_spec(LogNormal{mu_e, 1.0}, SignConstraint::NonNegative, stats.n_e),
          make_spec(LogNormal{mu_i, 1.0}, SignConstraint::NonNegative, stats.n_i)};
}

DalianRecurrentSpecs init_dalian_lognormal_rec(const FluctuationTarget& target,
                                               const DalianStats& stats) {
  const double sigma_u = target.sigma();
  require_balanced(target);
  require_alpha(target.alpha);
  validate_dalian_rec(stats);

  const double alpha = target.alpha;
  const double nu = stats.nu_e;
  const double n_f = static_cast<double>(stats.n_f);
  const double n_r = static_cast<double>(stats.n_r);
  const double n_i = static_cast<double>(stats.n_i);
  const double eb_e = stats.eps_e.eps_bar;
  const double eb_i = stats.eps_i.eps_bar;
  const double eh_e = stats.eps_e.eps_hat;
  const double eh_i = stats.eps_i.eps_hat;

  // Offsets of μ_R and μ_I relative to μ_F.
  const double delta_r = 0.5 * std::log((n_f - alpha * n_f) / (alpha * n_r));
  const double delta_ei = std::log(eb_e * (std::exp(delta_r) * n_r + n_f) / (n_i * eb_i));
  const double mu_f =
      0.5 * std::log(sigma_u * sigma_u /
                     (nu * (std::exp(2.0 * delta_r) * n_r * eh_e +
                            std::exp(2.0 * delta_ei) * eh_i * n_i + n_f * eh_e))) -
      1.0;

  return {make_spec(LogNormal{mu_f, 1.0}, SignConstraint::NonNegative, stats.n_f),
          make_spec(LogNormal{mu_f + delta_r, 1.0}, SignConstraint::NonNegative, stats.n_r),
          make_spec(LogNormal{mu_f + delta_ei, 1.0}, SignConstraint::NonNegative, stats.n_i)};
}

WeightSpec init_kaiming(std::size_t n) {
  if (n < 1) throw InvalidArgument("init: Kaiming needs n >= 1");
  return make_spec(Normal{0.0, std::sqrt(2.0 / static_cast<double>(n))}, SignConstraint::Free, n);
}

Fluctuations predict_fluctuations(std::span<const InputBlock> blocks) {
  double mu = 0.0;
  double var = 0.0;
  for (const auto& b : blocks) {
    if (b.spec == nullptr) throw InvalidArgument("predict: missing weight spec");
    b.spec->validate();
    const double n = static_cast<double>(b.n);
    mu += b.sign * n * b.spec->mean() * b.nu * b.eps.eps_bar;
    var += n * b.spec->second_moment() * b.nu * b.eps.eps_hat;
  }
  return {mu, std::sqrt(var)};
}

Fluctuations predict_fluctuations(const WeightSpec& spec, const InputStats& stats,
                                  const KernelIntegrals& eps) {
  const InputBlock block{&spec, stats.n_in, stats.nu, eps, 1.0};
  return predict_fluctuations(std::span<const InputBlock>(&block, 1));
}

Fluctuations predict_fluctuations(const RecurrentSpecs& specs, const InputStats& stats,
                                  const KernelIntegrals& eps) {
  const InputBlock blocks[] = {{&specs.ff, stats.n_in, stats.nu, eps, 1.0},
                               {&specs.rec, stats.n_rec, stats.recurrent_rate(), eps, 1.0}};
  return predict_fluctuations(blocks);
}

Fluctuations predict_fluctuations(const DalianSpecs& specs, const DalianStats& stats) {
  const InputBlock blocks[] = {{&specs.exc, stats.n_e, stats.nu_e, stats.eps_e, 1.0},
                               {&specs.inh, stats.n_i, stats.nu_i, stats.eps_i, -1.0}};
  return predict_fluctuations(blocks);
}

Fluctuations predict_fluctuations(const DalianRecurrentSpecs& specs, const DalianStats& stats) {
  const double nu = stats.nu_e;
  const InputBlock blocks[] = {{&specs.ff, stats.n_f, nu, stats.eps_e, 1.0},
                               {&specs.rec_exc, stats.n_r, nu, stats.eps_e, 1.0},
                               {&specs.inh, stats.n_i, nu, stats.eps_i, -1.0}};
  return predict_fluctuations(blocks);
}

PerNeuronFluctuations predict_fluctuations_sampled(std::span<const SampledBlock> blocks) {
  if (blocks.empty()) throw InvalidArgument("predict: no weight blocks");
  const Eigen::Index rows = blocks.front().weights->rows();
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd var = Eigen::VectorXd::Zero(rows);
  for (const auto& b : blocks) {
    if (b.weights == nullptr || b.weights->rows() != rows) {
      throw InvalidArgument("predict: inconsistent postsynaptic sizes");
    }
    mu += b.sign * b.nu * b.eps.eps_bar * b.weights->rowwise().sum();
    var += b.nu * b.eps.eps_hat * b.weights->array().square().matrix().rowwise().sum();
  }
  return {mu, var.cwiseSqrt()};
}

Eigen::MatrixXd sample_weights(const WeightSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd w(spec.rows, spec.cols);
  auto fill = [&](auto&& dist) {
    for (std::size_t r = 0; r < spec.rows; ++r) {
      for (std::size_t c = 0; c < spec.cols; ++c) w(r, c) = dist(rng);
    }
  };
  std::visit(overloaded{
                 [&](const Normal& d) {
                   if (d.sigma == 0.0) {
                     w.setConstant(d.mu);
                   } else {
                     fill(std::normal_distribution<double>(d.mu, d.sigma));
                   }
                 },
                 [&](const Exponential& d) { fill(std::exponential_distribution<double>(d.lambda)); },
                 [&](const LogNormal& d) { fill(std::lognormal_distribution<double>(d.mu, d.sigma)); },
                 [&](const Uniform& d) { fill(std::uniform_real_distribution<double>(d.lo, d.hi)); },
             },
             spec.family);
  return w;
}

}  // namespace fluctinit
