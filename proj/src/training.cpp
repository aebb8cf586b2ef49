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

#include "fluctinit/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "fluctinit/error.hpp"

namespace fluctinit {

double cross_entropy(const Eigen::VectorXd& scores, std::uint32_t label, Eigen::VectorXd* grad) {
  if (label >= scores.size()) throw InvalidArgument("loss: label " + std::to_string(label) + " out of range");
  const double m = scores.maxCoeff();
  const Eigen::VectorXd e = (scores.array() - m).exp();
  const double z = e.sum();
  if (grad) {
    *grad = e / z;
    (*grad)(label) -= 1.0;
  }
  return std::log(z) - (scores(label) - m);
}

double upper_penalty(const Eigen::VectorXd& counts, double bound) {
  if (counts.size() == 0) return 0.0;
  const double excess = std::max(0.0, counts.mean() - bound);
  return excess * excess;
}

double lower_penalty(const Eigen::VectorXd& counts, double bound) {
  if (counts.size() == 0) return 0.0;
  return (bound - counts.array()).max(0.0).square().sum() / static_cast<double>(counts.size());
}

double regularizer_upper(std::span<const Eigen::VectorXd> layer_counts, const RegularizerConfig& cfg) {
  double total = 0.0;
  for (const auto& c : layer_counts) total += upper_penalty(c, cfg.bound);
  return cfg.strength * total;
}

double regularizer_lower(std::span<const Eigen::VectorXd> layer_counts, const RegularizerConfig& cfg) {
  double total = 0.0;
  for (const auto& c : layer_counts) total += lower_penalty(c, cfg.bound);
  return cfg.strength * total;
}

LossSums& LossSums::operator+=(const LossSums& o) {
  supervised += o.supervised;
  upper += o.upper;
  lower += o.lower;
  correct += o.correct;
  samples += o.samples;
  if (counts.empty()) {
    counts = o.counts;
  } else {
    for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += o.counts[k];
  }
  return *this;
}

Gradients Gradients::zeros(const Network& net) {
  Gradients g;
  for (const auto& c : net.connections()) {
    g.weights.push_back(Eigen::MatrixXd::Zero(c.weights.rows(), c.weights.cols()));
  }
  g.abs_spike_grad.assign(net.n_hidden_layers(), 0.0);
  g.spike_grad_count.assign(net.n_hidden_layers(), 0.0);
  return g;
}

Gradients& Gradients::operator+=(const Gradients& o) {
  for (std::size_t c = 0; c < weights.size(); ++c) weights[c] += o.weights[c];
  for (std::size_t k = 0; k < abs_spike_grad.size(); ++k) {
    abs_spike_grad[k] += o.abs_spike_grad[k];
    spike_grad_count[k] += o.spike_grad_count[k];
  }
  abs_readout_grad += o.abs_readout_grad;
  readout_grad_count += o.readout_grad_count;
  return *this;
}

namespace {

// dW += G·Sᵀ, skipping zero entries of S.
void accumulate_outer(const Eigen::MatrixXd& g, const Eigen::MatrixXd& s, Eigen::MatrixXd& dw) {
  for (Eigen::Index b = 0; b < s.cols(); ++b) {
    for (Eigen::Index j = 0; j < s.rows(); ++j) {
      const double v = s(j, b);
      if (v != 0.0) dw.col(j) += v * g.col(b);
    }
  }
}

}  // namespace

BackwardResult backprop_through_time(const Network& net, const Trace& trace,
                                     std::span<const std::uint32_t> labels, const LossConfig& loss,
                                     const SurrogateConfig& surrogate, const SimOptions& opts,
                                     bool backward) {
  const std::size_t T = trace.steps;
  const auto B = static_cast<Eigen::Index>(trace.batch);
  if (labels.size() != trace.batch) throw InvalidArgument("bptt: label count does not match batch");
  const auto& pops = net.populations();
  const auto& conns = net.connections();
  if (trace.u.size() != pops.size() || trace.s.size() != pops.size() || trace.inputs.size() != T) {
    throw InvalidArgument("bptt: trace does not match the network (missing recorded state)");
  }
  const std::size_t P = pops.size();
  const std::size_t L = net.n_hidden_layers();
  const auto ro = static_cast<std::size_t>(net.readout());
  const auto C = static_cast<Eigen::Index>(net.n_outputs());

  BackwardResult result;
  result.grads = Gradients::zeros(net);
  LossSums& ls = result.loss;
  ls.samples = trace.batch;

  // Scores: max over time of the readout membrane. Ties go to the latest step so
  // that a silent readout still passes gradient back through the whole trace.
  Eigen::MatrixXd scores = trace.u[ro][0];
  Eigen::MatrixXi argmax = Eigen::MatrixXi::Zero(C, B);
  for (std::size_t n = 1; n <= T; ++n) {
    const auto& u = trace.u[ro][n];
    for (Eigen::Index b = 0; b < B; ++b) {
      for (Eigen::Index c = 0; c < C; ++c) {
        if (u(c, b) >= scores(c, b)) {
          scores(c, b) = u(c, b);
          argmax(c, b) = static_cast<int>(n);
        }
      }
    }
  }
  Eigen::MatrixXd g_scores = Eigen::MatrixXd::Zero(C, B);
  for (Eigen::Index b = 0; b < B; ++b) {
    Eigen::Index best = 0;
    scores.col(b).maxCoeff(&best);
    if (static_cast<std::uint32_t>(best) == labels[static_cast<std::size_t>(b)]) ++ls.correct;
    if (loss.supervised) {
      Eigen::VectorXd g;
      ls.supervised += cross_entropy(scores.col(b), labels[static_cast<std::size_t>(b)], &g);
      g_scores.col(b) = g;
    }
  }

  // Spike counts over steps 1..T and the regularizer gradients w.r.t. them.
  std::vector<Eigen::MatrixXd> counts(P), g_counts(P);
  for (std::size_t p = 0; p < P; ++p) {
    counts[p] = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pops[p].size), B);
    for (std::size_t n = 1; n <= T; ++n) counts[p] += trace.s[p][n];
    g_counts[p] = Eigen::MatrixXd::Zero(counts[p].rows(), B);
  }
  bool any_count_grad = false;
  for (std::size_t k = 0; k < L; ++k) {
    const auto& lp = net.layer_populations(k);
    const auto M = static_cast<double>(net.layer_size(k));
    Eigen::VectorXd layer_total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.layer_size(k)));
    for (Eigen::Index b = 0; b < B; ++b) {
      double sum = 0.0;
      for (int p : lp) sum += counts[static_cast<std::size_t>(p)].col(b).sum();
      if (loss.upper && loss.upper->strength > 0.0) {
        const double excess = std::max(0.0, sum / M - loss.upper->bound);
        ls.upper += loss.upper->strength * excess * excess;
        if (excess > 0.0) {
          any_count_grad = true;
          for (int p : lp) g_counts[static_cast<std::size_t>(p)].col(b).array() += loss.upper->strength * 2.0 * excess / M;
        }
      }
      if (loss.lower && loss.lower->strength > 0.0) {
        for (int p : lp) {
          const auto deficit = (loss.lower->bound - counts[static_cast<std::size_t>(p)].col(b).array()).max(0.0);
          ls.lower += loss.lower->strength * deficit.square().sum() / M;
          if ((deficit > 0.0).any()) any_count_grad = true;
          g_counts[static_cast<std::size_t>(p)].col(b).array() -= loss.lower->strength * 2.0 * deficit / M;
        }
      }
    }
    Eigen::Index offset = 0;
    for (int p : lp) {
      const auto& cnt = counts[static_cast<std::size_t>(p)];
      layer_total.segment(offset, cnt.rows()) = cnt.rowwise().sum();
      offset += cnt.rows();
    }
    ls.counts.push_back(std::move(layer_total));
  }
  if (!backward) return result;

  Gradients& gr = result.grads;
  gr.abs_readout_grad = g_scores.cwiseAbs().sum();
  gr.readout_grad_count = static_cast<double>(C * B);

  const SurrogateConfig& shape = opts.spike_mode == SpikeMode::Smooth ? opts.smooth : surrogate;
  std::vector<double> lambda_mem(P);
  std::vector<std::vector<int>> outgoing(P);
  for (std::size_t p = 0; p < P; ++p) lambda_mem[p] = pops[p].neuron.lambda_mem();
  for (std::size_t c = 0; c < conns.size(); ++c) {
    if (conns[c].source != kInputSource) outgoing[static_cast<std::size_t>(conns[c].source)].push_back(static_cast<int>(c));
  }

  std::vector<Eigen::MatrixXd> gU_next(P), gU(P), gS(P);
  std::vector<Eigen::MatrixXd> gI_next(conns.size()), gI(conns.size());
  std::vector<bool> gI_next_zero(conns.size(), true);
  for (std::size_t p = 0; p < P; ++p) {
    gU_next[p] = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pops[p].size), B);
    gS[p] = gU_next[p];
  }
  for (std::size_t c = 0; c < conns.size(); ++c) gI_next[c] = Eigen::MatrixXd::Zero(conns[c].weights.rows(), B);

  for (std::size_t step = T + 1; step-- > 0;) {
    const std::size_t n = step;
    // ∂L/∂S[n]: regularizer term plus everything S[n] drives at step n+1.
    for (std::size_t p = 0; p < P; ++p) {
      if (!pops[p].spiking) continue;
      if (n >= 1 && any_count_grad) {
        gS[p] = g_counts[p];
      } else {
        gS[p].setZero();
      }
      if (n < T) {
        for (int c : outgoing[p]) {
          if (gI_next_zero[static_cast<std::size_t>(c)]) continue;
          gS[p].noalias() += conns[static_cast<std::size_t>(c)].weights.transpose() * gI_next[static_cast<std::size_t>(c)];
        }
      }
      if (n >= 1 && pops[p].layer >= 0) {
        const auto k = static_cast<std::size_t>(pops[p].layer);
        gr.abs_spike_grad[k] += gS[p].cwiseAbs().sum();
        gr.spike_grad_count[k] += static_cast<double>(gS[p].size());
      }
    }
    // ∂L/∂U[n]
    for (std::size_t p = 0; p < P; ++p) {
      const bool resets = opts.reset && pops[p].spiking;
      if (resets) {
        gU[p] = lambda_mem[p] * (1.0 - trace.s[p][n].array()) * gU_next[p].array();
      } else {
        gU[p] = lambda_mem[p] * gU_next[p];
      }
      if (pops[p].spiking && opts.threshold) {
        const double theta = pops[p].neuron.theta;
        gU[p].array() += trace.u[p][n].unaryExpr([&](double v) {
          return surrogate_derivative(v - theta, shape, theta);
        }).array() * gS[p].array();
      }
      if (p == ro) {
        for (Eigen::Index b = 0; b < B; ++b) {
          for (Eigen::Index c = 0; c < C; ++c) {
            if (argmax(c, b) == static_cast<int>(n)) gU[p](c, b) += g_scores(c, b);
          }
        }
      }
    }
    // ∂L/∂I_c[n] and the weight gradient from step n → n+1.
    for (std::size_t c = 0; c < conns.size(); ++c) {
      const Connection& conn = conns[c];
      const auto t = static_cast<std::size_t>(conn.target);
      if (n < T && !gI_next_zero[c]) {
        const Eigen::MatrixXd& src =
            conn.source == kInputSource ? trace.inputs[n] : trace.s[static_cast<std::size_t>(conn.source)][n];
        accumulate_outer(gI_next[c], src, gr.weights[c]);
      }
      const double gain = conn.sign * (1.0 - lambda_mem[t]);
      if (opts.reset && pops[t].spiking) {
        gI[c] = conn.lambda_syn * gI_next[c].array() + gain * (1.0 - trace.s[t][n].array()) * gU_next[t].array();
      } else {
        gI[c] = conn.lambda_syn * gI_next[c] + gain * gU_next[t];
      }
    }
    std::swap(gU, gU_next);
    std::swap(gI, gI_next);
    for (std::size_t c = 0; c < conns.size(); ++c) gI_next_zero[c] = gI_next[c].isZero(0.0);
  }
  return result;
}

namespace {

constexpr std::size_t kShardSize = 64;

}  // namespace

BackwardResult batch_gradients(const Network& net, const DenseSpikes& data,
                               std::span<const std::size_t> samples, const LossConfig& loss,
                               const SurrogateConfig& surrogate, const SimOptions& opts,
                               std::size_t workers, bool backward) {
  if (samples.empty()) throw InvalidArgument("batch: no samples");
  if (data.n_units != net.n_inputs()) throw InvalidArgument("batch: input width mismatch");
  const std::size_t n_shards = (samples.size() + kShardSize - 1) / kShardSize;
  std::vector<BackwardResult> parts(n_shards);
  auto run_shard = [&](std::size_t s) {
    const auto idx = samples.subspan(s * kShardSize, std::min(kShardSize, samples.size() - s * kShardSize));
    std::vector<std::uint32_t> labels;
    for (std::size_t i : idx) labels.push_back(data.labels.at(i));
    const Trace trace = run_forward(net, input_steps(data, idx), opts);
    parts[s] = backprop_through_time(net, trace, labels, loss, surrogate, opts, backward);
  };
  workers = std::clamp<std::size_t>(workers, 1, n_shards);
  if (workers == 1) {
    for (std::size_t s = 0; s < n_shards; ++s) run_shard(s);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t s = w; s < n_shards; s += workers) run_shard(s);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  BackwardResult total = std::move(parts[0]);
  for (std::size_t s = 1; s < n_shards; ++s) {
    total.loss += parts[s].loss;
    if (backward) total.grads += parts[s].grads;
  }
  if (backward) {
    const double inv = 1.0 / static_cast<double>(samples.size());
    for (auto& w : total.grads.weights) w *= inv;
    for (auto& a : total.grads.abs_spike_grad) a *= inv;
    total.grads.abs_readout_grad *= inv;
  }
  return total;
}

GradientProbe probe_from(const Network& net, const Gradients& g) {
  GradientProbe probe;
  const std::size_t L = net.n_hidden_layers();
  for (std::size_t k = 0; k < L; ++k) {
    probe.spike_grad.push_back(g.spike_grad_count[k] > 0 ? g.abs_spike_grad[k] / g.spike_grad_count[k] : 0.0);
  }
  probe.spike_grad.push_back(g.readout_grad_count > 0 ? g.abs_readout_grad / g.readout_grad_count : 0.0);
  std::vector<double> sum(L + 1, 0.0), count(L + 1, 0.0);
  const auto& conns = net.connections();
  for (std::size_t c = 0; c < conns.size(); ++c) {
    const int layer = net.populations()[static_cast<std::size_t>(conns[c].target)].layer;
    const std::size_t slot = layer < 0 ? L : static_cast<std::size_t>(layer);
    sum[slot] += g.weights[c].cwiseAbs().sum();
    count[slot] += static_cast<double>(g.weights[c].size());
  }
  for (std::size_t k = 0; k <= L; ++k) probe.weight_grad.push_back(count[k] > 0 ? sum[k] / count[k] : 0.0);
  return probe;
}

GradientProbe gradient_probe(const Network& net, const DenseSpikes& data, std::span<const std::size_t> samples,
                             const LossConfig& loss, const SurrogateConfig& surrogate, std::size_t workers) {
  const auto r = batch_gradients(net, data, samples, loss, surrogate, {}, workers, true);
  return probe_from(net, r.grads);
}

namespace {

void fill_activity(const Network& net, const LossSums& ls, double duration_s, EpochRecord& rec) {
  rec.layer_rates_hz.clear();
  rec.active_fraction.clear();
  const auto samples = static_cast<double>(std::max<std::size_t>(ls.samples, 1));
  for (std::size_t k = 0; k < net.n_hidden_layers(); ++k) {
    const Eigen::VectorXd& c = ls.counts.at(k);
    const auto m = static_cast<double>(c.size());
    rec.layer_rates_hz.push_back(c.sum() / (m * samples * duration_s));
    rec.active_fraction.push_back(static_cast<double>((c.array() / samples >= 1.0).count()) / m);
  }
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace

EpochRecord evaluate(const Network& net, const DenseSpikes& data, const LossConfig& loss,
                     const SurrogateConfig& surrogate, std::size_t workers) {
  const auto idx = all_indices(data.n_samples);
  const auto r = batch_gradients(net, data, idx, loss, surrogate, {}, workers, false);
  EpochRecord rec;
  rec.loss = r.loss.total() / static_cast<double>(r.loss.samples);
  rec.accuracy = static_cast<double>(r.loss.correct) / static_cast<double>(r.loss.samples);
  fill_activity(net, r.loss, static_cast<double>(data.n_steps) * net.dt(), rec);
  return rec;
}

TrainingLog train(Network& net, const DenseSpikes& train_data, const DenseSpikes& valid_data,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  if (train_data.n_samples == 0) throw InvalidArgument("train: empty training set");
  if (cfg.batch_size == 0) throw InvalidArgument("train: batch size must be positive");
  const double duration_ms = static_cast<double>(train_data.n_steps) * train_data.dt_ms;
  RegularizerConfig upper = cfg.upper;
  if (upper.bound <= 0.0) upper.bound = duration_ms / 100.0;

  LossConfig supervised_loss;
  if (cfg.use_upper) supervised_loss.upper = upper;
  if (cfg.ongoing_homeostasis) supervised_loss.lower = cfg.lower;
  LossConfig priming_loss;
  priming_loss.supervised = false;
  if (cfg.use_upper) priming_loss.upper = upper;
  priming_loss.lower = cfg.lower;

  Optimizer opt(cfg.optimizer, cfg.eta);
  std::mt19937_64 rng(cfg.seed);
  TrainingLog log;
  const double duration_s = static_cast<double>(train_data.n_steps) * net.dt();
  auto emit = [&](EpochRecord rec) {
    if (on_epoch) on_epoch(rec);
    log.records.push_back(std::move(rec));
  };
  auto emit_valid = [&](std::size_t epoch, const std::string& phase, const LossConfig& loss) {
    if (valid_data.n_samples == 0) return;
    EpochRecord v = evaluate(net, valid_data, loss, cfg.surrogate, cfg.workers);
    v.epoch = epoch;
    v.phase = phase;
    v.split = "valid";
    emit(std::move(v));
  };

  // Epoch 0: the untrained network, with a full-set gradient probe.
  {
    const auto idx = all_indices(train_data.n_samples);
    const LossConfig& loss0 = cfg.priming_epochs > 0 ? priming_loss : supervised_loss;
    const auto r = batch_gradients(net, train_data, idx, loss0, cfg.surrogate, {}, cfg.workers, true);
    EpochRecord rec;
    rec.phase = "init";
    rec.split = "train";
    rec.loss = r.loss.total() / static_cast<double>(r.loss.samples);
    rec.accuracy = static_cast<double>(r.loss.correct) / static_cast<double>(r.loss.samples);
    fill_activity(net, r.loss, duration_s, rec);
    rec.probe = probe_from(net, r.grads);
    emit(std::move(rec));
    emit_valid(0, "init", loss0);
  }

  std::vector<std::size_t> order = all_indices(train_data.n_samples);
  std::vector<Eigen::MatrixXd*> params;
  for (auto& c : net.connections()) params.push_back(&c.weights);

  const std::size_t total_epochs = cfg.priming_epochs + cfg.epochs;
  for (std::size_t epoch = 1; epoch <= total_epochs; ++epoch) {
    const bool priming = epoch <= cfg.priming_epochs;
    const LossConfig& loss = priming ? priming_loss : supervised_loss;
    std::shuffle(order.begin(), order.end(), rng);
    LossSums sums;
    GradientProbe probe_sum;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::span<const std::size_t> batch(order.data() + start, std::min(cfg.batch_size, order.size() - start));
      auto r = batch_gradients(net, train_data, batch, loss, cfg.surrogate, {}, cfg.workers, true);
      if (!std::isfinite(r.loss.total())) {
        throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch));
      }
      for (const auto& g : r.grads.weights) {
        if (!g.allFinite()) throw NumericalError("train: non-finite gradient at epoch " + std::to_string(epoch));
      }
      const GradientProbe p = probe_from(net, r.grads);
      if (probe_sum.spike_grad.empty()) {
        probe_sum = p;
      } else {
        for (std::size_t k = 0; k < p.spike_grad.size(); ++k) probe_sum.spike_grad[k] += p.spike_grad[k];
        for (std::size_t k = 0; k < p.weight_grad.size(); ++k) probe_sum.weight_grad[k] += p.weight_grad[k];
      }
      ++n_batches;
      sums += r.loss;
      opt.step(params, r.grads.weights);
      net.enforce_sign_constraints();
    }
    for (auto& v : probe_sum.spike_grad) v /= static_cast<double>(n_batches);
    for (auto& v : probe_sum.weight_grad) v /= static_cast<double>(n_batches);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.phase = priming ? "priming" : "supervised";
    rec.split = "train";
    rec.loss = sums.total() / static_cast<double>(sums.samples);
    rec.accuracy = static_cast<double>(sums.correct) / static_cast<double>(sums.samples);
    fill_activity(net, sums, duration_s, rec);
    rec.probe = std::move(probe_sum);
    emit(std::move(rec));
    emit_valid(epoch, priming ? "priming" : "supervised", loss);
  }
  return log;
}

void write_training_log_csv(std::ostream& out, const TrainingLog& log, std::size_t n_hidden) {
  out << "epoch,phase,split,loss,accuracy";
  for (std::size_t k = 0; k < n_hidden; ++k) out << ",rate_L" << k;
  for (std::size_t k = 0; k < n_hidden; ++k) out << ",active_L" << k;
  for (std::size_t k = 0; k < n_hidden; ++k) out << ",grad_spike_L" << k;
  out << ",grad_spike_out";
  for (std::size_t k = 0; k < n_hidden; ++k) out << ",grad_w_L" << k;
  out << ",grad_w_out\n";
  out.precision(10);
  for (const auto& r : log.records) {
    out << r.epoch << ',' << r.phase << ',' << r.split << ',' << r.loss << ',' << r.accuracy;
    for (std::size_t k = 0; k < n_hidden; ++k) out << ',' << (k < r.layer_rates_hz.size() ? r.layer_rates_hz[k] : 0.0);
    for (std::size_t k = 0; k < n_hidden; ++k) out << ',' << (k < r.active_fraction.size() ? r.active_fraction[k] : 0.0);
    for (std::size_t k = 0; k <= n_hidden; ++k) {
      out << ',';
      if (k < r.probe.spike_grad.size()) out << r.probe.spike_grad[k];
    }
    for (std::size_t k = 0; k <= n_hidden; ++k) {
      out << ',';
      if (k < r.probe.weight_grad.size()) out << r.probe.weight_grad[k];
    }
    out << '\n';
  }
}

}  // namespace fluctinit
