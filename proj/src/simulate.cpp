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

#include "fluctinit/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include "fluctinit/error.hpp"

namespace fluctinit {

double surrogate_derivative(double x, const SurrogateConfig& cfg, double theta) {
  const double d = cfg.beta * std::abs(x) + 1.0;
  double h = 1.0 / (d * d);
  if (cfg.rescaled) {
    const double rest = cfg.beta * theta + 1.0;
    h *= rest * rest;
  }
  return h;
}

double smooth_spike(double x, const SurrogateConfig& cfg, double theta) {
  double f = x / (cfg.beta * std::abs(x) + 1.0);
  if (cfg.rescaled) {
    const double rest = cfg.beta * theta + 1.0;
    f *= rest * rest;
  }
  return f;
}

void accumulate_product(const Eigen::MatrixXd& w, const Eigen::MatrixXd& s, Eigen::MatrixXd& out) {
  for (Eigen::Index b = 0; b < s.cols(); ++b) {
    const double* col = s.col(b).data();
    for (Eigen::Index j = 0; j < s.rows(); ++j) {
      const double v = col[j];
      if (v == 0.0) continue;
      if (v == 1.0) {
        out.col(b) += w.col(j);
      } else {
        out.col(b) += v * w.col(j);
      }
    }
  }
}

Simulator::Simulator(const Network& net, std::size_t batch, SimOptions opts)
    : net_(&net), batch_(batch), opts_(opts) {
  const auto& pops = net.populations();
  for (std::size_t p = 0; p < pops.size(); ++p) {
    inputs_of_.push_back(net.inputs_of(static_cast<int>(p)));
    lambda_mem_.push_back(pops[p].neuron.lambda_mem());
  }
  reset_state();
}

void Simulator::reset_state() {
  const auto b = static_cast<Eigen::Index>(batch_);
  u_.clear();
  s_.clear();
  i_.clear();
  for (const auto& p : net_->populations()) {
    u_.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.size), b));
    s_.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.size), b));
  }
  for (const auto& c : net_->connections()) {
    i_.push_back(Eigen::MatrixXd::Zero(c.weights.rows(), b));
  }
  steps_ = 0;
}

void Simulator::set_state(int pop, const Eigen::MatrixXd& u, const Eigen::MatrixXd& s) {
  const auto p = static_cast<std::size_t>(pop);
  if (u.rows() != u_[p].rows() || u.cols() != u_[p].cols() || s.rows() != s_[p].rows() ||
      s.cols() != s_[p].cols()) {
    throw InvalidArgument("simulator: state shape mismatch");
  }
  u_[p] = u;
  s_[p] = s;
}

void Simulator::set_current(int conn, const Eigen::MatrixXd& i) {
  const auto c = static_cast<std::size_t>(conn);
  if (i.rows() != i_[c].rows() || i.cols() != i_[c].cols()) {
    throw InvalidArgument("simulator: current shape mismatch");
  }
  i_[c] = i;
}

void Simulator::step(const Eigen::MatrixXd& input) {
  if (input.rows() != static_cast<Eigen::Index>(net_->n_inputs()) ||
      input.cols() != static_cast<Eigen::Index>(batch_)) {
    throw InvalidArgument("simulator: input shape mismatch");
  }
  const auto& pops = net_->populations();
  const auto& conns = net_->connections();

  // Membranes first: they consume the currents and spikes of step n.
  std::vector<Eigen::MatrixXd> u_next(pops.size());
  for (std::size_t p = 0; p < pops.size(); ++p) {
    const double lm = lambda_mem_[p];
    Eigen::MatrixXd drive = Eigen::MatrixXd::Zero(u_[p].rows(), u_[p].cols());
    for (int c : inputs_of_[p]) drive += conns[static_cast<std::size_t>(c)].sign * i_[static_cast<std::size_t>(c)];
    u_next[p] = lm * u_[p] + (1.0 - lm) * drive;
    if (opts_.reset && pops[p].spiking) {
      u_next[p].array() *= (1.0 - s_[p].array());
    }
  }

  for (std::size_t c = 0; c < conns.size(); ++c) {
    const Connection& conn = conns[c];
    const Eigen::MatrixXd& src =
        conn.source == kInputSource ? input : s_[static_cast<std::size_t>(conn.source)];
    i_[c] *= conn.lambda_syn;
    if (opts_.spike_mode == SpikeMode::Smooth && conn.source != kInputSource) {
      i_[c].noalias() += conn.weights * src;
    } else {
      accumulate_product(conn.weights, src, i_[c]);
    }
  }

  for (std::size_t p = 0; p < pops.size(); ++p) {
    u_[p] = std::move(u_next[p]);
    if (!u_[p].allFinite()) {
      throw NumericalError("simulate: non-finite membrane potential in population " +
                           pops[p].name + " (layer " + std::to_string(pops[p].layer) + ")");
    }
    if (!pops[p].spiking || !opts_.threshold) {
      s_[p].setZero();
      continue;
    }
    const double theta = pops[p].neuron.theta;
    if (opts_.spike_mode == SpikeMode::Heaviside) {
      s_[p] = (u_[p].array() >= theta).cast<double>();
    } else {
      s_[p] = u_[p].unaryExpr([&](double v) { return smooth_spike(v - theta, opts_.smooth, theta); });
    }
  }
  ++steps_;
}

Trace run_forward(const Network& net, std::vector<Eigen::MatrixXd> inputs, const SimOptions& opts) {
  if (inputs.empty()) throw InvalidArgument("simulate: no time steps");
  Trace trace;
  trace.steps = inputs.size();
  trace.batch = static_cast<std::size_t>(inputs.front().cols());
  Simulator sim(net, trace.batch, opts);
  const std::size_t n_pops = net.populations().size();
  trace.u.resize(n_pops);
  trace.s.resize(n_pops);
  for (std::size_t p = 0; p < n_pops; ++p) {
    trace.u[p].reserve(trace.steps + 1);
    trace.s[p].reserve(trace.steps + 1);
    trace.u[p].push_back(sim.membrane(static_cast<int>(p)));
    trace.s[p].push_back(sim.spikes(static_cast<int>(p)));
  }
  for (const auto& x : inputs) {
    sim.step(x);
    for (std::size_t p = 0; p < n_pops; ++p) {
      trace.u[p].push_back(sim.membrane(static_cast<int>(p)));
      trace.s[p].push_back(sim.spikes(static_cast<int>(p)));
    }
  }
  trace.inputs = std::move(inputs);
  return trace;
}

namespace {

constexpr std::size_t kShardSize = 64;

struct ShardOutput {
  std::vector<std::size_t> samples;
  Trace trace;
};

}  // namespace

SimulationResult simulate(const Network& net, const DenseSpikes& data, RecordFlags record,
                          const SimOptions& opts, std::size_t workers) {
  if (data.n_units != net.n_inputs()) throw InvalidArgument("simulate: input width mismatch");
  if (std::abs(data.dt_ms * 1e-3 - net.dt()) > 1e-12) {
    throw InvalidArgument("simulate: data binned at a different dt than the network");
  }
  const std::size_t n_pops = net.populations().size();
  SimulationResult result;
  result.steps = data.n_steps;
  result.samples = data.n_samples;
  result.readout.resize(data.n_samples);
  if (record.membrane) result.membrane.assign(n_pops, std::vector<Eigen::MatrixXd>(data.n_samples));
  if (record.spikes) result.spikes.assign(n_pops, std::vector<Eigen::MatrixXd>(data.n_samples));
  for (const auto& p : net.populations()) {
    result.spike_counts.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p.size),
                                                        static_cast<Eigen::Index>(data.n_samples)));
  }

  std::vector<std::vector<std::size_t>> shards;
  for (std::size_t start = 0; start < data.n_samples; start += kShardSize) {
    std::vector<std::size_t> idx;
    for (std::size_t k = start; k < std::min(data.n_samples, start + kShardSize); ++k) idx.push_back(k);
    shards.push_back(std::move(idx));
  }

  auto collect = [&](const std::vector<std::size_t>& idx, const Trace& trace) {
    const std::size_t steps = trace.steps;
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const std::size_t sample = idx[b];
      const auto bi = static_cast<Eigen::Index>(b);
      const int ro = net.readout();
      Eigen::MatrixXd out(static_cast<Eigen::Index>(net.n_outputs()),
                          static_cast<Eigen::Index>(steps + 1));
      for (std::size_t n = 0; n <= steps; ++n) {
        out.col(static_cast<Eigen::Index>(n)) = trace.u[static_cast<std::size_t>(ro)][n].col(bi);
      }
      result.readout[sample] = std::move(out);
      for (std::size_t p = 0; p < n_pops; ++p) {
        const auto size = static_cast<Eigen::Index>(net.populations()[p].size);
        Eigen::MatrixXd mem, spk;
        if (record.membrane) mem.resize(size, static_cast<Eigen::Index>(steps + 1));
        if (record.spikes) spk.resize(size, static_cast<Eigen::Index>(steps + 1));
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(size);
        for (std::size_t n = 0; n <= steps; ++n) {
          const auto ni = static_cast<Eigen::Index>(n);
          if (record.membrane) mem.col(ni) = trace.u[p][n].col(bi);
          if (record.spikes) spk.col(ni) = trace.s[p][n].col(bi);
          counts += trace.s[p][n].col(bi);
        }
        result.spike_counts[p].col(static_cast<Eigen::Index>(sample)) = counts;
        if (record.membrane) result.membrane[p][sample] = std::move(mem);
        if (record.spikes) result.spikes[p][sample] = std::move(spk);
      }
    }
  };

  workers = std::max<std::size_t>(1, workers);
  if (workers == 1) {
    for (const auto& idx : shards) collect(idx, run_forward(net, input_steps(data, idx), opts));
  } else {
    // Each worker handles shards w, w+workers, ...; results land in per-sample slots.
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t s = w; s < shards.size(); s += workers) {
            collect(shards[s], run_forward(net, input_steps(data, shards[s]), opts));
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  const double duration_s = static_cast<double>(data.n_steps) * net.dt();
  for (std::size_t k = 0; k < net.n_hidden_layers(); ++k) {
    double total = 0.0;
    for (int p : net.layer_populations(k)) total += result.spike_counts[static_cast<std::size_t>(p)].sum();
    const double denom = static_cast<double>(net.layer_size(k) * data.n_samples) * duration_s;
    result.layer_rates_hz.push_back(denom > 0.0 ? total / denom : 0.0);
  }
  return result;
}

void write_membrane_csv(std::ostream& out, const Network& net, const SimulationResult& result) {
  out << "sample,layer,neuron,step,value\n";
  out.precision(9);
  for (std::size_t p = 0; p < result.membrane.size(); ++p) {
    const std::string& name = net.populations()[p].name;
    for (std::size_t k = 0; k < result.membrane[p].size(); ++k) {
      const auto& m = result.membrane[p][k];
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index n = 0; n < m.cols(); ++n) {
          out << k << ',' << name << ',' << i << ',' << n << ',' << m(i, n) << '\n';
        }
      }
    }
  }
}

}  // namespace fluctinit
