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

#include "fluctinit/setup.hpp"

#include <cmath>

#include "fluctinit/error.hpp"
#include "fluctinit/special.hpp"

namespace fluctinit {

KernelIntegrals kernel_for(double tau_mem, double tau_syn, double dt) {
  return kernel_integrals_numeric(KernelParams{tau_mem, tau_syn, SynapseKind::CurrentBased}, dt);
}

namespace {

// One input term of a population, for predictions.
struct Term {
  std::size_t block;  // index into InitReport::blocks
  std::size_t n;
  KernelIntegrals eps;
  double sign;
};

PopulationPrediction predict(const std::string& name, const InitReport& report, const std::vector<Term>& terms,
                             double nu, double theta, const KernelIntegrals& own) {
  std::vector<InputBlock> blocks;
  double var_mu = 0.0;
  for (const Term& t : terms) {
    const WeightSpec& s = report.blocks[t.block].spec;
    blocks.push_back({&s, t.n, nu, t.eps, t.sign});
    const double var_w = s.second_moment() - s.mean() * s.mean();
    var_mu += static_cast<double>(t.n) * var_w * nu * nu * t.eps.eps_bar * t.eps.eps_bar;
  }
  PopulationPrediction p;
  p.population = name;
  p.eps = own;
  p.predicted = predict_fluctuations(blocks);
  const double gap = theta - p.predicted.mu_u;
  if (var_mu > 0.0) {
    p.mean_driven_fraction = 1.0 - special::normal_cdf(gap / std::sqrt(var_mu));
  } else {
    p.mean_driven_fraction = gap <= 0.0 ? 1.0 : 0.0;
  }
  return p;
}

WeightSpec with_rows(WeightSpec s, const Connection& c) {
  s.rows = static_cast<std::size_t>(c.weights.rows());
  s.cols = static_cast<std::size_t>(c.weights.cols());
  return s;
}

}  // namespace

InitReport plan_initialization(const Network& net, const InitConfig& cfg) {
  cfg.target.validate();
  if (!(cfg.nu_hz > 0.0)) throw InvalidArgument("init: dataset rate must be positive");
  const bool dalian = cfg.strategy == InitStrategy::DalianExponential || cfg.strategy == InitStrategy::DalianLogNormal;
  const double dt = net.dt();
  const double nu = cfg.nu_hz;
  const auto& pops = net.populations();
  const auto& conns = net.connections();
  InitReport report;

  auto conn_index = [&](const std::string& name) {
    for (std::size_t c = 0; c < conns.size(); ++c) {
      if (conns[c].name == name) return c;
    }
    throw InvalidArgument("init: missing connection " + name);
  };
  auto add = [&](const std::string& name, const WeightSpec& spec) {
    report.blocks.push_back({name, with_rows(spec, conns[conn_index(name)])});
    return report.blocks.size() - 1;
  };
  auto source_size = [&](const Connection& c) {
    return static_cast<std::size_t>(c.weights.cols());
  };

  for (std::size_t k = 0; k < net.n_hidden_layers(); ++k) {
    const LayerConfig& lc = net.layer_configs()[k];
    const std::string pre = "L" + std::to_string(k) + ".";
    if (lc.dale) {
      if (!dalian) throw InvalidArgument("init: Dale layers need a Dalian strategy");
      const DaleConfig& d = *lc.dale;
      const double ts_e = d.exc.tau_syn;
      const double ts_i = d.inh.tau_syn;
      const std::size_t n_f = source_size(conns[conn_index(pre + "FE")]);
      for (const bool exc_target : {true, false}) {
        const NeuronParams& post = exc_target ? d.exc : d.inh;
        DalianStats st;
        st.eps_e = kernel_for(post.tau_mem, ts_e, dt);
        st.eps_i = kernel_for(post.tau_mem, ts_i, dt);
        st.nu_e = nu;
        st.nu_i = nu;
        st.n_i = d.n_i;
        const std::string f = pre + (exc_target ? "FE" : "FI");
        const std::string r = pre + (exc_target ? "RE" : "RI");
        const std::string i = pre + (exc_target ? "IE" : "II");
        std::vector<Term> terms;
        if (d.exc_recurrence) {
          st.n_f = n_f;
          st.n_r = d.n_e;
          const DalianRecurrentSpecs s = cfg.strategy == InitStrategy::DalianExponential
                                             ? init_dalian_rec_exp(cfg.target, st)
                                             : init_dalian_lognormal_rec(cfg.target, st);
          terms.push_back({add(f, s.ff), n_f, st.eps_e, 1.0});
          terms.push_back({add(r, s.rec_exc), d.n_e, st.eps_e, 1.0});
          terms.push_back({add(i, s.inh), d.n_i, st.eps_i, -1.0});
        } else {
          st.n_e = n_f;
          const DalianSpecs s = cfg.strategy == InitStrategy::DalianExponential
                                    ? init_dalian_ff_exp(cfg.target, st)
                                    : init_dalian_lognormal_ff(cfg.target, st);
          terms.push_back({add(f, s.exc), n_f, st.eps_e, 1.0});
          terms.push_back({add(i, s.inh), d.n_i, st.eps_i, -1.0});
        }
        report.populations.push_back(predict(pre + (exc_target ? "E" : "I"), report, terms, nu,
                                             cfg.target.theta, st.eps_e));
      }
      continue;
    }
    if (dalian) throw InvalidArgument("init: Dalian strategies need Dale layers");
    const KernelIntegrals eps = kernel_for(lc.neuron.tau_mem, lc.neuron.tau_syn, dt);
    const std::size_t n_in = source_size(conns[conn_index(pre + "ff")]);
    std::vector<Term> terms;
    if (cfg.strategy == InitStrategy::Kaiming) {
      const std::size_t fan_in = n_in + (lc.recurrent ? lc.n : 0);
      terms.push_back({add(pre + "ff", init_kaiming(fan_in)), n_in, eps, 1.0});
      if (lc.recurrent) terms.push_back({add(pre + "rec", init_kaiming(fan_in)), lc.n, eps, 1.0});
    } else if (lc.recurrent) {
      const RecurrentSpecs s = init_recurrent(cfg.target, InputStats{n_in, nu, lc.n, std::nullopt}, eps);
      terms.push_back({add(pre + "ff", s.ff), n_in, eps, 1.0});
      terms.push_back({add(pre + "rec", s.rec), lc.n, eps, 1.0});
    } else {
      terms.push_back({add(pre + "ff", init_feedforward(cfg.target, InputStats{n_in, nu, 0, std::nullopt}, eps)),
                       n_in, eps, 1.0});
    }
    report.populations.push_back(predict(pre + "H", report, terms, nu, cfg.target.theta, eps));
  }

  // Readout: every incoming block shares one distribution sized by the total fan-in.
  const Population& out = pops.back();
  const KernelIntegrals eps_out = kernel_for(out.neuron.tau_mem, out.neuron.tau_syn, dt);
  std::size_t fan_in = 0;
  std::vector<std::size_t> readout_conns;
  for (std::size_t c = 0; c < conns.size(); ++c) {
    if (conns[c].target == net.readout()) {
      readout_conns.push_back(c);
      fan_in += source_size(conns[c]);
    }
  }
  const FluctuationTarget rt = cfg.readout_target.value_or(cfg.target);
  const WeightSpec spec = cfg.strategy == InitStrategy::Kaiming
                              ? init_kaiming(fan_in)
                              : init_feedforward(rt, InputStats{fan_in, nu, 0, std::nullopt}, eps_out);
  std::vector<Term> terms;
  for (std::size_t c : readout_conns) terms.push_back({add(conns[c].name, spec), source_size(conns[c]), eps_out, 1.0});
  report.populations.push_back(predict(out.name, report, terms, nu, rt.theta, eps_out));
  return report;
}

InitReport initialize_network(Network& net, const InitConfig& cfg) {
  InitReport report = plan_initialization(net, cfg);
  auto& conns = net.connections();
  for (std::size_t c = 0; c < conns.size(); ++c) {
    const BlockInit* b = nullptr;
    for (const auto& bi : report.blocks) {
      if (bi.connection == conns[c].name) b = &bi;
    }
    if (!b) throw InvalidArgument("init: no plan for connection " + conns[c].name);
    conns[c].weights = sample_weights(b->spec, cfg.seed + c);
  }
  net.enforce_sign_constraints();
  return report;
}

}  // namespace fluctinit
