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

#include "fluctinit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "fluctinit/error.hpp"
#include "fluctinit/simulate.hpp"
#include "fluctinit/special.hpp"

namespace fluctinit {

std::size_t Histogram::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::size_t bin_of(const std::vector<double>& edges, double x) {
  const std::size_t bins = edges.size() - 1;
  if (x < edges.front()) return 0;
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  const auto k = static_cast<std::size_t>(it - edges.begin());
  return k == 0 ? 0 : std::min(k - 1, bins - 1);
}

}  // namespace

std::vector<double> freedman_diaconis_edges(std::span<const double> values, std::size_t max_bins) {
  if (values.empty()) return {0.0, 1.0};
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double lo = v.front(), hi = v.back();
  if (hi <= lo) return {lo - 0.5, lo + 0.5};
  const double iqr = quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25);
  std::size_t bins = 1;
  if (iqr > 0.0) {
    const double width = 2.0 * iqr * std::pow(static_cast<double>(v.size()), -1.0 / 3.0);
    bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
  }
  bins = std::clamp<std::size_t>(bins, 1, std::max<std::size_t>(max_bins, 1));
  std::vector<double> edges(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
  return edges;
}

Histogram histogram(std::span<const double> values, std::vector<double> edges) {
  if (edges.size() < 2) throw InvalidArgument("histogram: need at least two edges");
  Histogram h;
  h.edges = std::move(edges);
  h.counts.assign(h.edges.size() - 1, 0);
  for (double x : values) ++h.counts[bin_of(h.edges, x)];
  return h;
}

std::size_t default_warmup_steps(const Network& net) {
  double tau = 0.0;
  for (const auto& p : net.populations()) {
    if (p.layer >= 0) tau = std::max(tau, p.neuron.tau_mem);
  }
  return static_cast<std::size_t>(std::ceil(5.0 * tau / net.dt()));
}

std::vector<MembraneStats> measure_membrane_stats(const Network& net, const DenseSpikes& data,
                                                  std::size_t warmup_steps) {
  if (data.n_units != net.n_inputs()) throw InvalidArgument("diagnose: input width mismatch");
  const std::size_t total = data.n_samples * data.n_steps;
  if (total < warmup_steps + 100) {
    throw InvalidArgument("diagnose: fewer than 100 steps after warmup (" +
                          std::to_string(total > warmup_steps ? total - warmup_steps : 0) + ")");
  }
  constexpr std::size_t kHistogramSeed = 100000;
  SimOptions opts;
  opts.threshold = false;
  opts.reset = false;
  Simulator sim(net, 1, opts);
  const auto& pops = net.populations();
  std::vector<MembraneStats> out(pops.size());
  std::vector<Eigen::VectorXd> mean(pops.size()), m2(pops.size());
  std::vector<std::vector<double>> seed(pops.size());
  for (std::size_t p = 0; p < pops.size(); ++p) {
    out[p].population = pops[p].name;
    mean[p] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pops[p].size));
    m2[p] = mean[p];
  }
  Eigen::MatrixXd input = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data.n_units), 1);
  std::size_t count = 0;
  for (std::size_t s = 0; s < data.n_samples; ++s) {
    for (std::size_t n = 0; n < data.n_steps; ++n) {
      const std::uint8_t* row = &data.data[(s * data.n_steps + n) * data.n_units];
      for (std::size_t u = 0; u < data.n_units; ++u) input(static_cast<Eigen::Index>(u), 0) = row[u];
      sim.step(input);
      if (s * data.n_steps + n < warmup_steps) continue;
      ++count;
      const double inv = 1.0 / static_cast<double>(count);
      for (std::size_t p = 0; p < pops.size(); ++p) {
        const auto x = sim.membrane(static_cast<int>(p)).col(0);
        const Eigen::VectorXd delta = x - mean[p];
        mean[p] += delta * inv;
        m2[p].array() += delta.array() * (x - mean[p]).array();
        auto& h = out[p].potentials;
        if (h.edges.empty()) {
          seed[p].insert(seed[p].end(), x.data(), x.data() + x.size());
          if (seed[p].size() >= kHistogramSeed) {
            h = histogram(seed[p], freedman_diaconis_edges(seed[p]));
            seed[p].clear();
          }
        } else {
          for (Eigen::Index i = 0; i < x.size(); ++i) ++h.counts[bin_of(h.edges, x(i))];
        }
      }
    }
  }
  for (std::size_t p = 0; p < pops.size(); ++p) {
    if (out[p].potentials.edges.empty()) out[p].potentials = histogram(seed[p], freedman_diaconis_edges(seed[p]));
    out[p].mu_hat = mean[p];
    out[p].sigma_hat = (m2[p] / static_cast<double>(count)).cwiseMax(0.0).cwiseSqrt();
    out[p].steps = count;
  }
  return out;
}

double Distribution::cdf(double x) const {
  switch (kind) {
    case Kind::Normal:
      return special::normal_cdf((x - a) / b);
    case Kind::Gamma:
      return special::gamma_cdf(x, a, b);
    case Kind::Nakagami:
      return special::nakagami_cdf(x, a, b);
  }
  return 0.0;
}

double Distribution::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("quantile: p must be in (0, 1)");
  switch (kind) {
    case Kind::Normal:
      return a + b * special::normal_quantile(p);
    case Kind::Gamma: {
      const double m = a * b, sd = std::sqrt(a) * b;
      return special::invert_cdf([&](double x) { return cdf(x); }, p, 0.0, m + 50.0 * sd + 50.0 * b);
    }
    case Kind::Nakagami: {
      const double hi = std::sqrt(b) * (2.0 + 50.0 / std::sqrt(a));
      return special::invert_cdf([&](double x) { return cdf(x); }, p, 0.0, hi);
    }
  }
  return 0.0;
}

double Distribution::mean() const {
  switch (kind) {
    case Kind::Normal:
      return a;
    case Kind::Gamma:
      return a * b;
    case Kind::Nakagami:
      return std::exp(std::lgamma(a + 0.5) - std::lgamma(a)) * std::sqrt(b / a);
  }
  return 0.0;
}

std::string Distribution::describe() const {
  std::ostringstream s;
  s.precision(6);
  switch (kind) {
    case Kind::Normal:
      s << "Normal(mean=" << a << ", sd=" << b << ")";
      break;
    case Kind::Gamma:
      s << "Gamma(shape=" << a << ", scale=" << b << ")";
      break;
    case Kind::Nakagami:
      s << "Nakagami(m=" << a << ", omega=" << b << ")";
      break;
  }
  return s.str();
}

SamplingTheory sampling_theory(std::size_t n, double nu, const KernelIntegrals& eps, double sigma_u, double theta) {
  if (n == 0 || !(nu > 0.0) || !(eps.eps_bar > 0.0) || !(eps.eps_hat > 0.0) || !(sigma_u > 0.0)) {
    throw InvalidArgument("sampling theory: n, rate, kernel integrals and sigma_u must be positive");
  }
  const double half_n = static_cast<double>(n) / 2.0;
  const double var_mu = sigma_u * sigma_u * nu * eps.eps_bar * eps.eps_bar / eps.eps_hat;
  SamplingTheory t;
  t.mu_hat = Distribution::normal(0.0, std::sqrt(var_mu));
  t.sigma2_hat = Distribution::gamma(half_n, 2.0 * sigma_u * sigma_u / static_cast<double>(n));
  t.sigma_hat = Distribution::nakagami(half_n, sigma_u * sigma_u);
  t.mean_driven_fraction = 1.0 - special::normal_cdf(theta / std::sqrt(var_mu));
  return t;
}

KsResult distribution_compare(std::span<const double> samples, const Distribution& reference, double level) {
  if (samples.size() < 100) throw InvalidArgument("ks: need at least 100 samples");
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("ks: level must be in (0, 1)");
  std::vector<double> v(samples.begin(), samples.end());
  std::sort(v.begin(), v.end());
  const auto n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = reference.cdf(v[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  KsResult r;
  r.n = v.size();
  r.statistic = d;
  const double c = special::invert_cdf([](double x) { return 1.0 - special::kolmogorov_survival(x); }, 1.0 - level,
                                       0.2, 5.0);
  r.critical = c / std::sqrt(n);
  r.p_value = special::kolmogorov_survival(std::sqrt(n) * d);
  r.pass = d < r.critical;
  return r;
}

SpikeTrainStats spiketrain_stats(std::span<const Eigen::MatrixXd> rasters, double dt, double tau_filter) {
  if (!(dt > 0.0) || !(tau_filter > 0.0)) throw InvalidArgument("spike stats: dt and filter must be positive");
  SpikeTrainStats st;
  if (rasters.empty()) return st;
  const Eigen::Index N = rasters.front().rows();
  st.rate_hz = Eigen::VectorXd::Zero(N);
  double duration = 0.0;
  std::vector<std::vector<double>> isis(static_cast<std::size_t>(N));
  std::vector<std::size_t> spikes(static_cast<std::size_t>(N), 0);
  const double lambda = std::exp(-dt / tau_filter);
  for (const auto& r : rasters) {
    if (r.rows() != N) throw InvalidArgument("spike stats: rasters disagree in neuron count");
    duration += static_cast<double>(r.cols()) * dt;
    st.rate_hz += r.rowwise().sum();
    for (Eigen::Index i = 0; i < N; ++i) {
      Eigen::Index last = -1;
      for (Eigen::Index n = 0; n < r.cols(); ++n) {
        if (r(i, n) == 0.0) continue;
        ++spikes[static_cast<std::size_t>(i)];
        if (last >= 0) isis[static_cast<std::size_t>(i)].push_back(static_cast<double>(n - last) * dt);
        last = n;
      }
    }
    double f = 0.0, sum = 0.0, sum2 = 0.0;
    for (Eigen::Index n = 0; n < r.cols(); ++n) {
      const double rate = N > 0 ? r.col(n).sum() / (static_cast<double>(N) * dt) : 0.0;
      f = lambda * f + (1.0 - lambda) * rate;
      sum += f;
      sum2 += f * f;
    }
    const auto T = static_cast<double>(std::max<Eigen::Index>(r.cols(), 1));
    st.population_rate_std_hz.push_back(std::sqrt(std::max(0.0, sum2 / T - (sum / T) * (sum / T))));
  }
  st.rate_hz /= duration;
  for (std::size_t i = 0; i < isis.size(); ++i) {
    const auto& v = isis[i];
    if (spikes[i] < 3 || v.size() < 2) continue;
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - m) * (x - m);
    var /= static_cast<double>(v.size());
    st.isi_cv.push_back(std::sqrt(var) / m);
  }
  return st;
}

void write_membrane_stats_csv(std::ostream& out, std::span<const MembraneStats> stats) {
  out << "population,neuron,mu_hat,sigma_hat\n";
  out.precision(10);
  for (const auto& s : stats) {
    for (Eigen::Index i = 0; i < s.mu_hat.size(); ++i) {
      out << s.population << ',' << i << ',' << s.mu_hat(i) << ',' << s.sigma_hat(i) << '\n';
    }
  }
}

void write_histogram_csv(std::ostream& out, std::span<const MembraneStats> stats) {
  out << "population,lo,hi,count\n";
  out.precision(10);
  for (const auto& s : stats) {
    for (std::size_t k = 0; k < s.potentials.counts.size(); ++k) {
      out << s.population << ',' << s.potentials.edges[k] << ',' << s.potentials.edges[k + 1] << ','
          << s.potentials.counts[k] << '\n';
    }
  }
}

void write_spiketrain_csv(std::ostream& out, const std::string& population, const SpikeTrainStats& stats) {
  out.precision(10);
  for (Eigen::Index i = 0; i < stats.rate_hz.size(); ++i) {
    out << population << ",rate_hz," << i << ',' << stats.rate_hz(i) << '\n';
  }
  for (std::size_t i = 0; i < stats.isi_cv.size(); ++i) out << population << ",isi_cv," << i << ',' << stats.isi_cv[i] << '\n';
  for (std::size_t i = 0; i < stats.population_rate_std_hz.size(); ++i) {
    out << population << ",rate_std_hz," << i << ',' << stats.population_rate_std_hz[i] << '\n';
  }
}

}  // namespace fluctinit
