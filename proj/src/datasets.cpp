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

#include "fluctinit/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "fluctinit/error.hpp"

namespace fluctinit {

void SpikeBatch::validate() const {
  if (labels.size() != samples.size()) throw FormatError("spike batch: label count mismatch");
  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (n_classes > 0 && labels[s] >= n_classes) {
      throw FormatError("spike batch: label out of range in sample " + std::to_string(s));
    }
    for (const auto& ev : samples[s]) {
      if (ev.unit >= n_units) {
        throw FormatError("spike batch: unit out of range in sample " + std::to_string(s));
      }
      if (!(ev.time_ms >= 0.0f) || !(ev.time_ms < duration_ms)) {
        throw FormatError("spike batch: event time outside [0, duration) in sample " +
                          std::to_string(s));
      }
    }
  }
}

SpikeBatch SpikeBatch::subset(std::span<const std::size_t> indices) const {
  SpikeBatch out;
  out.n_units = n_units;
  out.duration_ms = duration_ms;
  out.n_classes = n_classes;
  for (std::size_t i : indices) {
    out.samples.push_back(samples.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

double SpikeBatch::mean_rate_hz() const {
  if (samples.empty() || n_units == 0 || duration_ms <= 0.0f) return 0.0;
  std::size_t events = 0;
  for (const auto& s : samples) events += s.size();
  return static_cast<double>(events) /
         (static_cast<double>(samples.size()) * n_units * duration_ms * 1e-3);
}

std::size_t DenseSpikes::total() const {
  return std::accumulate(data.begin(), data.end(), std::size_t{0});
}

namespace {

DenseSpikes bin_impl(const SpikeBatch& batch, double dt_ms, bool counts) {
  if (!(dt_ms > 0.0)) throw InvalidArgument("bin: dt must be positive");
  DenseSpikes d;
  d.n_samples = batch.size();
  d.n_steps = static_cast<std::size_t>(std::ceil(static_cast<double>(batch.duration_ms) / dt_ms - 1e-9));
  d.n_units = batch.n_units;
  d.dt_ms = dt_ms;
  d.labels = batch.labels;
  d.data.assign(d.n_samples * d.n_steps * d.n_units, 0);
  for (std::size_t s = 0; s < batch.size(); ++s) {
    for (const auto& ev : batch.samples[s]) {
      const auto bin = static_cast<std::size_t>(std::floor(static_cast<double>(ev.time_ms) / dt_ms));
      if (bin >= d.n_steps || ev.unit >= d.n_units) continue;
      auto& cell = d.at(s, bin, ev.unit);
      if (!counts) {
        cell = 1;
      } else if (cell < 255) {
        ++cell;
      }
    }
  }
  return d;
}

}  // namespace

DenseSpikes bin_events(const SpikeBatch& batch, double dt_ms) { return bin_impl(batch, dt_ms, false); }
DenseSpikes bin_counts(const SpikeBatch& batch, double dt_ms) { return bin_impl(batch, dt_ms, true); }

SpikeBatch unbin(const DenseSpikes& dense, std::uint32_t n_classes) {
  SpikeBatch out;
  out.n_units = static_cast<std::uint32_t>(dense.n_units);
  out.duration_ms = static_cast<float>(static_cast<double>(dense.n_steps) * dense.dt_ms);
  out.n_classes = n_classes;
  out.labels = dense.labels;
  out.samples.resize(dense.n_samples);
  for (std::size_t s = 0; s < dense.n_samples; ++s) {
    for (std::size_t n = 0; n < dense.n_steps; ++n) {
      for (std::size_t u = 0; u < dense.n_units; ++u) {
        if (dense.at(s, n, u)) {
          out.samples[s].push_back({static_cast<std::uint32_t>(u),
                                    static_cast<float>(static_cast<double>(n) * dense.dt_ms)});
        }
      }
    }
  }
  return out;
}

std::vector<Eigen::MatrixXd> input_steps(const DenseSpikes& dense, std::span<const std::size_t> samples) {
  std::vector<Eigen::MatrixXd> out(dense.n_steps,
                                   Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dense.n_units),
                                                         static_cast<Eigen::Index>(samples.size())));
  for (std::size_t b = 0; b < samples.size(); ++b) {
    const std::size_t s = samples[b];
    if (s >= dense.n_samples) throw InvalidArgument("input_steps: sample index out of range");
    for (std::size_t n = 0; n < dense.n_steps; ++n) {
      const std::uint8_t* row = &dense.data[(s * dense.n_steps + n) * dense.n_units];
      for (std::size_t u = 0; u < dense.n_units; ++u) {
        if (row[u]) out[n](static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(b)) = row[u];
      }
    }
  }
  return out;
}

// Randman

namespace {

constexpr std::size_t kNormGrid = 2001;

std::uint64_t class_seed(std::uint64_t seed, std::uint32_t cls) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), cls, 0x52414eu};
  std::mt19937_64 g(seq);
  return g();
}

}  // namespace

RandmanManifold::RandmanManifold(const RandmanConfig& cfg, std::uint32_t cls) : cfg_(cfg) {
  if (cfg.n_units == 0 || cfg.dim == 0 || cfg.harmonics == 0) {
    throw InvalidArgument("randman: units, dimension and harmonics must be positive");
  }
  std::mt19937_64 rng(class_seed(cfg.seed, cls));
  std::uniform_real_distribution<double> amp(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const std::size_t n = static_cast<std::size_t>(cfg.n_units) * cfg.dim * cfg.harmonics;
  amp_.resize(n);
  phase_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    amp_[i] = amp(rng);
    phase_[i] = phase(rng);
  }
  // The map is a sum of per-dimension terms, so its range is the sum of the
  // per-dimension ranges, each found on a fine grid.
  lo_.assign(cfg.n_units, 0.0);
  hi_.assign(cfg.n_units, 0.0);
  for (std::uint32_t j = 0; j < cfg.n_units; ++j) {
    for (std::uint32_t d = 0; d < cfg.dim; ++d) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t g = 0; g < kNormGrid; ++g) {
        const double x = static_cast<double>(g) / (kNormGrid - 1);
        double v = 0.0;
        for (std::uint32_t k = 0; k < cfg.harmonics; ++k) {
          const std::size_t idx = (static_cast<std::size_t>(j) * cfg.dim + d) * cfg.harmonics + k;
          v += std::pow(k + 1.0, -cfg.alpha) * amp_[idx] *
               std::sin(2.0 * std::numbers::pi * (k + 1.0) * x + phase_[idx]);
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      lo_[j] += lo;
      hi_[j] += hi;
    }
  }
}

double RandmanManifold::raw(std::uint32_t unit, std::span<const double> x) const {
  double v = 0.0;
  for (std::uint32_t d = 0; d < cfg_.dim; ++d) {
    for (std::uint32_t k = 0; k < cfg_.harmonics; ++k) {
      const std::size_t idx = (static_cast<std::size_t>(unit) * cfg_.dim + d) * cfg_.harmonics + k;
      v += std::pow(k + 1.0, -cfg_.alpha) * amp_[idx] *
           std::sin(2.0 * std::numbers::pi * (k + 1.0) * x[d] + phase_[idx]);
    }
  }
  return v;
}

double RandmanManifold::operator()(std::uint32_t unit, std::span<const double> x) const {
  if (unit >= cfg_.n_units || x.size() != cfg_.dim) throw InvalidArgument("randman: bad evaluation point");
  const double span = hi_[unit] - lo_[unit];
  if (span <= 0.0) return 0.5;
  return std::clamp((raw(unit, x) - lo_[unit]) / span, 0.0, 1.0);
}

SpikeBatch generate_randman(const RandmanConfig& cfg) {
  if (cfg.classes == 0 || cfg.samples_per_class == 0) throw InvalidArgument("randman: empty dataset");
  if (!(cfg.t_active_ms > 0.0) || !(cfg.t_pad_ms >= 0.0)) throw InvalidArgument("randman: bad durations");
  SpikeBatch batch;
  batch.n_units = cfg.n_units;
  batch.n_classes = cfg.classes;
  batch.duration_ms = static_cast<float>(cfg.t_active_ms + cfg.t_pad_ms);
  const float t_max = std::nextafter(static_cast<float>(cfg.t_active_ms), 0.0f);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(cfg.dim);
  for (std::uint32_t c = 0; c < cfg.classes; ++c) {
    const RandmanManifold f(cfg, c);
    for (std::uint32_t s = 0; s < cfg.samples_per_class; ++s) {
      for (auto& xi : x) xi = unif(rng);
      std::vector<SpikeEvent> events(cfg.n_units);
      for (std::uint32_t j = 0; j < cfg.n_units; ++j) {
        events[j] = {j, std::min(static_cast<float>(cfg.t_active_ms * f(j, x)), t_max)};
      }
      std::stable_sort(events.begin(), events.end(),
                       [](const SpikeEvent& a, const SpikeEvent& b) { return a.time_ms < b.time_ms; });
      batch.samples.push_back(std::move(events));
      batch.labels.push_back(c);
    }
  }
  return batch;
}

SpikeBatch generate_poisson(std::uint32_t n_units, double nu_hz, double duration_ms, double dt_ms,
                            std::uint64_t seed, std::size_t n_samples) {
  if (!(nu_hz >= 0.0) || !(duration_ms > 0.0) || !(dt_ms > 0.0)) {
    throw InvalidArgument("poisson: rate must be non-negative, duration and dt positive");
  }
  SpikeBatch batch;
  batch.n_units = n_units;
  batch.n_classes = 1;
  batch.duration_ms = static_cast<float>(duration_ms);
  batch.samples.resize(n_samples);
  batch.labels.assign(n_samples, 0);
  if (nu_hz == 0.0) return batch;
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(nu_hz * 1e-3);  // per ms
  const float limit = static_cast<float>(duration_ms);
  for (auto& events : batch.samples) {
    for (std::uint32_t u = 0; u < n_units; ++u) {
      double t = gap(rng);
      while (t < duration_ms) {
        const auto tf = static_cast<float>(t);
        if (tf < limit) events.push_back({u, tf});
        t += gap(rng);
      }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const SpikeEvent& a, const SpikeEvent& b) { return a.time_ms < b.time_ms; });
  }
  return batch;
}

Split shuffled_split(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidArgument("split: fraction must be in [0, 1]");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  Split out;
  out.first.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  out.second.assign(idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
  std::sort(out.first.begin(), out.first.end());
  std::sort(out.second.begin(), out.second.end());
  return out;
}

}  // namespace fluctinit
