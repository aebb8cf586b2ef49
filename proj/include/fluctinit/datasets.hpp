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
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace fluctinit {

struct SpikeEvent {
  std::uint32_t unit = 0;
  float time_ms = 0.0f;

  friend bool operator==(const SpikeEvent&, const SpikeEvent&) = default;
};

/// Ragged per-sample spike events with class labels.
struct SpikeBatch {
  std::vector<std::vector<SpikeEvent>> samples;
  std::vector<std::uint32_t> labels;
  std::uint32_t n_units = 0;
  float duration_ms = 0.0f;
  std::uint32_t n_classes = 0;

  std::size_t size() const { return samples.size(); }
  void validate() const;
  SpikeBatch subset(std::span<const std::size_t> indices) const;
  /// Mean firing rate per unit over all samples, in Hz.
  double mean_rate_hz() const;

  friend bool operator==(const SpikeBatch&, const SpikeBatch&) = default;
};

/// Binned spikes laid out as (sample, step, unit). Entries are 0/1 after
/// bin_events; bin_counts keeps multiplicities (saturating at 255).
struct DenseSpikes {
  std::size_t n_samples = 0;
  std::size_t n_steps = 0;
  std::size_t n_units = 0;
  double dt_ms = 0.0;
  std::vector<std::uint8_t> data;
  std::vector<std::uint32_t> labels;

  std::uint8_t at(std::size_t sample, std::size_t step, std::size_t unit) const {
    return data[(sample * n_steps + step) * n_units + unit];
  }
  std::uint8_t& at(std::size_t sample, std::size_t step, std::size_t unit) {
    return data[(sample * n_steps + step) * n_units + unit];
  }
  std::size_t total() const;
};

/// steps = ceil(duration/dt); bin = floor(time/dt).
DenseSpikes bin_events(const SpikeBatch& batch, double dt_ms);
DenseSpikes bin_counts(const SpikeBatch& batch, double dt_ms);
/// One event at the start of every occupied bin.
SpikeBatch unbin(const DenseSpikes& dense, std::uint32_t n_classes);

/// Per-step input matrices (units × samples) for the given samples.
std::vector<Eigen::MatrixXd> input_steps(const DenseSpikes& dense,
                                         std::span<const std::size_t> samples);

struct RandmanConfig {
  std::uint32_t classes = 10;
  std::uint32_t samples_per_class = 1000;
  std::uint32_t n_units = 20;     // embedding dimension M
  std::uint32_t dim = 1;          // intrinsic dimension D
  double alpha = 1.0;             // smoothness (spectral decay k^-alpha)
  std::uint32_t harmonics = 4;
  double t_active_ms = 100.0;
  double t_pad_ms = 100.0;
  std::uint64_t seed = 42;
};

/// Smooth random manifold dataset: every unit spikes exactly once per sample
/// at t_active·f_j(x), with an independent smooth map f per class.
SpikeBatch generate_randman(const RandmanConfig& cfg);

/// Evaluates class `cls`'s normalized map f_j at intrinsic point x (size dim).
/// Exposed for smoothness tests; matches the spike times of generate_randman.
class RandmanManifold {
 public:
  RandmanManifold(const RandmanConfig& cfg, std::uint32_t cls);
  double operator()(std::uint32_t unit, std::span<const double> x) const;

 private:
  double raw(std::uint32_t unit, std::span<const double> x) const;
  RandmanConfig cfg_;
  std::vector<double> amp_;
  std::vector<double> phase_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

/// Homogeneous Poisson spike trains (continuous event times). Each unit and
/// bin of width dt_ms holds at least one event with probability 1 - e^{-ν dt}.
SpikeBatch generate_poisson(std::uint32_t n_units, double nu_hz, double duration_ms,
                            double dt_ms, std::uint64_t seed, std::size_t n_samples = 1);

/// Spike-pack binary format ("SPKP", little-endian, version 1).
void write_spikepack(const std::filesystem::path& path, const SpikeBatch& batch);
SpikeBatch read_spikepack(const std::filesystem::path& path);

/// Loads Spiking Heidelberg Digits from its HDF5 container (or a converted
/// spike-pack), keeping events before `splice_ms`.
SpikeBatch load_shd(const std::filesystem::path& path, double splice_ms = 700.0,
                    std::uint32_t n_units = 700);

/// Seeded shuffle split; the first part holds round(fraction·n) indices.
struct Split {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
};
Split shuffled_split(std::size_t n, double fraction, std::uint64_t seed);

}  // namespace fluctinit
