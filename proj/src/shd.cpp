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

#include <hdf5.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>

#include "fluctinit/datasets.hpp"
#include "fluctinit/error.hpp"

namespace fluctinit {

namespace {

// Closes an HDF5 handle on scope exit.
class Handle {
 public:
  Handle(hid_t id, herr_t (*close)(hid_t)) : id_(id), close_(close) {}
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (id_ >= 0) close_(id_);
  }
  hid_t get() const { return id_; }
  bool ok() const { return id_ >= 0; }

 private:
  hid_t id_;
  herr_t (*close_)(hid_t);
};

bool is_spikepack(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  return in.read(magic, 4) && std::memcmp(magic, "SPKP", 4) == 0;
}

std::size_t dataset_length(hid_t dset, const std::string& name) {
  Handle space(H5Dget_space(dset), H5Sclose);
  if (!space.ok() || H5Sget_simple_extent_ndims(space.get()) != 1) {
    throw FormatError("shd: dataset " + name + " must be one-dimensional");
  }
  hsize_t n = 0;
  H5Sget_simple_extent_dims(space.get(), &n, nullptr);
  return static_cast<std::size_t>(n);
}

template <typename T>
std::vector<std::vector<T>> read_vlen(hid_t file, const char* name, hid_t native) {
  Handle dset(H5Dopen2(file, name, H5P_DEFAULT), H5Dclose);
  if (!dset.ok()) throw FormatError(std::string("shd: missing dataset ") + name);
  const std::size_t n = dataset_length(dset.get(), name);
  Handle mem(H5Tvlen_create(native), H5Tclose);
  Handle space(H5Dget_space(dset.get()), H5Sclose);
  std::vector<hvl_t> raw(n);
  if (n > 0 && H5Dread(dset.get(), mem.get(), H5S_ALL, H5S_ALL, H5P_DEFAULT, raw.data()) < 0) {
    throw FormatError(std::string("shd: cannot read ") + name);
  }
  std::vector<std::vector<T>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T* p = static_cast<const T*>(raw[i].p);
    out[i].assign(p, p + raw[i].len);
  }
  if (n > 0) H5Dvlen_reclaim(mem.get(), space.get(), H5P_DEFAULT, raw.data());
  return out;
}

std::vector<std::uint32_t> read_labels(hid_t file) {
  Handle dset(H5Dopen2(file, "labels", H5P_DEFAULT), H5Dclose);
  if (!dset.ok()) throw FormatError("shd: missing dataset labels");
  std::vector<std::uint32_t> out(dataset_length(dset.get(), "labels"));
  if (!out.empty() &&
      H5Dread(dset.get(), H5T_NATIVE_UINT32, H5S_ALL, H5S_ALL, H5P_DEFAULT, out.data()) < 0) {
    throw FormatError("shd: cannot read labels");
  }
  return out;
}

}  // namespace

SpikeBatch load_shd(const std::filesystem::path& path, double splice_ms, std::uint32_t n_units) {
  if (!(splice_ms > 0.0)) throw InvalidArgument("shd: splice length must be positive");
  if (!std::filesystem::exists(path)) throw Error("shd: no such file " + path.string());

  SpikeBatch batch;
  if (is_spikepack(path)) {
    batch = read_spikepack(path);
    if (batch.n_units != n_units) {
      throw FormatError("shd: spike-pack has " + std::to_string(batch.n_units) + " units");
    }
  } else {
    H5Eset_auto2(H5E_DEFAULT, nullptr, nullptr);
    Handle file(H5Fopen(path.string().c_str(), H5F_ACC_RDONLY, H5P_DEFAULT), H5Fclose);
    if (!file.ok()) throw FormatError("shd: not an HDF5 file or spike-pack: " + path.string());
    if (H5Lexists(file.get(), "spikes", H5P_DEFAULT) <= 0) throw FormatError("shd: missing group spikes");
    const auto times = read_vlen<double>(file.get(), "spikes/times", H5T_NATIVE_DOUBLE);
    const auto units = read_vlen<std::uint32_t>(file.get(), "spikes/units", H5T_NATIVE_UINT32);
    batch.labels = read_labels(file.get());
    if (times.size() != units.size() || times.size() != batch.labels.size()) {
      throw FormatError("shd: times, units and labels disagree in length");
    }
    batch.n_units = n_units;
    std::uint32_t max_label = 0;
    for (auto l : batch.labels) max_label = std::max(max_label, l);
    batch.n_classes = batch.labels.empty() ? 0 : max_label + 1;
    batch.samples.resize(times.size());
    for (std::size_t s = 0; s < times.size(); ++s) {
      if (times[s].size() != units[s].size()) {
        throw FormatError("shd: sample " + std::to_string(s) + " has mismatched times and units");
      }
      for (std::size_t k = 0; k < times[s].size(); ++k) {
        if (units[s][k] >= n_units) {
          throw FormatError("shd: unit out of range in sample " + std::to_string(s));
        }
        batch.samples[s].push_back({units[s][k], static_cast<float>(times[s][k] * 1e3)});
      }
    }
    batch.duration_ms = std::numeric_limits<float>::infinity();
  }

  const auto splice = static_cast<float>(splice_ms);
  for (auto& events : batch.samples) {
    std::erase_if(events, [&](const SpikeEvent& e) { return !(e.time_ms >= 0.0f) || e.time_ms >= splice; });
  }
  batch.duration_ms = std::min(batch.duration_ms, splice);
  batch.validate();
  return batch;
}

}  // namespace fluctinit
