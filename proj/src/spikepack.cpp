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

#include <bit>
#include <cstring>
#include <fstream>

#include "fluctinit/datasets.hpp"
#include "fluctinit/error.hpp"

namespace fluctinit {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ostream& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint32_t u32() {
    unsigned char b[4];
    if (!in_.read(reinterpret_cast<char*>(b), 4)) throw FormatError("spike-pack: truncated file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  float f32() { return std::bit_cast<float>(u32()); }

 private:
  std::istream& in_;
};

}  // namespace

void write_spikepack(const std::filesystem::path& path, const SpikeBatch& batch) {
  batch.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("spike-pack: cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(batch.size()));
  put_u32(out, batch.n_units);
  put_f32(out, batch.duration_ms);
  put_u32(out, batch.n_classes);
  for (std::size_t s = 0; s < batch.size(); ++s) {
    put_u32(out, batch.labels[s]);
    put_u32(out, static_cast<std::uint32_t>(batch.samples[s].size()));
    for (const auto& ev : batch.samples[s]) {
      put_u32(out, ev.unit);
      put_f32(out, ev.time_ms);
    }
  }
  if (!out) throw Error("spike-pack: write failed for " + path.string());
}

SpikeBatch read_spikepack(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("spike-pack: cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4)) throw FormatError("spike-pack: truncated file");
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("spike-pack: bad magic");
  Reader r(in);
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw FormatError("spike-pack: unsupported version " + std::to_string(version));
  }
  SpikeBatch batch;
  const std::uint32_t n_samples = r.u32();
  batch.n_units = r.u32();
  batch.duration_ms = r.f32();
  batch.n_classes = r.u32();
  batch.samples.resize(n_samples);
  batch.labels.resize(n_samples);
  for (std::uint32_t s = 0; s < n_samples; ++s) {
    batch.labels[s] = r.u32();
    const std::uint32_t count = r.u32();
    auto& events = batch.samples[s];
    events.reserve(std::min<std::uint32_t>(count, 1u << 20));
    for (std::uint32_t k = 0; k < count; ++k) {
      const std::uint32_t unit = r.u32();
      events.push_back({unit, r.f32()});
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("spike-pack: trailing bytes");
  batch.validate();
  return batch;
}

}  // namespace fluctinit
