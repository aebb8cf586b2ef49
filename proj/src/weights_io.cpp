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

#include "fluctinit/weights_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "fluctinit/error.hpp"

namespace fluctinit {

namespace {

constexpr char kMagic[4] = {'W', 'G', 'T', 'S'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError("weights: truncated file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_weights(const std::filesystem::path& path, const Network& net) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("weights: cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(net.connections().size()));
  for (const auto& c : net.connections()) {
    put_u32(out, static_cast<std::uint32_t>(c.name.size()));
    out.write(c.name.data(), static_cast<std::streamsize>(c.name.size()));
    put_u32(out, static_cast<std::uint32_t>(c.weights.rows()));
    put_u32(out, static_cast<std::uint32_t>(c.weights.cols()));
    for (Eigen::Index i = 0; i < c.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < c.weights.cols(); ++j) {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(c.weights(i, j))));
      }
    }
  }
  if (!out) throw Error("weights: write failed for " + path.string());
}

std::vector<NamedMatrix> read_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("weights: cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4)) throw FormatError("weights: truncated file");
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("weights: bad magic");
  const std::uint32_t version = get_u32(in);
  if (version != kVersion) throw FormatError("weights: unsupported version " + std::to_string(version));
  const std::uint32_t n = get_u32(in);
  std::vector<NamedMatrix> blocks;
  for (std::uint32_t k = 0; k < n; ++k) {
    const std::uint32_t len = get_u32(in);
    if (len > 4096) throw FormatError("weights: implausible block name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw FormatError("weights: truncated file");
    const std::uint32_t rows = get_u32(in), cols = get_u32(in);
    Eigen::MatrixXd m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = std::bit_cast<float>(get_u32(in));
    }
    blocks.push_back({std::move(name), std::move(m)});
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("weights: trailing bytes");
  return blocks;
}

void load_weights_into(Network& net, const std::filesystem::path& path) {
  const auto blocks = read_weights(path);
  if (blocks.size() != net.connections().size()) {
    throw FormatError("weights: file has " + std::to_string(blocks.size()) + " blocks, network has " +
                      std::to_string(net.connections().size()));
  }
  for (const auto& b : blocks) {
    if (!net.has_connection(b.name)) throw FormatError("weights: unknown block " + b.name);
    Connection& c = net.connection(b.name);
    if (c.weights.rows() != b.values.rows() || c.weights.cols() != b.values.cols()) {
      throw FormatError("weights: shape mismatch for block " + b.name);
    }
    c.weights = b.values;
  }
}

}  // namespace fluctinit
