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

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fluctinit/network.hpp"

namespace fluctinit {

struct NamedMatrix {
  std::string name;
  Eigen::MatrixXd values;
};

/// Weights file "WGTS" v1, little-endian: magic, u32 version, u32 n_blocks;
/// per block u32 name length, name bytes, u32 rows, u32 cols, f32 row-major.
void write_weights(const std::filesystem::path& path, const Network& net);
std::vector<NamedMatrix> read_weights(const std::filesystem::path& path);

/// Copies blocks from a weights file into `net`; names and shapes must match.
void load_weights_into(Network& net, const std::filesystem::path& path);

}  // namespace fluctinit
