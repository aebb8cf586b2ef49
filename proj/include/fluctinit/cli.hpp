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

#include <iosfwd>
#include <string>
#include <vector>

#include "fluctinit/config.hpp"
#include "fluctinit/datasets.hpp"
#include "fluctinit/network.hpp"
#include "fluctinit/setup.hpp"
#include "fluctinit/training.hpp"

namespace fluctinit {

/// Loads or generates the dataset described by the [dataset] section.
SpikeBatch load_dataset(const Config& cfg);

/// Input width and mean input rate implied by the config without loading
/// data when possible (Randman and Poisson are analytic, SHD defaults to
/// 700 units at 15.8 Hz unless a file is given).
struct DatasetShape {
  std::size_t n_units = 0;
  double duration_ms = 0.0;
  double rate_hz = 0.0;
};
DatasetShape dataset_shape(const Config& cfg);

/// Builds the layer list of the [network] section (hidden layers + readout).
Network build_network(const Config& cfg, std::size_t n_inputs, double duration_ms, std::size_t n_outputs);

InitConfig init_config(const Config& cfg, double dataset_rate_hz);
TrainConfig train_config(const Config& cfg);

/// Prints every weight distribution and the predicted statistics.
void write_init_report(std::ostream& out, const InitReport& report);

/// Command-line entry point. Returns the process exit status; errors are
/// printed to `err` as a single "error: ..." line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fluctinit
