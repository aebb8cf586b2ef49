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

#include "fluctinit/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fluctinit/error.hpp"

namespace fluctinit {

namespace {

struct Default {
  const char* key;
  const char* value;
};

// Every accepted key with its default, in echo order.
constexpr Default kDefaults[] = {
    {"dataset.kind", "randman"},  // randman | shd | poisson | spikepack
    {"dataset.path", ""},
    {"dataset.seed", "42"},
    {"dataset.classes", "10"},
    {"dataset.samples_per_class", "1000"},
    {"dataset.units", "20"},
    {"dataset.dim", "1"},
    {"dataset.alpha", "1"},
    {"dataset.harmonics", "4"},
    {"dataset.t_active_ms", "100"},
    {"dataset.t_pad_ms", "100"},
    {"dataset.nu_hz", "10"},
    {"dataset.duration_ms", "1000"},
    {"dataset.samples", "1"},
    {"dataset.dt_ms", "2"},
    {"dataset.splice_ms", "700"},
    {"dataset.valid_fraction", "0.1"},
    {"dataset.split_seed", "7"},
    {"network.hidden", "128"},
    {"network.recurrent", "false"},
    {"network.dale", "false"},
    {"network.n_inh", "0"},
    {"network.exc_recurrence", "false"},
    {"network.skip", "false"},
    {"network.tau_mem_ms", "20"},
    {"network.tau_syn_ms", "10"},
    {"network.inh_tau_mem_ms", "10"},
    {"network.inh_tau_syn_ms", "5"},
    {"network.tau_out_ms", "0"},
    {"network.theta", "1"},
    {"init.strategy", "fluctuation"},  // fluctuation | kaiming | dalian-exp | dalian-lognormal
    {"init.mu_u", "0"},
    {"init.sigma_u", "1"},
    {"init.xi", ""},
    {"init.alpha", "0.9"},
    {"init.nu_hz", "0"},
    {"init.readout_sigma_u", ""},
    {"init.seed", "1"},
    {"init.weights", ""},
    {"training.epochs", "200"},
    {"training.batch_size", "400"},
    {"training.optimizer", "smorms3"},
    {"training.eta", "0.01"},
    {"training.lambda_upper", "0.01"},
    {"training.v_upper", "0"},
    {"training.lambda_lower", "1"},
    {"training.v_lower", "1"},
    {"training.priming_epochs", "0"},
    {"training.ongoing_homeostasis", "false"},
    {"training.beta", "20"},
    {"training.rescaled_surrogate", "false"},
    {"training.seed", "1"},
    {"training.workers", "1"},
    {"diagnose.warmup_steps", "0"},
    {"diagnose.samples", "0"},
    {"output.dir", "out"},
    {"output.record_membrane", "false"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config::Config() {
  for (const auto& d : kDefaults) {
    values_[d.key] = d.value;
    order_.push_back(d.key);
  }
}

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path.string());
}

Config Config::from_string(const std::string& text, const std::string& origin) {
  Config c;
  c.parse(text, origin);
  return c;
}

void Config::parse(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw Error("config: malformed section header at " + where);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config: expected key = value at " + where);
    if (section.empty()) throw Error("config: key outside a section at " + where);
    set(section + "." + trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void Config::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw Error("config: override must be section.key=value: " + assignment);
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error("config: unknown key " + key);
  it->second = value;
}

bool Config::has(const std::string& key) const { return !get(key).empty(); }

const std::string& Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error("config: unknown key " + key);
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error("config: " + key + " is not a number: '" + v + "'");
  }
}

std::int64_t Config::get_int(const std::string& key) const {
  const std::string& v = get(key);
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error("config: " + key + " is not an integer: '" + v + "'");
  }
  return out;
}

std::size_t Config::get_size(const std::string& key) const {
  const auto v = get_int(key);
  if (v < 0) throw Error("config: " + key + " must be non-negative");
  return static_cast<std::size_t>(v);
}

std::uint64_t Config::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error("config: " + key + " is not an unsigned integer: '" + v + "'");
  }
  return out;
}

bool Config::get_bool(const std::string& key) const {
  std::string v = get(key);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("config: " + key + " is not a boolean: '" + get(key) + "'");
}

std::vector<std::size_t> Config::get_size_list(const std::string& key) const {
  std::vector<std::size_t> out;
  std::stringstream in(get(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw Error("config: " + key + " must be a comma-separated list of counts");
    }
    out.push_back(v);
  }
  return out;
}

void Config::write(std::ostream& out) const {
  std::string section;
  for (const auto& key : order_) {
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      if (!section.empty()) out << '\n';
      out << '[' << s << "]\n";
      section = s;
    }
    out << key.substr(dot + 1) << " = " << values_.at(key) << '\n';
  }
}

std::string Config::to_string() const {
  std::ostringstream s;
  write(s);
  return s.str();
}

}  // namespace fluctinit
