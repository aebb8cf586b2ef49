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
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace fluctinit {

/// Flat sectioned key=value configuration ("[section]" headers, '#' comments).
///
/// Every key is declared with a default; unknown sections or keys are errors.
/// Values are addressed as "section.key".
class Config {
 public:
  /// Config holding the defaults of every known key.
  Config();

  static Config from_file(const std::filesystem::path& path);
  static Config from_string(const std::string& text, const std::string& origin = "<string>");

  /// Applies "section.key=value"; later calls win.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::size_t> get_size_list(const std::string& key) const;

  /// Effective configuration, every known key with its resolved value.
  void write(std::ostream& out) const;
  std::string to_string() const;

 private:
  void parse(const std::string& text, const std::string& origin);
  std::map<std::string, std::string> values_;  // "section.key" -> value
  std::vector<std::string> order_;
};

}  // namespace fluctinit
