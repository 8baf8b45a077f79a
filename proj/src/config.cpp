// Copyright 2026 The escolm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "escolm/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "escolm/errors.hpp"

namespace escolm {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
  }
  return value;
}

}  // namespace

IniConfig IniConfig::parse(std::istream& in) {
  IniConfig config;
  std::size_t line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (line[0] == '[') throw ConfigError(where + "sections are not supported");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (config.values_.contains(key)) throw ConfigError(where + "duplicate key '" + key + "'");
    config.values_[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return config;
}

IniConfig IniConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  return parse(in);
}

std::optional<std::string> IniConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::int64_t> IniConfig::get_int(const std::string& key) const {
  const auto v = get_string(key);
  if (!v) return std::nullopt;
  return parse_number<std::int64_t>(key, *v);
}

std::optional<std::uint64_t> IniConfig::get_uint(const std::string& key) const {
  const auto v = get_string(key);
  if (!v) return std::nullopt;
  return parse_number<std::uint64_t>(key, *v);
}

std::optional<double> IniConfig::get_double(const std::string& key) const {
  const auto v = get_string(key);
  if (!v) return std::nullopt;
  return parse_number<double>(key, *v);
}

std::optional<bool> IniConfig::get_bool(const std::string& key) const {
  const auto v = get_string(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("'" + key + "' expects a boolean, got '" + *v + "'");
}

void IniConfig::write(std::ostream& out) const {
  for (const auto& [key, value] : values_) out << key << " = " << value << '\n';
}

}  // namespace escolm
