#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "aqsim/core/errors.hpp"

namespace aqsim::io {

/// Declared key with its default value (as text) and a one-line description.
struct ConfigKey {
  std::string name;  // "section.key"
  std::string default_value;
  std::string description;
};

using ConfigSchema = std::vector<ConfigKey>;

namespace cfg_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

}  // namespace cfg_detail

/// Flat "section.key -> text" map. File format:
///
///   # comment
///   [section]
///   key = value
///
/// Keys before any section header are rejected.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& origin = "<config>") {
    Config c;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos && line.find('"') == std::string::npos) line.erase(hash);
      line = cfg_detail::trim(line);
      if (line.empty()) continue;
      const std::string where = origin + ":" + std::to_string(lineno);
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(where + ": malformed section header");
        section = cfg_detail::trim(line.substr(1, line.size() - 2));
        if (section.empty()) throw ConfigError(where + ": empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
      if (section.empty()) throw ConfigError(where + ": key outside any [section]");
      const std::string key = cfg_detail::trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError(where + ": empty key");
      const std::string full = section + "." + key;
      if (c.values_.count(full)) throw ConfigError(where + ": duplicate key '" + full + "'");
      c.values_[full] = cfg_detail::unquote(cfg_detail::trim(line.substr(eq + 1)));
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    return parse(in, path);
  }

  static Config from_map(std::map<std::string, std::string> m) {
    Config c;
    c.values_ = std::move(m);
    return c;
  }

  /// Applies "section.key=value".
  void set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
    const std::string key = cfg_detail::trim(assignment.substr(0, eq));
    if (key.find('.') == std::string::npos) throw ConfigError("override key '" + key + "' needs section.key");
    values_[key] = cfg_detail::unquote(cfg_detail::trim(assignment.substr(eq + 1)));
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  /// Fills defaults and rejects keys the schema does not declare.
  Config resolve(const ConfigSchema& schema, const std::string& context) const {
    Config out;
    for (const auto& k : schema) out.values_[k.name] = k.default_value;
    for (const auto& [k, v] : values_) {
      const bool known = std::any_of(schema.begin(), schema.end(), [&](const ConfigKey& s) { return s.name == k; });
      if (!known) throw ConfigError("unknown key '" + k + "' for " + context);
      out.values_[k] = v;
    }
    return out;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
    return it->second;
  }

  double number(const std::string& key) const { return to_double(key, str(key)); }

  long long integer(const std::string& key) const {
    const std::string& s = str(key);
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ConfigError("key '" + key + "' expects an integer, got '" + s + "'");
    return v;
  }

  std::size_t count(const std::string& key) const {
    const long long v = integer(key);
    if (v < 0) throw ConfigError("key '" + key + "' must be >= 0");
    return static_cast<std::size_t>(v);
  }

  bool flag(const std::string& key) const {
    const std::string& s = str(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("key '" + key + "' expects a boolean, got '" + s + "'");
  }

  /// Comma-separated numbers; empty text gives an empty list.
  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = cfg_detail::trim(item);
      if (item.empty()) continue;
      out.push_back(to_double(key, item));
    }
    return out;
  }

  /// Writes a config file that parses back to the same map.
  std::string format() const {
    std::ostringstream out;
    std::string section;
    for (const auto& [k, v] : values_) {
      const auto dot = k.find('.');
      const std::string s = k.substr(0, dot);
      if (s != section) {
        out << (section.empty() ? "" : "\n") << '[' << s << "]\n";
        section = s;
      }
      out << k.substr(dot + 1) << " = " << v << '\n';
    }
    return out.str();
  }

 private:
  static double to_double(const std::string& key, const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "' expects a number, got '" + s + "'");
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace aqsim::io
