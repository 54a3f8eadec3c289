#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "seq2vec/error.hpp"

namespace seq2vec::toolkit {

/// Flat `key = value` text; `#` starts a comment, blank lines are ignored.
class KeyValueConfig {
public:
  static KeyValueConfig parse(std::string_view text) {
    KeyValueConfig cfg;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      std::string_view line = text.substr(pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
      if (!cfg.values_.emplace(key, value).second)
        throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return parse(s.str());
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool contains(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

private:
  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
  }

  std::map<std::string, std::string> values_;
};

/// Maps config keys onto struct fields. Unknown keys are an error.
class ConfigBinder {
public:
  using Target = std::variant<int*, long*, double*, bool*, std::uint64_t*, std::string*, std::vector<double>*,
                              std::vector<int>*>;

  ConfigBinder& bind(std::string key, Target target) {
    targets_.emplace(std::move(key), target);
    return *this;
  }

  void apply(const KeyValueConfig& cfg) const {
    for (const auto& [key, value] : cfg.values()) {
      auto it = targets_.find(key);
      if (it == targets_.end()) throw ConfigError("unknown config key '" + key + "'");
      std::visit([&](auto* p) { assign(key, value, *p); }, it->second);
    }
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : targets_) out.push_back(k);
    return out;
  }

private:
  template <class T>
  static T number(const std::string& key, std::string_view s) {
    T v{};
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size())
      throw ConfigError("config key '" + key + "': cannot parse '" + std::string(s) + "'");
    return v;
  }

  template <class T>
  static std::vector<T> list(const std::string& key, std::string_view s) {
    std::vector<T> out;
    std::size_t start = 0;
    while (start <= s.size()) {
      auto comma = s.find(',', start);
      if (comma == std::string_view::npos) comma = s.size();
      auto item = s.substr(start, comma - start);
      while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
      while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
      out.push_back(number<T>(key, item));
      start = comma + 1;
    }
    return out;
  }

  static void assign(const std::string& key, const std::string& v, int& out) { out = number<int>(key, v); }
  static void assign(const std::string& key, const std::string& v, long& out) { out = number<long>(key, v); }
  static void assign(const std::string& key, const std::string& v, double& out) { out = number<double>(key, v); }
  static void assign(const std::string& key, const std::string& v, std::uint64_t& out) {
    out = number<std::uint64_t>(key, v);
  }
  static void assign(const std::string&, const std::string& v, std::string& out) { out = v; }
  static void assign(const std::string& key, const std::string& v, bool& out) {
    if (v == "true" || v == "1") out = true;
    else if (v == "false" || v == "0") out = false;
    else throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
  }
  static void assign(const std::string& key, const std::string& v, std::vector<double>& out) {
    out = list<double>(key, v);
  }
  static void assign(const std::string& key, const std::string& v, std::vector<int>& out) { out = list<int>(key, v); }

  std::map<std::string, Target> targets_;
};

}  // namespace seq2vec::toolkit
