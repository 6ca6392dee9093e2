/**
 * @file config.hpp
 * @brief Flat `key = value` config files with CLI-flag overrides. Every run
 * writes back its fully resolved config so reruns are bit-exact.
 */

#ifndef TEMPCONDLM_CONFIG_HPP
#define TEMPCONDLM_CONFIG_HPP

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "tempcondlm/common.hpp"

namespace tempcondlm {

class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
      };
      if (trim(line).empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw BadConfig("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw BadConfig("config line " + std::to_string(lineno) + ": empty key");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadConfig("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  std::string get_str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw BadConfig("missing config key: " + key);
    return it->second;
  }
  std::string get_str(const std::string& key, const std::string& dflt) const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }

  long get_int(const std::string& key) const { return to_int(key, get_str(key)); }
  long get_int(const std::string& key, long dflt) const {
    return has(key) ? get_int(key) : dflt;
  }

  double get_double(const std::string& key) const {
    return to_double(key, get_str(key));
  }
  double get_double(const std::string& key, double dflt) const {
    return has(key) ? get_double(key) : dflt;
  }

  /// Deterministic serialization (keys sorted by the underlying map).
  std::string dump() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
    return out.str();
  }

 private:
  static long to_int(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const long x = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw BadConfig("config key '" + key + "' is not an integer: " + v);
    }
  }
  static double to_double(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw BadConfig("config key '" + key + "' is not a number: " + v);
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace tempcondlm

#endif  // TEMPCONDLM_CONFIG_HPP
