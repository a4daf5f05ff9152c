#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "dynbo/tracker.hpp"

namespace dynbo {

/// Flat `key = value` configuration. `#` starts a comment; blank lines are
/// ignored. Later assignments override earlier ones.
class Config {
 public:
  static Config parse(std::string_view text, const std::string& source = "<config>");
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Values of `other` win.
  void merge(const Config& other);

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Path named by the DYNBO_CONFIG environment variable, if set.
std::optional<std::string> default_config_path();

/// Applies every recognized key on top of `base`. Unknown keys are rejected.
SdbtaConfig sdbta_config_from(const Config& cfg, SdbtaConfig base = {});

}  // namespace dynbo
