#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blindcd::app {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON configuration addressed by dotted keys ("model.n"). Keys may be
/// written nested ({"model": {"n": 100}}) or flat ({"model.n": 100}).
/// Every lookup, default included, is recorded in resolved().
class Config {
 public:
  Config() = default;
  explicit Config(nlohmann::json root);

  static Config load(const std::filesystem::path& path);

  /// "key=value"; value is parsed as JSON, falling back to a plain string.
  void apply_override(std::string_view assignment);
  void set(std::string_view key, nlohmann::json value);

  bool has(std::string_view key) const;

  template <typename T>
  T get(std::string_view key, const T& fallback) const {
    const nlohmann::json* node = find(key);
    if (!node) {
      record(key, fallback);
      return fallback;
    }
    try {
      T value = node->get<T>();
      record(key, value);
      return value;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config key '" + std::string(key) + "' has the wrong type: " + e.what());
    }
  }

  template <typename T>
  T require(std::string_view key) const {
    if (!find(key)) throw ConfigError("missing required config key '" + std::string(key) + "'");
    return get<T>(key, T{});
  }

  const nlohmann::json& raw() const { return root_; }
  const nlohmann::json& resolved() const { return resolved_; }

 private:
  const nlohmann::json* find(std::string_view key) const;
  template <typename T>
  void record(std::string_view key, const T& value) const {
    resolved_[std::string(key)] = value;
  }

  nlohmann::json root_ = nlohmann::json::object();
  mutable nlohmann::json resolved_ = nlohmann::json::object();
};

}  // namespace blindcd::app
