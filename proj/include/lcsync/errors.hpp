#pragma once

#include <stdexcept>
#include <string>

namespace lcsync {

/// A state or matrix entry became non-finite or exceeded the divergence threshold.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double time)
      : std::runtime_error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// A diagonal entry of R in the Benettin QR step fell below 1e-300.
class RankCollapseError : public std::runtime_error {
 public:
  RankCollapseError(const std::string& what, double time)
      : std::runtime_error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Invalid or unknown configuration entry. `key()` holds the dotted path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace lcsync
