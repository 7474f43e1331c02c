#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dfscore {

/// Every importance weight was zero: the log-likelihood was -inf at all
/// perturbed draws. Usually means tau is badly scaled.
class DegeneratePosteriorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All particle weights vanished at a filter step (1-based).
class ParticleCollapseError : public std::runtime_error {
 public:
  explicit ParticleCollapseError(std::size_t step)
      : std::runtime_error("particle collapse: all weights zero at step " + std::to_string(step)),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Invalid experiment configuration. key() names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace dfscore
