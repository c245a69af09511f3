#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qnn/learning.hpp"

namespace qnn {

enum class Task { train, test, sweep_noise, sweep_qubits, fit };

std::string to_string(Task task);
/// Accepts the CLI spelling (`sweep-noise`) and the config one (`sweep_noise`).
Task task_from_string(const std::string& text);

/// Field-level config problem. `line` is 0 when it did not come from a file line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message, int line = 0);
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

struct TestSettings {
  /// "P" or "M".
  std::string family = "P";
  std::vector<double> gammas{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> noise_levels{0.0, 0.009, 0.018, 0.027};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
};

struct SweepSettings {
  std::vector<double> amplitudes{0.0, 0.00675, 0.0135, 0.02025, 0.027};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int stage_epochs = 10;
  std::vector<int> counts{2, 3};
  /// Total noise of sweep-qubits.
  double total = 0.027;
  /// "density" or "hamiltonian".
  std::string channel = "density";
};

struct ExperimentConfig {
  std::optional<Task> task;
  int n_qubits = 2;
  TimeGrid grid;
  LearnConfig learn;
  /// Train through the 2 -> n_qubits chain instead of a single size.
  bool bootstrap = false;
  NoiseConfig noise;
  /// Schedule CSV consumed by test, fit and (optionally) train / sweep-noise.
  std::string input;
  /// Output directory; relative paths resolve against QNN_OUTPUT_DIR when set.
  std::string output;
  /// Witness qubits for the test task.
  std::vector<int> subset{1, 2};
  TestSettings test;
  SweepSettings sweep;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Every key with its current value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> resolved() const;
};

/// Applies one `section.key` assignment. Unknown keys and malformed values
/// throw ConfigError carrying `line`.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                   int line = 0);

/// `section.key = value` lines, `#` comments, blank lines ignored. Applied on
/// top of `base`.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});

/// Splits a `key=value` override from the command line.
std::pair<std::string, std::string> split_override(const std::string& text);

}  // namespace qnn
