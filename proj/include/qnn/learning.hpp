#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnn/dynamics.hpp"
#include "qnn/noise.hpp"
#include "qnn/witness.hpp"

namespace qnn {

enum class GradientMode { adjoint, finite_difference };

std::string to_string(GradientMode mode);
GradientMode gradient_mode_from_string(const std::string& text);

struct LearnConfig {
  double learning_rate = 8e-6;
  int max_epochs = 500;
  double rms_stop = 1e-3;
  GradientMode gradient_mode = GradientMode::adjoint;
  /// Seed of the ±10% jitter in default_initial_schedule.
  std::uint64_t init_seed = 1;
  double fd_step = 1e-7;
  /// Halve the rate whenever a noiseless epoch raises the rms.
  bool descent_guard = true;
  int jobs = 1;

  void validate() const;
};

/// Per-step derivatives of the half-sum-of-squares loss.
struct ScheduleGradient {
  std::vector<double> k, eps, zeta;

  std::vector<double>& series(int which) { return which == 0 ? k : which == 1 ? eps : zeta; }
  const std::vector<double>& series(int which) const {
    return which == 0 ? k : which == 1 ? eps : zeta;
  }
  double max_abs() const;
};

struct Evaluation {
  double rms = 0.0;
  double loss = 0.0;  // ½ Σ (output − target)²
  std::vector<double> outputs;
};

struct TrainingReport {
  int epochs_run = 0;
  std::vector<double> rms_history;
  std::vector<double> final_outputs;
  std::vector<double> targets;
  std::vector<std::string> labels;
  ParameterSchedule schedule;
  double final_rate = 0.0;
  /// Rate halvings and similar notices, one line each.
  std::vector<std::string> events;

  /// First epoch (1-based) whose rms is at or below `threshold`, if any.
  std::optional<int> epochs_to_reach(double threshold) const;
};

double rms_error(const std::vector<double>& outputs, const std::vector<double>& targets);

/// Propagates every pair with the shared schedule. Under noise, pair p draws
/// from the stream run_id_of(run_base, p).
Evaluation loss_and_outputs(const ParameterSchedule& schedule,
                            const std::vector<TrainingPair>& pairs, int n_qubits,
                            const std::optional<NoiseConfig>& noise = std::nullopt,
                            std::uint64_t run_base = 0, int jobs = 1);

/// Exact gradient of the noiseless loss by trajectory storage and a backward
/// adjoint sweep.
ScheduleGradient gradient(const ParameterSchedule& schedule,
                          const std::vector<TrainingPair>& pairs, int n_qubits, int jobs = 1);

struct GradientEvaluation {
  Evaluation evaluation;
  ScheduleGradient gradient;
};

/// One forward/backward pass per pair. With noise, the forward trajectory is
/// the realized noisy one and the adjoint runs along it, holding the density
/// kicks fixed; Hamiltonian noise enters through the applied parameters.
GradientEvaluation evaluate_with_gradient(const ParameterSchedule& schedule,
                                          const std::vector<TrainingPair>& pairs,
                                          int n_qubits,
                                          const std::optional<NoiseConfig>& noise = std::nullopt,
                                          std::uint64_t run_base = 0, int jobs = 1);

/// Central differences of the noiseless loss, step `h` on every parameter.
ScheduleGradient finite_difference_gradient(const ParameterSchedule& schedule,
                                            const std::vector<TrainingPair>& pairs,
                                            int n_qubits, double h = 1e-7, int jobs = 1);

/// Full-batch gradient descent. Throws DivergenceError when the rms stays
/// above ten times its initial value for ten consecutive epochs.
TrainingReport train(const ParameterSchedule& initial, const std::vector<TrainingPair>& pairs,
                     int n_qubits, const LearnConfig& learn,
                     const std::optional<NoiseConfig>& noise = std::nullopt);

/// Carries a trained schedule from n_from to n_from + 1 qubits. The shared
/// symmetric parameters transfer unchanged.
ParameterSchedule bootstrap(const ParameterSchedule& small, int n_from, int n_to,
                            const std::optional<TimeGrid>& target_grid = std::nullopt);

/// Constant series K = 0.002, ε = 1e-4, ζ = 2e-4, each scaled once by 1 + u
/// with u uniform on [−0.1, 0.1].
ParameterSchedule default_initial_schedule(const TimeGrid& grid, std::uint64_t seed);

nlohmann::ordered_json report_to_json(const TrainingReport& report);

}  // namespace qnn
