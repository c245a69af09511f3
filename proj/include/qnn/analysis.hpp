#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qnn/csv.hpp"
#include "qnn/learning.hpp"

namespace qnn {

/// f(t) = a0 + Σ_{m ≤ order} [a_m cos(mωt) + b_m sin(mωt)]
struct FourierFit {
  double a0 = 0.0, a1 = 0.0, b1 = 0.0, a2 = 0.0, b2 = 0.0;
  double omega = 0.0;
  double fit_rms = 0.0;
  double r_squared = 1.0;
  int order = 1;

  double operator()(double t) const;
  std::vector<double> evaluate(const std::vector<double>& times) const;
  /// (name, value) pairs present at this order: a0, a1, b1[, a2, b2], omega.
  std::vector<std::pair<std::string, double>> coefficients() const;
};

FourierFit fourier_fit(const std::vector<double>& series, const std::vector<double>& times,
                       int order);

/// Linear part of the fit only, at a given ω.
FourierFit fourier_fit_at(const std::vector<double>& series, const std::vector<double>& times,
                          int order, double omega);

/// 1 − SS_res/SS_tot. With SS_tot = 0: 1 if SS_res = 0, else 0.
double r_squared(const std::vector<double>& series, const std::vector<double>& model_values);

/// Harmonic order used for each parameter function: 2 for K, 1 for ε and ζ.
int fit_order_for(int which);
const char* parameter_name(int which);

struct ScheduleFits {
  FourierFit fits[3];
};

/// Fits every series of a schedule against its step start times. With
/// `omega_from`, each ω is held at the matching fit there.
ScheduleFits fit_schedule(const ParameterSchedule& schedule,
                          const ScheduleFits* omega_from = nullptr);

/// Description shared by the sweeps.
struct SweepTask {
  int n_qubits = 3;
  TimeGrid grid;
  LearnConfig learn;
  /// Epochs spent at each amplitude of coefficients_vs_noise.
  int stage_epochs = 10;
  PerturbationMode magnitude_mode = PerturbationMode::relative;
  PerturbationMode hamiltonian_mode = PerturbationMode::relative;
  /// Noise lands on the Hamiltonian parameters instead of the density matrix.
  bool hamiltonian_channel = false;
  /// Starting schedule for coefficients_vs_noise; default initialization if unset.
  std::optional<ParameterSchedule> start;
  int jobs = 1;
};

/// Total noise split over magnitude and phase, or the Hamiltonian channel alone.
NoiseConfig sweep_noise_config(const SweepTask& task, double amplitude, std::uint64_t seed);

struct SweepCell {
  double noise = 0.0;
  std::uint64_t seed = 0;
  int n_qubits = 0;
  TrainingReport report;
  ScheduleFits fits;
};

/// For every seed, walks the ascending noise grid from `task.start`, training
/// `stage_epochs` at each amplitude and carrying the schedule on to the next.
/// Cells come out amplitude-major. All fits share the ω of the first cell.
std::vector<SweepCell> coefficients_vs_noise(const SweepTask& task,
                                             const std::vector<double>& noise_grid,
                                             const std::vector<std::uint64_t>& seeds);

CsvTable coefficients_table(const std::vector<SweepCell>& cells);

/// Per seed, trains 2 qubits from the default initialization under
/// `total_noise`, then bootstraps one qubit at a time, training under the
/// same noise at every size. Cells for the requested sizes, size-major.
std::vector<SweepCell> r2_vs_qubits(const SweepTask& task, const std::vector<int>& qubit_counts,
                                    double total_noise, const std::vector<std::uint64_t>& seeds);

CsvTable r2_table(const std::vector<SweepCell>& cells);

/// Bootstrapped training from 2 qubits up to `n_to`; the report for every
/// size in order.
std::vector<TrainingReport> bootstrap_chain(int n_to, const TimeGrid& grid,
                                            const LearnConfig& learn,
                                            const std::optional<NoiseConfig>& noise = std::nullopt);

}  // namespace qnn
