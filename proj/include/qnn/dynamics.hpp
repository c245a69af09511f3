#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qnn/noise.hpp"
#include "qnn/quantum_core.hpp"

namespace qnn {

struct TimeGrid {
  double t_final = 251.0;
  int n_steps = 8;

  double dt() const { return t_final / n_steps; }
  /// Start time of step `k`.
  double time_at(int k) const { return k * dt(); }
  void validate() const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// Piecewise-constant K(t), ε(t), ζ(t), one value per step, shared by every
/// qubit (K, ε) and every pair (ζ).
class ParameterSchedule {
 public:
  ParameterSchedule(TimeGrid grid, std::vector<double> k, std::vector<double> eps,
                    std::vector<double> zeta);

  static ParameterSchedule constant(TimeGrid grid, double k, double eps, double zeta);

  const TimeGrid& grid() const noexcept { return grid_; }
  int steps() const noexcept { return grid_.n_steps; }
  const std::vector<double>& k() const noexcept { return k_; }
  const std::vector<double>& eps() const noexcept { return eps_; }
  const std::vector<double>& zeta() const noexcept { return zeta_; }
  ParameterTriple at(int step) const { return {k_[step], eps_[step], zeta_[step]}; }

  /// schedule ← schedule − rate · (dk, de, dz)
  void descend(double rate, const std::vector<double>& dk, const std::vector<double>& de,
               const std::vector<double>& dz);

  std::vector<double>& mutable_series(int which);

  friend bool operator==(const ParameterSchedule&, const ParameterSchedule&) = default;

 private:
  TimeGrid grid_;
  std::vector<double> k_, eps_, zeta_;
};

/// The three collective generators Σσx, Σσz and Σ_{α<β} σzσz for n qubits.
struct HamiltonianBasis {
  int n_qubits;
  CMatrix tunneling;
  CMatrix bias;
  CMatrix coupling;

  CMatrix assemble(const ParameterTriple& p) const {
    return p.k * tunneling + p.eps * bias + p.zeta * coupling;
  }
  const CMatrix& generator(int which) const {
    return which == 0 ? tunneling : which == 1 ? bias : coupling;
  }
};

/// Cached per qubit count; n_qubits in 2..5.
const HamiltonianBasis& hamiltonian_basis(int n_qubits);

HermitianOperator build_hamiltonian(double k, double eps, double zeta, int n_qubits);

/// exp(−i H dt) together with the eigensystem it was built from.
struct StepPropagator {
  EigenSystem eig;
  CMatrix unitary;
  double dt;
};

StepPropagator make_step(const HermitianOperator& h, double dt);
StepPropagator make_step(const CMatrix& hermitian, double dt);

CMatrix step_unitary(const HermitianOperator& h, double dt);

/// Noise applied during a propagation: its config and the run id that,
/// together with the step index, selects the random stream.
struct NoiseContext {
  NoiseConfig config;
  std::uint64_t run_id = 0;
};

struct Propagation {
  DensityMatrix final_state;
  /// states[k] is the state entering step k; states.back() is the final
  /// state. Empty unless requested.
  std::vector<CMatrix> states;
  /// Parameters actually applied at each step (differ from the schedule only
  /// under Hamiltonian noise). Filled alongside `states`.
  std::vector<ParameterTriple> applied;
};

Propagation propagate(const DensityMatrix& rho0, const ParameterSchedule& schedule,
                      int n_qubits, const std::optional<NoiseContext>& noise = std::nullopt,
                      bool record_trajectory = false);

/// CSV with header `step,t,K,epsilon,zeta`; doubles at round-trip precision.
void write_schedule_csv(std::ostream& out, const ParameterSchedule& schedule);
/// Lines starting with '#' are skipped. The grid is recovered from the row
/// count and the spacing of `t`.
ParameterSchedule read_schedule_csv(std::istream& in);

}  // namespace qnn
